#include <doctest.h>

#include <vflab/algebra.hpp>
#include <vflab/charforms.hpp>
#include <vflab/common.hpp>
#include <vflab/exterior.hpp>
#include <vflab/spaces.hpp>

#include <cmath>

using namespace vflab;
namespace cf = vflab::charforms;
namespace ex = vflab::exterior;

namespace {

ex::AlternatingForm mono(int dim, std::vector<int> axes, cplx c) {
  return ex::AlternatingForm::monomial(dim, axes, c);
}

}  // namespace

TEST_CASE("form_det: diagonal and 2x2 expansion") {
  ex::FormMatrix d(2, 4);
  d.at(0, 0) = ex::AlternatingForm::scalar(4, 2.0) + mono(4, {0, 1}, 1.0);
  d.at(1, 1) = ex::AlternatingForm::scalar(4, 1.0) + mono(4, {2, 3}, 3.0);
  const auto det = cf::form_det(d);
  CHECK(std::abs(det[0] - 2.0) < 1e-14);
  CHECK(std::abs(det[0b0011] - 1.0) < 1e-14);
  CHECK(std::abs(det[0b1100] - 6.0) < 1e-14);
  CHECK(std::abs(det[0b1111] - 3.0) < 1e-14);

  ex::FormMatrix m(2, 4);
  m.at(0, 0) = ex::AlternatingForm::scalar(4, 1.0);
  m.at(0, 1) = mono(4, {0, 1}, 1.0);
  m.at(1, 0) = mono(4, {2, 3}, 2.0);
  m.at(1, 1) = ex::AlternatingForm::scalar(4, 1.0);
  const auto det2 = cf::form_det(m);
  CHECK(std::abs(det2[0] - 1.0) < 1e-14);
  CHECK(std::abs(det2[0b1111] + 2.0) < 1e-14);

  const auto deti = cf::form_det(ex::FormMatrix::identity(3, 2));
  CHECK(std::abs(deti[0] - 1.0) < 1e-14);
  CHECK(deti.degree_component(1).max_abs() == 0.0);
}

TEST_CASE("form_pf: matchings expansion") {
  ex::FormMatrix m(2, 4);
  m.at(0, 1) = ex::AlternatingForm::scalar(4, 1.5) + mono(4, {0, 1}, 1.0);
  m.at(1, 0) = cplx(-1.0, 0.0) * m.at(0, 1);
  const auto pf = cf::form_pf(m);
  CHECK(std::abs(pf[0] - 1.5) < 1e-14);
  CHECK(std::abs(pf[0b0011] - 1.0) < 1e-14);

  // scalar 4x4 agrees with the numeric pfaffian and the closed formula
  RMat a = RMat::Zero(4, 4);
  a(0, 1) = 0.7;
  a(0, 2) = -1.2;
  a(0, 3) = 0.4;
  a(1, 2) = 2.0;
  a(1, 3) = -0.9;
  a(2, 3) = 1.1;
  a -= RMat(a.transpose());
  ex::FormMatrix fm(4, 0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) fm.at(i, j) = ex::AlternatingForm::scalar(0, a(i, j));
  const auto pf4 = cf::form_pf(fm);
  const double expect = a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  CHECK(std::abs(pf4[0] - expect) < 1e-13);
  CHECK(pf4[0].real() == doctest::Approx(algebra::pfaffian(a)));

  CHECK_THROWS_AS(cf::form_pf(ex::FormMatrix(3, 2)), usage_error);
  ex::FormMatrix bad(2, 2);
  bad.at(0, 1) = ex::AlternatingForm::scalar(2, 1.0);
  bad.at(1, 0) = ex::AlternatingForm::scalar(2, 1.0);
  CHECK_THROWS_AS(cf::form_pf(bad), validation_error);
}

TEST_CASE("top chern form of a degree-two line bundle over the plane chart") {
  spaces::BundleWithConnection b;
  b.chart_dim = 2;
  b.rank = 1;
  b.metric = Mat::Identity(1, 1);
  b.theta = [](const RVec& u) {
    const cplx z(u[0], u[1]);
    const cplx a = -2.0 * std::conj(z) / (1.0 + std::norm(z));
    Mat m0(1, 1), m1(1, 1);
    m0(0, 0) = a;
    m1(0, 0) = kI * a;
    return std::vector<Mat>{m0, m1};
  };
  const auto c1 = cf::top_chern_form(b);
  CHECK(c1.chart_dim == 2);
  CHECK(c1.degree == 2);
  for (auto [x, y] : {std::pair{0.0, 0.0}, {0.5, -0.3}, {1.2, 0.8}}) {
    RVec u(2);
    u << x, y;
    const double r2 = x * x + y * y;
    const cplx got = c1.eval(u)[0b11];
    CHECK(std::abs(got - (2.0 / kPi) / ((1.0 + r2) * (1.0 + r2))) < 1e-6);
  }
}

TEST_CASE("pfaffian form of an so(2) connection") {
  const double c = 0.4;
  spaces::BundleWithConnection b;
  b.chart_dim = 2;
  b.rank = 2;
  b.metric = Mat::Identity(2, 2);
  b.theta = [c](const RVec& u) {
    Mat m0 = Mat::Zero(2, 2), m1 = Mat::Zero(2, 2);
    m0(0, 1) = c * u[1];
    m0(1, 0) = -c * u[1];
    m1(0, 1) = -c * u[0];
    m1(1, 0) = c * u[0];
    return std::vector<Mat>{m0, m1};
  };
  // theta_{01} = -omega with omega = c(-u1 du0 + u0 du1), so F_{01} = -2c du0 du1
  RVec u(2);
  u << 0.3, -0.7;
  const auto e = cf::pfaffian_form(b);
  CHECK(std::abs(e.eval(u)[0b11] - cplx(-2.0 * c / (2.0 * kPi), 0.0)) < 1e-8);
  const auto eflip = cf::pfaffian_form(b, -1);
  CHECK(std::abs(eflip.eval(u)[0b11] + e.eval(u)[0b11]) < 1e-12);

  spaces::BundleWithConnection bad = b;
  bad.metric = Mat::Identity(2, 2) * 2.0;
  CHECK_THROWS_AS(cf::pfaffian_form(bad), validation_error);
  CHECK_THROWS_AS(cf::pfaffian_form(spaces::flat_bundle(2, 3)), usage_error);
}

TEST_CASE("odd chern form and maslov form of a circle phase") {
  for (int m : {3, -2}) {
    auto phi = [m](const RVec& u) {
      Mat out(1, 1);
      out(0, 0) = std::exp(kI * (static_cast<double>(m) * u[0]));
      return out;
    };
    const auto c_half = cf::odd_chern_form(1, 1, phi);
    const auto masl = cf::maslov_form(1, phi);
    for (double th : {0.3, 2.0}) {
      RVec u(1);
      u << th;
      CHECK(std::abs(c_half.eval(u)[0b1] - cplx(m / (2.0 * kPi), 0.0)) < 1e-7);
      CHECK(std::abs(masl.eval(u)[0b1] - cplx(m / (2.0 * kPi), 0.0)) < 1e-7);
    }
  }

  auto diag_phase = [](const RVec& u) {
    Mat out = Mat::Zero(2, 2);
    out(0, 0) = std::exp(kI * u[0]);
    out(1, 1) = std::exp(kI * (2.0 * u[0]));
    return out;
  };
  RVec u(1);
  u << 1.1;
  CHECK(std::abs(cf::maslov_form(1, diag_phase).eval(u)[0b1] -
                 cplx(3.0 / (2.0 * kPi), 0.0)) < 1e-7);

  CHECK_THROWS_AS(cf::odd_chern_form(0, 1, diag_phase), usage_error);
}

TEST_CASE("superconnection curvature: flat rank-one odd family") {
  const auto b = spaces::flat_bundle(1, 1);
  auto a_sec = [](const RVec& u) {
    Mat out(1, 1);
    out(0, 0) = 0.7 + 0.4 * std::sin(u[0]);
    return out;
  };
  const double t = 1.3;
  RVec u(1);
  u << 0.4;
  const double a = 0.7 + 0.4 * std::sin(0.4);
  const double ap = 0.4 * std::cos(0.4);

  const auto fm = cf::superconnection_curvature(b, a_sec, t, cf::Parity::odd, u);
  REQUIRE(fm.n() == 2);
  CHECK(fm.split_p() == 1);
  CHECK(fm.split_q() == 1);
  CHECK(std::abs(fm.at(0, 0)[0] - cplx(-t * t * a * a, 0.0)) < 1e-10);
  CHECK(std::abs(fm.at(1, 1)[0] - cplx(-t * t * a * a, 0.0)) < 1e-10);
  CHECK(std::abs(fm.at(0, 1)[0b1] - cplx(-t * ap, 0.0)) < 1e-8);
  CHECK(std::abs(fm.at(1, 0)[0b1] - cplx(t * ap, 0.0)) < 1e-8);

  const auto ch = cf::chern_character(fm, cf::Parity::odd);
  const double expect = t * ap * std::exp(-t * t * a * a) / std::sqrt(kPi);
  CHECK(std::abs(ch[0b1] - cplx(expect, 0.0)) < 1e-8);
  CHECK(std::abs(ch[0]) < 1e-12);
}

TEST_CASE("superconnection curvature: even parity grading rules") {
  const auto b = spaces::flat_bundle(1, 2);
  auto odd_a = [](const RVec& u) {
    Mat out = Mat::Zero(2, 2);
    out(0, 1) = 0.5 + 0.3 * std::sin(u[0]);
    out(1, 0) = out(0, 1);
    return out;
  };
  RVec u(1);
  u << 0.9;
  const auto fm = cf::superconnection_curvature(b, odd_a, 1.1, cf::Parity::even, u, 1, 1);
  const double a = 0.5 + 0.3 * std::sin(0.9);
  CHECK(std::abs(fm.at(0, 0)[0] - cplx(-1.1 * 1.1 * a * a, 0.0)) < 1e-10);
  // supersymmetric pair: the graded character collapses to the index
  const auto ch = cf::chern_character(fm, cf::Parity::even);
  CHECK(ch.max_abs() < 1e-10);

  CHECK_THROWS_AS(
      cf::superconnection_curvature(b, odd_a, 1.0, cf::Parity::even, u),
      usage_error);
  auto even_a = [](const RVec&) { return Mat::Identity(2, 2); };
  CHECK_THROWS_AS(
      cf::superconnection_curvature(b, even_a, 1.0, cf::Parity::even, u, 1, 1),
      validation_error);
  auto wrong_size = [](const RVec&) { return Mat::Identity(1, 1); };
  CHECK_THROWS_AS(
      cf::superconnection_curvature(b, wrong_size, 1.0, cf::Parity::odd, u),
      usage_error);
}

TEST_CASE("chern character: even rank-one constant curvature") {
  ex::FormMatrix fm(1, 2);
  fm.set_split(1, 0);
  const cplx alpha(0.3, 0.2);
  fm.at(0, 0) = mono(2, {0, 1}, alpha);
  const auto ch = cf::chern_character(fm, cf::Parity::even);
  CHECK(std::abs(ch[0] - 1.0) < 1e-14);
  CHECK(std::abs(ch[0b11] - kI / (2.0 * kPi) * alpha) < 1e-14);
}

TEST_CASE("mathai-quillen form: flat rank-two gaussian") {
  const auto b = spaces::flat_bundle(0, 2);
  for (double t : {0.6, 1.7}) {
    const auto mu = cf::mathai_quillen_form(b, t);
    CHECK(mu.chart_dim == 2);
    for (auto [x0, x1] : {std::pair{0.0, 0.0}, {0.3, -0.5}, {1.1, 0.2}}) {
      RVec x(2);
      x << x0, x1;
      const double r2 = x0 * x0 + x1 * x1;
      const auto v = mu.eval(x);
      const double expect = t * t / (2.0 * kPi) * std::exp(-t * t * r2 / 2.0);
      CHECK(std::abs(v[0b11] - cplx(expect, 0.0)) < 1e-10);
      CHECK(std::abs(v[0]) < 1e-12);
      CHECK(std::abs(v[0b01]) < 1e-12);
    }
    const auto muflip = cf::mathai_quillen_form(b, t, -1);
    RVec x = RVec::Zero(2);
    CHECK(std::abs(muflip.eval(x)[0b11] + mu.eval(x)[0b11]) < 1e-12);
  }
  const auto mu0 = cf::mathai_quillen_form(b, 0.0);
  RVec x(2);
  x << 0.4, 0.1;
  CHECK(mu0.eval(x).max_abs() < 1e-14);

  CHECK_THROWS_AS(cf::mathai_quillen_form(spaces::flat_bundle(0, 3), 1.0), usage_error);
  auto bad = spaces::flat_bundle(0, 2);
  bad.metric = Mat::Identity(2, 2) * 2.0;
  CHECK_THROWS_AS(cf::mathai_quillen_form(bad, 1.0), validation_error);
}

TEST_CASE("finite-difference exterior derivative") {
  cf::FormField f;
  f.chart_dim = 2;
  f.eval = [](const RVec& u) {
    return ex::AlternatingForm::basis(2, 1) * cplx(u[0], 0.0);
  };
  RVec u(2);
  u << 0.3, -0.2;
  const auto df = cf::exterior_derivative_fd(f, u);
  CHECK(std::abs(df[0b11] - 1.0) < 1e-8);
  CHECK(std::abs(df[0b01]) < 1e-10);

  cf::FormField expf;
  expf.chart_dim = 2;
  expf.eval = [](const RVec& u) {
    return ex::AlternatingForm::basis(2, 1) * cplx(std::exp(u[0]), 0.0);
  };
  CHECK(std::abs(cf::exterior_derivative_fd(expf, u)[0b11] - std::exp(0.3)) < 1e-7);

  cf::FormField closed;
  closed.chart_dim = 2;
  closed.eval = [](const RVec& u) {
    return ex::AlternatingForm::basis(2, 0) * cplx(u[0], 0.0) +
           ex::AlternatingForm::basis(2, 1) * cplx(u[1], 0.0);
  };
  CHECK(cf::exterior_derivative_fd(closed, u).max_abs() < 1e-8);
}
