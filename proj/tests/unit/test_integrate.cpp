#include <doctest.h>

#include <vflab/charforms.hpp>
#include <vflab/common.hpp>
#include <vflab/exterior.hpp>
#include <vflab/integrate.hpp>
#include <vflab/spaces.hpp>

#include <cmath>
#include <limits>

using namespace vflab;
namespace ex = vflab::exterior;
namespace sp = vflab::spaces;
namespace ig = vflab::integrate;

namespace {

charforms::FormField const_area_form() {
  charforms::FormField f;
  f.chart_dim = 2;
  f.degree = 2;
  f.closedness_claimed = true;
  f.eval = [](const RVec&) { return ex::AlternatingForm::monomial(2, {0, 1}, 1.0); };
  return f;
}

charforms::FormField scalar_field(int dim, std::function<double(const RVec&)> g) {
  charforms::FormField f;
  f.chart_dim = dim;
  f.degree = 0;
  f.eval = [dim, g](const RVec& u) {
    return ex::AlternatingForm::scalar(dim, cplx(g(u), 0.0));
  };
  return f;
}

ig::FlowOut radial_circle_flow() {
  ig::FlowOut flow;
  flow.base_dim = 1;
  flow.total_dim = 2;
  flow.base_box = sp::make_box({0.0}, {2.0 * kPi});
  flow.map = [](double s, const RVec& b) {
    RVec out(2);
    out << std::exp(s) * std::cos(b[0]), std::exp(s) * std::sin(b[0]);
    return out;
  };
  return flow;
}

double binom(int n, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

}  // namespace

TEST_CASE("gauss-legendre nodes") {
  const auto& [x, w] = ig::gauss_legendre(12);
  double total = 0.0;
  for (double wi : w) total += wi;
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));

  // n = 3 integrates degree <= 5 exactly
  const auto& [x3, w3] = ig::gauss_legendre(3);
  double p4 = 0.0;
  for (size_t i = 0; i < x3.size(); ++i) p4 += w3[i] * std::pow(x3[i], 4);
  CHECK(p4 == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("integrate_scalar: separable exponential") {
  const auto box = sp::make_box({0.0, 0.0}, {1.0, 1.0});
  auto f = [](const RVec& u) { return cplx(std::exp(-u[0] - 2.0 * u[1]), 0.0); };
  const double exact = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-2.0)) / 2.0;

  const auto g = ig::integrate_scalar(box, f, ig::Scheme::gauss(24));
  CHECK(std::abs(g.value - exact) < 1e-13);

  const auto mc = ig::integrate_scalar(box, f, ig::Scheme::monte_carlo(200000, 11));
  CHECK(mc.err > 0.0);
  CHECK(std::abs(mc.value - exact) < 5.0 * mc.err);
}

TEST_CASE("integrate_scalar: NaN samples abort") {
  const auto box = sp::make_box({0.0}, {1.0});
  auto f = [](const RVec& u) {
    return cplx(u[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0, 0.0);
  };
  CHECK_THROWS_AS(ig::integrate_scalar(box, f, ig::Scheme::gauss(16)), numerical_breakdown);
}

TEST_CASE("pullback and oriented form integration in polar coordinates") {
  sp::Parametrization polar;
  polar.box = sp::make_box({0.2, 0.0}, {1.0, 2.0 * kPi});
  polar.target_dim = 2;
  polar.map = [](const RVec& u) {
    RVec out(2);
    out << u[0] * std::cos(u[1]), u[0] * std::sin(u[1]);
    return out;
  };

  const auto area = const_area_form();
  RVec u(2);
  u << 0.7, 1.1;
  const auto pulled = ig::pullback_form(area, polar, u);
  CHECK(std::abs(pulled[0b11] - 0.7) < 1e-8);
  CHECK(std::abs(pulled[0b01]) < 1e-12);

  const double annulus = kPi * (1.0 - 0.04);
  CHECK(std::abs(ig::integrate_form(polar, area, ig::Scheme::gauss(16)).value - annulus) <
        1e-8);
  sp::Parametrization flipped = polar;
  flipped.orientation = -1;
  CHECK(std::abs(ig::integrate_form(flipped, area, ig::Scheme::gauss(16)).value + annulus) <
        1e-8);
}

TEST_CASE("form integration is multiplicative on products") {
  charforms::FormField f;
  f.chart_dim = 2;
  f.degree = 2;
  f.eval = [](const RVec& u) {
    return ex::AlternatingForm::monomial(2, {0, 1},
                                         cplx(std::exp(-u[0] - 2.0 * u[1]), 0.0));
  };
  const auto chart = sp::box_chart(sp::make_box({0.0, 0.0}, {1.0, 1.0}));
  const double exact = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-2.0)) / 2.0;
  CHECK(std::abs(ig::integrate_form(chart, f, ig::Scheme::gauss(24)).value - exact) < 1e-13);
}

TEST_CASE("circle residue integrals match the closed form") {
  for (int n = 1; n <= 5; ++n) {
    const cplx got = ig::s1_residue_integral(n, ig::Scheme::gauss(64));
    const cplx expect = (n % 2 == 1 ? 1.0 : -1.0) * 2.0 * kPi * kI *
                        binom(2 * n - 2, n - 1);
    CHECK(std::abs(got - expect) / std::abs(expect) < 1e-8);
  }
}

TEST_CASE("fiber integration over a product chart") {
  const auto fiber = sp::box_chart(sp::make_box({0.0}, {1.0}));

  charforms::FormField total;
  total.chart_dim = 2;  // (b, y)
  total.degree = 2;
  total.eval = [](const RVec& u) {
    return ex::AlternatingForm::monomial(2, {0, 1},
                                         cplx((1.0 + u[0]) * 3.0 * u[1] * u[1], 0.0));
  };
  const auto down = ig::fiber_integrate(total, 1, fiber, ig::Scheme::gauss(16));
  CHECK(down.chart_dim == 1);
  CHECK(down.degree == 1);
  RVec b(1);
  b << 0.3;
  // c db ^ dy evaluated on (fiber, base) frames picks up one transposition
  CHECK(std::abs(down.eval(b)[0b1] - cplx(-1.3, 0.0)) < 1e-12);

  charforms::FormField oneform;
  oneform.chart_dim = 2;
  oneform.degree = 1;
  oneform.eval = [](const RVec& u) {
    return ex::AlternatingForm::monomial(2, {1}, cplx(u[1] * std::exp(u[0]), 0.0));
  };
  const auto sc = ig::fiber_integrate(oneform, 1, fiber, ig::Scheme::gauss(16));
  CHECK(sc.degree == 0);
  CHECK(std::abs(sc.eval(b)[0] - cplx(0.5 * std::exp(0.3), 0.0)) < 1e-12);
}

TEST_CASE("transgression and slice pairings: expanding circle") {
  const auto flow = radial_circle_flow();
  // Unit-mass test function on the parameter circle.
  const auto eta = scalar_field(1, [](const RVec& b) {
    return (1.0 + std::cos(b[0])) / (2.0 * kPi);
  });

  SUBCASE("area form transgression") {
    const auto omega = const_area_form();
    CHECK(std::abs(ig::transgression_pairing(flow, omega, eta, 0.0,
                                             ig::Scheme::gauss(32))) == 0.0);
    for (double t : {0.5, 1.0}) {
      // phi*(dx^dy) = e^{2s} ds^dtheta, so the pairing is (e^{2t}-1)/2.
      const double exact = 0.5 * (std::exp(2.0 * t) - 1.0);
      const cplx got =
          ig::transgression_pairing(flow, omega, eta, t, ig::Scheme::gauss(32));
      CHECK(std::abs(got - exact) < 1e-8);
    }
  }

  SUBCASE("angular one-form slices") {
    charforms::FormField omega;
    omega.chart_dim = 2;
    omega.degree = 1;
    omega.eval = [](const RVec& p) {
      return ex::AlternatingForm::basis(2, 1) * cplx(p[0], 0.0) -
             ex::AlternatingForm::basis(2, 0) * cplx(p[1], 0.0);
    };
    for (double s : {0.0, 0.8}) {
      // x dy - y dx restricts to e^{2s} dtheta on the radius-e^s circle.
      const double exact = std::exp(2.0 * s);
      const cplx got = ig::slice_pairing(flow, omega, eta, s, ig::Scheme::gauss(32));
      CHECK(std::abs(got - exact) < 1e-8);
    }
  }
}

TEST_CASE("boundary identity for a closed odd-degree form") {
  const auto flow = radial_circle_flow();
  charforms::FormField omega;  // dx, the simplest closed one-form
  omega.chart_dim = 2;
  omega.degree = 1;
  omega.closedness_claimed = true;
  omega.eval = [](const RVec&) { return ex::AlternatingForm::basis(2, 0); };
  const auto eta = scalar_field(1, [](const RVec& b) { return std::sin(b[0]); });
  charforms::FormField deta;
  deta.chart_dim = 1;
  deta.degree = 1;
  deta.eval = [](const RVec& b) {
    return ex::AlternatingForm::basis(1, 0) * cplx(std::cos(b[0]), 0.0);
  };
  const auto bc = ig::boundary_check(flow, omega, eta, deta, 1.0, ig::Scheme::gauss(48));
  CHECK(bc.defect < 1e-6);
  // Both sides equal -pi (e - 1) for this data.
  const double exact = -kPi * (std::exp(1.0) - 1.0);
  CHECK(std::abs(bc.transgression_side - exact) < 1e-6);
  CHECK(std::abs(bc.transgression_side) > 0.01);  // non-trivial identity
}

TEST_CASE("tube volumes of the expanding circle") {
  const auto flow = radial_circle_flow();
  auto metric = [](const RVec&) { return RMat::Identity(2, 2); };

  const std::vector<double> ts = {0.0, 0.5, 1.0};
  const auto weak = ig::tube_volume_schedule(flow, metric, ts, ig::Scheme::gauss(24));
  REQUIRE(weak.size() == ts.size());
  for (size_t i = 0; i < ts.size(); ++i)
    CHECK(weak[i] == doctest::Approx(kPi * (std::exp(2.0 * ts[i]) - 1.0)).epsilon(1e-9));

  auto strong_exact = [](double t) {
    auto prim = [](double u) { return 0.5 * (u * std::sqrt(u * u + 1.0) + std::asinh(u)); };
    return 2.0 * kPi * (prim(std::exp(t)) - prim(1.0));
  };
  const double sv = ig::flow_tube_volume(flow, metric, 0.0, 1.0, ig::Scheme::gauss(24), true);
  CHECK(sv == doctest::Approx(strong_exact(1.0)).epsilon(1e-9));
  CHECK(sv > ig::flow_tube_volume(flow, metric, 0.0, 1.0, ig::Scheme::gauss(24)));
}

TEST_CASE("masked fields vanish inside windows") {
  auto f = const_area_form();
  RVec c(2);
  c << 0.5, 0.5;
  const auto m = ig::masked(f, {{c, 0.25}});
  RVec inside(2), edge_out(2), outside(2);
  inside << 0.6, 0.4;
  edge_out << 0.8, 0.5;
  outside << 0.9, 0.05;
  CHECK(m.eval(inside).max_abs() == 0.0);
  CHECK(m.eval(edge_out).max_abs() > 0.0);
  CHECK(std::abs(m.eval(outside)[0b11] - 1.0) < 1e-14);

  const auto chart = sp::box_chart(sp::make_box({0.0, 0.0}, {1.0, 1.0}));
  const auto mc = ig::integrate_form(chart, m, ig::Scheme::monte_carlo(200000, 3));
  CHECK(std::abs(mc.value - 0.75) < 5.0 * mc.err);
}

TEST_CASE("refined tail reaches the gaussian mass") {
  charforms::FormField f;
  f.chart_dim = 1;
  f.degree = 1;
  f.eval = [](const RVec& u) {
    return ex::AlternatingForm::basis(1, 0) * cplx(std::exp(-u[0] * u[0]), 0.0);
  };
  auto chart_at = [](double r) { return sp::box_chart(sp::make_box({-r}, {r})); };
  const auto res = ig::refined_tail(f, chart_at, 2.0, 1.5, 1e-12, 30, ig::Scheme::gauss(64));
  CHECK(std::abs(res.value - std::sqrt(kPi)) < 1e-8);
}

TEST_CASE("monte carlo results do not depend on the worker count") {
  const auto box = sp::make_box({0.0, 0.0}, {1.0, 1.0});
  auto f = [](const RVec& u) { return cplx(std::cos(3.0 * u[0]) * u[1], 0.2 * u[0]); };
  ig::set_jobs(1);
  const auto a = ig::integrate_scalar(box, f, ig::Scheme::monte_carlo(50000, 17));
  ig::set_jobs(4);
  const auto b = ig::integrate_scalar(box, f, ig::Scheme::monte_carlo(50000, 17));
  ig::set_jobs(0);
  CHECK(a.value.real() == b.value.real());
  CHECK(a.value.imag() == b.value.imag());
  CHECK(a.err == b.err);
}
