#include <doctest.h>

#include <vflab/common.hpp>
#include <vflab/flows.hpp>
#include <vflab/resolution.hpp>

#include <cmath>

using namespace vflab;
namespace rs = vflab::resolution;

namespace {

RVec unit2(double angle) {
  RVec v(2);
  v << std::cos(angle), std::sin(angle);
  return v;
}

}  // namespace

TEST_CASE("psi: closed form and defining identities") {
  for (double t : {-2.0, -0.3, 0.0, 0.4, 5.0}) {
    for (double q : {0.0, 1e-6, 0.7, 3.0}) {
      const auto [x, y] = rs::psi(t, q);
      CHECK(x >= 0.0);
      CHECK(y >= 0.0);
      CHECK(x * y == doctest::Approx(q).epsilon(1e-12));
      CHECK(0.5 * (x * x - y * y) == doctest::Approx(t).epsilon(1e-12));
      const double r = std::sqrt(t * t + q * q);
      CHECK(x == doctest::Approx(std::sqrt(r + t)));
      CHECK(y == doctest::Approx(std::sqrt(r - t)));
    }
  }
  // q = 0 edge: pure unstable/stable points
  CHECK(rs::psi(2.0, 0.0).x == doctest::Approx(2.0));
  CHECK(rs::psi(2.0, 0.0).y == doctest::Approx(0.0));
  CHECK(rs::psi(-2.0, 0.0).x == doctest::Approx(0.0));
  CHECK(rs::psi(-2.0, 0.0).y == doctest::Approx(2.0));
  CHECK_THROWS_AS(rs::psi(1.0, -0.1), usage_error);
}

TEST_CASE("family blowup: radii, level, direction") {
  const RVec xhat = unit2(0.3);
  const RVec yhat = unit2(-1.2);
  RVec z(1);
  z << 0.8;
  const auto p = rs::family_blowup(0.6, 0.9, xhat, yhat, z);
  const auto [px, py] = rs::psi(0.6, 0.9);
  CHECK((p.x - px * xhat).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((p.y - py * yhat).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(p.z[0] == doctest::Approx(0.8));
  CHECK(0.5 * (p.x.squaredNorm() - p.y.squaredNorm()) == doctest::Approx(0.6));
  CHECK(p.x.norm() * p.y.norm() == doctest::Approx(0.9));

  CHECK_THROWS_AS(rs::family_blowup(0.6, 0.9, 2.0 * xhat, yhat, z), validation_error);
}

TEST_CASE("flowline level point: invariants and flow consistency") {
  flows::LocalModelPoint p;
  p.x = 0.5 * unit2(0.2);
  p.y = 1.3 * unit2(2.0);
  p.z = RVec(1);
  p.z << -0.4;
  const double q = p.x.norm() * p.y.norm();

  for (double level : {-1.0, 0.0, 0.25, 2.0}) {
    const auto r = rs::flowline_level_point(p, level);
    // same flow line: product invariant, directions preserved, level reached
    CHECK(r.x.norm() * r.y.norm() == doctest::Approx(q));
    CHECK(0.5 * (r.x.squaredNorm() - r.y.squaredNorm()) == doctest::Approx(level));
    CHECK((r.x.normalized() - p.x.normalized()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.y.normalized() - p.y.normalized()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.z[0] == doctest::Approx(-0.4));
    const auto [ex, ey] = rs::psi(level, q);
    CHECK(r.x.norm() == doctest::Approx(ex));
    CHECK(r.y.norm() == doctest::Approx(ey));
  }

  flows::LocalModelPoint degenerate = p;
  degenerate.x = RVec::Zero(2);
  CHECK_THROWS_AS(rs::flowline_level_point(degenerate, 0.5), usage_error);
}

TEST_CASE("exit time: flowing for the returned time lands on the level") {
  flows::LocalModelPoint p;
  p.x = 0.2 * unit2(1.0);
  p.y = 0.7 * unit2(-0.5);
  p.z = RVec::Zero(1);
  for (double level : {0.1, 0.8, 3.0}) {
    const double t = rs::exit_time_to_level(p, level);
    const auto moved = flows::local_model_flow(t, p);
    CHECK(0.5 * (moved.x.squaredNorm() - moved.y.squaredNorm()) ==
          doctest::Approx(level).epsilon(1e-12));
  }
  flows::LocalModelPoint stuck = p;
  stuck.x = RVec::Zero(2);
  CHECK_THROWS_AS(rs::exit_time_to_level(stuck, 1.0), usage_error);
}

TEST_CASE("theta_delta: incidence chart") {
  rs::LocalModel model;
  model.dim_x = 2;
  model.dim_y = 2;
  model.dim_z = 1;
  model.delta = 0.3;
  model.epsilon = 0.5;

  rs::ModelSections sec;
  sec.dim_b = 1;
  sec.alpha = [](const RVec& a, const RVec& b) {
    RVec out(2);
    out << 0.3 + 0.1 * a[0] + 0.05 * b[0], 0.2 - 0.1 * a[1];
    return out;
  };
  sec.beta = [](const RVec& a, const RVec& b) {
    RVec out(1);
    out << 0.4 * b[0] + 0.1 * a[0] * a[1];
    return out;
  };

  const RVec v = unit2(0.7);
  RVec b(1);
  b << 0.25;

  SUBCASE("lambda > 0 lies on the trajectory through the initial slice") {
    const double lambda = 0.12;
    const auto th = rs::theta_delta(model, sec, lambda, v, b);
    flows::LocalModelPoint start;
    start.x = lambda * v;
    start.y = sec.alpha(lambda * v, b);
    start.z = sec.beta(lambda * v, b);
    const auto expect = rs::flowline_level_point(start, model.delta);
    CHECK((th.x - expect.x).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((th.y - expect.y).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((th.z - expect.z).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(0.5 * (th.x.squaredNorm() - th.y.squaredNorm()) == doctest::Approx(model.delta));
  }

  SUBCASE("lambda = 0 hits the unstable sphere") {
    const auto th = rs::theta_delta(model, sec, 0.0, v, b);
    CHECK((th.x - std::sqrt(2.0 * model.delta) * v).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(th.y.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((th.z - sec.beta(RVec::Zero(2), b)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("small lambda approaches the lambda = 0 chart point") {
    const auto th0 = rs::theta_delta(model, sec, 0.0, v, b);
    const auto th = rs::theta_delta(model, sec, 1e-9, v, b);
    CHECK((th.x - th0.x).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((th.y - th0.y).cwiseAbs().maxCoeff() < 1e-7);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(rs::theta_delta(model, sec, -0.1, v, b), usage_error);
    CHECK_THROWS_AS(rs::theta_delta(model, sec, 0.1, 1.5 * v, b), validation_error);
    // lambda |alpha| beyond epsilon leaves the neighborhood
    rs::ModelSections big = sec;
    big.alpha = [](const RVec&, const RVec&) {
      RVec out(2);
      out << 40.0, 0.0;
      return out;
    };
    CHECK_THROWS_AS(rs::theta_delta(model, big, 0.1, v, b), validation_error);
  }
}

TEST_CASE("local model membership and potential") {
  rs::LocalModel model;
  model.dim_x = 1;
  model.dim_y = 1;
  model.dim_z = 0;
  model.delta = 0.5;
  model.epsilon = 0.4;
  flows::LocalModelPoint p;
  p.x = RVec(1);
  p.y = RVec(1);
  p.z = RVec(0);
  p.x << 0.6;
  p.y << 0.5;
  CHECK(model.potential(p) == doctest::Approx(0.5 * (0.36 - 0.25)));
  CHECK(model.in_v(p));
  p.x << 3.0;
  CHECK_FALSE(model.in_v(p));  // level 4.375 > delta
  p.x << 0.1;
  p.y << 0.1;
  CHECK(model.in_v(p));
}
