#include <doctest.h>

#include <vflab/algebra.hpp>
#include <vflab/common.hpp>
#include <vflab/flows.hpp>

#include <cmath>
#include <random>

using namespace vflab;
namespace fl = vflab::flows;

namespace {

Mat random_unitary(int n, rng_t& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (std::abs(r(j, j)) > 1e-300) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

}  // namespace

TEST_CASE("unitary tanh flow: scalar Mobius oracle") {
  for (double beta : {0.4, 2.0, -1.3}) {
    for (double t : {0.1, 0.7, 3.0}) {
      Mat u(1, 1);
      u(0, 0) = std::exp(kI * beta);
      const cplx expected =
          (std::tanh(t) + u(0, 0)) / (1.0 + std::tanh(t) * u(0, 0));
      CHECK(std::abs(fl::unitary_tanh_flow(t, u)(0, 0) - expected) < 1e-13);
    }
  }
}

TEST_CASE("unitary tanh flow: unitarity, semigroup, velocity") {
  rng_t rng(3);
  const Mat u = random_unitary(3, rng);
  const Mat id = Mat::Identity(3, 3);

  const Mat u1 = fl::unitary_tanh_flow(1.3, u);
  CHECK((u1 * u1.adjoint() - id).cwiseAbs().maxCoeff() < 1e-12);

  const Mat a = fl::unitary_tanh_flow(0.9, fl::unitary_tanh_flow(0.6, u));
  const Mat b = fl::unitary_tanh_flow(1.5, u);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-11);

  // d/dt at 0 equals 1 - U^2
  const double h = 1e-6;
  const Mat fd = (fl::unitary_tanh_flow(h, u) - fl::unitary_tanh_flow(-h, u)) / (2.0 * h);
  CHECK((fd - (id - u * u)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("f_A flow: velocity field and reduction to tanh") {
  rng_t rng(5);
  const Mat u = random_unitary(3, rng);
  const Mat w = random_unitary(3, rng);
  RVec vals(3);
  vals << 0.8, 1.1, 1.7;
  const Mat a = w * vals.asDiagonal().toDenseMatrix().cast<cplx>() * w.adjoint();

  const double h = 1e-6;
  const Mat fd = (fl::fa_flow(h, u, a) - fl::fa_flow(-h, u, a)) / (2.0 * h);
  CHECK((fd - fl::fa_velocity(u, a)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fl::fa_velocity(u, a) - (a - u * a * u)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK((fl::fa_flow(0.7, u, Mat::Identity(3, 3)) - fl::unitary_tanh_flow(0.7, u))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("grassmann linear flow: known limits") {
  rng_t rng(7);
  std::normal_distribution<double> g(0.0, 1.0);

  // invertible X: limit projector is the top block
  fl::SpanningPair p;
  p.x = Mat(2, 2);
  p.y = Mat(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      p.x(i, j) = cplx(g(rng), g(rng));
      p.y(i, j) = cplx(g(rng), g(rng));
    }
  Mat top = Mat::Zero(4, 4);
  top(0, 0) = 1.0;
  top(1, 1) = 1.0;
  CHECK((fl::grassmann_forward_limit(p) - top).cwiseAbs().maxCoeff() < 1e-10);
  fl::SpanningPair q = p;
  for (int s = 0; s < 8; ++s) q = fl::grassmann_linear_flow(2.0, q);
  CHECK(fl::chordal_distance(fl::spanning_projector(q), top) < 1e-8);

  // singular X: kernel direction survives through Y
  fl::SpanningPair s;
  s.x = Mat::Zero(2, 2);
  s.x(0, 0) = 1.0;
  s.y = Mat::Identity(2, 2);
  Mat split = Mat::Zero(4, 4);
  split(0, 0) = 1.0;  // Im X = span(e0) in the first factor
  split(3, 3) = 1.0;  // Y Ker X = span(e1) in the second factor
  CHECK((fl::grassmann_forward_limit(s) - split).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spanning projector and chordal distance basics") {
  rng_t rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  fl::SpanningPair p;
  p.x = Mat(2, 2);
  p.y = Mat(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      p.x(i, j) = cplx(g(rng), g(rng));
      p.y(i, j) = cplx(g(rng), g(rng));
    }
  const Mat pr = fl::spanning_projector(p);
  CHECK((pr * pr - pr).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((pr - pr.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fl::chordal_distance(pr, pr) < 1e-14);

  // invariant under change of spanning basis
  fl::SpanningPair p2;
  Mat gmat(2, 2);
  gmat << cplx(1.0, 0.2), cplx(0.3, -0.1), cplx(0.0, 0.5), cplx(2.0, 0.0);
  p2.x = p.x * gmat;
  p2.y = p.y * gmat;
  CHECK(fl::chordal_distance(fl::spanning_projector(p2), pr) < 1e-12);
}

TEST_CASE("scalar model flows") {
  RVec v(2);
  v << 0.6, -0.3;
  CHECK((fl::radial_flow(1.2, v) - std::exp(1.2) * v).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((fl::sphere_height_flow(0.8, v) - std::exp(0.8) * v).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(fl::sphere_height_potential(RVec::Zero(2)) == doctest::Approx(-1.0));
  CHECK(fl::sphere_height_potential(v) <
        fl::sphere_height_potential(fl::sphere_height_flow(0.5, v)));

  const RVec big = 1e6 * v;
  CHECK(fl::sphere_height_potential(big) == doctest::Approx(1.0).epsilon(1e-9));

  const RVec pc = fl::projective_chart_flow(0.4, v);
  CHECK((pc - std::exp(0.8) * v).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local model flow: invariants") {
  fl::LocalModelPoint p;
  p.x = RVec(2);
  p.y = RVec(2);
  p.z = RVec(1);
  p.x << 0.3, -0.4;
  p.y << 0.2, 0.5;
  p.z << 0.9;
  const auto q = fl::local_model_flow(0.7, p);
  CHECK((q.x - std::exp(0.7) * p.x).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((q.y - std::exp(-0.7) * p.y).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(q.z[0] == doctest::Approx(0.9));
  CHECK(q.x.norm() * q.y.norm() == doctest::Approx(p.x.norm() * p.y.norm()));
}

TEST_CASE("unitary stratum classification") {
  rng_t rng(13);
  const Mat v = random_unitary(3, rng);
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = -1.0;
  d(1, 1) = -1.0;
  d(2, 2) = std::exp(kI * 0.4);
  const auto rec = fl::classify_unitary_stratum(v * d * v.adjoint());
  CHECK(rec.n == 3);
  CHECK(rec.k == 2);
  CHECK(rec.codim_stable == 4);

  const auto rec0 = fl::classify_unitary_stratum(v * Mat(d * d) * v.adjoint());
  // squaring removes the -1 eigenvalues
  CHECK(rec0.k == 0);
  CHECK(rec0.codim_stable == 0);
}

TEST_CASE("reflections from index sets round-trip") {
  rng_t rng(17);
  const Mat w = random_unitary(4, rng);
  const std::vector<int> iset = {1, 3};
  const Mat r = fl::make_reflection(w, iset);
  CHECK((r * r - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fl::reflection_index_set(r, w) == iset);
  CHECK(fl::reflection_stable_codim(iset) == 6);
  CHECK(fl::reflection_stable_codim({}) == 0);
}
