#include <benchmark/benchmark.h>

#include <vflab/algebra.hpp>
#include <vflab/charforms.hpp>
#include <vflab/common.hpp>
#include <vflab/exterior.hpp>
#include <vflab/flows.hpp>
#include <vflab/spaces.hpp>

#include <random>

using namespace vflab;
namespace ex = vflab::exterior;

namespace {

ex::AlternatingForm random_form(int dim, int seed) {
  rng_t rng(static_cast<std::uint64_t>(seed));
  std::normal_distribution<double> g(0.0, 1.0);
  ex::AlternatingForm f(dim);
  for (unsigned m = 0; m < (1u << dim); ++m) f[m] = cplx(g(rng), g(rng));
  return f;
}

ex::FormMatrix random_form_matrix(int n, int dim, int seed) {
  ex::FormMatrix fm(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) fm.at(i, j) = random_form(dim, seed + 17 * i + j);
  return fm;
}

RMat random_skew(int n, int seed) {
  rng_t rng(static_cast<std::uint64_t>(seed));
  std::normal_distribution<double> g(0.0, 1.0);
  RMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a - RMat(a.transpose());
}

spaces::BundleWithConnection plane_line_bundle() {
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
  return b;
}

void bm_wedge(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto a = random_form(dim, 1);
  const auto b = random_form(dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ex::wedge(a, b));
}

void bm_form_exp(benchmark::State& state) {
  auto fm = random_form_matrix(2, 6, 3);
  fm = fm * cplx(0.2, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(ex::form_exp(fm));
}

void bm_pfaffian(benchmark::State& state) {
  const auto a = random_skew(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(algebra::pfaffian(a));
}

void bm_curvature_density(benchmark::State& state) {
  const auto bundle = plane_line_bundle();
  const auto c1 = charforms::top_chern_form(bundle);
  RVec u(2);
  u << 0.4, -0.7;
  for (auto _ : state) benchmark::DoNotOptimize(c1.eval(u));
}

void bm_tanh_flow(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  rng_t rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  const Mat q = Eigen::HouseholderQR<Mat>(z).householderQ();
  for (auto _ : state) benchmark::DoNotOptimize(flows::unitary_tanh_flow(1.2, q));
}

}  // namespace

BENCHMARK(bm_wedge)->Arg(6)->Arg(10);
BENCHMARK(bm_form_exp);
BENCHMARK(bm_pfaffian)->Arg(8)->Arg(16);
BENCHMARK(bm_curvature_density);
BENCHMARK(bm_tanh_flow)->Arg(4)->Arg(16);

BENCHMARK_MAIN();
