#include "vflab/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

namespace vflab::integrate {

namespace {

std::atomic<int> g_jobs{0};

long checked_pow(long base, int exp) {
  long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > (1L << 40) / base) throw usage_error("quadrature grid too large");
    v *= base;
  }
  return v;
}

struct ChunkAccum {
  cplx sum{0.0, 0.0};
  double sumsq = 0.0;
};

/// Deterministic chunked reduction: the chunk partition is fixed (size 2048),
/// so the floating-point summation order does not depend on the worker count.
template <typename TermFn>
ChunkAccum run_chunks(long n, TermFn&& term, bool want_var) {
  const long chunk = 2048;
  const long n_chunks = (n + chunk - 1) / chunk;
  std::vector<ChunkAccum> acc(static_cast<std::size_t>(n_chunks));
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n_chunks));
  const int workers = static_cast<int>(std::max<long>(1, std::min<long>(jobs(), n_chunks)));

  std::atomic<long> next{0};
  auto body = [&]() {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        ChunkAccum a;
        const long lo = c * chunk, hi = std::min(n, lo + chunk);
        for (long i = lo; i < hi; ++i) {
          const cplx v = term(i);
          a.sum += v;
          if (want_var) a.sumsq += std::norm(v);
        }
        acc[static_cast<std::size_t>(c)] = a;
      } catch (...) {
        errs[static_cast<std::size_t>(c)] = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);

  ChunkAccum total;
  for (const auto& a : acc) {
    total.sum += a.sum;
    total.sumsq += a.sumsq;
  }
  return total;
}

void check_finite(cplx v, const RVec& where) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw numerical_breakdown("non-finite integrand sample", fmt_point(where));
}

IntegralResult gauss_box(const spaces::Box& box, const std::function<cplx(const RVec&)>& f,
                         int pts) {
  const int d = box.dim();
  const auto& [nodes, weights] = gauss_legendre(pts);
  const long total = checked_pow(pts, d);
  RVec mid = 0.5 * (box.lo + box.hi), half = 0.5 * (box.hi - box.lo);
  auto term = [&](long idx) {
    RVec u(d);
    double w = 1.0;
    long rem = idx;
    for (int a = 0; a < d; ++a) {
      const int k = static_cast<int>(rem % pts);
      rem /= pts;
      u[a] = mid[a] + half[a] * nodes[static_cast<std::size_t>(k)];
      w *= weights[static_cast<std::size_t>(k)] * half[a];
    }
    const cplx v = w * f(u);
    check_finite(v, u);
    return v;
  };
  ChunkAccum a = run_chunks(total, term, false);
  return {a.sum, 0.0};
}

IntegralResult mc_box(const spaces::Box& box, const std::function<cplx(const RVec&)>& f,
                      long samples, std::uint64_t seed, bool want_err) {
  const int d = box.dim();
  const double vol = box.volume();
  auto term = [&](long idx) {
    // Per-sample generator keyed on (seed, index): samples are independent of
    // the worker count and of the chunk layout.
    rng_t rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(idx + 1)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RVec u(d);
    for (int a = 0; a < d; ++a) u[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * unif(rng);
    const cplx v = f(u);
    check_finite(v, u);
    return v;
  };
  ChunkAccum a = run_chunks(samples, term, want_err);
  const cplx mean = a.sum / static_cast<double>(samples);
  double err = 0.0;
  if (want_err) {
    const double var =
        std::max(0.0, a.sumsq / static_cast<double>(samples) - std::norm(mean));
    err = vol * std::sqrt(var / static_cast<double>(samples));
  }
  return {vol * mean, err};
}

}  // namespace

void set_jobs(int j) { g_jobs.store(j); }

int jobs() {
  const int j = g_jobs.load();
  if (j > 0) return j;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));
}

Scheme Scheme::gauss(int points_per_axis, ErrorMode mode) {
  Scheme s;
  s.kind = Kind::gauss_tensor;
  s.points_per_axis = points_per_axis;
  s.error_mode = mode;
  return s;
}

Scheme Scheme::monte_carlo(long samples, std::uint64_t seed, ErrorMode mode) {
  Scheme s;
  s.kind = Kind::monte_carlo;
  s.samples = samples;
  s.seed = seed;
  s.error_mode = mode;
  return s;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 2) throw usage_error("gauss_legendre requires n >= 2");

  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double t = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[static_cast<std::size_t>(k)] = t;
    w[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

IntegralResult integrate_scalar(const spaces::Box& box,
                                const std::function<cplx(const RVec&)>& f,
                                const Scheme& scheme) {
  if (scheme.kind == Scheme::Kind::monte_carlo) {
    if (scheme.samples < 100) throw usage_error("monte_carlo requires >= 100 samples");
    return mc_box(box, f, scheme.samples, scheme.seed,
                  scheme.error_mode == Scheme::ErrorMode::mc_stderr);
  }
  if (scheme.points_per_axis < 2) throw usage_error("gauss_tensor requires >= 2 points");
  IntegralResult r = gauss_box(box, f, scheme.points_per_axis);
  if (scheme.error_mode == Scheme::ErrorMode::richardson && scheme.points_per_axis >= 4) {
    IntegralResult coarse = gauss_box(box, f, scheme.points_per_axis / 2);
    r.err = std::abs(r.value - coarse.value);
  }
  return r;
}

exterior::AlternatingForm pullback_form(const charforms::FormField& f,
                                        const spaces::Parametrization& p, const RVec& u) {
  const int d = p.box.dim();
  const int m = p.target_dim;
  const RMat j = p.jacobian(u);
  const exterior::AlternatingForm phi = f.eval(p.map(u));
  exterior::AlternatingForm out(d);

  for (unsigned kmask = 0; kmask < (1u << d); ++kmask) {
    const int deg = __builtin_popcount(kmask);
    std::vector<int> cols;
    for (int a = 0; a < d; ++a)
      if (kmask & (1u << a)) cols.push_back(a);
    cplx acc{0.0, 0.0};
    phi.for_each_nonzero([&](unsigned imask, cplx c) {
      if (__builtin_popcount(imask) != deg) return;
      RMat minor(deg, deg);
      int r = 0;
      for (int ax = 0; ax < m; ++ax) {
        if (!(imask & (1u << ax))) continue;
        for (int ci = 0; ci < deg; ++ci) minor(r, ci) = j(ax, cols[static_cast<std::size_t>(ci)]);
        ++r;
      }
      acc += c * (deg == 0 ? 1.0 : minor.determinant());
    });
    out[kmask] = acc;
  }
  return out;
}

IntegralResult integrate_form(const spaces::Parametrization& p, const charforms::FormField& f,
                              const Scheme& scheme) {
  const int d = p.box.dim();
  if (f.degree >= 0 && f.degree != d)
    throw usage_error("integrate_form: form degree does not match the domain dimension");
  if (f.chart_dim != p.target_dim)
    throw usage_error("integrate_form: chart dimension mismatch");

  auto density = [&](const RVec& u) -> cplx {
    const RMat j = p.jacobian(u);
    const exterior::AlternatingForm phi = f.eval(p.map(u));
    cplx acc{0.0, 0.0};
    phi.for_each_nonzero([&](unsigned imask, cplx c) {
      if (__builtin_popcount(imask) != d) return;
      RMat minor(d, d);
      int r = 0;
      for (int ax = 0; ax < f.chart_dim; ++ax) {
        if (!(imask & (1u << ax))) continue;
        for (int ci = 0; ci < d; ++ci) minor(r, ci) = j(ax, ci);
        ++r;
      }
      acc += c * minor.determinant();
    });
    return acc;
  };
  IntegralResult r = integrate_scalar(p.box, density, scheme);
  r.value *= static_cast<double>(p.orientation);
  return r;
}

cplx s1_residue_integral(int n, const Scheme& scheme) {
  if (n < 1) throw usage_error("s1_residue_integral requires n >= 1");
  spaces::Box circle = spaces::make_box({0.0}, {2.0 * kPi});
  auto f = [n](const RVec& u) -> cplx {
    return std::pow(2.0 - 2.0 * std::cos(u[0]), n - 1);
  };
  const cplx val = integrate_scalar(circle, f, scheme).value;
  const double sign = (n % 2 == 1) ? 1.0 : -1.0;
  return sign * kI * val;
}

charforms::FormField fiber_integrate(const charforms::FormField& total, int base_dim,
                                     const spaces::Parametrization& fiber,
                                     const Scheme& scheme) {
  const int mf = fiber.target_dim;
  const int df = fiber.box.dim();
  if (total.chart_dim != base_dim + mf)
    throw usage_error("fiber_integrate: total chart is not base x fiber");

  charforms::FormField out;
  out.chart_dim = base_dim;
  out.degree = total.degree >= 0 ? total.degree - df : -1;
  if (total.degree >= 0 && out.degree < 0)
    throw usage_error("fiber_integrate: fiber dimension exceeds form degree");
  out.closedness_claimed = total.closedness_claimed;

  const Scheme sch = scheme;
  out.eval = [total, base_dim, fiber, sch, mf, df](const RVec& b) {
    if (b.size() != base_dim) throw usage_error("fiber_integrate: base point dimension");
    const int m = base_dim + mf;
    // One Gauss/MC pass accumulating a whole form over the base axes.
    exterior::AlternatingForm acc(base_dim);
    auto accumulate = [&](const RVec& uf, double weight) {
      RVec pt(m);
      pt.head(base_dim) = b;
      pt.tail(mf) = fiber.map(uf);
      const RMat jf = fiber.jacobian(uf);
      const exterior::AlternatingForm phi = total.eval(pt);
      for (unsigned kmask = 0; kmask < (1u << base_dim); ++kmask) {
        const int kdeg = __builtin_popcount(kmask);
        std::vector<int> kaxes;
        for (int a = 0; a < base_dim; ++a)
          if (kmask & (1u << a)) kaxes.push_back(a);
        cplx val{0.0, 0.0};
        phi.for_each_nonzero([&](unsigned imask, cplx c) {
          if (__builtin_popcount(imask) != df + kdeg) return;
          // Columns: fiber frame vectors first, then base-axis lifts.
          RMat cols = RMat::Zero(m, df + kdeg);
          for (int ci = 0; ci < df; ++ci) cols.block(base_dim, ci, mf, 1) = jf.col(ci);
          for (int ci = 0; ci < kdeg; ++ci) cols(kaxes[static_cast<std::size_t>(ci)], df + ci) = 1.0;
          RMat minor(df + kdeg, df + kdeg);
          int r = 0;
          for (int ax = 0; ax < m; ++ax) {
            if (!(imask & (1u << ax))) continue;
            minor.row(r++) = cols.row(ax);
          }
          val += c * minor.determinant();
        });
        acc[kmask] += weight * val;
      }
    };

    if (sch.kind == Scheme::Kind::gauss_tensor) {
      const auto& [nodes, weights] = gauss_legendre(sch.points_per_axis);
      const long totaln = checked_pow(sch.points_per_axis, df);
      RVec mid = 0.5 * (fiber.box.lo + fiber.box.hi), half = 0.5 * (fiber.box.hi - fiber.box.lo);
      for (long idx = 0; idx < totaln; ++idx) {
        RVec u(df);
        double w = 1.0;
        long rem = idx;
        for (int a = 0; a < df; ++a) {
          const int k = static_cast<int>(rem % sch.points_per_axis);
          rem /= sch.points_per_axis;
          u[a] = mid[a] + half[a] * nodes[static_cast<std::size_t>(k)];
          w *= weights[static_cast<std::size_t>(k)] * half[a];
        }
        accumulate(u, w);
      }
    } else {
      rng_t rng(sch.seed);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double w = fiber.box.volume() / static_cast<double>(sch.samples);
      for (long i = 0; i < sch.samples; ++i) {
        RVec u(df);
        for (int a = 0; a < df; ++a)
          u[a] = fiber.box.lo[a] + (fiber.box.hi[a] - fiber.box.lo[a]) * unif(rng);
        accumulate(u, w);
      }
    }
    if (fiber.orientation < 0) acc *= cplx{-1.0, 0.0};
    return acc;
  };
  return out;
}

namespace {

spaces::Parametrization flow_parametrization(const FlowOut& flow, double t0, double t1) {
  spaces::Parametrization p;
  const int d = flow.base_dim;
  RVec lo(d + 1), hi(d + 1);
  lo[0] = t0;
  hi[0] = t1;
  lo.tail(d) = flow.base_box.lo;
  hi.tail(d) = flow.base_box.hi;
  p.box = spaces::Box{lo, hi};
  p.target_dim = flow.total_dim;
  p.jac_policy = flow.jac_policy;
  auto map = flow.map;
  p.map = [map, d](const RVec& u) { return map(u[0], u.tail(d)); };
  return p;
}

exterior::AlternatingForm shift_axes(const exterior::AlternatingForm& a, int shift, int new_dim) {
  exterior::AlternatingForm out(new_dim);
  a.for_each_nonzero([&](unsigned mask, cplx c) { out[mask << shift] += c; });
  return out;
}

}  // namespace

cplx slice_pairing(const FlowOut& flow, const charforms::FormField& omega,
                   const charforms::FormField& eta, double s, const Scheme& scheme) {
  spaces::Parametrization p;
  p.box = flow.base_box;
  p.target_dim = flow.total_dim;
  p.jac_policy = flow.jac_policy;
  auto map = flow.map;
  p.map = [map, s](const RVec& b) { return map(s, b); };

  const int d = flow.base_dim;
  auto density = [&](const RVec& b) -> cplx {
    exterior::AlternatingForm pw = pullback_form(omega, p, b);
    exterior::AlternatingForm e = eta.eval(b);
    exterior::AlternatingForm w = exterior::wedge(pw, e);
    return w[(1u << d) - 1u];
  };
  return integrate_scalar(flow.base_box, density, scheme).value;
}

cplx transgression_pairing(const FlowOut& flow, const charforms::FormField& omega,
                           const charforms::FormField& eta, double t, const Scheme& scheme) {
  if (t == 0.0) return {0.0, 0.0};
  const double t0 = std::min(0.0, t), t1 = std::max(0.0, t);
  spaces::Parametrization p = flow_parametrization(flow, t0, t1);
  const int d = flow.base_dim;

  auto density = [&](const RVec& u) -> cplx {
    exterior::AlternatingForm pw = pullback_form(omega, p, u);
    exterior::AlternatingForm e = shift_axes(eta.eval(u.tail(d)), 1, d + 1);
    exterior::AlternatingForm w = exterior::wedge(pw, e);
    return w[(1u << (d + 1)) - 1u];
  };
  cplx val = integrate_scalar(p.box, density, scheme).value;
  return t > 0.0 ? val : -val;
}

BoundaryCheck boundary_check(const FlowOut& flow, const charforms::FormField& omega,
                             const charforms::FormField& eta, const charforms::FormField& deta,
                             double t, const Scheme& scheme) {
  BoundaryCheck bc;
  const double sign = (omega.degree >= 0 && omega.degree % 2 == 1) ? -1.0 : 1.0;
  bc.transgression_side = sign * transgression_pairing(flow, omega, deta, t, scheme);
  bc.slice_side =
      slice_pairing(flow, omega, eta, t, scheme) - slice_pairing(flow, omega, eta, 0.0, scheme);
  bc.defect = std::abs(bc.transgression_side - bc.slice_side);
  return bc;
}

double flow_tube_volume(const FlowOut& flow, const std::function<RMat(const RVec&)>& metric,
                        double t0, double t1, const Scheme& scheme, bool strong) {
  spaces::Parametrization p = flow_parametrization(flow, t0, t1);
  const int d = flow.base_dim;

  spaces::Parametrization p0;  // (s, b) -> phi_0(b), with a dead s axis
  p0.box = p.box;
  p0.target_dim = flow.total_dim;
  p0.jac_policy = flow.jac_policy;
  {
    auto map = flow.map;
    p0.map = [map, d](const RVec& u) { return map(0.0, u.tail(d)); };
  }

  auto density = [&, strong](const RVec& u) -> cplx {
    const RMat j = p.jacobian(u);
    const RVec x = p.map(u);
    RMat g = j.transpose() * metric(x) * j;
    if (strong) {
      const RMat j0 = p0.jacobian(u);
      const RVec x0 = p0.map(u);
      g += j0.transpose() * metric(x0) * j0;
    }
    const double det = g.determinant();
    return std::sqrt(std::max(0.0, det));
  };
  return integrate_scalar(p.box, density, scheme).value.real();
}

std::vector<double> tube_volume_schedule(const FlowOut& flow,
                                         const std::function<RMat(const RVec&)>& metric,
                                         const std::vector<double>& ts, const Scheme& scheme,
                                         bool strong) {
  std::vector<double> out;
  double acc = 0.0, prev = 0.0;
  for (double t : ts) {
    if (t < prev) throw usage_error("tube_volume_schedule: times must be increasing");
    acc += flow_tube_volume(flow, metric, prev, t, scheme, strong);
    out.push_back(acc);
    prev = t;
  }
  return out;
}

IntegralResult refined_tail(const charforms::FormField& f,
                            const std::function<spaces::Parametrization(double)>& chart_at_radius,
                            double r0, double factor, double tol, int max_steps,
                            const Scheme& scheme) {
  double r = r0;
  IntegralResult prev = integrate_form(chart_at_radius(r), f, scheme);
  for (int k = 1; k < max_steps; ++k) {
    r *= factor;
    IntegralResult cur = integrate_form(chart_at_radius(r), f, scheme);
    const double inc = std::abs(cur.value - prev.value);
    if (inc < tol) return {cur.value, inc};
    prev = cur;
  }
  throw numerical_breakdown("tail refinement did not stabilize", "refined_tail");
}

charforms::FormField masked(const charforms::FormField& f,
                            std::vector<std::pair<RVec, double>> windows) {
  charforms::FormField out = f;
  auto base = f.eval;
  out.eval = [base, windows = std::move(windows), dim = f.chart_dim](const RVec& u) {
    for (const auto& [c, h] : windows)
      if ((u - c).lpNorm<Eigen::Infinity>() <= h) return exterior::AlternatingForm(dim);
    return base(u);
  };
  return out;
}

}  // namespace vflab::integrate
