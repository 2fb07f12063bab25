#pragma once

#include "vflab/common.hpp"

namespace vflab::fd {

/// Central-difference policy. Order 2 is the default for single-level
/// derivatives; nested stacks (curvature of a projected connection) use
/// order 4 with a larger step so truncation and noise amplification stay
/// near 1e-9 after two levels.
struct Policy {
  double step = 1e-5;
  int order = 2;  // 2 or 4
};

inline Policy nested_policy() { return Policy{1e-3, 4}; }

template <typename F>
auto derivative(F&& f, const RVec& u, int axis, const Policy& pol)
    -> decltype(f(u)) {
  // Evaluate into the concrete type eagerly: lazy expressions would outlive
  // the f(...) temporaries they reference.
  using Out = decltype(f(u));
  RVec up = u, um = u;
  const double h = pol.step;
  if (pol.order == 2) {
    up[axis] += h;
    um[axis] -= h;
    Out d = f(up) - f(um);
    return Out(d * (1.0 / (2.0 * h)));
  }
  RVec up2 = u, um2 = u;
  up[axis] += h;
  um[axis] -= h;
  up2[axis] += 2.0 * h;
  um2[axis] -= 2.0 * h;
  Out inner = f(up) - f(um);
  Out outer = f(up2) - f(um2);
  Out d = 8.0 * inner - outer;
  return Out(d * (1.0 / (12.0 * h)));
}

/// Scalar-valued specialization helper for std::complex returns.
template <typename F>
cplx derivative_scalar(F&& f, const RVec& u, int axis, const Policy& pol) {
  RVec up = u, um = u;
  const double h = pol.step;
  if (pol.order == 2) {
    up[axis] += h;
    um[axis] -= h;
    return (f(up) - f(um)) / (2.0 * h);
  }
  RVec up2 = u, um2 = u;
  up[axis] += h;
  um[axis] -= h;
  up2[axis] += 2.0 * h;
  um2[axis] -= 2.0 * h;
  return (8.0 * (f(up) - f(um)) - (f(up2) - f(um2))) / (12.0 * h);
}

}  // namespace vflab::fd
