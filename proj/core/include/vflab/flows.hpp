#pragma once

#include "vflab/common.hpp"
#include "vflab/spaces.hpp"

#include <optional>
#include <vector>

namespace vflab::flows {

enum class StratumSide { in_stable, in_unstable, neither };

struct StratumMembership {
  StratumSide side = StratumSide::neither;
  int kernel_dim = 0;  // dimension counter backing the decision
};

/// Descriptor of one critical stratum of a vertical flow.
struct CriticalStratum {
  std::string name;
  int codim_stable = 0;
  int dim_unstable = 0;
  std::function<StratumMembership(const spaces::ChartPoint&)> classifier;
  std::optional<spaces::Parametrization> residue_parametrization;  // unstable fiber
};

/// A closed-form vertical flow on a chart of the fiber model together with
/// its potential and critical strata.
struct FlowSpec {
  std::string space_id;
  std::function<spaces::ChartPoint(double, const spaces::ChartPoint&)> flow;
  std::function<double(const spaces::ChartPoint&)> potential;  // may be null
  std::vector<CriticalStratum> strata;
};

/// phi(t, U) = (tanh(t) I + U)(I + tanh(t) U)^{-1}: the gradient flow of
/// U -> Re Tr U on the unitary group. Fixes every reflection; as t -> +inf
/// the limit is -1 on Ker(1 + U) and +1 on its orthogonal complement.
Mat unitary_tanh_flow(double t, const Mat& u, double unit_tol = 1e-8);

/// phi_A(t, U) = (sinh(At) + cosh(At) U)(cosh(At) + sinh(At) U)^{-1}:
/// the gradient flow of U -> Re Tr(AU) for hermitian A (velocity is the
/// positive multiple 2 grad under <P,Q> = Re tr(P^* Q)).
Mat fa_flow(double t, const Mat& u, const Mat& a, double herm_tol = 1e-8,
            double unit_tol = 1e-8);

/// Velocity d/ds phi_A(s, U)|_{s=0} = A - U A U.
Mat fa_velocity(const Mat& u, const Mat& a);

/// Spanning-pair flow on Gr_k(E+ + E-): [X; Y] -> span[e^t X; e^{-t} Y],
/// re-orthonormalized. In the graph chart A = Y X^{-1} this is A -> e^{-2t} A.
struct SpanningPair {
  Mat x;  // E+ block
  Mat y;  // E- block
};
SpanningPair grassmann_linear_flow(double t, const SpanningPair& p, double rank_tol = 1e-10);

/// Orthogonal projector onto the span of [X; Y] (for chordal distances).
Mat spanning_projector(const SpanningPair& p);
double chordal_distance(const Mat& proj_a, const Mat& proj_b);

/// Forward limit of the spanning-pair flow: Im X + Y(Ker X), returned as the
/// orthogonal projector onto the limit subspace.
Mat grassmann_forward_limit(const SpanningPair& p, double rank_tol = 1e-9);

/// Graph-chart flow on the fiber P(E + C) around the zero section: v -> e^{2t} v.
RVec projective_chart_flow(double t, const RVec& v_packed);

/// Height flow on the sphere fiber in the stereographic chart centered at the
/// minimum: v -> e^t v. Potential f = (|v|^2 - 1)/(|v|^2 + 1).
RVec sphere_height_flow(double t, const RVec& v);
double sphere_height_potential(const RVec& v);

/// Radial flow v -> e^t v on a linear fiber.
RVec radial_flow(double t, const RVec& v);

/// Local model flow gamma(t, x, y, z) = (e^t x, e^{-t} y, z).
struct LocalModelPoint {
  RVec x;
  RVec y;
  RVec z;
};
LocalModelPoint local_model_flow(double t, const LocalModelPoint& p);

/// Spectral stratum record of a unitary matrix for the tanh-flow
/// stratification, against the flag W_m = span{e_{m+1}, ..., e_n}.
struct StratumRecord {
  int n = 0;
  int k = 0;             // dim Ker(1 + U): stable stratum index
  int ker_one_dim = 0;   // dim Ker(1 - U)
  std::vector<int> incidence_minus;  // dim(Ker(1+U) cap W_m), m = 0..n
  std::vector<int> incidence_plus;   // dim(Ker(1-U) cap W_m), m = 0..n
  bool ambiguous = false;  // some eigenvalue within (tol, 10 tol) of +-1
  int codim_stable = 0;    // k^2
  int codim_unstable = 0;  // (n-k)^2
  int dim_critical = 0;    // dim Gr_k(C^n) = 2k(n-k)
};

/// Spectral classification; never integrates in time. Eigenvalues within
/// angular tol of -1 (resp. +1) count toward the kernels.
StratumRecord classify_unitary_stratum(const Mat& u, double tol = 1e-7,
                                       double unit_tol = 1e-6);

/// Index set I of the reflection nearest to U in the eigenbasis of A:
/// i in I iff the i-th eigenvector (ascending eigenvalues, 1-based) has
/// eigenvalue -1. Throws when U is not a reflection within tol.
std::vector<int> reflection_index_set(const Mat& u, const Mat& a_eigvecs, double tol = 1e-5);

/// Codim of the stable manifold of the reflection U_I: sum_{i in I} (2i - 1).
int reflection_stable_codim(const std::vector<int>& index_set);

/// Reflection -1 on span{a_eigvecs.col(i-1) : i in I}, +1 elsewhere.
Mat make_reflection(const Mat& a_eigvecs, const std::vector<int>& index_set);

}  // namespace vflab::flows
