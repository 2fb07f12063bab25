#include "vflab/exterior.hpp"

#include <bit>
#include <cmath>

namespace vflab::exterior {

namespace {
constexpr int kMaxDim = 16;
}

AlternatingForm::AlternatingForm(int dim) : dim_(dim) {
  if (dim < 0 || dim > kMaxDim) throw usage_error("AlternatingForm: dimension out of range");
  c_.assign(size_t{1} << dim, cplx{0.0, 0.0});
}

AlternatingForm AlternatingForm::scalar(int dim, cplx value) {
  AlternatingForm f(dim);
  f.c_[0] = value;
  return f;
}

AlternatingForm AlternatingForm::basis(int dim, int axis) {
  if (axis < 0 || axis >= dim) throw usage_error("AlternatingForm::basis: axis out of range");
  AlternatingForm f(dim);
  f.c_[1u << axis] = cplx{1.0, 0.0};
  return f;
}

AlternatingForm AlternatingForm::monomial(int dim, const std::vector<int>& axes, cplx c) {
  AlternatingForm f(dim);
  unsigned mask = 0;
  int prev = -1;
  for (int a : axes) {
    if (a < 0 || a >= dim) throw usage_error("AlternatingForm::monomial: axis out of range");
    if (a <= prev) throw usage_error("AlternatingForm::monomial: axes must be strictly increasing");
    prev = a;
    mask |= 1u << a;
  }
  f.c_[mask] = c;
  return f;
}

cplx AlternatingForm::coeff(const std::vector<int>& axes) const {
  unsigned mask = 0;
  int prev = -1;
  for (int a : axes) {
    if (a < 0 || a >= dim_) throw usage_error("AlternatingForm::coeff: axis out of range");
    if (a <= prev) throw usage_error("AlternatingForm::coeff: axes must be strictly increasing");
    prev = a;
    mask |= 1u << a;
  }
  return c_[mask];
}

AlternatingForm& AlternatingForm::operator+=(const AlternatingForm& o) {
  if (dim_ != o.dim_) throw usage_error("AlternatingForm: dimension mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator-=(const AlternatingForm& o) {
  if (dim_ != o.dim_) throw usage_error("AlternatingForm: dimension mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

bool AlternatingForm::is_zero(double tol) const {
  for (const auto& v : c_)
    if (std::abs(v) > tol) return false;
  return true;
}

double AlternatingForm::max_abs() const {
  double m = 0.0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

int AlternatingForm::max_degree() const {
  int d = 0;
  for (unsigned m = 0; m < c_.size(); ++m)
    if (c_[m] != cplx{0.0, 0.0}) d = std::max(d, std::popcount(m));
  return d;
}

AlternatingForm AlternatingForm::degree_component(int d) const {
  AlternatingForm out(dim_);
  for (unsigned m = 0; m < c_.size(); ++m)
    if (std::popcount(m) == d) out.c_[m] = c_[m];
  return out;
}

AlternatingForm AlternatingForm::truncated(int d) const {
  AlternatingForm out(dim_);
  for (unsigned m = 0; m < c_.size(); ++m)
    if (std::popcount(m) <= d) out.c_[m] = c_[m];
  return out;
}

AlternatingForm AlternatingForm::parity_involution() const {
  AlternatingForm out = *this;
  for (unsigned m = 0; m < out.c_.size(); ++m)
    if (std::popcount(m) % 2 == 1) out.c_[m] = -out.c_[m];
  return out;
}

AlternatingForm AlternatingForm::conjugated() const {
  AlternatingForm out = *this;
  for (auto& v : out.c_) v = std::conj(v);
  return out;
}

int wedge_sign(unsigned mask_a, unsigned mask_b) {
  // Count pairs (i in a, j in b) with i > j.
  int inv = 0;
  unsigned b = mask_b;
  while (b) {
    unsigned j = static_cast<unsigned>(std::countr_zero(b));
    inv += std::popcount(mask_a >> (j + 1));
    b &= b - 1;
  }
  return (inv % 2 == 0) ? 1 : -1;
}

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b) {
  if (a.dim() != b.dim()) throw usage_error("wedge: dimension mismatch");
  AlternatingForm out(a.dim());
  const unsigned full = (a.dim() == 0) ? 0u : ((1u << a.dim()) - 1u);
  a.for_each_nonzero([&](unsigned ma, cplx ca) {
    const unsigned comp = full & ~ma;
    // Enumerate all subsets of the complement of ma.
    unsigned mb = comp;
    while (true) {
      cplx cb = b[mb];
      if (cb != cplx{0.0, 0.0})
        out[ma | mb] += static_cast<double>(wedge_sign(ma, mb)) * ca * cb;
      if (mb == 0) break;
      mb = (mb - 1) & comp;
    }
  });
  return out;
}

AlternatingForm wedge_power(const AlternatingForm& a, int k) {
  if (k < 0) throw usage_error("wedge_power: negative power");
  AlternatingForm out = AlternatingForm::scalar(a.dim(), 1.0);
  for (int i = 0; i < k; ++i) out = wedge(out, a);
  return out;
}

FormMatrix::FormMatrix(int n, int dim) : n_(n), dim_(dim) {
  if (n <= 0) throw usage_error("FormMatrix: size must be positive");
  e_.assign(static_cast<size_t>(n) * n, AlternatingForm(dim));
}

FormMatrix FormMatrix::identity(int n, int dim) {
  FormMatrix m(n, dim);
  for (int i = 0; i < n; ++i) m.at(i, i) = AlternatingForm::scalar(dim, 1.0);
  return m;
}

FormMatrix FormMatrix::from_matrix(const Mat& a, int dim) {
  if (a.rows() != a.cols()) throw usage_error("FormMatrix::from_matrix: matrix must be square");
  FormMatrix m(static_cast<int>(a.rows()), dim);
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.n(); ++j)
      m.at(i, j) = AlternatingForm::scalar(dim, a(i, j));
  return m;
}

void FormMatrix::set_split(int p, int q) {
  if (p < 0 || q < 0 || p + q != n_) throw usage_error("FormMatrix::set_split: p + q must equal n");
  split_p_ = p;
  split_q_ = q;
}

FormMatrix& FormMatrix::operator+=(const FormMatrix& o) {
  if (n_ != o.n_ || dim_ != o.dim_) throw usage_error("FormMatrix: shape mismatch");
  for (size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
  return *this;
}

FormMatrix& FormMatrix::operator-=(const FormMatrix& o) {
  if (n_ != o.n_ || dim_ != o.dim_) throw usage_error("FormMatrix: shape mismatch");
  for (size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
  return *this;
}

FormMatrix& FormMatrix::operator*=(cplx s) {
  for (auto& f : e_) f *= s;
  return *this;
}

Mat FormMatrix::degree_zero() const {
  Mat m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = at(i, j)[0];
  return m;
}

double FormMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& f : e_) m = std::max(m, f.max_abs());
  return m;
}

FormMatrix FormMatrix::truncated(int d) const {
  FormMatrix out = *this;
  for (auto& f : out.e_) f = f.truncated(d);
  return out;
}

FormMatrix FormMatrix::parity_involution() const {
  FormMatrix out = *this;
  for (auto& f : out.e_) f = f.parity_involution();
  return out;
}

FormMatrix form_matrix_product(const FormMatrix& a, const FormMatrix& b) {
  if (a.n() != b.n() || a.dim() != b.dim()) throw usage_error("form_matrix_product: shape mismatch");
  FormMatrix out(a.n(), a.dim());
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) {
      AlternatingForm acc(a.dim());
      for (int k = 0; k < a.n(); ++k) acc += wedge(a.at(i, k), b.at(k, j));
      out.at(i, j) = acc;
    }
  if (a.has_split()) out.set_split(a.split_p(), a.split_q());
  return out;
}

FormMatrix form_matrix_power(const FormMatrix& a, int k) {
  if (k < 0) throw usage_error("form_matrix_power: negative power");
  FormMatrix out = FormMatrix::identity(a.n(), a.dim());
  if (a.has_split()) out.set_split(a.split_p(), a.split_q());
  for (int i = 0; i < k; ++i) out = form_matrix_product(out, a);
  return out;
}

FormMatrix wedge_scale(const AlternatingForm& w, const FormMatrix& m) {
  FormMatrix out(m.n(), m.dim());
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.n(); ++j) out.at(i, j) = wedge(w, m.at(i, j));
  if (m.has_split()) out.set_split(m.split_p(), m.split_q());
  return out;
}

AlternatingForm supertrace(const FormMatrix& m, TraceMode mode) {
  AlternatingForm out(m.dim());
  switch (mode) {
    case TraceMode::plain: {
      for (int i = 0; i < m.n(); ++i) out += m.at(i, i);
      return out;
    }
    case TraceMode::even: {
      if (!m.has_split()) throw usage_error("supertrace(even): matrix has no (p,q) split");
      for (int i = 0; i < m.split_p(); ++i) out += m.at(i, i);
      for (int i = m.split_p(); i < m.n(); ++i) out -= m.at(i, i);
      return out;
    }
    case TraceMode::odd: {
      if (!m.has_split() || m.split_p() != m.split_q())
        throw usage_error("supertrace(odd): requires a doubled matrix with split (n,n)");
      const int h = m.split_p();
      for (int i = 0; i < h; ++i) out += m.at(h + i, i);
      return out;
    }
    case TraceMode::wstr: {
      if (!m.has_split()) throw usage_error("supertrace(wstr): matrix has no (p,q) split");
      const double n = m.split_p() + m.split_q();
      AlternatingForm tl(m.dim()), br(m.dim());
      for (int i = 0; i < m.split_p(); ++i) tl += m.at(i, i);
      for (int i = m.split_p(); i < m.n(); ++i) br += m.at(i, i);
      out = cplx{n, 0.0} * br - cplx{n - 1.0, 0.0} * tl;
      return out;
    }
  }
  throw usage_error("supertrace: unknown mode");
}

AlternatingForm berezin(const AlternatingForm& a, int base_dim, int fiber_dim,
                        int fiber_orientation) {
  if (base_dim + fiber_dim != a.dim())
    throw usage_error("berezin: base_dim + fiber_dim must equal form dimension");
  if (fiber_orientation != 1 && fiber_orientation != -1)
    throw usage_error("berezin: orientation must be +-1");
  AlternatingForm out(base_dim);
  const unsigned fiber_mask = ((fiber_dim == 0) ? 0u : ((1u << fiber_dim) - 1u)) << base_dim;
  const unsigned base_full = (base_dim == 0) ? 0u : ((1u << base_dim) - 1u);
  for (unsigned mb = 0; mb <= base_full; ++mb)
    out[mb] = static_cast<double>(fiber_orientation) * a[mb | fiber_mask];
  return out;
}

namespace {

FormMatrix exp_series(const FormMatrix& m, int trunc) {
  FormMatrix acc = FormMatrix::identity(m.n(), m.dim());
  FormMatrix term = acc;
  const double floor = std::max(1.0, m.max_abs());
  for (int k = 1; k <= 64; ++k) {
    term = form_matrix_product(term, m);
    term *= cplx{1.0 / k, 0.0};
    term = term.truncated(trunc);
    acc += term;
    if (term.max_abs() <= 1e-19 * floor) break;
  }
  return acc;
}

}  // namespace

FormMatrix form_exp(const FormMatrix& m, int truncation_degree) {
  const int trunc = (truncation_degree < 0) ? m.dim() : truncation_degree;
  double norm = m.max_abs() * m.n();
  int s = 0;
  while (norm > 0.5 && s < 60) {
    norm *= 0.5;
    ++s;
  }
  FormMatrix scaled = m;
  scaled *= cplx{std::ldexp(1.0, -s), 0.0};
  FormMatrix e = exp_series(scaled, trunc);
  for (int i = 0; i < s; ++i) e = form_matrix_product(e, e).truncated(trunc);
  if (m.has_split()) e.set_split(m.split_p(), m.split_q());
  return e;
}

AlternatingForm form_exp_scalar(const AlternatingForm& a, int truncation_degree) {
  const int trunc = (truncation_degree < 0) ? a.dim() : truncation_degree;
  // Factor out the degree-0 part: exp(a0 + n) = e^{a0} * sum n^k / k!.
  cplx a0 = a[0];
  AlternatingForm n = a;
  n[0] = cplx{0.0, 0.0};
  AlternatingForm acc = AlternatingForm::scalar(a.dim(), 1.0);
  AlternatingForm term = acc;
  for (int k = 1; k <= trunc; ++k) {
    term = wedge(term, n);
    term *= cplx{1.0 / k, 0.0};
    term = term.truncated(trunc);
    if (term.is_zero()) break;
    acc += term;
  }
  acc *= std::exp(a0);
  return acc;
}

}  // namespace vflab::exterior
