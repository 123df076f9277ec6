#include "assocfam/jet.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace assocfam {

Monomial jet_monomial(int index) {
  int d = 0;
  while (jet_size(d) <= index) ++d;
  const int b = index - d * (d + 1) / 2;
  return {d - b, b};
}

const std::vector<ProductTerm>& product_table(int order) {
  static std::array<std::vector<ProductTerm>, kMaxJetOrder + 1> tables;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 0; k <= kMaxJetOrder; ++k) {
      auto& t = tables[k];
      const int n = jet_size(k);
      for (int i = 0; i < n; ++i) {
        const Monomial mi = jet_monomial(i);
        for (int j = 0; j < n; ++j) {
          const Monomial mj = jet_monomial(j);
          if (mi.degree() + mj.degree() > k) continue;
          t.push_back({i, j, jet_index(mi.a + mj.a, mi.b + mj.b)});
        }
      }
    }
  });
  if (order < 0 || order > kMaxJetOrder) throw std::out_of_range("jet order out of range");
  return tables[order];
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Jet Jet::variable(int order, double x0, int axis) {
  Jet j(order, x0);
  if (order >= 1) j.c_[axis == 0 ? jet_index(1, 0) : jet_index(0, 1)] = 1.0;
  return j;
}

double Jet::partial(int a, int b) const {
  if (a + b > order_) return 0.0;
  return coeff(a, b) * factorial(a) * factorial(b);
}

Jet Jet::truncated(int order) const {
  Jet r(std::min(order, order_));
  for (int i = 0; i < r.size(); ++i) r.c_[i] = c_[i];
  return r;
}

Jet Jet::du() const {
  Jet r(std::max(order_ - 1, 0));
  if (order_ == 0) return r;
  for (int i = 0; i < r.size(); ++i) {
    const Monomial m = jet_monomial(i);
    r.c_[i] = (m.a + 1) * coeff(m.a + 1, m.b);
  }
  return r;
}

Jet Jet::dv() const {
  Jet r(std::max(order_ - 1, 0));
  if (order_ == 0) return r;
  for (int i = 0; i < r.size(); ++i) {
    const Monomial m = jet_monomial(i);
    r.c_[i] = (m.b + 1) * coeff(m.a, m.b + 1);
  }
  return r;
}

Jet Jet::derivative(int a, int b) const {
  Jet r = *this;
  for (int i = 0; i < a; ++i) r = r.du();
  for (int i = 0; i < b; ++i) r = r.dv();
  return r;
}

double Jet::eval(double du, double dv) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    const Monomial m = jet_monomial(i);
    s += c_[i] * std::pow(du, m.a) * std::pow(dv, m.b);
  }
  return s;
}

Jet& Jet::operator+=(const Jet& o) {
  const int ord = std::min(order_, o.order_);
  for (int i = 0; i < jet_size(ord); ++i) c_[i] += o.c_[i];
  for (int i = jet_size(ord); i < size(); ++i) c_[i] = 0.0;
  order_ = ord;
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  const int ord = std::min(order_, o.order_);
  for (int i = 0; i < jet_size(ord); ++i) c_[i] -= o.c_[i];
  for (int i = jet_size(ord); i < size(); ++i) c_[i] = 0.0;
  order_ = ord;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (int i = 0; i < size(); ++i) c_[i] *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  r *= -1.0;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const int ord = std::min(a.order_, b.order_);
  Jet r(ord);
  for (const auto& t : product_table(ord)) r.c_[t.k] += a.c_[t.i] * b.c_[t.j];
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  const int ord = std::min(a.order_, b.order_);
  if (b.c_[0] == 0.0) throw std::domain_error("jet division by zero");
  // b * q = a solved degree by degree; terms with j == 0 hold the unknown.
  Jet q(ord);
  const auto& table = product_table(ord);
  std::array<double, kMaxJetSize> acc{};
  for (int i = 0; i < jet_size(ord); ++i) acc[i] = a.c_[i];
  // Table entries are not sorted by output degree, so sweep by degree.
  for (int d = 0; d <= ord; ++d) {
    const int lo = d == 0 ? 0 : jet_size(d - 1);
    const int hi = jet_size(d);
    for (int k = lo; k < hi; ++k) q.c_[k] = acc[k] / b.c_[0];
    // Propagate the freshly solved degree-d coefficients into higher degrees.
    for (const auto& t : table) {
      if (t.j == 0) continue;
      if (t.i >= lo && t.i < hi) acc[t.k] -= q.c_[t.i] * b.c_[t.j];
    }
  }
  return q;
}

Jet operator/(double s, const Jet& a) {
  Jet one(a.order_, s);
  return one / a;
}

Jet compose(const Jet& x, const std::vector<double>& derivs) {
  const int ord = x.order();
  Jet dx = x;
  dx[0] = 0.0;
  Jet result(ord, derivs[0]);
  Jet power(ord, 1.0);
  double fact = 1.0;
  for (int k = 1; k <= ord; ++k) {
    power = power * dx;
    fact *= k;
    result += power * (derivs[k] / fact);
  }
  return result;
}

Jet sqrt(const Jet& x) {
  const double x0 = x.value();
  if (x0 <= 0.0) throw std::domain_error("jet sqrt of non-positive value");
  std::vector<double> d(x.order() + 1);
  double coef = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    d[k] = coef * std::pow(x0, 0.5 - k);
    coef *= (0.5 - k);
  }
  return compose(x, d);
}

Jet exp(const Jet& x) {
  std::vector<double> d(x.order() + 1, std::exp(x.value()));
  return compose(x, d);
}

Jet log(const Jet& x) {
  const double x0 = x.value();
  if (x0 <= 0.0) throw std::domain_error("jet log of non-positive value");
  std::vector<double> d(x.order() + 1);
  d[0] = std::log(x0);
  for (int k = 1; k <= x.order(); ++k)
    d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * factorial(k - 1) / std::pow(x0, k);
  return compose(x, d);
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double cyc[4] = {s, c, -s, -c};
  std::vector<double> d(x.order() + 1);
  for (int k = 0; k <= x.order(); ++k) d[k] = cyc[k % 4];
  return compose(x, d);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double cyc[4] = {c, -s, -c, s};
  std::vector<double> d(x.order() + 1);
  for (int k = 0; k <= x.order(); ++k) d[k] = cyc[k % 4];
  return compose(x, d);
}

Jet sinh(const Jet& x) {
  const double s = std::sinh(x.value()), c = std::cosh(x.value());
  std::vector<double> d(x.order() + 1);
  for (int k = 0; k <= x.order(); ++k) d[k] = (k % 2 == 0) ? s : c;
  return compose(x, d);
}

Jet cosh(const Jet& x) {
  const double s = std::sinh(x.value()), c = std::cosh(x.value());
  std::vector<double> d(x.order() + 1);
  for (int k = 0; k <= x.order(); ++k) d[k] = (k % 2 == 0) ? c : s;
  return compose(x, d);
}

Jet pow(const Jet& x, int n) {
  Jet r(x.order(), 1.0);
  for (int i = 0; i < n; ++i) r = r * x;
  return r;
}

VJet make_vjet(const std::vector<Jet>& comps) {
  int ord = kMaxJetOrder;
  for (const auto& c : comps) ord = std::min(ord, c.order());
  VJet v = VJet::Zero(static_cast<Eigen::Index>(comps.size()), jet_size(ord));
  for (size_t r = 0; r < comps.size(); ++r)
    for (int i = 0; i < jet_size(ord); ++i) v(static_cast<Eigen::Index>(r), i) = comps[r][i];
  return v;
}

Jet component(const VJet& v, int row) {
  Jet j(vjet_order(v));
  for (int i = 0; i < v.cols(); ++i) j[i] = v(row, i);
  return j;
}

VJet vjet_truncated(const VJet& v, int order) {
  const int ord = std::min(order, vjet_order(v));
  return v.leftCols(jet_size(ord));
}

VJet vjet_derivative(const VJet& v, int a, int b) {
  const int ord = vjet_order(v);
  const int out = ord - a - b;
  if (out < 0) throw std::domain_error("derivative exceeds jet order");
  VJet r(v.rows(), jet_size(out));
  for (int i = 0; i < jet_size(out); ++i) {
    const Monomial m = jet_monomial(i);
    double f = 1.0;
    for (int k = 1; k <= a; ++k) f *= (m.a + k);
    for (int k = 1; k <= b; ++k) f *= (m.b + k);
    r.col(i) = f * v.col(jet_index(m.a + a, m.b + b));
  }
  return r;
}

Jet dot(const VJet& x, const VJet& y) {
  const int ord = std::min(vjet_order(x), vjet_order(y));
  Jet r(ord);
  for (const auto& t : product_table(ord)) r[t.k] += x.col(t.i).dot(y.col(t.j));
  return r;
}

VJet scale(const Jet& s, const VJet& v) {
  const int ord = std::min(s.order(), vjet_order(v));
  VJet r = VJet::Zero(v.rows(), jet_size(ord));
  for (const auto& t : product_table(ord)) r.col(t.k) += s[t.i] * v.col(t.j);
  return r;
}

VJet vjet_add(const VJet& x, const VJet& y, double sy) {
  const int n = static_cast<int>(std::min(x.cols(), y.cols()));
  return x.leftCols(n) + sy * y.leftCols(n);
}

Eigen::VectorXd vjet_eval(const VJet& v, double du, double dv) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(v.rows());
  for (int i = 0; i < v.cols(); ++i) {
    const Monomial m = jet_monomial(i);
    r += v.col(i) * (std::pow(du, m.a) * std::pow(dv, m.b));
  }
  return r;
}

Eigen::VectorXd shifted_coefficients(const Eigen::VectorXd& coeffs, int order, double du,
                                     double dv) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(jet_size(order));
  for (int i = 0; i < jet_size(order); ++i) {
    const Monomial src = jet_monomial(i);
    for (int p = 0; p <= src.a; ++p)
      for (int q = 0; q <= src.b; ++q)
        out[jet_index(p, q)] += coeffs[i] * binomial(src.a, p) * binomial(src.b, q) *
                                std::pow(du, src.a - p) * std::pow(dv, src.b - q);
  }
  return out;
}

MJet mjet_zero(int rows, int cols, int order) {
  return MJet(jet_size(order), Eigen::MatrixXd::Zero(rows, cols));
}

MJet mjet_identity(int n, int order) {
  MJet m = mjet_zero(n, n, order);
  m[0].setIdentity();
  return m;
}

MJet mjet_mul(const MJet& a, const MJet& b, bool transpose_a) {
  const int ord = std::min(mjet_order(a), mjet_order(b));
  const Eigen::Index rows = transpose_a ? a[0].cols() : a[0].rows();
  MJet r = mjet_zero(static_cast<int>(rows), static_cast<int>(b[0].cols()), ord);
  for (const auto& t : product_table(ord)) {
    if (transpose_a)
      r[t.k].noalias() += a[t.i].transpose() * b[t.j];
    else
      r[t.k].noalias() += a[t.i] * b[t.j];
  }
  return r;
}

MJet mjet_add(const MJet& a, const MJet& b, double sb) {
  const int ord = std::min(mjet_order(a), mjet_order(b));
  MJet r(jet_size(ord));
  for (int i = 0; i < jet_size(ord); ++i) r[i] = a[i] + sb * b[i];
  return r;
}

MJet mjet_truncated(const MJet& m, int order) {
  const int ord = std::min(order, mjet_order(m));
  return MJet(m.begin(), m.begin() + jet_size(ord));
}

MJet mjet_derivative(const MJet& m, int a, int b) {
  const int out = mjet_order(m) - a - b;
  if (out < 0) throw std::domain_error("derivative exceeds jet order");
  MJet r(jet_size(out));
  for (int i = 0; i < jet_size(out); ++i) {
    const Monomial mo = jet_monomial(i);
    double f = 1.0;
    for (int k = 1; k <= a; ++k) f *= (mo.a + k);
    for (int k = 1; k <= b; ++k) f *= (mo.b + k);
    r[i] = f * m[jet_index(mo.a + a, mo.b + b)];
  }
  return r;
}

MJet mjet_transpose(const MJet& m) {
  MJet r(m.size());
  for (size_t i = 0; i < m.size(); ++i) r[i] = m[i].transpose();
  return r;
}

MJet mjet_scale(const Jet& s, const MJet& m) {
  const int ord = std::min(s.order(), mjet_order(m));
  MJet r = mjet_zero(static_cast<int>(m[0].rows()), static_cast<int>(m[0].cols()), ord);
  for (const auto& t : product_table(ord)) r[t.k] += s[t.i] * m[t.j];
  return r;
}

Jet mjet_entry(const MJet& m, int r, int c) {
  Jet j(mjet_order(m));
  for (size_t i = 0; i < m.size(); ++i) j[static_cast<int>(i)] = m[i](r, c);
  return j;
}

MJet mjet_from_entries(const std::vector<std::vector<Jet>>& entries) {
  int ord = kMaxJetOrder;
  for (const auto& row : entries)
    for (const auto& e : row) ord = std::min(ord, e.order());
  const int nr = static_cast<int>(entries.size());
  const int nc = static_cast<int>(entries[0].size());
  MJet m = mjet_zero(nr, nc, ord);
  for (int i = 0; i < jet_size(ord); ++i)
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) m[i](r, c) = entries[r][c][i];
  return m;
}

Eigen::MatrixXd mjet_eval(const MJet& m, double du, double dv) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m[0].rows(), m[0].cols());
  for (size_t i = 0; i < m.size(); ++i) {
    const Monomial mo = jet_monomial(static_cast<int>(i));
    r += m[i] * (std::pow(du, mo.a) * std::pow(dv, mo.b));
  }
  return r;
}

MJet mjet_inverse(const MJet& m) {
  // m * q = I solved degree by degree: q_k = m0^{-1} (I_k - sum_{j>0} m_j q_{k-j}).
  const int ord = mjet_order(m);
  const Eigen::MatrixXd inv0 = m[0].inverse();
  const int n = static_cast<int>(m[0].rows());
  MJet q = mjet_zero(n, n, ord);
  MJet acc = mjet_identity(n, ord);
  const auto& table = product_table(ord);
  for (int d = 0; d <= ord; ++d) {
    const int lo = d == 0 ? 0 : jet_size(d - 1);
    const int hi = jet_size(d);
    for (int k = lo; k < hi; ++k) q[k] = inv0 * acc[k];
    for (const auto& t : table) {
      if (t.i == 0) continue;
      if (t.j >= lo && t.j < hi) acc[t.k] -= m[t.i] * q[t.j];
    }
  }
  return q;
}

MJet mjet_cols(const MJet& m, int first, int count) {
  MJet r(m.size());
  for (size_t i = 0; i < m.size(); ++i) r[i] = m[i].middleCols(first, count);
  return r;
}

MJet mjet_block(const MJet& m, int r0, int c0, int nr, int nc) {
  MJet r(m.size());
  for (size_t i = 0; i < m.size(); ++i) r[i] = m[i].block(r0, c0, nr, nc);
  return r;
}

MJet vjet_to_mjet(const VJet& v) {
  MJet r(v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) r[i] = v.col(i);
  return r;
}

VJet mjet_to_vjet(const MJet& m) {
  VJet v(m[0].rows(), static_cast<Eigen::Index>(m.size()));
  for (size_t i = 0; i < m.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = m[i].col(0);
  return v;
}

}  // namespace assocfam
