#pragma once

// Truncated bivariate Taylor arithmetic.
//
// A jet of order K stores t_{ab} = d^a_u d^b_v f / (a! b!) for a + b <= K,
// laid out by total degree: index(a, b) = d(d+1)/2 + b with d = a + b.
// Scalar jets use fixed storage; vector-valued jets are Eigen matrices whose
// columns are the Taylor coefficients.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace assocfam {

constexpr int kMaxJetOrder = 12;
constexpr int kMaxJetSize = (kMaxJetOrder + 1) * (kMaxJetOrder + 2) / 2;

constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }
constexpr int jet_index(int a, int b) {
  const int d = a + b;
  return d * (d + 1) / 2 + b;
}

struct Monomial {
  int a = 0;  // power of u
  int b = 0;  // power of v
  int degree() const { return a + b; }
};

// (a, b) exponents for each coefficient index.
Monomial jet_monomial(int index);

// All (i, j, k) with index_i + index_j -> index_k and total degree <= order.
struct ProductTerm {
  int i, j, k;
};
const std::vector<ProductTerm>& product_table(int order);

class Jet {
 public:
  Jet() : order_(0) { c_.fill(0.0); }
  explicit Jet(int order, double value = 0.0) : order_(order) {
    c_.fill(0.0);
    c_[0] = value;
  }

  // The coordinate function u - u0 (axis 0) or v - v0 (axis 1) plus x0.
  static Jet variable(int order, double x0, int axis);

  int order() const { return order_; }
  int size() const { return jet_size(order_); }
  double value() const { return c_[0]; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  double coeff(int a, int b) const { return c_[jet_index(a, b)]; }
  // Partial derivative d^a_u d^b_v at the expansion point.
  double partial(int a, int b) const;

  Jet truncated(int order) const;
  Jet du() const;
  Jet dv() const;
  Jet derivative(int a, int b) const;
  // Value of the Taylor polynomial at offset (du, dv).
  double eval(double du, double dv) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator+(double s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, double s) {
    a.c_[0] -= s;
    return a;
  }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
  friend Jet operator/(double s, const Jet& a);

 private:
  int order_;
  std::array<double, kMaxJetSize> c_;
};

// Composition f(x) given the derivatives f^(k)(x0), k = 0..order.
Jet compose(const Jet& x, const std::vector<double>& derivs);

Jet sqrt(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sinh(const Jet& x);
Jet cosh(const Jet& x);
Jet pow(const Jet& x, int n);

struct ComplexJet {
  Jet re, im;
  ComplexJet() = default;
  ComplexJet(Jet r, Jet i) : re(std::move(r)), im(std::move(i)) {}
  ComplexJet& operator+=(const ComplexJet& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend ComplexJet operator*(const ComplexJet& a, const ComplexJet& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexJet operator*(std::complex<double> s, const ComplexJet& a) {
    return {s.real() * a.re - s.imag() * a.im, s.real() * a.im + s.imag() * a.re};
  }
};

// Vector-valued jet: rows are ambient components, columns Taylor coefficients.
using VJet = Eigen::MatrixXd;

inline int vjet_order(const VJet& v) {
  const int n = static_cast<int>(v.cols());
  int k = 0;
  while (jet_size(k) < n) ++k;
  return k;
}

VJet make_vjet(const std::vector<Jet>& comps);
Jet component(const VJet& v, int row);
VJet vjet_truncated(const VJet& v, int order);
VJet vjet_derivative(const VJet& v, int a, int b);
Jet dot(const VJet& x, const VJet& y);
VJet scale(const Jet& s, const VJet& v);
// Sum of x and y truncated to the lower order.
VJet vjet_add(const VJet& x, const VJet& y, double sy = 1.0);
Eigen::VectorXd vjet_eval(const VJet& v, double du, double dv);

// Matrix-valued jet: one matrix per Taylor coefficient.
using MJet = std::vector<Eigen::MatrixXd>;

inline int mjet_order(const MJet& m) {
  int k = 0;
  while (jet_size(k) < static_cast<int>(m.size())) ++k;
  return k;
}

MJet mjet_zero(int rows, int cols, int order);
MJet mjet_identity(int n, int order);
// a * b, or a^T * b when transpose_a is set.
MJet mjet_mul(const MJet& a, const MJet& b, bool transpose_a = false);
MJet mjet_add(const MJet& a, const MJet& b, double sb = 1.0);
MJet mjet_truncated(const MJet& m, int order);
MJet mjet_derivative(const MJet& m, int a, int b);
MJet mjet_transpose(const MJet& m);
// Scalar jet times matrix jet.
MJet mjet_scale(const Jet& s, const MJet& m);
// Matrix of scalar jets, entry (r, c).
Jet mjet_entry(const MJet& m, int r, int c);
MJet mjet_from_entries(const std::vector<std::vector<Jet>>& entries);
Eigen::MatrixXd mjet_eval(const MJet& m, double du, double dv);
// Inverse of a jet of square matrices with invertible value.
MJet mjet_inverse(const MJet& m);
// Column block of a matrix jet.
MJet mjet_cols(const MJet& m, int first, int count);
MJet mjet_block(const MJet& m, int r0, int c0, int nr, int nc);
// Conversion between the two vector-jet layouts (M x n matrices <-> columns).
MJet vjet_to_mjet(const VJet& v);
VJet mjet_to_vjet(const MJet& m);

// Taylor coefficients of the re-expansion of v about (du, dv).
Eigen::VectorXd shifted_coefficients(const Eigen::VectorXd& coeffs, int order, double du,
                                     double dv);

}  // namespace assocfam
