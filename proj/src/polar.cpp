#include "assocfam/polar.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "assocfam/errors.hpp"

namespace assocfam {

const char* to_string(PolarKind k) {
  switch (k) {
    case PolarKind::OddSphericalNormal: return "odd-spherical-normal";
    case PolarKind::EvenIntegrated: return "even-integrated";
  }
  return "unknown";
}

namespace {

double outside(const Eigen::MatrixXd& basis, const Eigen::VectorXd& w) {
  const double nw = w.norm();
  if (nw < 1e-300) return 0.0;
  return (w - basis * (basis.transpose() * w)).norm() / nw;
}

// Pointwise test on the second fundamental form: some positive definite
// bivector p must satisfy alpha_11 p11 + 2 alpha_12 p12 + alpha_22 p22 = 0.
void check_elliptic(PolarSurface& p, double tol) {
  const Chart& h = p.chart;
  const int N = h.dim();
  p.elliptic = true;
  for (int n = 0; n < h.nodes(); ++n) {
    Eigen::MatrixXd T(N, h.ambient.is_sphere() ? 3 : 2);
    T.col(0) = h.partial(n, 1, 0);
    T.col(1) = h.partial(n, 0, 1);
    if (h.ambient.is_sphere()) T.col(2) = h.position(n);
    const Eigen::MatrixXd Q0 = T.householderQr().householderQ() * Eigen::MatrixXd::Identity(N, T.cols());
    auto nrm = [&](const Eigen::VectorXd& w) { return Eigen::VectorXd(w - Q0 * (Q0.transpose() * w)); };
    Eigen::MatrixXd A(N, 3);
    A << nrm(h.partial(n, 2, 0)), 2.0 * nrm(h.partial(n, 1, 1)), nrm(h.partial(n, 0, 2));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    const double scale = std::max({h.partial(n, 2, 0).norm(), h.partial(n, 1, 1).norm(), h.partial(n, 0, 2).norm()});
    if (!(s(0) > 1e-10 * scale)) continue;  // no normal space, or a totally geodesic point
    const double r3 = s(2) / s(0);
    p.ellipticity_residual = std::max(p.ellipticity_residual, r3);
    bool ok = r3 <= tol;
    if (ok && s(1) / s(0) > tol) {
      const Eigen::Vector3d k = svd.matrixV().col(2);
      ok = k(0) * k(2) - k(1) * k(1) > 0.0;
    } else if (ok) {
      // One-dimensional image: the row must be indefinite.
      const Eigen::Vector3d w = svd.matrixV().col(0);
      ok = w(0) * w(2) - 0.25 * w(1) * w(1) < 0.0;
    }
    if (!ok && p.elliptic) {
      p.elliptic = false;
      p.elliptic_note = "no complex structure at node " + std::to_string(n);
    }
  }
}

PolarSurface odd_polar(const Chart& chart, const NormalFlag& flag, const PolarOptions& opt) {
  const int t = flag.tau;
  PolarSurface p;
  p.kind = PolarKind::OddSphericalNormal;
  Chart& h = p.chart;
  h.ambient = AmbientSpace::sphere(chart.dim());
  h.grid = chart.grid;
  h.order = std::min(flag.frame_order, kMaxJetOrder);
  h.source = ChartSource::Derived;
  h.jets.resize(chart.nodes());
  for (int n = 0; n < chart.nodes(); ++n) {
    h.jets[n] = mjet_to_vjet(mjet_cols(mjet_truncated(flag.frame[n], h.order), flag.offset(t), 1));
    const Eigen::MatrixXd prev = flag.block(n, t - 1);
    for (const auto& d : {h.partial(n, 1, 0), h.partial(n, 0, 1)})
      p.span_residual = std::max(p.span_residual, outside(prev, d));
  }
  finalize_chart(h);
  if (opt.check_elliptic) check_elliptic(p, opt.elliptic_tol);
  return p;
}

// Basis of the coefficient matrices M with L_u M e_2 = L_v M e_1, the
// lowering part of the closedness of e M.
Eigen::Matrix<double, 4, 2> admissible(const Eigen::MatrixXd& Lu, const Eigen::MatrixXd& Lv) {
  // vec M = (a_1, a_2, b_1, b_2), a = M e_1, b = M e_2.
  Eigen::MatrixXd C(Lu.rows(), 4);
  C << -Lv, Lu;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  return svd.matrixV().rightCols<2>();
}

PolarSurface even_polar(const Chart& chart, const NormalFlag& flag, const PolarOptions& opt) {
  const int t = flag.tau;
  if (t < 1 || flag.frame_order < 1)
    throw GeometryError(ErrorKind::PreconditionFailed, "even polar needs a normal bundle and frame order >= 1");
  const GridParams& g = chart.grid;
  const int nn = g.nodes(), N = chart.dim();
  const int base = g.base_node();
  const int ot = flag.offset(t), op = flag.offset(t - 1), dp = flag.dims[t - 1];

  std::vector<Eigen::MatrixXd> e(nn);
  for (int n = 0; n < nn; ++n) e[n] = flag.block(n, t);

  // Gauge: the admissible M at the base nearest the identity, after choosing
  // the orientation of e for which it is largest.
  const MJet Ej = flag.frame[base];
  const Eigen::MatrixXd Lu = Ej[0].middleCols(op, dp).transpose() * mjet_derivative(Ej, 1, 0)[0].middleCols(ot, 2);
  const Eigen::MatrixXd Lv = Ej[0].middleCols(op, dp).transpose() * mjet_derivative(Ej, 0, 1)[0].middleCols(ot, 2);
  Eigen::Vector4d idv(1, 0, 0, 1);
  auto nearest = [&](const Eigen::MatrixXd& lu, const Eigen::MatrixXd& lv) {
    const Eigen::Matrix<double, 4, 2> B = admissible(lu, lv);
    return Eigen::Vector4d(B * (B.transpose() * idv));
  };
  Eigen::Matrix2d flip = Eigen::Matrix2d::Identity();
  Eigen::Vector4d m0 = nearest(Lu, Lv);
  flip(1, 1) = -1.0;
  const Eigen::Vector4d m1 = nearest(Lu * flip, Lv * flip);
  if (m1.norm() > m0.norm()) {
    m0 = m1;
    for (auto& x : e) x.col(1) *= -1.0;
  }
  m0 *= std::sqrt(2.0) / m0.norm();

  // Unknowns: vec M at every node except the base.
  auto var = [&](int n) { return n < base ? 4 * n : 4 * (n - 1); };
  const int nv = 4 * (nn - 1);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  int row = 0;
  const double hu = g.hu(), hv = g.hv();
  // Circulation of e M around each cell over its area, trapezoid on edges.
  auto add_term = [&](int r0, int n, int slot, double w) {
    // slot 0: a, slot 1: b; contributes w e[n] (a or b).
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < 2; ++k) {
        const double c = w * e[n](i, k);
        if (c == 0.0) continue;
        if (n == base)
          rhs[r0 + i] -= c * m0(2 * slot + k);
        else
          trip.emplace_back(r0 + i, var(n) + 2 * slot + k, c);
      }
  };
  for (int j = 0; j + 1 < g.nv; ++j)
    for (int i = 0; i + 1 < g.nu; ++i) {
      const int c0 = g.node(i, j), c1 = g.node(i + 1, j), c2 = g.node(i + 1, j + 1), c3 = g.node(i, j + 1);
      rhs.resize(row + N, 0.0);
      const double su = 0.5 / hv, sv = 0.5 / hu;
      add_term(row, c0, 0, su);
      add_term(row, c1, 0, su);
      add_term(row, c1, 1, sv);
      add_term(row, c2, 1, sv);
      add_term(row, c2, 0, -su);
      add_term(row, c3, 0, -su);
      add_term(row, c3, 1, -sv);
      add_term(row, c0, 1, -sv);
      row += N;
    }
  const int closed_rows = row;
  // First differences of M along edges, weighted by the smoothing factor.
  auto add_diff = [&](int p, int q, double h) {
    const double w = opt.smoothing / h;
    for (int k = 0; k < 4; ++k) {
      rhs.push_back(0.0);
      for (const auto& [n, s] : {std::pair{p, w}, std::pair{q, -w}}) {
        if (n == base)
          rhs[row] -= s * m0(k);
        else
          trip.emplace_back(row, var(n) + k, s);
      }
      ++row;
    }
  };
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      if (i + 1 < g.nu) add_diff(g.node(i, j), g.node(i + 1, j), hu);
      if (j + 1 < g.nv) add_diff(g.node(i, j), g.node(i, j + 1), hv);
    }

  Eigen::SparseMatrix<double> A(row, nv);
  A.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), row);
  Eigen::SparseMatrix<double> AtA = A.transpose() * A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(AtA);
  if (solver.info() != Eigen::Success)
    throw GeometryError(ErrorKind::IntegrationFailed, "even polar normal equations are singular");
  const Eigen::VectorXd x = solver.solve(A.transpose() * b);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw GeometryError(ErrorKind::IntegrationFailed, "even polar solve failed");

  PolarSurface p;
  p.kind = PolarKind::EvenIntegrated;
  p.M.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const Eigen::Vector4d m = n == base ? m0 : Eigen::Vector4d(x.segment<4>(var(n)));
    p.M[n] << m(0), m(2), m(1), m(3);
  }
  const Eigen::VectorXd circ = A.topRows(closed_rows) * x - b.head(closed_rows);
  double mean_dh = 0.0;
  for (int n = 0; n < nn; ++n) mean_dh += (e[n] * p.M[n]).norm() / std::sqrt(2.0);
  mean_dh /= nn;
  for (int r = 0; r < closed_rows; r += N)
    p.closedness_residual = std::max(p.closedness_residual, circ.segment(r, N).norm() / mean_dh);

  // Trapezoid path integration in the family sweep order.
  std::vector<Eigen::VectorXd> pos(nn);
  pos[base] = Eigen::VectorXd::Zero(N);
  auto step = [&](int from, int to, int slot, double h) {
    pos[to] = pos[from] + 0.5 * h * (e[from] * p.M[from].col(slot) + e[to] * p.M[to].col(slot));
  };
  const int bu = g.iu(base), bv = g.iv(base);
  for (int i = bu + 1; i < g.nu; ++i) step(g.node(i - 1, bv), g.node(i, bv), 0, hu);
  for (int i = bu - 1; i >= 0; --i) step(g.node(i + 1, bv), g.node(i, bv), 0, -hu);
  for (int i = 0; i < g.nu; ++i) {
    for (int j = bv + 1; j < g.nv; ++j) step(g.node(i, j - 1), g.node(i, j), 1, hv);
    for (int j = bv - 1; j >= 0; --j) step(g.node(i, j + 1), g.node(i, j), 1, -hv);
  }
  p.chart = chart_from_samples(AmbientSpace::euclidean(N), g, pos, opt.jet_order, opt.accuracy);
  p.chart.source = ChartSource::Derived;
  for (int n = 0; n < nn; ++n)
    for (const auto& d : {p.chart.partial(n, 1, 0), p.chart.partial(n, 0, 1)})
      p.span_residual = std::max(p.span_residual, outside(e[n], d));
  if (!(p.closedness_residual <= opt.closedness_tol))
    throw GeometryError(ErrorKind::IntegrationFailed,
                        "closedness residual " + std::to_string(p.closedness_residual) + " exceeds tolerance");
  if (opt.check_elliptic) check_elliptic(p, opt.elliptic_tol);
  return p;
}

}  // namespace

PolarSurface polar_surface(const Chart& chart, const NormalFlag& flag, const PolarOptions& opt) {
  if (flag.tau < 1) throw GeometryError(ErrorKind::PreconditionFailed, "surface has no normal bundle");
  const int last = flag.dims[flag.tau];
  if (opt.kind && *opt.kind == PolarKind::OddSphericalNormal && last != 1)
    throw GeometryError(ErrorKind::NotOdd, "last normal bundle has dimension " + std::to_string(last));
  if (opt.kind && *opt.kind == PolarKind::EvenIntegrated && last != 2)
    throw GeometryError(ErrorKind::NotEven, "last normal bundle has dimension " + std::to_string(last));
  if (last > 2)
    throw GeometryError(ErrorKind::NotElliptic, "last normal bundle has dimension " + std::to_string(last));
  return last == 1 ? odd_polar(chart, flag, opt) : even_polar(chart, flag, opt);
}

}  // namespace assocfam
