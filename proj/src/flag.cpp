#include "assocfam/flag.hpp"

#include <algorithm>
#include <cmath>

#include "assocfam/errors.hpp"

namespace assocfam {

namespace {

// M x (d+1) matrix of order-d partials; column b is d_u^{d-b} d_v^b.
Eigen::MatrixXd derivative_matrix(const Chart& c, int node, int d) {
  Eigen::MatrixXd D(c.dim(), d + 1);
  for (int b = 0; b <= d; ++b) D.col(b) = c.partial(node, d - b, b);
  return D;
}

struct NodeRank {
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> projected;  // per order d = s + 1
  std::vector<std::vector<double>> sv;
};

NodeRank node_rank(const Chart& chart, int node, double rank_tol) {
  const int m = chart.dim();
  NodeRank out;
  Eigen::MatrixXd Q(m, 0);
  if (chart.ambient.is_sphere()) {
    Q.resize(m, 1);
    Q.col(0) = chart.position(node).normalized();
  }
  for (int d = 1;; ++d) {
    if (Q.cols() == m) break;
    if (d > chart.order)
      throw GeometryError(ErrorKind::JetOrderTooLow,
                          "jet order " + std::to_string(chart.order) +
                              " cannot resolve the osculating flag",
                          node);
    const Eigen::MatrixXd D = derivative_matrix(chart, node, d);
    const double raw = Eigen::JacobiSVD<Eigen::MatrixXd>(D).singularValues()(0);
    Eigen::MatrixXd Dp = D - Q * (Q.transpose() * D);
    Dp -= Q * (Q.transpose() * Dp);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Dp, Eigen::ComputeThinU);
    const Eigen::VectorXd s = svd.singularValues();
    int r = 0;
    if (raw > 0.0)
      for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rank_tol * raw) ++r;
    r = std::min<int>(r, m - static_cast<int>(Q.cols()));
    if (d == 1 && r != 2) throw GeometryError(ErrorKind::RankDeficient, "tangent plane degenerate", node);
    if (r == 0) break;
    out.dims.push_back(r);
    out.projected.push_back(Dp);
    out.sv.emplace_back(s.data(), s.data() + s.size());
    Eigen::MatrixXd Q2(m, Q.cols() + r);
    Q2 << Q, svd.matrixU().leftCols(r);
    Q = Q2;
  }
  return out;
}

}  // namespace

NormalFlag build_flag(const Chart& chart, const FlagOptions& opt) {
  NormalFlag f;
  f.sphere = chart.ambient.is_sphere();
  f.rank_tol = opt.rank_tol;
  const int base = chart.grid.base_node();
  const NodeRank br = node_rank(chart, base, opt.rank_tol);
  f.dims = br.dims;
  f.base_singular_values = br.sv;
  f.tau = static_cast<int>(f.dims.size()) - 1;
  f.substantial_dim = 0;
  for (int d : f.dims) f.substantial_dim += d;
  f.tau_o = (f.substantial_dim % 2 == 0) ? f.tau : f.tau - 1;
  if (chart.order < f.tau + 2)
    throw GeometryError(ErrorKind::JetOrderTooLow,
                        "need jet order >= tau + 2 = " + std::to_string(f.tau + 2));
  for (int n = 0; n < chart.nodes(); ++n) {
    if (n == base) continue;
    const NodeRank nr = node_rank(chart, n, opt.rank_tol);
    if (nr.dims != f.dims) throw GeometryError(ErrorKind::NotRegular, "flag dimensions jump", n);
  }

  // Pivot monomials chosen once at the base node by column-pivoted QR.
  for (size_t s = 0; s < f.dims.size(); ++s) {
    const int d = static_cast<int>(s) + 1;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(br.projected[s]);
    const auto& perm = qr.colsPermutation().indices();
    for (int k = 0; k < f.dims[s]; ++k) {
      const int b = perm(k);
      f.pivots.push_back({d - b, b});
    }
  }

  f.frame_order = chart.order - f.tau - 1;
  const int fo = f.frame_order;
  const int n_frame = f.frame_dim();
  const double pivot_floor = std::sqrt(opt.rank_tol);
  f.frame.resize(chart.nodes());
  for (int n = 0; n < chart.nodes(); ++n) {
    std::vector<VJet> cols;
    cols.reserve(n_frame);
    if (f.sphere) cols.push_back(vjet_truncated(chart.jets[n], fo));
    for (const Monomial& p : f.pivots) {
      VJet w = vjet_truncated(vjet_derivative(chart.jets[n], p.a, p.b), fo);
      const double before = w.col(0).norm();
      for (int pass = 0; pass < 2; ++pass)
        for (const VJet& e : cols) w = vjet_add(w, scale(dot(e, w), e), -1.0);
      if (!(w.col(0).norm() > pivot_floor * before))
        throw GeometryError(ErrorKind::NotRegular, "pivot direction degenerates", n);
      cols.push_back(normalize_jet(w));
    }
    MJet E = mjet_zero(chart.dim(), n_frame, fo);
    for (int i = 0; i < jet_size(fo); ++i)
      for (int k = 0; k < n_frame; ++k) E[i].col(k) = cols[k].col(i);
    f.frame[n] = std::move(E);
  }
  return f;
}

HigherFormTable higher_forms(const Chart& chart, const NormalFlag& flag, const FlagOptions& opt) {
  HigherFormTable t;
  t.max_order = flag.tau + 1;
  t.coords.resize(chart.nodes());
  for (int n = 0; n < chart.nodes(); ++n) {
    auto& c = t.coords[n];
    c.resize(t.max_order + 1);
    const Eigen::MatrixXd& E = flag.E(n);
    c[1] = flag.block(n, 0).transpose() * derivative_matrix(chart, n, 1);
    for (int s = 2; s <= t.max_order; ++s) {
      const Eigen::MatrixXd D = derivative_matrix(chart, n, s);
      c[s] = flag.block(n, s - 1).transpose() * D;
      const Eigen::MatrixXd leak = D - E * (E.transpose() * D);
      for (int b = 0; b <= s; ++b) {
        const double nv = D.col(b).norm();
        if (nv > 0.0) t.drift = std::max(t.drift, leak.col(b).norm() / nv);
      }
    }
  }
  if (t.drift > opt.drift_tol)
    throw GeometryError(ErrorKind::ProjectionDrift,
                        "derivatives leave the osculating space by " + std::to_string(t.drift));
  return t;
}

Eigen::VectorXd eval_form(const Eigen::MatrixXd& coords, const std::vector<Eigen::Vector2d>& args) {
  std::vector<double> p{1.0};
  for (const auto& x : args) {
    std::vector<double> q(p.size() + 1, 0.0);
    for (size_t b = 0; b < p.size(); ++b) {
      q[b] += x(0) * p[b];
      q[b + 1] += x(1) * p[b];
    }
    p = std::move(q);
  }
  Eigen::VectorXd r = Eigen::VectorXd::Zero(coords.rows());
  for (size_t b = 0; b < p.size(); ++b) r += p[b] * coords.col(static_cast<Eigen::Index>(b));
  return r;
}

std::pair<MJet, MJet> omega_jets(const NormalFlag& flag, int node) {
  const MJet& E = flag.frame[node];
  if (flag.frame_order < 1)
    throw GeometryError(ErrorKind::JetOrderTooLow, "frame jets too short for the connection");
  const MJet Eu = mjet_derivative(E, 1, 0);
  const MJet Ev = mjet_derivative(E, 0, 1);
  return {mjet_mul(E, Eu, true), mjet_mul(E, Ev, true)};
}

Eigen::MatrixXd raising_from_forms(const HigherFormTable& forms, int node, int s, int dir) {
  const Eigen::MatrixXd& W = forms.at(node, s);
  const Eigen::MatrixXd& W2 = forms.at(node, s + 1);
  const Eigen::MatrixXd T = W2.middleCols(dir, s + 1);
  // S W = T  <=>  W^T S^T = T^T.
  const Eigen::MatrixXd St = W.transpose().completeOrthogonalDecomposition().solve(T.transpose());
  return St.transpose();
}

FrenetTensors frenet_tensors(const Chart& chart, const NormalFlag& flag,
                             const HigherFormTable& forms) {
  if (flag.frame_order < 2)
    throw GeometryError(ErrorKind::JetOrderTooLow,
                        "connection derivatives need jet order >= tau + 3 = " +
                            std::to_string(flag.tau + 3));
  FrenetTensors t;
  const int nn = chart.nodes();
  t.omega_u.resize(nn);
  t.omega_v.resize(nn);
  t.du_omega_v.resize(nn);
  t.dv_omega_u.resize(nn);
  t.theta_u.resize(nn);
  t.theta_v.resize(nn);
  const int nf = flag.frame_dim();
  for (int n = 0; n < nn; ++n) {
    const auto [Ou, Ov] = omega_jets(flag, n);
    t.omega_u[n] = Ou[0];
    t.omega_v[n] = Ov[0];
    t.du_omega_v[n] = mjet_derivative(Ov, 1, 0)[0];
    t.dv_omega_u[n] = mjet_derivative(Ou, 0, 1)[0];
    const Eigen::MatrixXd& E = flag.E(n);
    t.theta_u[n] = E.transpose() * chart.partial(n, 1, 0);
    t.theta_v[n] = E.transpose() * chart.partial(n, 0, 1);

    const Eigen::MatrixXd& Eu = flag.frame[n][jet_index(1, 0)];
    const Eigen::MatrixXd& Ev = flag.frame[n][jet_index(0, 1)];
    t.reconstruction_residual = std::max(
        {t.reconstruction_residual, (Eu - E * Ou[0]).norm(), (Ev - E * Ov[0]).norm()});
    t.orthogonality_residual = std::max(
        t.orthogonality_residual, (E.transpose() * E - Eigen::MatrixXd::Identity(nf, nf)).norm());
    t.antisymmetry_residual =
        std::max({t.antisymmetry_residual, (Ou[0] + Ou[0].transpose()).norm(),
                  (Ov[0] + Ov[0].transpose()).norm()});

    for (int dir = 0; dir < 2; ++dir) {
      const Eigen::MatrixXd& O = dir == 0 ? Ou[0] : Ov[0];
      for (int s = 1; s <= flag.tau; ++s) {
        const Eigen::MatrixXd L =
            O.block(flag.offset(s - 1), flag.offset(s), flag.dims[s - 1], flag.dims[s]);
        const Eigen::MatrixXd S = raising_from_forms(forms, n, s, dir);
        t.duality_residual = std::max(t.duality_residual, (-L - S.transpose()).norm());
      }
      for (int s = 0; s + 2 <= flag.tau + 1; ++s) {
        const Eigen::MatrixXd S =
            O.block(flag.offset(s + 1), flag.offset(s), flag.dims[s + 1], flag.dims[s]);
        const Eigen::MatrixXd& W = forms.at(n, s + 1);
        const Eigen::MatrixXd& W2 = forms.at(n, s + 2);
        t.reproduction_residual =
            std::max(t.reproduction_residual, (S * W - W2.middleCols(dir, s + 2)).norm());
      }
    }
  }
  return t;
}

}  // namespace assocfam
