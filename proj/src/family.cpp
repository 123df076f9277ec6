#include "assocfam/family.hpp"

#include <algorithm>
#include <cmath>

#include "assocfam/errors.hpp"

namespace assocfam {

namespace {

// Taylor solution of dPhi = Phi Omega_X, Phi(0) = I, to the given order.
MJet frame_solution(const MJet& Ou, const MJet& Ov, int order) {
  const int k = static_cast<int>(Ou[0].rows());
  MJet P = mjet_zero(k, k, order);
  P[0].setIdentity();
  const int oo = mjet_order(Ou);
  for (int d = 1; d <= order; ++d)
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      const bool along_u = a >= 1;
      const int ta = along_u ? a - 1 : 0, tb = along_u ? b : b - 1;
      const MJet& O = along_u ? Ou : Ov;
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
      for (int i1 = 0; i1 <= ta; ++i1)
        for (int j1 = 0; j1 <= tb; ++j1) {
          const int i2 = ta - i1, j2 = tb - j1;
          if (i2 + j2 > oo) continue;
          sum.noalias() += P[jet_index(i1, j1)] * O[jet_index(i2, j2)];
        }
      P[jet_index(a, b)] = sum / static_cast<double>(along_u ? a : b);
    }
  return P;
}

// Taylor solution of dPsi = Pu du + Pv dv with Psi(0) = 0.
MJet antiderivative(const MJet& Pu, const MJet& Pv) {
  const int ord = mjet_order(Pu) + 1;
  MJet r = mjet_zero(static_cast<int>(Pu[0].rows()), static_cast<int>(Pu[0].cols()), ord);
  for (int d = 1; d <= ord; ++d)
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      r[jet_index(a, b)] = a >= 1 ? Eigen::MatrixXd(Pu[jet_index(a - 1, b)] / a)
                                  : Eigen::MatrixXd(Pv[jet_index(0, b - 1)] / b);
    }
  return r;
}

Eigen::MatrixXd polar_part(const Eigen::MatrixXd& F) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

struct NodeSolution {
  MJet Phi;
  MJet Psi;  // Euclidean only
};

FamilyResult integrate(const Chart& chart, const NormalFlag& flag, int ell, double theta, int orientation,
                       const FamilyOptions& opt) {
  const GridParams& g = chart.grid;
  const int nn = chart.nodes();
  const bool sphere = chart.ambient.is_sphere();
  const int fo = flag.frame_order;
  if (fo < 2) throw GeometryError(ErrorKind::JetOrderTooLow, "family integration needs jet order >= tau + 3");

  std::vector<NodeSolution> sol(nn);
  for (int n = 0; n < nn; ++n) {
    const auto [Ou, Ov] = modified_omega_jets(chart, flag, n, ell, theta, orientation);
    sol[n].Phi = frame_solution(Ou, Ov, fo);
    if (!sphere) {
      const MJet& E = flag.frame[n];
      auto theta_jet = [&](int a, int b) {
        return mjet_mul(E, vjet_to_mjet(vjet_truncated(chart.partial_jet(n, a, b), fo)), true);
      };
      sol[n].Psi = antiderivative(mjet_mul(sol[n].Phi, theta_jet(1, 0)), mjet_mul(sol[n].Phi, theta_jet(0, 1)));
    }
  }

  const double hu = g.hu(), hv = g.hv();
  // Transport F(q) = F(p) T(p, q) across the edge midpoint.
  auto edge = [&](int p, int q, double du, double dv) -> Eigen::MatrixXd {
    const Eigen::MatrixXd A = mjet_eval(sol[p].Phi, 0.5 * du, 0.5 * dv);
    const Eigen::MatrixXd B = mjet_eval(sol[q].Phi, -0.5 * du, -0.5 * dv);
    return B.transpose().partialPivLu().solve(A.transpose()).transpose();
  };

  FamilyResult res;
  res.ell = ell;
  res.theta = theta;
  FrameField& ff = res.frame;
  ff.F.assign(nn, Eigen::MatrixXd());
  std::vector<Eigen::VectorXd> pos(nn);
  const int base = g.base_node();
  ff.F[base] = flag.E(base);
  pos[base] = chart.position(base);
  ff.anchor = pos[base];

  auto step = [&](int p, int q, double du, double dv) {
    ff.F[q] = polar_part(ff.F[p] * edge(p, q, du, dv));
    if (!sphere) {
      pos[q] = pos[p] + ff.F[p] * mjet_eval(sol[p].Psi, 0.5 * du, 0.5 * dv) -
               ff.F[q] * mjet_eval(sol[q].Psi, -0.5 * du, -0.5 * dv);
    } else {
      pos[q] = ff.F[q].col(0);
    }
  };
  const int bu = g.iu(base), bv = g.iv(base);
  for (int i = bu + 1; i < g.nu; ++i) step(g.node(i - 1, bv), g.node(i, bv), hu, 0.0);
  for (int i = bu - 1; i >= 0; --i) step(g.node(i + 1, bv), g.node(i, bv), -hu, 0.0);
  for (int i = 0; i < g.nu; ++i) {
    for (int j = bv + 1; j < g.nv; ++j) step(g.node(i, j - 1), g.node(i, j), 0.0, hv);
    for (int j = bv - 1; j >= 0; --j) step(g.node(i, j + 1), g.node(i, j), 0.0, -hv);
  }

  const int k = flag.frame_dim();
  for (int n = 0; n < nn; ++n)
    ff.orthogonality =
        std::max(ff.orthogonality, (ff.F[n].transpose() * ff.F[n] - Eigen::MatrixXd::Identity(k, k)).norm());

  for (int j = 0; j + 1 < g.nv; ++j)
    for (int i = 0; i + 1 < g.nu; ++i) {
      const int c0 = g.node(i, j), c1 = g.node(i + 1, j), c2 = g.node(i + 1, j + 1), c3 = g.node(i, j + 1);
      const Eigen::MatrixXd H = edge(c0, c1, hu, 0) * edge(c1, c2, 0, hv) * edge(c2, c3, -hu, 0) * edge(c3, c0, 0, -hv);
      const double d = (H - Eigen::MatrixXd::Identity(k, k)).norm();
      if (d > res.holonomy || res.holonomy_cell < 0) {
        res.holonomy = std::max(res.holonomy, d);
        res.holonomy_cell = c0;
      }
    }
  if (!(res.holonomy <= opt.holonomy_tol))
    throw GeometryError(ErrorKind::HolonomyTooLarge,
                        "cell holonomy " + std::to_string(res.holonomy) + " exceeds " +
                            std::to_string(opt.holonomy_tol),
                        res.holonomy_cell);

  // Jets of the new surface: x(n) + F(n) Psi_n, or F(n) Phi_n e_0 on the sphere.
  Chart& out = res.chart;
  out.ambient = chart.ambient;
  out.grid = g;
  out.source = ChartSource::Integrated;
  out.order = std::min(sphere ? fo : fo + 1, kMaxJetOrder);
  out.jets.resize(nn);
  for (int n = 0; n < nn; ++n) {
    VJet x = VJet::Zero(chart.dim(), jet_size(out.order));
    for (int i = 0; i < jet_size(out.order); ++i)
      x.col(i) = sphere ? Eigen::VectorXd(ff.F[n] * sol[n].Phi[i].col(0)) : Eigen::VectorXd(ff.F[n] * sol[n].Psi[i]);
    if (!sphere) x.col(0) = pos[n];
    out.jets[n] = std::move(x);
  }
  finalize_chart(out);
  ff.jets.resize(nn);
  for (int n = 0; n < nn; ++n) {
    ff.jets[n] = sol[n].Phi;
    for (auto& m : ff.jets[n]) m = ff.F[n] * m;
  }
  return res;
}

}  // namespace

FamilyResult integrate_family(const Chart& chart, const NormalFlag& flag, const ModifiedConnection& mc,
                              const FamilyOptions& opt) {
  return integrate(chart, flag, mc.ell, mc.theta, mc.orientation, opt);
}

FamilyResult standard_minimal_family(const Chart& chart, const NormalFlag& flag, const ComplexStructures& cs,
                                     double theta, const FamilyOptions& opt) {
  if (!(cs.max_orth_defect[0] <= opt.tol_circle))
    throw GeometryError(ErrorKind::NotMinimal,
                        "order-0 ellipse is not a circle (defect " + std::to_string(cs.max_orth_defect[0]) + ")");
  return integrate(chart, flag, 0, theta, cs.orientation, opt);
}

FamilyResult family_member(const SurfaceAnalysis& g, int ell, double theta, const FamilyOptions& opt,
                           const ConnectionOptions& copt) {
  if (ell == 0) return standard_minimal_family(g.chart, g.flag, g.cs, theta, opt);
  const ModifiedConnection mc = modified_connection(g.flag, g.tensors, g.cs, ell, theta, copt);
  return integrate_family(g.chart, g.flag, mc, opt);
}

namespace {

// Normal curvature dN_v/du - dN_u/dv + [N_u, N_v] of the normal block.
Eigen::MatrixXd normal_curvature(const NormalFlag& flag, const FrenetTensors& t, int n) {
  const int off = flag.offset(1), m = flag.frame_dim() - off;
  auto nb = [&](const Eigen::MatrixXd& O) -> Eigen::MatrixXd { return O.block(off, off, m, m); };
  const Eigen::MatrixXd Nu = nb(t.omega_u[n]), Nv = nb(t.omega_v[n]);
  return nb(t.du_omega_v[n]) - nb(t.dv_omega_u[n]) + Nu * Nv - Nv * Nu;
}

}  // namespace

FamilyVerdict verify_family(const SurfaceAnalysis& g, const SurfaceAnalysis& gt, const FrameField& frame,
                            int ell, double theta) {
  if (g.flag.dims != gt.flag.dims) throw GeometryError(ErrorKind::FlagMismatch, "flag dimensions differ");
  if (g.chart.nodes() != gt.chart.nodes()) throw GeometryError(ErrorKind::GridMismatch, "grids differ");
  FamilyVerdict v;
  const int top = g.flag.tau + 1;
  v.form_residual.assign(top + 1, 0.0);
  v.rotated_residual.assign(top + 1, 0.0);
  const double c = std::cos(theta), s = std::sin(theta);
  const bool curv = g.has_tensors && gt.has_tensors && g.flag.tau >= 1;
  for (int n = 0; n < g.chart.nodes(); ++n) {
    const Eigen::Matrix2d G = induced_metric_at(g.chart, n), Gt = induced_metric_at(gt.chart, n);
    v.metric_residual = std::max(v.metric_residual, (Gt - G).norm() / G.norm());
    const Eigen::MatrixXd& F = frame.F[n];
    for (int k = 2; k <= top; ++k) {
      const int d = g.flag.dims[k - 1];
      Eigen::MatrixXd D(gt.chart.dim(), k + 1);
      for (int b = 0; b <= k; ++b) D.col(b) = gt.chart.partial(n, k - b, b);
      const Eigen::MatrixXd mine = F.middleCols(g.flag.offset(k - 1), d).transpose() * D;
      Eigen::MatrixXd ref = g.forms.at(n, k);
      const bool rotated = k >= ell + 2;
      if (rotated) {
        if (k - 1 > g.cs.tau_o || d != 2) continue;  // no complex structure on the last odd bundle
        ref = (c * Eigen::Matrix2d::Identity() + s * g.cs.Js[n][k - 1]) * ref;
      }
      const double r = (mine - ref).norm() / std::max(ref.norm(), 1e-300);
      (rotated ? v.rotated_residual : v.form_residual)[k] =
          std::max((rotated ? v.rotated_residual : v.form_residual)[k], r);
    }
    if (curv) {
      // Curvature of g_theta in the integrated frame against that of g.
      const int off = g.flag.offset(1), m = g.flag.frame_dim() - off;
      const Eigen::MatrixXd Q = F.rightCols(m).transpose() * gt.flag.E(n).rightCols(m);
      const Eigen::MatrixXd Rt = Q * normal_curvature(gt.flag, gt.tensors, n) * Q.transpose();
      const Eigen::MatrixXd R = normal_curvature(g.flag, g.tensors, n);
      v.normal_curvature_residual =
          std::max(v.normal_curvature_residual, (Rt - R).norm() / std::max(R.norm(), 1.0));
    }
  }
  for (double x : v.form_residual) v.max_form = std::max(v.max_form, x);
  for (double x : v.rotated_residual) v.max_rotated = std::max(v.max_rotated, x);
  return v;
}

CongruenceResult congruence_points(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, bool translate) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw GeometryError(ErrorKind::GridMismatch, "point sets differ in size");
  const int n = static_cast<int>(A.cols()), m = static_cast<int>(A.rows());
  Eigen::VectorXd ca = Eigen::VectorXd::Zero(m), cb = Eigen::VectorXd::Zero(m);
  if (translate) {
    ca = A.rowwise().mean();
    cb = B.rowwise().mean();
  }
  const Eigen::MatrixXd A0 = A.colwise() - ca, B0 = B.colwise() - cb;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B0 * A0.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  CongruenceResult r;
  r.rotation = svd.matrixU() * svd.matrixV().transpose();
  r.reflection = r.rotation.determinant() < 0.0;
  r.translation = cb - r.rotation * ca;
  r.residual = std::sqrt(((r.rotation * A).colwise() + r.translation - B).squaredNorm() / n);
  return r;
}

CongruenceResult congruence_test(const Chart& a, const Chart& b) {
  if (a.nodes() != b.nodes() || a.dim() != b.dim() || a.ambient.kind != b.ambient.kind)
    throw GeometryError(ErrorKind::GridMismatch, "charts are not on the same grid and ambient");
  Eigen::MatrixXd A(a.dim(), a.nodes()), B(b.dim(), b.nodes());
  for (int i = 0; i < a.nodes(); ++i) {
    A.col(i) = a.position(i);
    B.col(i) = b.position(i);
  }
  return congruence_points(A, B, !a.ambient.is_sphere());
}

}  // namespace assocfam
