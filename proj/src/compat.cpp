#include "assocfam/compat.hpp"

#include <algorithm>
#include <array>

#include "assocfam/errors.hpp"

namespace assocfam {

double op_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

namespace {

void record(EquationResidual& r, int s, int node, double v) {
  if (static_cast<int>(r.by_order.size()) <= s) r.by_order.resize(s + 1, 0.0);
  r.by_order[s] = std::max(r.by_order[s], v);
  if (v > r.max || r.argmax < 0) {
    r.max = std::max(r.max, v);
    r.argmax = node;
  }
}

}  // namespace

CompatReport compatibility_residuals(const NormalFlag& flag, const HigherFormTable& forms,
                                     const FrenetTensors& t) {
  CompatReport rep;
  const int tau = flag.tau;
  const int nn = static_cast<int>(t.omega_u.size());
  for (int n = 0; n < nn; ++n) {
    const Eigen::MatrixXd& Ou = t.omega_u[n];
    const Eigen::MatrixXd& Ov = t.omega_v[n];
    const Eigen::MatrixXd& dUOv = t.du_omega_v[n];
    const Eigen::MatrixXd& dVOu = t.dv_omega_u[n];
    auto blk = [&](const Eigen::MatrixXd& O, int i, int j) {
      return O.block(flag.offset(i), flag.offset(j), flag.dims[i], flag.dims[j]);
    };
    rep.flatness = std::max(rep.flatness, (dUOv - dVOu + Ou * Ov - Ov * Ou).norm());

    for (int s = 1; s <= tau; ++s) {
      Eigen::MatrixXd G = blk(dUOv, s, s) - blk(dVOu, s, s) + blk(Ou, s, s) * blk(Ov, s, s) -
                          blk(Ov, s, s) * blk(Ou, s, s) + blk(Ou, s, s - 1) * blk(Ov, s - 1, s) -
                          blk(Ov, s, s - 1) * blk(Ou, s - 1, s);
      if (s < tau) G += blk(Ou, s, s + 1) * blk(Ov, s + 1, s) - blk(Ov, s, s + 1) * blk(Ou, s + 1, s);
      record(rep.gengauss, s, n, op_norm(G));
    }
    for (int s = 0; s + 1 <= tau; ++s) {
      const Eigen::MatrixXd C = blk(dUOv, s + 1, s) - blk(dVOu, s + 1, s) +
                                blk(Ou, s + 1, s + 1) * blk(Ov, s + 1, s) -
                                blk(Ov, s + 1, s + 1) * blk(Ou, s + 1, s) +
                                blk(Ou, s + 1, s) * blk(Ov, s, s) - blk(Ov, s + 1, s) * blk(Ou, s, s);
      const Eigen::MatrixXd C2 = blk(dUOv, s, s + 1) - blk(dVOu, s, s + 1) +
                                 blk(Ou, s, s) * blk(Ov, s, s + 1) - blk(Ov, s, s) * blk(Ou, s, s + 1) +
                                 blk(Ou, s, s + 1) * blk(Ov, s + 1, s + 1) -
                                 blk(Ov, s, s + 1) * blk(Ou, s + 1, s + 1);
      const double c = op_norm(C), c2 = op_norm(C2);
      record(rep.gencodazzi, s, n, c);
      record(rep.gencodazzi2, s, n, c2);
      rep.codazzi_pair_gap = std::max(rep.codazzi_pair_gap, std::abs(c - c2));
    }
    for (int s = 0; s + 2 <= tau; ++s) {
      const Eigen::MatrixXd Y = blk(Ov, s + 2, s + 1) * blk(Ou, s + 1, s) - blk(Ou, s + 2, s + 1) * blk(Ov, s + 1, s);
      record(rep.sym, s, n, op_norm(Y));
    }
    for (int s = 1; s <= tau; ++s)
      for (int dir = 0; dir < 2; ++dir) {
        const Eigen::MatrixXd L = blk(dir == 0 ? Ou : Ov, s - 1, s);
        const Eigen::MatrixXd S = raising_from_forms(forms, n, s, dir);
        record(rep.second, s, n, op_norm(-L - S.transpose()));
      }
  }
  // Equations that have no instance at this tau still report a zero entry.
  for (EquationResidual* r : {&rep.gengauss, &rep.gencodazzi, &rep.gencodazzi2, &rep.sym, &rep.second})
    if (r->argmax < 0) r->argmax = 0;
  return rep;
}

namespace {

// Parallel transport along one edge of length h for dc/dt = -A c, with A the
// average of the endpoint coefficients (Cayley form, orthogonal for skew A).
Eigen::MatrixXd edge(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A1, double h) {
  const Eigen::MatrixXd A = 0.5 * h * (A0 + A1);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  return (I + 0.5 * A).partialPivLu().solve(I - 0.5 * A);
}

// Curvature estimate on a cell from the loop holonomy started at each of
// the four corners, skew part, averaged.
Eigen::MatrixXd cell_curvature(const std::array<Eigen::MatrixXd, 4>& Au,
                               const std::array<Eigen::MatrixXd, 4>& Av, double hu, double hv) {
  // Corners 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1).
  const Eigen::MatrixXd e01 = edge(Au[0], Au[1], hu), e12 = edge(Av[1], Av[2], hv);
  const Eigen::MatrixXd e23 = edge(Au[2], Au[3], -hu), e30 = edge(Av[3], Av[0], -hv);
  const std::array<Eigen::MatrixXd, 4> e{e01, e12, e23, e30};
  const Eigen::Index m = Au[0].rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (int c = 0; c < 4; ++c) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < 4; ++k) H = e[(c + k) % 4] * H;
    const Eigen::MatrixXd D = H - Eigen::MatrixXd::Identity(m, m);
    sum += 0.5 * (D - D.transpose());
  }
  return sum / (4.0 * hu * hv);
}

}  // namespace

CurvatureInvariance curvature_invariance(const NormalFlag& flag, const FrenetTensors& t,
                                         const ModifiedConnection& mc, const GridParams& grid,
                                         double tol_circle) {
  if (!(mc.circular_defect <= tol_circle))
    throw GeometryError(ErrorKind::PreconditionFailed,
                        "ellipse of order " + std::to_string(mc.ell) + " is not a circle");
  CurvatureInvariance out;
  out.by_bundle.assign(flag.tau + 1, 0.0);
  if (flag.tau < 1) return out;
  const int off = flag.offset(1);
  const int m = flag.frame_dim() - off;
  auto normal = [&](const Eigen::MatrixXd& O) -> Eigen::MatrixXd { return O.block(off, off, m, m); };
  for (int j = 0; j + 1 < grid.nv; ++j)
    for (int i = 0; i + 1 < grid.nu; ++i) {
      const std::array<int, 4> c{grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1),
                                 grid.node(i, j + 1)};
      std::array<Eigen::MatrixXd, 4> pu, pv, qu, qv;
      for (int k = 0; k < 4; ++k) {
        pu[k] = normal(t.omega_u[c[k]]);
        pv[k] = normal(t.omega_v[c[k]]);
        qu[k] = normal(mc.omega_u[c[k]]);
        qv[k] = normal(mc.omega_v[c[k]]);
      }
      const Eigen::MatrixXd Rp = cell_curvature(pu, pv, grid.hu(), grid.hv());
      const Eigen::MatrixXd Rq = cell_curvature(qu, qv, grid.hu(), grid.hv());
      const Eigen::MatrixXd diff = Rq - Rp;
      out.curvature_scale = std::max(out.curvature_scale, op_norm(Rp));
      const double d = op_norm(diff);
      if (d > out.max || out.argmax_cell < 0) {
        out.max = std::max(out.max, d);
        out.argmax_cell = c[0];
      }
      for (int s = 1; s <= flag.tau; ++s)
        out.by_bundle[s] = std::max(out.by_bundle[s], op_norm(diff.middleCols(flag.offset(s) - off, flag.dims[s])));
    }
  return out;
}

}  // namespace assocfam
