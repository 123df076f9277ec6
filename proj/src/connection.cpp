#include "assocfam/connection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "assocfam/errors.hpp"

namespace assocfam {

namespace {

void check_order(const NormalFlag& flag, int ell, bool allow_any) {
  if (ell >= 1 && flag.substantial_dim < 6)
    throw GeometryError(ErrorKind::AmbientTooSmall,
                        "ell >= 1 needs substantial dimension >= 6, got " + std::to_string(flag.substantial_dim));
  const int top = allow_any ? flag.tau - 1 : flag.tau_o - 1;
  if (ell < 0 || (ell > 0 && ell > top))
    throw GeometryError(ErrorKind::OrderOutOfRange,
                        "ell = " + std::to_string(ell) + " outside [0, " + std::to_string(std::max(top, 0)) + "]");
}

// Replaces the (ell+1, ell) and (ell, ell+1) blocks in place.
void modify(Eigen::MatrixXd& O, const NormalFlag& flag, int ell, const Eigen::Matrix2d& R,
            const Eigen::Matrix2d& Rinv) {
  if (ell + 1 > flag.tau) return;
  const int a = flag.offset(ell), b = flag.offset(ell + 1), db = flag.dims[ell + 1];
  const Eigen::MatrixXd S = O.block(b, a, db, 2) * R;
  const Eigen::MatrixXd L = Rinv * O.block(a, b, 2, db);
  O.block(b, a, db, 2) = S;
  O.block(a, b, 2, db) = L;
}

}  // namespace

ModifiedConnection modified_connection(const NormalFlag& flag, const FrenetTensors& tensors,
                                       const ComplexStructures& cs, int ell, double theta,
                                       const ConnectionOptions& opt) {
  check_order(flag, ell, opt.allow_any_order);
  if (ell > cs.tau_o) throw GeometryError(ErrorKind::OrderOutOfRange, "no complex structure at this order");
  ModifiedConnection mc;
  mc.ell = ell;
  mc.theta = theta;
  mc.orientation = cs.orientation;
  mc.circular_defect = cs.max_orth_defect[ell];
  if (opt.check_circular && !(mc.circular_defect <= opt.tol_circle))
    throw GeometryError(ErrorKind::NotCircular, "ellipse of order " + std::to_string(ell) +
                                                    " is not a circle (defect " +
                                                    std::to_string(mc.circular_defect) + ")");
  const int nn = static_cast<int>(tensors.omega_u.size());
  mc.omega_u = tensors.omega_u;
  mc.omega_v = tensors.omega_v;
  mc.R.resize(nn);
  const double c = std::cos(theta), s = std::sin(theta);
  for (int n = 0; n < nn; ++n) {
    const Eigen::Matrix2d& J = cs.Js[n][ell];
    mc.R[n] = c * Eigen::Matrix2d::Identity() + s * J;
    const Eigen::Matrix2d Rinv = c * Eigen::Matrix2d::Identity() - s * J;
    modify(mc.omega_u[n], flag, ell, mc.R[n], Rinv);
    modify(mc.omega_v[n], flag, ell, mc.R[n], Rinv);
    mc.metric_residual = std::max({mc.metric_residual, (mc.omega_u[n] + mc.omega_u[n].transpose()).norm(),
                                   (mc.omega_v[n] + mc.omega_v[n].transpose()).norm()});
  }
  return mc;
}

std::pair<MJet, MJet> modified_omega_jets(const Chart& chart, const NormalFlag& flag, int node,
                                          int ell, double theta, int orientation) {
  auto [Ou, Ov] = omega_jets(flag, node);
  if (ell + 1 > flag.tau || theta == 0.0) return {Ou, Ov};
  const int ord = mjet_order(Ou);
  const StructureJets sj = structure_jets(chart, flag, node, ord, orientation, ell);
  const MJet& J = sj.Js[ell];
  const MJet I = mjet_identity(2, ord);
  const MJet R = mjet_add(mjet_scale(Jet(ord, std::cos(theta)), I),
                          mjet_scale(Jet(ord, std::sin(theta)), J), 1.0);
  const MJet Rinv = mjet_add(mjet_scale(Jet(ord, std::cos(theta)), I),
                             mjet_scale(Jet(ord, std::sin(theta)), J), -1.0);
  const int a = flag.offset(ell), b = flag.offset(ell + 1), db = flag.dims[ell + 1];
  for (MJet* O : {&Ou, &Ov}) {
    const MJet S = mjet_mul(mjet_block(*O, b, a, db, 2), R);
    const MJet L = mjet_mul(Rinv, mjet_block(*O, a, b, 2, db));
    for (int i = 0; i < static_cast<int>(O->size()); ++i) {
      (*O)[i].block(b, a, db, 2) = S[i];
      (*O)[i].block(a, b, 2, db) = L[i];
    }
  }
  return {Ou, Ov};
}

}  // namespace assocfam
