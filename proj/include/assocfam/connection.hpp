#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/chart.hpp"
#include "assocfam/elliptic.hpp"
#include "assocfam/flag.hpp"

namespace assocfam {

struct ConnectionOptions {
  double tol_circle = 1e-6;
  // Skip the NotCircular gate (the defect is still recorded).
  bool check_circular = true;
  // Accept ell up to tau - 1 instead of tau_o - 1.
  bool allow_any_order = false;
};

// Frame connection of the family member at level ell and angle theta: the
// (ell+1, ell) block of Omega becomes S R_theta and the (ell, ell+1) block
// R_{-theta} L, where R_theta = cos(theta) I + sin(theta) J_ell. For ell = 0
// this is the tangential change alpha(J_theta X, Y).
struct ModifiedConnection {
  int ell = 0;
  double theta = 0.0;
  int orientation = 1;
  double circular_defect = 0.0;  // max orth defect of J_ell
  std::vector<Eigen::MatrixXd> omega_u, omega_v;
  std::vector<Eigen::Matrix2d> R;
  double metric_residual = 0.0;  // max |Omega + Omega^T|
};

ModifiedConnection modified_connection(const NormalFlag& flag, const FrenetTensors& tensors,
                                       const ComplexStructures& cs, int ell, double theta,
                                       const ConnectionOptions& opt = {});

// Jets of the modified coefficients at one node, of order frame_order - 1.
std::pair<MJet, MJet> modified_omega_jets(const Chart& chart, const NormalFlag& flag, int node,
                                          int ell, double theta, int orientation);

}  // namespace assocfam
