#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/chart.hpp"
#include "assocfam/jet.hpp"

namespace assocfam {

struct FlagOptions {
  double rank_tol = 1e-6;
  // Relative tolerance for derivative components outside the osculating space.
  double drift_tol = 1e-6;
};

// Osculating flag N_0 + N_1 + ... + N_tau with orthonormal frame jets.
//
// Frame columns are ordered block by block; for sphere charts column 0 is
// the position vector and N_s starts at offset(s).
struct NormalFlag {
  std::vector<int> dims;
  int tau = 0;
  int tau_o = 0;
  int substantial_dim = 0;
  bool sphere = false;
  int frame_order = 0;
  double rank_tol = 1e-6;
  // Pivot monomials used to span each frame column (after the position).
  std::vector<Monomial> pivots;
  // Singular values of the projected derivative matrices at the base node.
  std::vector<std::vector<double>> base_singular_values;
  std::vector<MJet> frame;  // per node: M x frame_dim

  int frame_dim() const { return substantial_dim + (sphere ? 1 : 0); }
  int offset(int s) const {
    int o = sphere ? 1 : 0;
    for (int j = 0; j < s; ++j) o += dims[j];
    return o;
  }
  const Eigen::MatrixXd& E(int node) const { return frame[node][0]; }
  Eigen::MatrixXd block(int node, int s) const { return E(node).middleCols(offset(s), dims[s]); }
};

NormalFlag build_flag(const Chart& chart, const FlagOptions& opt = {});

// alpha^s on coordinate monomials, s = 2..tau+1, as coordinates in the N_{s-1}
// frame. Column b holds alpha^s(d_u^{s-b} d_v^b). Order 1 holds the
// coordinates of x_u, x_v in the N_0 frame.
struct HigherFormTable {
  int max_order = 1;
  std::vector<std::vector<Eigen::MatrixXd>> coords;  // [node][s], s = 0 unused
  double drift = 0.0;                                // max relative leak outside osc space

  const Eigen::MatrixXd& at(int node, int s) const { return coords[node][s]; }
};

HigherFormTable higher_forms(const Chart& chart, const NormalFlag& flag,
                             const FlagOptions& opt = {});

// Multilinear evaluation of a stored symmetric form on coordinate vectors.
Eigen::VectorXd eval_form(const Eigen::MatrixXd& coords, const std::vector<Eigen::Vector2d>& args);

// Ambient connection in the flag frame: dE = E Omega_X, with Omega
// antisymmetric. Block [s-1][s] = -A^s, [s][s] = D^s, [s+1][s] = S^s.
struct FrenetTensors {
  std::vector<Eigen::MatrixXd> omega_u, omega_v;
  std::vector<Eigen::MatrixXd> du_omega_v, dv_omega_u;
  // Frame coordinates of x_u and x_v.
  std::vector<Eigen::VectorXd> theta_u, theta_v;
  double duality_residual = 0.0;        // A from the frame against S from the forms
  double reproduction_residual = 0.0;   // S^s alpha^{s+1} vs alpha^{s+2}
  double reconstruction_residual = 0.0; // dE - E Omega
  double orthogonality_residual = 0.0;  // E^T E - I
  double antisymmetry_residual = 0.0;
};

FrenetTensors frenet_tensors(const Chart& chart, const NormalFlag& flag,
                             const HigherFormTable& forms);

// Jets of Omega_u, Omega_v at a node (order frame_order - 1).
std::pair<MJet, MJet> omega_jets(const NormalFlag& flag, int node);

// Raising map S^{s-1}_X : N_{s-1} -> N_s recovered from the forms alone by
// least squares on S_X alpha^s(m) = alpha^{s+1}(X m). dir 0 = d_u, 1 = d_v.
Eigen::MatrixXd raising_from_forms(const HigherFormTable& forms, int node, int s, int dir);

}  // namespace assocfam
