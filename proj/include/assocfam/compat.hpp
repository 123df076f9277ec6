#pragma once

#include <string>
#include <vector>

#include "assocfam/chart.hpp"
#include "assocfam/connection.hpp"
#include "assocfam/flag.hpp"

namespace assocfam {

struct EquationResidual {
  double max = 0.0;
  int argmax = -1;              // node
  std::vector<double> by_order; // index s
};

// Structure equations of the flag evaluated on X = d_u, Y = d_v at every
// node, as operator norms in the flag frames.
//   gengauss    curvature of D^s against the A S terms, s = 1..tau
//   gencodazzi  N_s -> N_{s+1} part, s = 0..tau-1
//   gencodazzi2 N_{s+1} -> N_s part (the transposed form)
//   sym         S^{s+1}_Y S^s_X = S^{s+1}_X S^s_Y, s = 0..tau-2
//   second      A^s_X = -(S^{s-1}_X)^T with S from the forms, s = 1..tau
struct CompatReport {
  EquationResidual gengauss, gencodazzi, gencodazzi2, sym, second;
  double flatness = 0.0;         // full dOmega + Omega ^ Omega
  double codazzi_pair_gap = 0.0; // | |gencodazzi| - |gencodazzi2| | per node
};

CompatReport compatibility_residuals(const NormalFlag& flag, const HigherFormTable& forms,
                                     const FrenetTensors& tensors);

struct CurvatureInvariance {
  double max = 0.0;
  int argmax_cell = -1;             // node at the cell's lower-left corner
  std::vector<double> by_bundle;    // index s of the source bundle N_s
  double curvature_scale = 0.0;     // max |R^perp| over cells
};

// R^theta - R^perp on the normal bundle, both estimated from the holonomy
// around every grid cell divided by its area.
CurvatureInvariance curvature_invariance(const NormalFlag& flag, const FrenetTensors& tensors,
                                         const ModifiedConnection& mc, const GridParams& grid,
                                         double tol_circle = 1e-6);

// Operator (spectral) norm.
double op_norm(const Eigen::MatrixXd& m);

}  // namespace assocfam
