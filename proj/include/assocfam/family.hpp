#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/analysis.hpp"
#include "assocfam/chart.hpp"
#include "assocfam/connection.hpp"

namespace assocfam {

struct FamilyOptions {
  // Max |H - I| of the transport around a grid cell.
  double holonomy_tol = 1e-6;
  double tol_circle = 1e-6;
};

// Ambient frame of the integrated surface: column k at a node is the image
// of flag column k of the original surface.
struct FrameField {
  std::vector<Eigen::MatrixXd> F;
  std::vector<MJet> jets;       // F(n) Phi_n: Taylor jet of the frame about each node
  Eigen::VectorXd anchor;       // position at the base node
  double orthogonality = 0.0;   // max |F^T F - I|
};

struct FamilyResult {
  int ell = 0;
  double theta = 0.0;
  Chart chart;
  FrameField frame;
  double holonomy = 0.0;
  int holonomy_cell = -1;
};

// Integrates dF = F Omega^theta and dx = F theta from the base node.
// Each node carries the Taylor solution of the frame system; neighbours are
// joined at the edge midpoint, so the transport error is set by the jet
// order rather than by the grid step.
FamilyResult integrate_family(const Chart& chart, const NormalFlag& flag, const ModifiedConnection& mc,
                              const FamilyOptions& opt = {});

// ell = 0: alpha_theta(X, Y) = alpha(J_theta X, Y).
FamilyResult standard_minimal_family(const Chart& chart, const NormalFlag& flag,
                                     const ComplexStructures& cs, double theta,
                                     const FamilyOptions& opt = {});

// Convenience: gates and builds the connection from an analysis.
FamilyResult family_member(const SurfaceAnalysis& g, int ell, double theta, const FamilyOptions& opt = {},
                           const ConnectionOptions& copt = {});

struct FamilyVerdict {
  double metric_residual = 0.0;         // max |G_theta - G| / |G|
  std::vector<double> form_residual;    // index s; s <= ell + 1
  std::vector<double> rotated_residual; // index s; s >= ell + 2
  double normal_curvature_residual = 0.0;
  double max_form = 0.0, max_rotated = 0.0;
};

// Compares the integrated surface with the original through the frame map.
FamilyVerdict verify_family(const SurfaceAnalysis& g, const SurfaceAnalysis& g_theta,
                            const FrameField& frame, int ell, double theta);

struct CongruenceResult {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd translation;
  bool reflection = false;
  double residual = 0.0;  // RMS point distance after alignment
};

// Orthogonal Procrustes over the grid points; sphere charts are aligned
// about the origin without translation.
CongruenceResult congruence_test(const Chart& a, const Chart& b);
// Columns of a and b are corresponding points; translate = false aligns
// about the origin.
CongruenceResult congruence_points(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool translate);

}  // namespace assocfam
