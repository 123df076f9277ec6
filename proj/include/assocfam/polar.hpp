#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/chart.hpp"
#include "assocfam/flag.hpp"

namespace assocfam {

enum class PolarKind { OddSphericalNormal, EvenIntegrated };

const char* to_string(PolarKind k);

struct PolarOptions {
  // Max relative cell circulation of dh accepted by the even branch.
  double closedness_tol = 1e-3;
  // Weight of the first-difference penalty on the coefficient field M.
  double smoothing = 1e-6;
  int jet_order = 5;      // jets of the even polar from its samples
  int accuracy = 4;       // finite-difference accuracy for those jets
  bool check_elliptic = true;
  // Relative third singular value of the second fundamental form map
  // accepted as zero by the ellipticity check.
  double elliptic_tol = 1e-2;
  std::optional<PolarKind> kind;  // unset: chosen from the last bundle
};

struct PolarSurface {
  PolarKind kind = PolarKind::OddSphericalNormal;
  Chart chart;
  // Even branch: max |circulation of dh| / (cell area * mean |dh|).
  double closedness_residual = 0.0;
  // Max relative component of h_u, h_v outside the expected bundle.
  double span_residual = 0.0;
  bool elliptic = false;
  double ellipticity_residual = 0.0;
  std::string elliptic_note;  // why the check failed, if it did
  // Even branch: coefficient field, dh = e (a du + b dv) with e the N_tau frame.
  std::vector<Eigen::Matrix2d> M;
};

// Odd case: the continued unit section of the last (one-dimensional) normal
// bundle, as a sphere chart. Even case: a surface with dh in N_tau, found by
// least squares on the cell circulations of e M with M(base) pinned.
PolarSurface polar_surface(const Chart& chart, const NormalFlag& flag, const PolarOptions& opt = {});

}  // namespace assocfam
