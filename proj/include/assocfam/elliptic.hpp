#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/chart.hpp"
#include "assocfam/flag.hpp"

namespace assocfam {

struct EllipticOptions {
  int orientation = 1;  // +1: (d_u, J d_u) positively oriented; -1 flips J
  bool hard = true;     // throw NotElliptic instead of reporting it
};

struct ComplexStructures {
  int tau_o = 0;
  int orientation = 1;
  bool elliptic = true;
  int not_elliptic_node = -1;
  std::vector<Eigen::Matrix2d> J;                // coordinate basis
  std::vector<std::vector<Eigen::Matrix2d>> Js;  // [node][s], s = 0..tau_o; s = 0 is J in the N_0 frame
  std::vector<Eigen::Vector2d> Z;                // coordinate components
  std::vector<std::vector<double>> orth_defect;  // max |sigma_i - 1| of J_s
  // 1 - sqrt(sigma_min / sigma_max); equals the ellipse circular defect.
  std::vector<std::vector<double>> orth_defect_normalized;
  double ellipticity_residual = 0.0;  // |alpha(X,X) + alpha(JX,JX)| / |alpha|
  double square_residual = 0.0;       // |J^2 + I|
  double relation_residual = 0.0;     // J_s alpha^{s+1}(X, ...) vs alpha^{s+1}(JX, ...)
  std::vector<double> max_orth_defect;  // per s
};

ComplexStructures detect_ellipticity(const Chart& chart, const NormalFlag& flag,
                                     const HigherFormTable& forms, const EllipticOptions& opt = {});

// Jets of J (coordinate basis), J in the N_0 frame and J_s (s = 1..max_s) at a node.
struct StructureJets {
  MJet J;
  std::vector<MJet> Js;  // index s; Js[0] is the N_0 frame version
};
StructureJets structure_jets(const Chart& chart, const NormalFlag& flag, int node, int order,
                             int orientation, int max_s);

struct EllipseNode {
  Eigen::VectorXd center;
  double a = 0.0, b = 0.0;
  double defect = 0.0;
  double other_modes = 0.0;  // energy outside the ellipse mode, relative to a
  bool degenerate = false;
};

struct EllipseReport {
  int max_order = 0;
  std::vector<std::vector<EllipseNode>> nodes;  // [node][s]
  std::vector<double> max_defect, min_defect;
  std::vector<int> degenerate_count;
  double max_criterion_gap = 0.0;  // |circular defect - normalized orth defect|
  double max_other_modes = 0.0;
};

EllipseReport curvature_ellipses(const Chart& chart, const NormalFlag& flag,
                                 const HigherFormTable& forms, const ComplexStructures& cs);

// CSV `u,v,order,center_norm,semi_a,semi_b,defect`.
void write_ellipse_csv(const Chart& chart, const EllipseReport& rep, const std::string& path);

struct RotationField {
  double phi = 0.0;
  int order = 0;
  std::vector<Eigen::Matrix2d> R;
};

RotationField rotation_field(const ComplexStructures& cs, int s, double phi);

struct TransportResiduals {
  double js = 0.0, jss = 0.0, one0 = 0.0, two0 = 0.0;
  std::vector<double> js_by_order, jss_by_order, one0_by_order, two0_by_order;
};

TransportResiduals transport_identity_residuals(const NormalFlag& flag, const FrenetTensors& tensors,
                                                const ComplexStructures& cs, double phi = 0.7);

}  // namespace assocfam
