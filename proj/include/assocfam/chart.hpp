#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/jet.hpp"

namespace assocfam {

enum class AmbientKind { Euclidean, Sphere };

// Flat coordinate space R^M; Sphere means the unit sphere S^{M-1} inside it.
struct AmbientSpace {
  AmbientKind kind = AmbientKind::Euclidean;
  int flat_dim = 3;

  static AmbientSpace euclidean(int m) { return {AmbientKind::Euclidean, m}; }
  static AmbientSpace sphere(int m) { return {AmbientKind::Sphere, m}; }

  int curvature() const { return kind == AmbientKind::Sphere ? 1 : 0; }
  bool is_sphere() const { return kind == AmbientKind::Sphere; }
  void validate() const;
};

struct GridParams {
  double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
  int nu = 64, nv = 64;

  double hu() const { return (u1 - u0) / (nu - 1); }
  double hv() const { return (v1 - v0) / (nv - 1); }
  double u(int iu) const { return u0 + iu * hu(); }
  double v(int iv) const { return v0 + iv * hv(); }
  int nodes() const { return nu * nv; }
  int node(int iu, int iv) const { return iv * nu + iu; }
  int iu(int node) const { return node % nu; }
  int iv(int node) const { return node / nu; }
  int base_node() const { return node(nu / 2, nv / 2); }
  void validate() const;
};

enum class ChartSource { AnalyticGallery, Sampled, Integrated, Derived };

const char* to_string(ChartSource s);

// Grid of truncated position jets; immutable once built.
struct Chart {
  AmbientSpace ambient;
  GridParams grid;
  int order = 0;
  ChartSource source = ChartSource::AnalyticGallery;
  int stencil_accuracy = 0;  // finite-difference accuracy order for sampled charts
  std::vector<VJet> jets;    // per node: flat_dim x jet_size(order)

  int nodes() const { return grid.nodes(); }
  int dim() const { return ambient.flat_dim; }
  Eigen::VectorXd position(int node) const { return jets[node].col(0); }
  // d^a_u d^b_v of the position at a node.
  Eigen::VectorXd partial(int node, int a, int b) const;
  // Jet of d^a_u d^b_v position, of order `order - a - b`.
  VJet partial_jet(int node, int a, int b) const { return vjet_derivative(jets[node], a, b); }
};

// Projects sphere charts onto the unit sphere (jet-wise normalization) and
// checks the immersion; throws RankDeficient / SphereViolation.
void finalize_chart(Chart& chart);

// Normalizes a vector jet to unit length in jet arithmetic.
VJet normalize_jet(const VJet& x);

std::vector<Eigen::Matrix2d> induced_metric(const Chart& chart);
Eigen::Matrix2d induced_metric_at(const Chart& chart, int node);

// Builds jets from sampled positions by tensor-product finite differences
// with the given accuracy order (>= 4).
Chart chart_from_samples(const AmbientSpace& ambient, const GridParams& grid,
                         const std::vector<Eigen::VectorXd>& positions, int order,
                         int accuracy = 4);

// CSV `u,v,x1,...,xM`, row-major over the grid (u fastest).
Chart read_sampled_csv(const std::string& path, const AmbientSpace& ambient, int order,
                       int accuracy = 4);
void write_point_cloud_csv(const Chart& chart, const std::string& path);

// Finite-difference weights (Fornberg) for derivatives 0..m at x0.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int m);

// Max over neighbouring node pairs of |Taylor-shifted jet - neighbour jet|,
// compared on coefficients up to `compare_order`.
double taylor_shift_residual(const Chart& chart, int compare_order);

}  // namespace assocfam
