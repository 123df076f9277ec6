#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/analysis.hpp"
#include "assocfam/chart.hpp"
#include "assocfam/connection.hpp"
#include "assocfam/family.hpp"
#include "assocfam/gallery.hpp"

namespace assocfam {

// Scalar function omega on the parameter domain.
struct ScalarField {
  enum class Kind { Zero, Polynomial, Height, Sampled };
  Kind kind = Kind::Zero;
  std::vector<PolyTerm> poly;  // Polynomial: sum coef u^a v^b
  Eigen::VectorXd height;      // Height: omega = <height, g>
  Chart samples;               // Sampled: one-component chart on the same grid

  static ScalarField zero() { return {}; }
  static ScalarField polynomial(std::vector<PolyTerm> terms);
  static ScalarField height_function(const Eigen::VectorXd& a);
  // Finite-difference jets of the given node values.
  static ScalarField sampled(const GridParams& grid, const std::vector<double>& values, int order = 6);

  Jet jet(const Chart& g, int node, int order) const;
};

const char* to_string(ScalarField::Kind k);

struct CrossSectionOptions {
  // Relative residual of the gamma_1 least-squares solve.
  double solve_tol = 1e-7;
  // The parametrization needs a circular ellipse of order ell.
  double tol_circle = 1e-6;
  bool check_circular = true;
};

// h = c omega g + grad omega + gamma_0 + gamma_1 + ... + gamma_ell.
struct CrossSectionData {
  int ell = 1;
  int c = 0;  // ambient curvature of g
  ScalarField omega;
  Eigen::VectorXd gamma0;                     // coordinates in the Lambda_ell frame
  std::vector<Eigen::VectorXd> gamma_extra;   // gamma_j in the N_j frame, j = 2..ell
  std::vector<Eigen::VectorXd> gamma1;        // per node, N_1 frame coordinates
  std::vector<VJet> h;                        // per node
  int order = 0;                              // jet order of h
  double solve_residual = 0.0;
  // Max relative component of dh in N_0 + ... + N_{ell-1} (and along g).
  double section_residual = 0.0;
};

// gamma_1 solves <alpha(X, Y), gamma_1> = Hess omega(X, Y) + c omega <X, Y>
// in the induced metric, by least squares over the N_1 fibre.
CrossSectionData cross_section(const SurfaceAnalysis& g, const ScalarField& omega, const Eigen::VectorXd& gamma0,
                               int ell, const std::vector<Eigen::VectorXd>& gamma_extra = {},
                               const CrossSectionOptions& opt = {});

// Default fibre sampling: the origin and +-step along each Lambda axis,
// with step scaled by 1 + |h(x)|.
struct FiberSampling {
  double step = 0.5;
  bool include_origin = true;
};

struct RankTwoSample {
  int node = 0;
  int delta_index = 0;
  Eigen::VectorXd t;          // delta in the Lambda frame
  Eigen::VectorXd position;
  Eigen::MatrixXd jacobian;   // columns d_u, d_v, d_t1, ...
  Eigen::MatrixXd metric;
  Eigen::MatrixXd alpha;      // column i * n + j: alpha(d_i, d_j) in normal frame coordinates
  int nullity_dim = 0;
  bool regular = false;
  double trace_residual = 0.0;  // |tr alpha| / |alpha|
};

struct RankTwoChart {
  int ell = 1;
  int n = 0;  // 2 + dim Lambda
  AmbientSpace ambient;
  GridParams grid;
  double rank_tol = 1e-6;
  std::vector<RankTwoSample> samples;
  // Per node: the N_ell plane (ambient columns) and the normal frame
  // connection coefficients nu^T d_u nu, nu^T d_v nu.
  std::vector<Eigen::MatrixXd> plane;
  std::vector<Eigen::MatrixXd> conn_u, conn_v;
  int regular_count = 0;
  int nullity_mismatch = 0;       // regular samples with nullity != n - 2
  double max_trace_residual = 0.0;
  double normal_residual = 0.0;   // max |nu^T df| / |df|
};

// Samples f(delta) = h(x) + delta over the fibres of Lambda_ell.
RankTwoChart build_ranktwo(const SurfaceAnalysis& g, const CrossSectionData& cs, const FiberSampling& fibers = {},
                           double rank_tol = 1e-6);

struct RankTwoFamily {
  double theta = 0.0;
  RankTwoChart chart;
  FamilyResult member;        // g_theta
  double metric_residual = 0.0;
  double connection_residual = 0.0;
  // alpha_{f_theta}(X, Y) against alpha_f(R_{-theta} X, Y), relative.
  double alpha_residual = 0.0;
};

// f_theta(delta) = h_theta(x) + phi_theta delta on the same samples.
RankTwoFamily ranktwo_family(const SurfaceAnalysis& g, const CrossSectionData& cs, const RankTwoChart& rt,
                             double theta, const FamilyOptions& opt = {},
                             const ConnectionOptions& copt = {});

// Procrustes alignment of the sampled point sets.
CongruenceResult congruence_test(const RankTwoChart& a, const RankTwoChart& b);

// CSV `u,v,delta_index,x1..xM,nullity_dim,regular`.
void write_ranktwo_csv(const RankTwoChart& rt, const std::string& path);

}  // namespace assocfam
