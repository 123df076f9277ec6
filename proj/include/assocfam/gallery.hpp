#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assocfam/chart.hpp"

namespace assocfam {

struct PolyTerm {
  double coef = 0.0;
  int a = 0;  // power of u
  int b = 0;  // power of v
};

// Generator id plus parameters. Build through the gen_* functions, which
// validate the parameters.
struct SurfaceSpec {
  std::string generator;
  AmbientSpace ambient;
  GridParams domain;  // default domain; nu/nv are the default resolution

  std::vector<std::vector<PolyTerm>> poly;                      // poly_map
  std::vector<std::vector<std::complex<double>>> complex_poly;  // coefficient of z^k
  int m = 1, k = 1;                                             // lawson_ruled
  double theta = 0.0;                                           // catenoid_associate
  std::vector<double> weights, angles;                          // lawson_sum
  std::shared_ptr<const SurfaceSpec> base;                      // lawson_sum, perturbed
  double epsilon = 0.0;                                         // perturbed
  std::uint64_t seed = 0;
  std::string path;  // sampled
};

SurfaceSpec gen_plane();
SurfaceSpec gen_catenoid();
// cos(theta) * catenoid + sin(theta) * conjugate helicoid.
SurfaceSpec gen_catenoid_associate(double theta);
// Components are real polynomials in (u, v).
SurfaceSpec gen_poly_map(const std::vector<std::vector<PolyTerm>>& components);
// Real form (Re p_1, Im p_1, ..., Re p_n, Im p_n) of z -> (p_1(z), ..., p_n(z)).
SurfaceSpec gen_isotropic_curve(const std::vector<std::vector<std::complex<double>>>& coeffs);
// Real parts Re F_k(z) of a null curve (sum_k F_k'(z)^2 = 0): a minimal surface.
SurfaceSpec gen_null_curve(const std::vector<std::vector<std::complex<double>>>& coeffs);
SurfaceSpec gen_lawson_ruled(int m, int k);
SurfaceSpec gen_lawson_sum(const SurfaceSpec& base, const std::vector<double>& weights,
                           const std::vector<double>& angles);
SurfaceSpec gen_perturbed(const SurfaceSpec& base, double epsilon, std::uint64_t seed);
SurfaceSpec gen_sampled(const std::string& path, const AmbientSpace& ambient);

// Builds the jet chart; analytic generators give exact jets.
Chart evaluate_chart(const SurfaceSpec& spec, const GridParams& grid, int order);
inline Chart evaluate_chart(const SurfaceSpec& spec, int order) {
  return evaluate_chart(spec, spec.domain, order);
}

// Position jets at a single parameter point (analytic generators only).
VJet evaluate_point(const SurfaceSpec& spec, double u, double v, int order);

// Max |trace_G alpha| / |alpha| over the grid, computed directly from the jets.
double mean_curvature_residual(const Chart& chart);
// Gaussian curvature at every node from the Gauss equation.
std::vector<double> gaussian_curvature(const Chart& chart);

}  // namespace assocfam
