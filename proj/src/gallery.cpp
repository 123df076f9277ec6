#include "assocfam/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "assocfam/errors.hpp"

namespace assocfam {

namespace {

GridParams domain(double u0, double u1, double v0, double v1) {
  GridParams g;
  g.u0 = u0;
  g.u1 = u1;
  g.v0 = v0;
  g.v1 = v1;
  return g;
}

ComplexJet complex_poly(const std::vector<std::complex<double>>& c, const ComplexJet& z) {
  const int K = z.re.order();
  auto constant = [K](std::complex<double> a) { return ComplexJet(Jet(K, a.real()), Jet(K, a.imag())); };
  ComplexJet acc = constant(c.empty() ? 0.0 : c.back());
  for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) {
    acc = acc * z;
    acc += constant(c[k]);
  }
  return acc;
}

std::vector<std::complex<double>> poly_derivative(const std::vector<std::complex<double>>& c) {
  std::vector<std::complex<double>> d;
  for (size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

std::vector<std::complex<double>> poly_product(const std::vector<std::complex<double>>& a,
                                               const std::vector<std::complex<double>>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::complex<double>> r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// Rank over C of the non-constant coefficient rows.
int complex_rank(const std::vector<std::vector<std::complex<double>>>& coeffs) {
  size_t deg = 0;
  for (const auto& c : coeffs) deg = std::max(deg, c.size());
  if (deg <= 1) return 0;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(coeffs.size()),
                                              static_cast<Eigen::Index>(deg - 1));
  for (size_t r = 0; r < coeffs.size(); ++r)
    for (size_t k = 1; k < coeffs[r].size(); ++k)
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k - 1)) = coeffs[r][k];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const auto s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-12 * s(0)) ++r;
  return r;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = nd(rng);
  return v.normalized();
}

}  // namespace

SurfaceSpec gen_plane() {
  SurfaceSpec s;
  s.generator = "plane";
  s.ambient = AmbientSpace::euclidean(3);
  s.domain = domain(-1, 1, -1, 1);
  return s;
}

SurfaceSpec gen_catenoid() {
  SurfaceSpec s = gen_catenoid_associate(0.0);
  s.generator = "catenoid";
  return s;
}

SurfaceSpec gen_catenoid_associate(double theta) {
  SurfaceSpec s;
  s.generator = "catenoid_associate";
  s.theta = theta;
  s.ambient = AmbientSpace::euclidean(3);
  s.domain = domain(-1, 1, -1, 1);
  return s;
}

SurfaceSpec gen_poly_map(const std::vector<std::vector<PolyTerm>>& components) {
  if (components.size() < 3) throw GeometryError(ErrorKind::InvalidSpec, "poly_map needs >= 3 components");
  for (const auto& c : components)
    for (const auto& t : c)
      if (t.a < 0 || t.b < 0) throw GeometryError(ErrorKind::InvalidSpec, "negative exponent");
  SurfaceSpec s;
  s.generator = "poly_map";
  s.poly = components;
  s.ambient = AmbientSpace::euclidean(static_cast<int>(components.size()));
  s.domain = domain(-0.5, 0.5, -0.5, 0.5);
  return s;
}

SurfaceSpec gen_isotropic_curve(const std::vector<std::vector<std::complex<double>>>& coeffs) {
  if (coeffs.size() < 2) throw GeometryError(ErrorKind::InvalidSpec, "need >= 2 complex components");
  if (complex_rank(coeffs) < static_cast<int>(coeffs.size()))
    throw GeometryError(ErrorKind::NotSubstantial, "components are linearly dependent");
  SurfaceSpec s;
  s.generator = "isotropic_curve";
  s.complex_poly = coeffs;
  s.ambient = AmbientSpace::euclidean(2 * static_cast<int>(coeffs.size()));
  s.domain = domain(-0.5, 0.5, -0.5, 0.5);
  return s;
}

SurfaceSpec gen_null_curve(const std::vector<std::vector<std::complex<double>>>& coeffs) {
  if (coeffs.size() < 3) throw GeometryError(ErrorKind::InvalidSpec, "need >= 3 components");
  std::vector<std::complex<double>> sum;
  double scale = 0.0;
  for (const auto& c : coeffs) {
    const auto d = poly_derivative(c);
    const auto sq = poly_product(d, d);
    if (sq.size() > sum.size()) sum.resize(sq.size(), 0.0);
    for (size_t i = 0; i < sq.size(); ++i) {
      sum[i] += sq[i];
      scale = std::max(scale, std::abs(sq[i]));
    }
  }
  for (const auto& x : sum)
    if (std::abs(x) > 1e-12 * std::max(scale, 1.0))
      throw GeometryError(ErrorKind::InvalidSpec, "components do not form a null curve");
  SurfaceSpec s;
  s.generator = "null_curve";
  s.complex_poly = coeffs;
  s.ambient = AmbientSpace::euclidean(static_cast<int>(coeffs.size()));
  s.domain = domain(-0.5, 0.5, -0.5, 0.5);
  return s;
}

SurfaceSpec gen_lawson_ruled(int m, int k) {
  if (m < 1 || k < 1) throw GeometryError(ErrorKind::InvalidSpec, "lawson_ruled needs m, k >= 1");
  SurfaceSpec s;
  s.generator = "lawson_ruled";
  s.m = m;
  s.k = k;
  s.ambient = AmbientSpace::sphere(4);
  s.domain = domain(0.2, 1.2, 0.2, 1.2);
  return s;
}

SurfaceSpec gen_lawson_sum(const SurfaceSpec& base, const std::vector<double>& weights,
                           const std::vector<double>& angles) {
  if (!base.ambient.is_sphere() || base.ambient.flat_dim != 4)
    throw GeometryError(ErrorKind::InvalidSpec, "lawson_sum base must lie in the 3-sphere");
  if (weights.empty() || weights.size() != angles.size())
    throw GeometryError(ErrorKind::InvalidSpec, "weights and angles must have equal, nonzero length");
  double n2 = 0.0;
  for (double a : weights) n2 += a * a;
  if (std::abs(n2 - 1.0) > 1e-12) throw GeometryError(ErrorKind::NotUnitNorm, "sum of squared weights != 1");
  for (size_t i = 0; i < angles.size(); ++i) {
    if (angles[i] < 0.0 || angles[i] >= M_PI)
      throw GeometryError(ErrorKind::AnglesNotSorted, "angle outside [0, pi)");
    if (i > 0 && !(angles[i] > angles[i - 1]))
      throw GeometryError(ErrorKind::AnglesNotSorted, "angles must be strictly increasing");
  }
  SurfaceSpec s;
  s.generator = "lawson_sum";
  s.base = std::make_shared<SurfaceSpec>(base);
  s.weights = weights;
  s.angles = angles;
  s.ambient = AmbientSpace::sphere(4 * static_cast<int>(weights.size()));
  s.domain = base.domain;
  return s;
}

SurfaceSpec gen_perturbed(const SurfaceSpec& base, double epsilon, std::uint64_t seed) {
  if (epsilon < 0.0) throw GeometryError(ErrorKind::InvalidSpec, "perturbation must be >= 0");
  if (epsilon == 0.0) return base;
  if (base.generator == "lawson_sum" || base.generator == "sampled")
    throw GeometryError(ErrorKind::InvalidSpec, "cannot perturb this generator");
  SurfaceSpec s;
  s.generator = "perturbed";
  s.base = std::make_shared<SurfaceSpec>(base);
  s.epsilon = epsilon;
  s.seed = seed;
  s.ambient = base.ambient;
  s.domain = base.domain;
  return s;
}

SurfaceSpec gen_sampled(const std::string& path, const AmbientSpace& ambient) {
  ambient.validate();
  SurfaceSpec s;
  s.generator = "sampled";
  s.path = path;
  s.ambient = ambient;
  return s;
}

VJet evaluate_point(const SurfaceSpec& spec, double u0, double v0, int K) {
  const Jet u = Jet::variable(K, u0, 0);
  const Jet v = Jet::variable(K, v0, 1);
  const std::string& g = spec.generator;
  if (g == "plane") return make_vjet({u, v, Jet(K)});
  if (g == "catenoid" || g == "catenoid_associate") {
    const double c = std::cos(spec.theta), s = std::sin(spec.theta);
    const Jet ch = cosh(v), sh = sinh(v), cu = cos(u), su = sin(u);
    return make_vjet({c * (ch * cu) + s * (sh * su), c * (ch * su) - s * (sh * cu), c * v + s * u});
  }
  if (g == "poly_map") {
    std::vector<Jet> comps;
    for (const auto& comp : spec.poly) {
      Jet acc(K);
      for (const auto& t : comp) acc += t.coef * (pow(u, t.a) * pow(v, t.b));
      comps.push_back(acc);
    }
    return make_vjet(comps);
  }
  if (g == "isotropic_curve" || g == "null_curve") {
    const ComplexJet z(u, v);
    std::vector<Jet> comps;
    for (const auto& c : spec.complex_poly) {
      const ComplexJet p = complex_poly(c, z);
      comps.push_back(p.re);
      if (g == "isotropic_curve") comps.push_back(p.im);
    }
    return make_vjet(comps);
  }
  if (g == "lawson_ruled") {
    const Jet cv = cos(v), sv = sin(v);
    const Jet mu = static_cast<double>(spec.m) * u, ku = static_cast<double>(spec.k) * u;
    return make_vjet({cos(mu) * cv, sin(mu) * cv, cos(ku) * sv, sin(ku) * sv});
  }
  if (g == "perturbed") {
    VJet x = evaluate_point(*spec.base, u0, v0, K);
    const int m = static_cast<int>(x.rows());
    std::mt19937_64 rng(spec.seed);
    const Eigen::VectorXd a = random_unit(rng, m), b = random_unit(rng, m), c = random_unit(rng, m);
    const double uc = 0.5 * (spec.domain.u0 + spec.domain.u1);
    const double vc = 0.5 * (spec.domain.v0 + spec.domain.v1);
    const Jet U = u - uc, V = v - vc;
    const Jet uu = U * U, uv = U * V, vv = V * V;
    for (int i = 0; i < jet_size(K); ++i)
      x.col(i) += spec.epsilon * (a * uu[i] + b * uv[i] + c * vv[i]);
    if (spec.ambient.is_sphere()) x = normalize_jet(x);
    return x;
  }
  throw GeometryError(ErrorKind::InvalidSpec, "no pointwise evaluation for generator '" + g + "'");
}

Chart lawson_sum_chart(const SurfaceSpec& spec, const GridParams& grid, int order);

Chart evaluate_chart(const SurfaceSpec& spec, const GridParams& grid, int order) {
  if (order < 3 || order > kMaxJetOrder)
    throw GeometryError(ErrorKind::InvalidSpec, "jet order must be in [3, 12]");
  if (spec.generator == "sampled") return read_sampled_csv(spec.path, spec.ambient, order);
  grid.validate();
  spec.ambient.validate();
  if (spec.generator == "lawson_sum") return lawson_sum_chart(spec, grid, order);
  Chart c;
  c.ambient = spec.ambient;
  c.grid = grid;
  c.order = order;
  c.source = ChartSource::AnalyticGallery;
  c.jets.resize(grid.nodes());
  for (int n = 0; n < grid.nodes(); ++n)
    c.jets[n] = evaluate_point(spec, grid.u(grid.iu(n)), grid.v(grid.iv(n)), order);
  finalize_chart(c);
  return c;
}

namespace {

// Tangent basis, second derivatives projected off the tangent plane (and the
// position for sphere charts).
struct SecondOrder {
  Eigen::Matrix2d G;
  Eigen::VectorXd auu, auv, avv;
};

SecondOrder second_order(const Chart& c, int n) {
  const Eigen::VectorXd xu = c.partial(n, 1, 0), xv = c.partial(n, 0, 1);
  Eigen::MatrixXd T(c.dim(), c.ambient.is_sphere() ? 3 : 2);
  T.col(0) = xu;
  T.col(1) = xv;
  if (c.ambient.is_sphere()) T.col(2) = c.position(n);
  const Eigen::MatrixXd Q = T.householderQr().householderQ() * Eigen::MatrixXd::Identity(c.dim(), T.cols());
  auto perp = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd { return w - Q * (Q.transpose() * w); };
  SecondOrder s;
  s.G = induced_metric_at(c, n);
  s.auu = perp(c.partial(n, 2, 0));
  s.auv = perp(c.partial(n, 1, 1));
  s.avv = perp(c.partial(n, 0, 2));
  return s;
}

}  // namespace

double mean_curvature_residual(const Chart& chart) {
  double worst = 0.0;
  for (int n = 0; n < chart.nodes(); ++n) {
    const SecondOrder s = second_order(chart, n);
    const Eigen::Matrix2d Gi = s.G.inverse();
    const Eigen::VectorXd H = Gi(0, 0) * s.auu + 2.0 * Gi(0, 1) * s.auv + Gi(1, 1) * s.avv;
    const double scale = std::abs(Gi(0, 0)) * s.auu.norm() + 2.0 * std::abs(Gi(0, 1)) * s.auv.norm() +
                         std::abs(Gi(1, 1)) * s.avv.norm();
    worst = std::max(worst, scale > 1e-14 ? H.norm() / scale : H.norm());
  }
  return worst;
}

std::vector<double> gaussian_curvature(const Chart& chart) {
  std::vector<double> K(chart.nodes());
  for (int n = 0; n < chart.nodes(); ++n) {
    const SecondOrder s = second_order(chart, n);
    K[n] = (s.auu.dot(s.avv) - s.auv.squaredNorm()) / s.G.determinant() + chart.ambient.curvature();
  }
  return K;
}

}  // namespace assocfam
