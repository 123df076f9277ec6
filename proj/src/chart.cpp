#include "assocfam/chart.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "assocfam/errors.hpp"

namespace assocfam {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SphereViolation: return "SphereViolation";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::JetOrderTooLow: return "JetOrderTooLow";
    case ErrorKind::ProjectionDrift: return "ProjectionDrift";
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorKind::NotCircular: return "NotCircular";
    case ErrorKind::AmbientTooSmall: return "AmbientTooSmall";
    case ErrorKind::HolonomyTooLarge: return "HolonomyTooLarge";
    case ErrorKind::NotMinimal: return "NotMinimal";
    case ErrorKind::FlagMismatch: return "FlagMismatch";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::NotOdd: return "NotOdd";
    case ErrorKind::NotEven: return "NotEven";
    case ErrorKind::IntegrationFailed: return "IntegrationFailed";
    case ErrorKind::SolveResidualTooLarge: return "SolveResidualTooLarge";
    case ErrorKind::AllSingular: return "AllSingular";
    case ErrorKind::NotSubstantial: return "NotSubstantial";
    case ErrorKind::NotUnitNorm: return "NotUnitNorm";
    case ErrorKind::AnglesNotSorted: return "AnglesNotSorted";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

const char* to_string(ChartSource s) {
  switch (s) {
    case ChartSource::AnalyticGallery: return "analytic";
    case ChartSource::Sampled: return "sampled";
    case ChartSource::Integrated: return "integrated";
    case ChartSource::Derived: return "derived";
  }
  return "unknown";
}

void AmbientSpace::validate() const {
  const int min_dim = kind == AmbientKind::Sphere ? 4 : 3;
  if (flat_dim < min_dim)
    throw GeometryError(ErrorKind::InvalidSpec, "ambient dimension too small for a surface");
}

void GridParams::validate() const {
  if (nu < 2 || nv < 2) throw GeometryError(ErrorKind::InvalidSpec, "grid needs at least 2x2 nodes");
  if (!(u1 > u0) || !(v1 > v0)) throw GeometryError(ErrorKind::InvalidSpec, "empty parameter domain");
}

Eigen::VectorXd Chart::partial(int node, int a, int b) const {
  double f = 1.0;
  for (int k = 2; k <= a; ++k) f *= k;
  for (int k = 2; k <= b; ++k) f *= k;
  return f * jets[node].col(jet_index(a, b));
}

VJet normalize_jet(const VJet& x) {
  const Jet n2 = dot(x, x);
  return scale(1.0 / sqrt(n2), x);
}

void finalize_chart(Chart& chart) {
  if (chart.order < 1) throw GeometryError(ErrorKind::JetOrderTooLow, "chart order must be >= 1");
  if (chart.ambient.is_sphere()) {
    for (int n = 0; n < chart.nodes(); ++n) {
      const double r = chart.jets[n].col(0).norm();
      if (std::abs(r - 1.0) > 1e-3)
        throw GeometryError(ErrorKind::SphereViolation, "position far from the unit sphere", n);
      chart.jets[n] = normalize_jet(chart.jets[n]);
    }
  }
  for (int n = 0; n < chart.nodes(); ++n) {
    Eigen::Matrix<double, Eigen::Dynamic, 2> t(chart.dim(), 2);
    t.col(0) = chart.partial(n, 1, 0);
    t.col(1) = chart.partial(n, 0, 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);
    const auto s = svd.singularValues();
    if (!(s(0) > 0.0) || s(1) <= 1e-10 * s(0))
      throw GeometryError(ErrorKind::RankDeficient, "chart is not an immersion", n);
  }
}

Eigen::Matrix2d induced_metric_at(const Chart& chart, int node) {
  const Eigen::VectorXd xu = chart.partial(node, 1, 0);
  const Eigen::VectorXd xv = chart.partial(node, 0, 1);
  Eigen::Matrix2d g;
  g << xu.dot(xu), xu.dot(xv), xv.dot(xu), xv.dot(xv);
  return g;
}

std::vector<Eigen::Matrix2d> induced_metric(const Chart& chart) {
  std::vector<Eigen::Matrix2d> out(chart.nodes());
  for (int n = 0; n < chart.nodes(); ++n) out[n] = induced_metric_at(chart, n);
  return out;
}

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int m) {
  // Fornberg's recursion.
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

struct Stencil {
  int start = 0;
  std::vector<double> w;
};

// Stencil for the d-th derivative at index i of a uniform 1-D grid.
Stencil make_stencil(int i, int n, double h, int d, int accuracy) {
  if (d == 0) return {i, {1.0}};
  int npts = d + accuracy;
  if (npts % 2 == 0) ++npts;  // symmetric when possible
  if (npts > n) throw GeometryError(ErrorKind::JetOrderTooLow, "grid too small for stencil");
  int start = std::clamp(i - npts / 2, 0, n - npts);
  std::vector<double> xs(npts);
  for (int k = 0; k < npts; ++k) xs[k] = (start + k - i) * h;
  const auto w = fd_weights(0.0, xs, d);
  return {start, w[d]};
}

}  // namespace

Chart chart_from_samples(const AmbientSpace& ambient, const GridParams& grid,
                         const std::vector<Eigen::VectorXd>& positions, int order, int accuracy) {
  ambient.validate();
  grid.validate();
  if (static_cast<int>(positions.size()) != grid.nodes())
    throw GeometryError(ErrorKind::GridMismatch, "sample count does not match grid");
  if (order > kMaxJetOrder) throw GeometryError(ErrorKind::InvalidSpec, "jet order too large");
  if (accuracy < 4) throw GeometryError(ErrorKind::InvalidSpec, "stencil accuracy must be >= 4");
  Chart c;
  c.ambient = ambient;
  c.grid = grid;
  c.order = order;
  c.source = ChartSource::Sampled;
  c.stencil_accuracy = accuracy;
  const int m = ambient.flat_dim;
  c.jets.assign(grid.nodes(), VJet::Zero(m, jet_size(order)));
  double fa[kMaxJetOrder + 1];
  fa[0] = 1.0;
  for (int k = 1; k <= kMaxJetOrder; ++k) fa[k] = fa[k - 1] * k;
  for (int iv = 0; iv < grid.nv; ++iv) {
    for (int iu = 0; iu < grid.nu; ++iu) {
      const int node = grid.node(iu, iv);
      c.jets[node].col(0) = positions[node];
      for (int idx = 1; idx < jet_size(order); ++idx) {
        const Monomial mo = jet_monomial(idx);
        const Stencil su = make_stencil(iu, grid.nu, grid.hu(), mo.a, accuracy);
        const Stencil sv = make_stencil(iv, grid.nv, grid.hv(), mo.b, accuracy);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (size_t q = 0; q < sv.w.size(); ++q) {
          if (sv.w[q] == 0.0) continue;
          for (size_t p = 0; p < su.w.size(); ++p) {
            const double w = su.w[p] * sv.w[q];
            if (w == 0.0) continue;
            acc += w * positions[grid.node(su.start + static_cast<int>(p),
                                           sv.start + static_cast<int>(q))];
          }
        }
        c.jets[node].col(idx) = acc / (fa[mo.a] * fa[mo.b]);
      }
    }
  }
  finalize_chart(c);
  return c;
}

Chart read_sampled_csv(const std::string& path, const AmbientSpace& ambient, int order,
                       int accuracy) {
  std::ifstream in(path);
  if (!in) throw GeometryError(ErrorKind::ConfigError, "cannot open " + path);
  std::vector<double> us, vs;
  std::vector<Eigen::VectorXd> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && (std::isalpha(static_cast<unsigned char>(line[0])))) continue;  // header
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != ambient.flat_dim + 2)
      throw GeometryError(ErrorKind::ConfigError, "wrong column count in " + path);
    us.push_back(vals[0]);
    vs.push_back(vals[1]);
    pts.push_back(Eigen::Map<Eigen::VectorXd>(vals.data() + 2, ambient.flat_dim));
  }
  if (pts.size() < 4) throw GeometryError(ErrorKind::ConfigError, "too few samples in " + path);
  // u runs fastest: the first row break in v gives nu.
  int nu = 1;
  while (nu < static_cast<int>(vs.size()) && vs[nu] == vs[0]) ++nu;
  const int nv = static_cast<int>(pts.size()) / nu;
  if (nu * nv != static_cast<int>(pts.size()))
    throw GeometryError(ErrorKind::GridMismatch, "samples do not form a rectangular grid");
  GridParams g;
  g.nu = nu;
  g.nv = nv;
  g.u0 = us.front();
  g.u1 = us[nu - 1];
  g.v0 = vs.front();
  g.v1 = vs.back();
  for (int n = 0; n < nu * nv; ++n) {
    const double tol = 1e-9 * (1.0 + std::abs(g.u1) + std::abs(g.v1));
    if (std::abs(us[n] - g.u(n % nu)) > tol || std::abs(vs[n] - g.v(n / nu)) > tol)
      throw GeometryError(ErrorKind::GridMismatch, "samples are not on a uniform grid", n);
  }
  return chart_from_samples(ambient, g, pts, order, accuracy);
}

void write_point_cloud_csv(const Chart& chart, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GeometryError(ErrorKind::ConfigError, "cannot write " + path);
  out << "u,v";
  for (int k = 0; k < chart.dim(); ++k) out << ",x" << (k + 1);
  out << '\n' << std::setprecision(17);
  for (int n = 0; n < chart.nodes(); ++n) {
    out << chart.grid.u(chart.grid.iu(n)) << ',' << chart.grid.v(chart.grid.iv(n));
    for (int k = 0; k < chart.dim(); ++k) out << ',' << chart.jets[n](k, 0);
    out << '\n';
  }
}

double taylor_shift_residual(const Chart& chart, int compare_order) {
  const int ord = std::min(compare_order, chart.order);
  double worst = 0.0;
  const GridParams& g = chart.grid;
  for (int n = 0; n < chart.nodes(); ++n) {
    const int iu = g.iu(n), iv = g.iv(n);
    for (int dir = 0; dir < 2; ++dir) {
      const int ju = iu + (dir == 0), jv = iv + (dir == 1);
      if (ju >= g.nu || jv >= g.nv) continue;
      const int m = g.node(ju, jv);
      const double du = dir == 0 ? g.hu() : 0.0, dv = dir == 1 ? g.hv() : 0.0;
      for (int r = 0; r < chart.dim(); ++r) {
        const Eigen::VectorXd sh =
            shifted_coefficients(chart.jets[n].row(r).transpose(), chart.order, du, dv);
        for (int i = 0; i < jet_size(ord); ++i)
          worst = std::max(worst, std::abs(sh[i] - chart.jets[m](r, i)));
      }
    }
  }
  return worst;
}

}  // namespace assocfam
