#include <cmath>
#include <filesystem>
#include <fstream>

#include "assocfam/errors.hpp"
#include "assocfam/ranktwo.hpp"
#include "doctest.h"
#include "surfaces.hpp"

using namespace assocfam;

namespace {

SurfaceAnalysis run(const SurfaceSpec& s, int n, int K) {
  GridParams g = s.domain;
  g.nu = g.nv = n;
  return analyze(evaluate_chart(s, g, K));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const GeometryError& e) {
    return e.kind();
  }
  FAIL("no GeometryError");
  return ErrorKind::ConfigError;
}

const SurfaceAnalysis& curve() {
  static const SurfaceAnalysis a = run(testsurf::curve6(), 7, 10);
  return a;
}

Eigen::VectorXd project(const Eigen::MatrixXd& E, int cols, const Eigen::VectorXd& a) {
  return E.leftCols(cols) * (E.leftCols(cols).transpose() * a);
}

}  // namespace

TEST_CASE("cross section with omega = 0 is gamma_0") {
  const SurfaceAnalysis& a = curve();
  const Eigen::Vector2d g0(0.3, -0.2);
  const CrossSectionData cs = cross_section(a, ScalarField::zero(), g0, 1);
  CHECK(cs.solve_residual == 0.0);
  for (int n = 0; n < a.chart.nodes(); ++n) {
    CHECK(cs.gamma1[n].norm() == 0.0);
    CHECK((cs.h[n].col(0) - a.flag.block(n, 2) * g0).norm() < 1e-15);
  }
  CHECK(cs.section_residual < 1e-12);
}

TEST_CASE("height functions give closed-form sections") {
  Eigen::VectorXd v(6);
  v << 0.3, -0.1, 0.2, 0.5, -0.4, 0.1;
  const SurfaceAnalysis& a = curve();
  const CrossSectionData cs = cross_section(a, ScalarField::height_function(v), Eigen::Vector2d::Zero(), 1);
  CHECK(cs.solve_residual < 1e-12);
  for (int n = 0; n < a.chart.nodes(); ++n)
    CHECK((cs.h[n].col(0) - project(a.flag.E(n), a.flag.offset(2), v)).norm() < 1e-12);

  // Spherical base: omega g joins the section.
  const SurfaceAnalysis s = run(gen_lawson_sum(gen_lawson_ruled(1, 2), {M_SQRT1_2, M_SQRT1_2}, {0.0, M_PI / 4}), 5, 10);
  Eigen::VectorXd w(8);
  w << 0.3, -0.1, 0.2, 0.5, -0.4, 0.1, 0.2, 0.7;
  CrossSectionOptions co;
  co.check_circular = false;
  const CrossSectionData cs1 =
      cross_section(s, ScalarField::height_function(w), Eigen::VectorXd::Zero(3), 1, {}, co);
  CHECK(cs1.c == 1);
  CHECK(cs1.solve_residual < 1e-7);
  CHECK(cs1.section_residual < 1e-10);
  for (int n = 0; n < s.chart.nodes(); ++n)
    CHECK((cs1.h[n].col(0) - project(s.flag.E(n), s.flag.offset(2), w)).norm() < 1e-12);
}

TEST_CASE("cross section gates") {
  const SurfaceAnalysis& a = curve();
  // u^2 is not harmonic: the gamma_1 system has no solution.
  CHECK(kind_of([&] {
          cross_section(a, ScalarField::polynomial({{1.0, 2, 0}}), Eigen::Vector2d::Zero(), 1);
        }) == ErrorKind::SolveResidualTooLarge);
  CHECK(kind_of([&] { cross_section(a, ScalarField::zero(), Eigen::Vector2d::Zero(), 2); }) ==
        ErrorKind::OrderOutOfRange);
  CHECK(kind_of([&] { cross_section(a, ScalarField::zero(), Eigen::Vector3d::Zero(), 1); }) ==
        ErrorKind::PreconditionFailed);
  const SurfaceAnalysis m = run(testsurf::minimal6(), 5, 10);
  CHECK(kind_of([&] { cross_section(m, ScalarField::zero(), Eigen::Vector2d::Zero(), 1); }) ==
        ErrorKind::NotCircular);
}

TEST_CASE("polar parametrization is minimal of rank two") {
  const SurfaceAnalysis& a = curve();
  for (const auto& om : {ScalarField::zero(), ScalarField::polynomial({{1.0, 2, 0}, {-1.0, 0, 2}}),
                         ScalarField::polynomial({{1.0, 3, 0}, {-3.0, 1, 2}})}) {
    const CrossSectionData cs = cross_section(a, om, Eigen::Vector2d(0.3, -0.2), 1);
    CHECK(cs.section_residual < 1e-12);
    const RankTwoChart rt = build_ranktwo(a, cs);
    CHECK(rt.n == 4);
    CHECK(rt.samples.size() == static_cast<size_t>(5 * a.chart.nodes()));
    CHECK(rt.regular_count > 0);
    CHECK(rt.nullity_mismatch == 0);
    CHECK(rt.max_trace_residual < 1e-10);
    CHECK(rt.normal_residual < 1e-12);
  }
}

TEST_CASE("fibre origin over a vanishing section is singular") {
  const SurfaceAnalysis& a = curve();
  const CrossSectionData cs = cross_section(a, ScalarField::zero(), Eigen::Vector2d::Zero(), 1);
  const RankTwoChart rt = build_ranktwo(a, cs);
  for (const auto& s : rt.samples) CHECK(s.regular == (s.t.norm() > 0.0));
  FiberSampling none;
  none.step = 0.0;
  CHECK(kind_of([&] { build_ranktwo(a, cs, none); }) == ErrorKind::AllSingular);
}

TEST_CASE("without a circular ellipse the parametrization is not minimal") {
  const SurfaceAnalysis m = run(testsurf::minimal6(), 5, 10);
  CrossSectionOptions co;
  co.check_circular = false;
  const CrossSectionData cs = cross_section(m, ScalarField::zero(), Eigen::Vector2d(0.3, -0.2), 1, {}, co);
  CHECK(build_ranktwo(m, cs).max_trace_residual > 0.1);
}

TEST_CASE("sampled omega approximates the analytic one") {
  const SurfaceAnalysis a = run(testsurf::curve6(), 13, 6);
  const GridParams& g = a.chart.grid;
  std::vector<double> vals(g.nodes());
  for (int n = 0; n < g.nodes(); ++n) {
    const double u = g.u(g.iu(n)), v = g.v(g.iv(n));
    vals[n] = u * u - v * v;
  }
  CrossSectionOptions co;
  co.solve_tol = 1e-5;
  const CrossSectionData s = cross_section(a, ScalarField::sampled(g, vals), Eigen::Vector2d::Zero(), 1, {}, co);
  const CrossSectionData p =
      cross_section(a, ScalarField::polynomial({{1.0, 2, 0}, {-1.0, 0, 2}}), Eigen::Vector2d::Zero(), 1);
  for (int n = 0; n < g.nodes(); ++n) CHECK((s.h[n].col(0) - p.h[n].col(0)).norm() < 1e-6);
}

TEST_CASE("rank-two associated family") {
  const SurfaceAnalysis& a = curve();
  const CrossSectionData cs = cross_section(a, ScalarField::zero(), Eigen::Vector2d(0.3, -0.2), 1);
  const RankTwoChart rt = build_ranktwo(a, cs);
  const RankTwoFamily f0 = ranktwo_family(a, cs, rt, 0.0);
  for (size_t i = 0; i < rt.samples.size(); ++i)
    CHECK((f0.chart.samples[i].position - rt.samples[i].position).norm() < 1e-7);
  for (double th : {M_PI / 6, M_PI / 3}) {
    const RankTwoFamily f = ranktwo_family(a, cs, rt, th);
    CHECK(f.metric_residual < 1e-6);
    CHECK(f.connection_residual < 1e-6);
    CHECK(f.alpha_residual < 1e-6);
    CHECK(f.chart.max_trace_residual < 1e-10);
    CHECK(f.chart.nullity_mismatch == 0);
    // The base family is trivial, and so is this one.
    CHECK(congruence_test(rt, f.chart).residual < 1e-6);
  }
}

TEST_CASE("rank-two sample table") {
  const SurfaceAnalysis& a = curve();
  const RankTwoChart rt = build_ranktwo(a, cross_section(a, ScalarField::zero(), Eigen::Vector2d(0.3, 0.0), 1));
  const auto path = std::filesystem::temp_directory_path() / "assocfam_ranktwo.csv";
  write_ranktwo_csv(rt, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "u,v,delta_index,x1,x2,x3,x4,x5,x6,nullity_dim,regular");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == static_cast<int>(rt.samples.size()));
  std::filesystem::remove(path);
}
