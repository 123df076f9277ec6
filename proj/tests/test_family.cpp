#include <cmath>
#include <random>

#include "assocfam/errors.hpp"
#include "assocfam/family.hpp"
#include "assocfam/gallery.hpp"
#include "doctest.h"
#include "surfaces.hpp"

using namespace assocfam;
using testsurf::curve6;
using testsurf::minimal5;
using testsurf::minimal6;

namespace {

SurfaceAnalysis run(const SurfaceSpec& s, int n, int K) {
  GridParams g = s.domain;
  g.nu = g.nv = n;
  return analyze(evaluate_chart(s, g, K));
}

Chart rigid_copy(const Chart& c, std::uint64_t seed, bool translate) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(c.dim(), c.dim());
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = nd(rng);
  const Eigen::MatrixXd Q = A.householderQr().householderQ();
  Eigen::VectorXd t = Eigen::VectorXd::Zero(c.dim());
  if (translate)
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = nd(rng);
  Chart out = c;
  for (auto& j : out.jets) {
    j = Q * j;
    j.col(0) += t;
  }
  return out;
}

}  // namespace

TEST_CASE("theta = 0 reproduces the surface") {
  const SurfaceAnalysis a = run(gen_catenoid(), 9, 8);
  const FamilyResult f = family_member(a, 0, 0.0);
  CHECK(congruence_test(a.chart, f.chart).residual < 1e-7);
  CHECK((f.frame.F[a.chart.grid.base_node()] - a.flag.E(a.chart.grid.base_node())).norm() == 0.0);
  CHECK(f.frame.orthogonality < 1e-9);
  CHECK(f.chart.source == ChartSource::Integrated);
}

TEST_CASE("catenoid at a quarter turn is the helicoid") {
  SurfaceSpec s = gen_catenoid();
  GridParams g = s.domain;
  g.nu = g.nv = 11;
  const SurfaceAnalysis a = analyze(evaluate_chart(s, g, 8));
  const FamilyResult f = family_member(a, 0, M_PI / 2);
  // Frozen helicoid point (sinh v sin u, -sinh v cos u, u) at (0.3, 0.5).
  const Eigen::Vector3d oracle(0.15399419236976608, -0.4978213596502317, 0.3);
  const Chart ref = evaluate_chart(gen_catenoid_associate(M_PI / 2), g, 4);
  int node = -1;
  for (int n = 0; n < g.nodes(); ++n)
    if (std::abs(g.u(g.iu(n)) - 0.2) < 1e-12 && std::abs(g.v(g.iv(n)) - 0.6) < 1e-12) node = n;
  REQUIRE(node >= 0);
  const Eigen::Vector3d p(std::sinh(0.6) * std::sin(0.2), -std::sinh(0.6) * std::cos(0.2), 0.2);
  CHECK((ref.position(node) - p).norm() < 1e-14);
  CHECK(std::abs(std::sinh(0.5) * std::sin(0.3) - oracle(0)) < 1e-15);
  const CongruenceResult r = congruence_test(f.chart, ref);
  CHECK(r.residual < 1e-9);
  CHECK(std::abs(r.rotation.determinant()) == doctest::Approx(1.0));
}

TEST_CASE("family composes additively in theta") {
  const SurfaceAnalysis a = run(gen_catenoid(), 9, 10);
  const FamilyResult f1 = family_member(a, 0, 0.4);
  const SurfaceAnalysis b = analyze(f1.chart);
  const FamilyResult f12 = family_member(b, 0, 0.7);
  const FamilyResult f3 = family_member(a, 0, 1.1);
  CHECK(congruence_test(f12.chart, f3.chart).residual < 1e-8);
  CHECK(congruence_test(f3.chart, a.chart).residual > 1e-2);
}

TEST_CASE("gates of the standard family") {
  const SurfaceSpec saddle = gen_poly_map({{{1.0, 1, 0}}, {{1.0, 0, 1}}, {{1.0, 2, 0}, {-0.5, 0, 2}}});
  const SurfaceAnalysis a = run(saddle, 5, 6);
  try {
    family_member(a, 0, 0.5);
    FAIL("expected NotMinimal");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::NotMinimal);
  }
  const SurfaceAnalysis m = run(minimal6(), 7, 8);
  ConnectionOptions co;
  co.check_circular = false;
  try {
    family_member(m, 1, 0.5, {}, co);
    FAIL("expected HolonomyTooLarge");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::HolonomyTooLarge);
    CHECK(e.node() >= 0);
  }
}

TEST_CASE("isotropic curve: forms, rotated forms and normal curvature") {
  const SurfaceAnalysis a = run(curve6(), 9, 10);
  for (int ell : {0, 1})
    for (double th : {M_PI / 6, M_PI / 3}) {
      const FamilyResult f = family_member(a, ell, th);
      CHECK(f.holonomy < 1e-8);
      const SurfaceAnalysis b = analyze(f.chart);
      const FamilyVerdict v = verify_family(a, b, f.frame, ell, th);
      CHECK(v.metric_residual < 1e-9);
      CHECK(v.max_form < 1e-8);
      CHECK(v.max_rotated < 1e-8);
      CHECK(v.normal_curvature_residual < 1e-8);
      // Orthogonal J's: the form norms are preserved pointwise.
      for (int n = 0; n < a.chart.nodes(); ++n)
        for (int s = 2; s <= 3; ++s)
          CHECK(b.forms.at(n, s).norm() == doctest::Approx(a.forms.at(n, s).norm()).epsilon(1e-8));
    }
}

TEST_CASE("rotated forms are not plain copies") {
  const SurfaceAnalysis a = run(curve6(), 7, 10);
  const FamilyResult f = family_member(a, 1, M_PI / 3);
  const SurfaceAnalysis b = analyze(f.chart);
  // Checking order 3 as if it were preserved fails by the rotation angle.
  const FamilyVerdict wrong = verify_family(a, b, f.frame, 2, M_PI / 3);
  CHECK(wrong.form_residual[3] > 0.5);
}

TEST_CASE("triviality in even dimension, non-triviality in odd") {
  const SurfaceAnalysis a = run(curve6(), 9, 10);
  CHECK(congruence_test(a.chart, family_member(a, 0, M_PI / 3).chart).residual < 1e-8);
  CHECK(congruence_test(a.chart, family_member(a, 1, M_PI / 3).chart).residual < 1e-8);
  const SurfaceAnalysis o = run(minimal5(), 9, 10);
  CHECK(o.flag.dims == std::vector<int>{2, 2, 1});
  CHECK(congruence_test(o.chart, family_member(o, 0, M_PI / 3).chart).residual > 1e-2);
}

TEST_CASE("consecutive circles give the same family; a non-circle separates them") {
  const SurfaceAnalysis a = run(curve6(), 9, 10);
  const Chart g0 = family_member(a, 0, M_PI / 4).chart, g1 = family_member(a, 1, M_PI / 4).chart;
  CHECK(congruence_test(g0, g1).residual < 1e-8);
  const SurfaceAnalysis m = run(minimal6(), 9, 10);
  // Order 0 and order 1: the second is not circular, so there is no G_1.
  CHECK(m.cs.max_orth_defect[1] > 0.1);
  const Chart m0 = family_member(m, 0, M_PI / 2).chart;
  CHECK(congruence_test(m0, m.chart).residual > 1e-2);
}

TEST_CASE("circularity of order 0 survives along the family") {
  const SurfaceAnalysis m = run(minimal6(), 9, 10);
  const SurfaceAnalysis b = analyze(family_member(m, 0, 1.0).chart);
  CHECK(b.ellipses.max_defect[0] < 1e-8);
  CHECK(b.flag.dims == m.flag.dims);
}

TEST_CASE("congruence test recovers rigid motions") {
  const SurfaceAnalysis a = run(minimal6(), 7, 4);
  const Chart b = rigid_copy(a.chart, 3, true);
  const CongruenceResult r = congruence_test(a.chart, b);
  CHECK(r.residual < 1e-10);
  for (int n = 0; n < a.chart.nodes(); ++n)
    CHECK((r.rotation * a.chart.position(n) + r.translation - b.position(n)).norm() < 1e-10);
  CHECK((r.rotation.transpose() * r.rotation - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);

  const Chart l = evaluate_chart(gen_lawson_ruled(1, 2), [] {
    GridParams g = gen_lawson_ruled(1, 2).domain;
    g.nu = g.nv = 5;
    return g;
  }(), 4);
  const CongruenceResult rs = congruence_test(l, rigid_copy(l, 4, false));
  CHECK(rs.residual < 1e-10);
  CHECK(rs.translation.norm() == 0.0);
  // A translated sphere chart is not a sphere motion.
  Chart moved = l;
  for (auto& j : moved.jets) j(0, 0) += 0.1;
  CHECK(congruence_test(l, moved).residual > 1e-2);

  GridParams g = a.chart.grid;
  g.nu = 5;
  g.nv = 9;
  CHECK_THROWS_AS(congruence_test(a.chart, evaluate_chart(minimal6(), g, 4)), GeometryError);
}

TEST_CASE("sphere family: Lawson surface in the 3-sphere") {
  SurfaceSpec s = gen_lawson_ruled(1, 2);
  GridParams g = s.domain;
  g.nu = g.nv = 9;
  const SurfaceAnalysis a = analyze(evaluate_chart(s, g, 10));
  const FamilyResult f = family_member(a, 0, 0.8);
  for (int n = 0; n < g.nodes(); ++n) CHECK(std::abs(f.chart.position(n).norm() - 1.0) < 1e-12);
  const SurfaceAnalysis b = analyze(f.chart);
  const FamilyVerdict v = verify_family(a, b, f.frame, 0, 0.8);
  CHECK(v.metric_residual < 1e-9);
  CHECK(v.max_rotated < 1e-8);
  CHECK(mean_curvature_residual(f.chart) < 1e-8);
}
