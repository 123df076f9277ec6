#include <cmath>

#include "assocfam/analysis.hpp"
#include "assocfam/errors.hpp"
#include "assocfam/gallery.hpp"
#include "doctest.h"
#include "surfaces.hpp"

using namespace assocfam;

namespace {

using testsurf::curve6;
using testsurf::minimal6;

Chart small(const SurfaceSpec& s, int n, int K) {
  GridParams g = s.domain;
  g.nu = g.nv = n;
  return evaluate_chart(s, g, K);
}

}  // namespace

TEST_CASE("minimal surfaces have J a quarter turn in an orthonormal frame") {
  for (const SurfaceSpec& s : {gen_catenoid(), gen_lawson_ruled(1, 2), curve6()}) {
    const SurfaceAnalysis a = analyze(small(s, 9, 6));
    for (int n = 0; n < a.chart.nodes(); ++n) {
      CHECK(a.cs.orth_defect[n][0] < 1e-9);
      const Eigen::Matrix2d J0 = a.cs.Js[n][0];
      CHECK(std::abs(J0(0, 0)) < 1e-9);
      CHECK(std::abs(J0(1, 1)) < 1e-9);
      CHECK(std::abs(std::abs(J0(1, 0)) - 1.0) < 1e-9);
    }
    CHECK(a.cs.square_residual < 1e-12);
    CHECK(a.cs.ellipticity_residual < 1e-12);
    CHECK(a.ellipses.max_defect[0] < 1e-8);
  }
}

TEST_CASE("convex point is not elliptic; saddle point is") {
  // Codimension one: alpha(X,X) + alpha(JX,JX) = 0 forces tr_J alpha = 0,
  // which has a real solution only where the determinant of alpha is <= 0.
  const SurfaceSpec convex = gen_poly_map({{{1.0, 1, 0}}, {{1.0, 0, 1}}, {{1.0, 2, 0}, {1.0, 0, 2}}});
  try {
    analyze(small(convex, 5, 4));
    FAIL("expected NotElliptic");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::NotElliptic);
    CHECK(e.node() >= 0);
  }
  AnalysisOptions soft;
  soft.elliptic.hard = false;
  const SurfaceAnalysis a = analyze(small(convex, 5, 4), soft);
  CHECK_FALSE(a.cs.elliptic);
  const SurfaceSpec saddle = gen_poly_map({{{1.0, 1, 0}}, {{1.0, 0, 1}}, {{1.0, 2, 0}, {-1.0, 0, 2}}});
  const SurfaceAnalysis b = analyze(small(saddle, 5, 4));
  CHECK(b.cs.elliptic);
  CHECK(b.cs.ellipticity_residual < 1e-12);
}

TEST_CASE("isotropic curve in 6-space: every ellipse is a circle") {
  const SurfaceAnalysis a = analyze(small(curve6(), 11, 6));
  CHECK(a.cs.tau_o == 2);
  for (int s = 0; s <= 2; ++s) {
    CHECK(a.cs.max_orth_defect[s] < 1e-8);
    CHECK(a.ellipses.max_defect[s] < 1e-8);
  }
  CHECK(a.cs.relation_residual < 1e-10);
  CHECK(a.ellipses.max_other_modes < 1e-10);
  const TransportResiduals tr = transport_identity_residuals(a.flag, a.tensors, a.cs);
  CHECK(tr.js < 1e-8);
  CHECK(tr.jss < 1e-8);
  CHECK(tr.one0 < 1e-8);
  CHECK(tr.two0 < 1e-8);
  const TransportResiduals t0 = transport_identity_residuals(a.flag, a.tensors, a.cs, 0.0);
  CHECK(t0.one0 == 0.0);
}

TEST_CASE("perturbation breaks circularity monotonically") {
  double prev = -1.0;
  for (double eps : {0.0, 0.02, 0.05}) {
    const SurfaceAnalysis a = analyze(small(gen_perturbed(gen_catenoid(), eps, 11), 9, 5));
    CHECK(a.ellipses.max_defect[0] > prev);
    prev = a.ellipses.max_defect[0];
    CHECK(a.ellipses.max_criterion_gap < 1e-10);
  }
  CHECK(prev > 1e-3);
}

TEST_CASE("circle criterion agrees with J orthogonality") {
  const SurfaceAnalysis a = analyze(small(minimal6(), 9, 6));
  CHECK(a.flag.dims == std::vector<int>{2, 2, 2});
  CHECK(a.ellipses.max_defect[0] < 1e-9);
  CHECK(a.ellipses.max_criterion_gap < 1e-10);
  CHECK(a.ellipses.max_defect[1] > 1e-4);
}

TEST_CASE("flipping the orientation negates J and keeps the ellipses") {
  const Chart c = small(minimal6(), 7, 6);
  AnalysisOptions neg;
  neg.elliptic.orientation = -1;
  const SurfaceAnalysis a = analyze(c), b = analyze(c, neg);
  for (int n = 0; n < c.nodes(); ++n) {
    CHECK((a.cs.J[n] + b.cs.J[n]).norm() < 1e-12);
    for (int s = 0; s <= a.cs.tau_o; ++s) {
      CHECK(std::abs(a.ellipses.nodes[n][s].a - b.ellipses.nodes[n][s].a) < 1e-10);
      CHECK(std::abs(a.ellipses.nodes[n][s].b - b.ellipses.nodes[n][s].b) < 1e-10);
    }
  }
}

TEST_CASE("three-dimensional first normal space is not elliptic") {
  try {
    analyze(small(gen_perturbed(curve6(), 0.1, 5), 5, 6));
    FAIL("expected NotElliptic");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::NotElliptic);
  }
}

TEST_CASE("rotation fields") {
  const SurfaceAnalysis a = analyze(small(curve6(), 7, 6));
  const RotationField r0 = rotation_field(a.cs, 1, 0.0);
  for (const auto& R : r0.R) CHECK((R - Eigen::Matrix2d::Identity()).norm() == 0.0);
  const RotationField q = rotation_field(a.cs, 2, M_PI / 2);
  const RotationField p3 = rotation_field(a.cs, 2, M_PI / 3), p6 = rotation_field(a.cs, 2, M_PI / 6);
  for (size_t n = 0; n < q.R.size(); ++n) {
    CHECK((q.R[n] - a.cs.Js[n][2]).norm() < 1e-15);
    CHECK((p3.R[n] * p6.R[n] - q.R[n]).norm() < 1e-9);
    CHECK((q.R[n].transpose() * q.R[n] - Eigen::Matrix2d::Identity()).norm() < 1e-9);
  }
  CHECK_THROWS_AS(rotation_field(a.cs, 3, 0.1), GeometryError);
}

TEST_CASE("ellipse semi-axes do not depend on a rigid change of parameters") {
  // Same surface with (u, v) rotated by 90 degrees: z -> i z.
  const double r2 = 1.0 / std::sqrt(2.0), r6 = 1.0 / std::sqrt(6.0);
  using C = std::complex<double>;
  const SurfaceSpec rotated = gen_isotropic_curve({{0.0, C(0, 1)}, {0.0, 0.0, -r2}, {0.0, 0.0, 0.0, C(0, -r6)}});
  const SurfaceSpec pert_a = gen_perturbed(curve6(), 0.0, 1);
  GridParams g = curve6().domain;
  g.nu = g.nv = 9;
  const SurfaceAnalysis a = analyze(evaluate_chart(pert_a, g, 6));
  const SurfaceAnalysis b = analyze(evaluate_chart(rotated, g, 6));
  // Node (iu, iv) of b sits at (u, v) -> (-v, u) of a; both grids are symmetric.
  for (int iv = 0; iv < 9; ++iv)
    for (int iu = 0; iu < 9; ++iu) {
      const int na = g.node(8 - iv, iu), nb = g.node(iu, iv);
      for (int s = 0; s <= 2; ++s)
        CHECK(std::abs(a.ellipses.nodes[na][s].a - b.ellipses.nodes[nb][s].a) < 1e-10);
    }
}
