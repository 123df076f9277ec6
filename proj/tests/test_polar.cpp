#include <cmath>

#include "assocfam/errors.hpp"
#include "assocfam/gallery.hpp"
#include "assocfam/polar.hpp"
#include "doctest.h"
#include "surfaces.hpp"

using namespace assocfam;

namespace {

std::pair<Chart, NormalFlag> setup(const SurfaceSpec& s, int n, int K) {
  GridParams g = s.domain;
  g.nu = g.nv = n;
  Chart c = evaluate_chart(s, g, K);
  NormalFlag f = build_flag(c);
  return {std::move(c), std::move(f)};
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

}  // namespace

TEST_CASE("codimension one: the polar is the Gauss map") {
  const auto [c, f] = setup(gen_catenoid(), 9, 8);
  const PolarSurface p = polar_surface(c, f);
  CHECK(p.kind == PolarKind::OddSphericalNormal);
  CHECK(p.chart.ambient.is_sphere());
  CHECK(p.span_residual < 1e-8);
  CHECK(p.elliptic);
  int sign = 0;
  for (int n = 0; n < c.nodes(); ++n) {
    const Eigen::Vector3d N =
        Eigen::Vector3d(c.partial(n, 1, 0)).cross(Eigen::Vector3d(c.partial(n, 0, 1))).normalized();
    const Eigen::Vector3d h = p.chart.position(n);
    if (sign == 0) sign = h.dot(N) > 0 ? 1 : -1;
    CHECK((h - sign * N).norm() < 1e-12);
  }
}

TEST_CASE("odd polar of a minimal surface in 5-space") {
  const auto [c, f] = setup(testsurf::minimal5(), 9, 8);
  const PolarSurface p = polar_surface(c, f);
  CHECK(p.chart.dim() == 5);
  CHECK(p.span_residual < 1e-8);
  CHECK(p.elliptic);
  CHECK(p.ellipticity_residual < 1e-10);
  for (int n = 0; n < c.nodes(); n += 7) {
    CHECK(std::abs(p.chart.position(n).dot(c.partial(n, 1, 0))) < 1e-12);
    CHECK(std::abs(p.chart.position(n).norm() - 1.0) < 1e-13);
  }
}

TEST_CASE("even polar of the isotropic curve") {
  std::vector<double> span;
  for (int n : {9, 17, 33}) {
    const auto [c, f] = setup(testsurf::curve6(), n, 8);
    const PolarSurface p = polar_surface(c, f);
    CHECK(p.kind == PolarKind::EvenIntegrated);
    CHECK(p.closedness_residual < 1e-6);
    CHECK(p.elliptic);
    span.push_back(p.span_residual);
    // The gauge pins a conformal coefficient matrix at the base node.
    const Eigen::Matrix2d& M = p.M[c.grid.base_node()];
    CHECK(M.norm() == doctest::Approx(std::sqrt(2.0)));
  }
  CHECK(span[0] < 1e-2);
  CHECK(span[0] / span[1] > 3.0);
  CHECK(span[1] / span[2] > 3.0);
}

TEST_CASE("polar branch gates") {
  const auto [c, f] = setup(testsurf::curve6(), 9, 8);
  PolarOptions o;
  o.kind = PolarKind::OddSphericalNormal;
  CHECK(kind_of([&] { polar_surface(c, f, o); }) == ErrorKind::NotOdd);
  const auto [c3, f3] = setup(gen_catenoid(), 5, 6);
  o.kind = PolarKind::EvenIntegrated;
  CHECK(kind_of([&] { polar_surface(c3, f3, o); }) == ErrorKind::NotEven);
  // A non-isotropic surface has a visibly inconsistent discrete system.
  const auto [m, fm] = setup(testsurf::minimal6(), 9, 8);
  PolarOptions tight;
  tight.closedness_tol = 1e-6;
  CHECK(kind_of([&] { polar_surface(m, fm, tight); }) == ErrorKind::IntegrationFailed);
  const PolarSurface loose = polar_surface(m, fm);
  CHECK(loose.closedness_residual < 1e-3);
  CHECK(loose.elliptic);
}
