#include <cmath>

#include "assocfam/errors.hpp"
#include "assocfam/gallery.hpp"
#include "doctest.h"

using namespace assocfam;

TEST_CASE("plane chart has vanishing higher coefficients") {
  GridParams g = gen_plane().domain;
  g.nu = g.nv = 4;
  const Chart c = evaluate_chart(gen_plane(), g, 3);
  for (int n = 0; n < c.nodes(); ++n)
    for (int i = jet_size(1); i < jet_size(3); ++i) CHECK(c.jets[n].col(i).norm() == 0.0);
  for (const auto& G : induced_metric(c)) CHECK((G - Eigen::Matrix2d::Identity()).norm() < 1e-15);
}

TEST_CASE("catenoid partials at the origin") {
  GridParams g;
  g.u0 = -1; g.u1 = 1; g.v0 = -1; g.v1 = 1; g.nu = 3; g.nv = 3;
  const Chart c = evaluate_chart(gen_catenoid(), g, 4);
  const int o = g.node(1, 1);
  CHECK((c.partial(o, 0, 1) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  CHECK((c.partial(o, 1, 0) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
  CHECK((c.partial(o, 2, 0) - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
  CHECK((c.partial(o, 0, 2) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK((c.partial(o, 2, 2) - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-14);
  CHECK((c.partial(o, 3, 1) - Eigen::Vector3d(0, 0, 0)).norm() < 1e-14);
  CHECK(c.partial(o, 1, 3).norm() < 1e-14);
}

TEST_CASE("catenoid metric is cosh^2 v times identity") {
  GridParams g;
  g.u0 = 0; g.u1 = 1; g.v0 = 0; g.v1 = 1; g.nu = 2; g.nv = 2;
  const Chart c = evaluate_chart(gen_catenoid(), g, 3);
  const Eigen::Matrix2d G = induced_metric_at(c, g.node(0, 1));
  CHECK(G(0, 0) == doctest::Approx(2.3810978455418157).epsilon(1e-14));
  CHECK(G(1, 1) == doctest::Approx(2.3810978455418157).epsilon(1e-14));
  CHECK(std::abs(G(0, 1)) < 1e-15);
}

TEST_CASE("degenerate chart is rejected") {
  const SurfaceSpec s = gen_poly_map({{{1.0, 1, 0}}, {{1.0, 1, 0}}, {}});
  CHECK_THROWS_AS(evaluate_chart(s, 4), GeometryError);
  try {
    evaluate_chart(s, 4);
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("sphere charts are unit and tangent") {
  GridParams g = gen_lawson_ruled(1, 2).domain;
  g.nu = g.nv = 9;
  const Chart c = evaluate_chart(gen_perturbed(gen_lawson_ruled(1, 2), 0.05, 3), g, 5);
  for (int n = 0; n < c.nodes(); ++n) {
    CHECK(std::abs(c.position(n).norm() - 1.0) < 1e-12);
    CHECK(std::abs(c.position(n).dot(c.partial(n, 1, 0))) < 1e-12);
    CHECK(std::abs(c.position(n).dot(c.partial(n, 0, 1))) < 1e-12);
  }
}

TEST_CASE("analytic jets agree with neighbours by Taylor shift") {
  GridParams g = gen_catenoid().domain;
  double prev = 0.0;
  for (int n : {9, 17}) {
    g.nu = g.nv = n;
    const Chart c = evaluate_chart(gen_catenoid(), g, 8);
    const double r = taylor_shift_residual(c, 0);
    if (prev > 0.0) CHECK(prev / r > 200.0);  // O(h^9)
    prev = r;
  }
}

TEST_CASE("finite-difference jets converge at the stencil order") {
  const SurfaceSpec s = gen_catenoid();
  double prev = 0.0;
  for (int n : {17, 33}) {
    GridParams g = s.domain;
    g.nu = g.nv = n;
    const Chart exact = evaluate_chart(s, g, 4);
    std::vector<Eigen::VectorXd> pts;
    for (int k = 0; k < exact.nodes(); ++k) pts.push_back(exact.position(k));
    const Chart fd = chart_from_samples(exact.ambient, g, pts, 4, 4);
    CHECK(fd.stencil_accuracy == 4);
    double err = 0.0;
    for (int k = 0; k < exact.nodes(); ++k) err = std::max(err, (fd.jets[k] - exact.jets[k]).norm());
    if (prev > 0.0) CHECK(prev / err > 10.0);
    prev = err;
  }
}

TEST_CASE("Fornberg weights reproduce the classic central stencil") {
  const auto w = fd_weights(0.0, {-2, -1, 0, 1, 2}, 2);
  CHECK(w[1][0] == doctest::Approx(1.0 / 12));
  CHECK(w[1][1] == doctest::Approx(-8.0 / 12));
  CHECK(w[2][2] == doctest::Approx(-30.0 / 12));
}

TEST_CASE("gallery validation") {
  using C = std::complex<double>;
  CHECK_THROWS_AS(gen_isotropic_curve({{0.0, 1.0}, {0.0, 1.0}, {}}), GeometryError);
  CHECK_THROWS_AS(gen_lawson_sum(gen_lawson_ruled(1, 2), {1.0, 1.0}, {0.0, 0.5}), GeometryError);
  CHECK_THROWS_AS(gen_lawson_sum(gen_lawson_ruled(1, 2), {std::sqrt(0.5), std::sqrt(0.5)}, {0.5, 0.1}),
                  GeometryError);
  CHECK_THROWS_AS(gen_null_curve({{0.0, C(1, 0)}, {0.0, C(1, 0)}, {0.0, C(1, 0)}}), GeometryError);
  const SurfaceSpec base = gen_catenoid();
  CHECK(gen_perturbed(base, 0.0, 7).generator == "catenoid");
}

TEST_CASE("lawson ruled surfaces are minimal; (1,1) is flat and (1,2) is not") {
  GridParams g = gen_lawson_ruled(1, 1).domain;
  g.nu = g.nv = 12;
  const Chart flat = evaluate_chart(gen_lawson_ruled(1, 1), g, 4);
  CHECK(mean_curvature_residual(flat) < 1e-8);
  for (double k : gaussian_curvature(flat)) CHECK(std::abs(k) < 1e-10);
  const Chart c12 = evaluate_chart(gen_lawson_ruled(1, 2), g, 4);
  CHECK(mean_curvature_residual(c12) < 1e-8);
  const auto K = gaussian_curvature(c12);
  const auto [lo, hi] = std::minmax_element(K.begin(), K.end());
  CHECK(*hi - *lo > 0.1);
}
