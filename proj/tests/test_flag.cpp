#include <cmath>

#include "assocfam/errors.hpp"
#include "assocfam/flag.hpp"
#include "assocfam/gallery.hpp"
#include "doctest.h"

using namespace assocfam;
using C = std::complex<double>;

namespace {

SurfaceSpec curve4() { return gen_isotropic_curve({{0.0, 1.0}, {0.0, 0.0, 1.0 / std::sqrt(2.0)}}); }
SurfaceSpec curve6() {
  return gen_isotropic_curve(
      {{0.0, 1.0}, {0.0, 0.0, 1.0 / std::sqrt(2.0)}, {0.0, 0.0, 0.0, 1.0 / std::sqrt(6.0)}});
}

Chart small(const SurfaceSpec& s, int n, int K) {
  GridParams g = s.domain;
  g.nu = g.nv = n;
  return evaluate_chart(s, g, K);
}

}  // namespace

TEST_CASE("flag dimensions of gallery surfaces") {
  const NormalFlag cat = build_flag(small(gen_catenoid(), 9, 4));
  CHECK(cat.dims == std::vector<int>{2, 1});
  CHECK(cat.tau == 1);
  CHECK(cat.tau_o == 0);
  const NormalFlag c4 = build_flag(small(curve4(), 9, 4));
  CHECK(c4.dims == std::vector<int>{2, 2});
  CHECK(c4.tau == 1);
  const NormalFlag c6 = build_flag(small(curve6(), 9, 6));
  CHECK(c6.dims == std::vector<int>{2, 2, 2});
  CHECK(c6.tau == 2);
  CHECK(c6.tau_o == 2);
  const NormalFlag pl = build_flag(small(gen_plane(), 5, 3));
  CHECK(pl.dims == std::vector<int>{2});
  const NormalFlag lr = build_flag(small(gen_lawson_ruled(1, 2), 9, 4));
  CHECK(lr.dims == std::vector<int>{2, 1});
  CHECK(lr.sphere);
  CHECK(lr.frame_dim() == 4);
}

TEST_CASE("jet order below tau + 2 is rejected") {
  try {
    build_flag(small(curve6(), 5, 3));
    FAIL("expected JetOrderTooLow");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::JetOrderTooLow);
  }
}

TEST_CASE("frames are orthonormal and span the flag") {
  const Chart c = small(curve6(), 11, 6);
  const NormalFlag f = build_flag(c);
  for (int n = 0; n < c.nodes(); ++n) {
    const Eigen::MatrixXd& E = f.E(n);
    CHECK((E.transpose() * E - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-10);
  }
}

TEST_CASE("catenoid second fundamental form at the origin") {
  GridParams g;
  g.u0 = -0.5; g.u1 = 0.5; g.v0 = -0.5; g.v1 = 0.5; g.nu = g.nv = 5;
  const Chart c = evaluate_chart(gen_catenoid(), g, 5);
  const NormalFlag f = build_flag(c);
  const HigherFormTable t = higher_forms(c, f);
  const Eigen::MatrixXd& a2 = t.at(g.base_node(), 2);
  CHECK(std::abs(std::abs(a2(0, 0)) - 1.0) < 1e-14);
  CHECK(std::abs(a2(0, 0) + a2(0, 2)) < 1e-14);
  CHECK(std::abs(a2(0, 1)) < 1e-14);
  // Shape operator eigenvalues +-sech^2 v in an orthonormal tangent frame.
  const FrenetTensors ft = frenet_tensors(c, f, t);
  for (int n = 0; n < c.nodes(); ++n) {
    const double v = g.v(g.iv(n));
    Eigen::Matrix2d L;
    L.col(0) = -ft.omega_u[n].block(0, 2, 2, 1);
    L.col(1) = -ft.omega_v[n].block(0, 2, 2, 1);
    const Eigen::Matrix2d A = L * t.at(n, 1).inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (A + A.transpose()));
    const double k = 1.0 / (std::cosh(v) * std::cosh(v));
    CHECK(es.eigenvalues()(0) == doctest::Approx(-k).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(k).epsilon(1e-12));
  }
}

TEST_CASE("plane has no higher forms or shape operators") {
  const Chart c = small(gen_plane(), 5, 4);
  const NormalFlag f = build_flag(c);
  const HigherFormTable t = higher_forms(c, f);
  CHECK(t.max_order == 1);
  const FrenetTensors ft = frenet_tensors(c, f, t);
  for (int n = 0; n < c.nodes(); ++n) {
    CHECK(ft.omega_u[n].norm() == 0.0);
    CHECK(ft.omega_v[n].norm() == 0.0);
  }
}

TEST_CASE("third form is symmetric under argument permutation") {
  const Chart c = small(curve6(), 9, 6);
  const NormalFlag f = build_flag(c);
  const HigherFormTable t = higher_forms(c, f);
  const Eigen::Vector2d X(0.3, -1.2), Y(0.7, 0.4), W(-0.5, 0.9);
  for (int n = 0; n < c.nodes(); ++n) {
    const Eigen::VectorXd a = eval_form(t.at(n, 3), {X, Y, W});
    const Eigen::VectorXd b = eval_form(t.at(n, 3), {Y, X, W});
    const Eigen::VectorXd d = eval_form(t.at(n, 3), {W, Y, X});
    CHECK((a - b).norm() < 1e-12);
    CHECK((a - d).norm() < 1e-12);
  }
}

TEST_CASE("Frenet tensors of the isotropic curve") {
  const Chart c = small(curve6(), 11, 6);
  const NormalFlag f = build_flag(c);
  const HigherFormTable t = higher_forms(c, f);
  const FrenetTensors ft = frenet_tensors(c, f, t);
  CHECK(ft.duality_residual < 1e-9);
  CHECK(ft.reproduction_residual < 1e-9);
  CHECK(ft.reconstruction_residual < 1e-8);
  CHECK(ft.orthogonality_residual < 1e-10);
  CHECK(ft.antisymmetry_residual < 1e-10);
}

TEST_CASE("sphere frame starts with the position") {
  const Chart c = small(gen_lawson_ruled(1, 2), 9, 5);
  const NormalFlag f = build_flag(c);
  for (int n = 0; n < c.nodes(); ++n) CHECK((f.E(n).col(0) - c.position(n)).norm() < 1e-14);
  const HigherFormTable t = higher_forms(c, f);
  const FrenetTensors ft = frenet_tensors(c, f, t);
  CHECK(ft.duality_residual < 1e-9);
  CHECK(ft.reconstruction_residual < 1e-8);
}
