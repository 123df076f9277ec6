#pragma once

#include <cmath>
#include <complex>

#include "assocfam/gallery.hpp"

namespace testsurf {

using assocfam::SurfaceSpec;
using C = std::complex<double>;

// (z, z^2/sqrt 2, z^3/sqrt 6): all three ellipses are circles.
inline SurfaceSpec curve6() {
  return assocfam::gen_isotropic_curve(
      {{0.0, 1.0}, {0.0, 0.0, 1.0 / std::sqrt(2.0)}, {0.0, 0.0, 0.0, 1.0 / std::sqrt(6.0)}});
}

// Enneper triple plus a rotated second null triple: minimal in 6-space with
// non-circular ellipses of orders 1 and 2. The domain avoids the curve
// through the origin where the first ellipse degenerates.
inline SurfaceSpec minimal6() {
  const C i(0, 1), w = std::polar(1.0, 0.7);
  SurfaceSpec s = assocfam::gen_null_curve({{0.0, 1.0, 0.0, -1.0 / 3},
                                            {0.0, i, 0.0, i / 3.0},
                                            {0.0, 0.0, 1.0},
                                            {0.0, 0.0, 0.5 * w, 0.0, -0.25 * w},
                                            {0.0, 0.0, 0.5 * i * w, 0.0, 0.25 * i * w},
                                            {0.0, 0.0, 0.0, w * (2.0 / 3)}});
  s.domain.u0 = s.domain.v0 = 0.3;
  s.domain.u1 = s.domain.v1 = 0.9;
  return s;
}

// Enneper triple plus a cubic null pair: substantial minimal surface in
// 5-space, flag dimensions (2, 2, 1).
inline SurfaceSpec minimal5() {
  const C i(0, 1), w = std::polar(1.0, 0.7);
  SurfaceSpec s = assocfam::gen_null_curve({{0.0, 1.0, 0.0, -1.0 / 3},
                                            {0.0, i, 0.0, i / 3.0},
                                            {0.0, 0.0, 1.0},
                                            {0.0, 0.0, 0.0, w / 3.0},
                                            {0.0, 0.0, 0.0, i * w / 3.0}});
  s.domain.u0 = s.domain.v0 = 0.3;
  s.domain.u1 = s.domain.v1 = 0.9;
  return s;
}

}  // namespace testsurf
