#include "assocfam/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "assocfam/errors.hpp"

namespace assocfam {

namespace {

constexpr int kEllipseSamples = 64;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

MJet column_pair(const MJet& a, const MJet& b) {
  MJet r(std::min(a.size(), b.size()));
  for (size_t i = 0; i < r.size(); ++i) {
    r[i].resize(a[i].rows(), 2);
    r[i] << a[i], b[i];
  }
  return r;
}

// Operator-norm distance from orthogonality, and 1 - sqrt(s_min / s_max).
std::pair<double, double> orth_defects(const Eigen::Matrix2d& J) {
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix2d>(J).singularValues();
  return {std::max(std::abs(s(0) - 1.0), std::abs(s(1) - 1.0)), 1.0 - std::sqrt(s(1) / s(0))};
}

}  // namespace

StructureJets structure_jets(const Chart& chart, const NormalFlag& flag, int node, int order,
                             int orientation, int max_s) {
  const int ord = std::min(order, flag.frame_order);
  const MJet E = mjet_truncated(flag.frame[node], ord);
  auto dx = [&](int a, int b) {
    return vjet_to_mjet(vjet_truncated(chart.partial_jet(node, a, b), ord));
  };
  const MJet T = column_pair(dx(1, 0), dx(0, 1));
  const MJet B = mjet_mul(mjet_cols(E, flag.offset(0), 2), T, true);

  Jet p11, p12, p22;
  const bool has_n1 = flag.dims.size() > 1;
  const MJet Gi = mjet_inverse(mjet_mul(T, T, true));
  const Jet g11 = mjet_entry(Gi, 0, 0), g12 = mjet_entry(Gi, 0, 1), g22 = mjet_entry(Gi, 1, 1);
  for (int s = 1; s <= std::max(max_s, 1) && s < static_cast<int>(flag.dims.size()); ++s)
    if (flag.dims[s] > 2)
      throw GeometryError(ErrorKind::NotElliptic,
                          "normal space of order " + std::to_string(s) + " has dimension " +
                              std::to_string(flag.dims[s]),
                          node);
  if (has_n1) {
    const MJet E1 = mjet_cols(E, flag.offset(1), flag.dims[1]);
    const MJet C11 = mjet_mul(E1, dx(2, 0), true);
    const MJet C12 = mjet_mul(E1, dx(1, 1), true);
    const MJet C22 = mjet_mul(E1, dx(0, 2), true);
    auto row = [&](int k) {
      return std::array<Jet, 3>{mjet_entry(C11, k, 0), 2.0 * mjet_entry(C12, k, 0), mjet_entry(C22, k, 0)};
    };
    if (flag.dims[1] == 2) {
      // Kernel of alpha on symmetric bivectors: cross product of the two rows.
      const auto r0 = row(0), r1 = row(1);
      p11 = r0[1] * r1[2] - r0[2] * r1[1];
      p12 = r0[2] * r1[0] - r0[0] * r1[2];
      p22 = r0[0] * r1[1] - r0[1] * r1[0];
    } else {
      // One equation: project the inverse metric onto its kernel.
      const auto w = row(0);
      const Jet ww = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
      if (ww.value() > 1e-24) {
        const Jet t = (g11 * w[0] + g12 * w[1] + g22 * w[2]) / ww;
        p11 = g11 - t * w[0];
        p12 = g12 - t * w[1];
        p22 = g22 - t * w[2];
      } else {
        p11 = g11;
        p12 = g12;
        p22 = g22;
      }
    }
  } else {
    p11 = g11;
    p12 = g12;
    p22 = g22;
  }
  if (p11.value() + p22.value() < 0.0) {
    p11 = -p11;
    p12 = -p12;
    p22 = -p22;
  }
  const Jet det = p11 * p22 - p12 * p12;
  const double scale = p11.value() * p11.value() + 2.0 * p12.value() * p12.value() + p22.value() * p22.value();
  if (!(det.value() > 1e-10 * scale))
    throw GeometryError(ErrorKind::NotElliptic, "no real complex structure solves the ellipticity condition",
                        node);
  const Jet inv = static_cast<double>(orientation) / sqrt(det);
  StructureJets out;
  out.J = mjet_from_entries({{p12 * inv, -1.0 * (p11 * inv)}, {p22 * inv, -1.0 * (p12 * inv)}});
  out.Js.push_back(mjet_mul(mjet_mul(B, out.J), mjet_inverse(B)));
  const Jet j00 = mjet_entry(out.J, 0, 0), j10 = mjet_entry(out.J, 1, 0);
  for (int s = 1; s <= max_s && s < static_cast<int>(flag.dims.size()); ++s) {
    if (flag.dims[s] != 2) break;  // last bundle of odd substantial dimension
    const MJet Es = mjet_cols(E, flag.offset(s), 2);
    const MJet w1 = mjet_mul(Es, dx(s + 1, 0), true);
    const MJet wv = mjet_mul(Es, dx(s, 1), true);
    const MJet w2 = mjet_add(mjet_scale(j00, w1), mjet_scale(j10, wv));
    const MJet W = column_pair(w1, w2);
    MJet Y = column_pair(w2, w1);
    for (auto& m : Y) m.col(1) *= -1.0;
    out.Js.push_back(mjet_mul(Y, mjet_inverse(W)));
  }
  return out;
}

ComplexStructures detect_ellipticity(const Chart& chart, const NormalFlag& flag,
                                     const HigherFormTable& forms, const EllipticOptions& opt) {
  ComplexStructures cs;
  cs.tau_o = flag.tau_o;
  cs.orientation = opt.orientation;
  const int nn = chart.nodes();
  const int ns = cs.tau_o + 1;
  cs.J.assign(nn, Eigen::Matrix2d::Constant(kNaN));
  cs.Js.assign(nn, std::vector<Eigen::Matrix2d>(ns, Eigen::Matrix2d::Constant(kNaN)));
  cs.Z.assign(nn, Eigen::Vector2d::Constant(kNaN));
  cs.orth_defect.assign(nn, std::vector<double>(ns, kNaN));
  cs.orth_defect_normalized.assign(nn, std::vector<double>(ns, kNaN));
  cs.max_orth_defect.assign(ns, 0.0);
  for (int n = 0; n < nn; ++n) {
    StructureJets sj;
    try {
      sj = structure_jets(chart, flag, n, 0, opt.orientation, cs.tau_o);
    } catch (const GeometryError& e) {
      if (e.kind() != ErrorKind::NotElliptic || opt.hard) throw;
      if (cs.elliptic) cs.not_elliptic_node = n;
      cs.elliptic = false;
      continue;
    }
    const Eigen::Matrix2d J = sj.J[0];
    cs.J[n] = J;
    cs.square_residual = std::max(cs.square_residual, (J * J + Eigen::Matrix2d::Identity()).norm());
    for (int s = 0; s < ns && s < static_cast<int>(sj.Js.size()); ++s) {
      cs.Js[n][s] = sj.Js[s][0];
      const auto [d, dn] = orth_defects(cs.Js[n][s]);
      cs.orth_defect[n][s] = d;
      cs.orth_defect_normalized[n][s] = dn;
      cs.max_orth_defect[s] = std::max(cs.max_orth_defect[s], dn);
    }
    if (forms.max_order >= 2) {
      const Eigen::MatrixXd& a2 = forms.at(n, 2);
      for (const Eigen::Vector2d& X : {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(0.6, 0.8)}) {
        const Eigen::Vector2d JX = J * X;
        const Eigen::VectorXd q1 = eval_form(a2, {X, X}), q2 = eval_form(a2, {JX, JX});
        const double sc = q1.norm() + q2.norm();
        cs.ellipticity_residual = std::max(cs.ellipticity_residual, sc > 1e-14 ? (q1 + q2).norm() / sc : 0.0);
      }
    }
    for (int s = 1; s < ns && s < static_cast<int>(sj.Js.size()); ++s) {
      const Eigen::MatrixXd& W = forms.at(n, s + 1);
      for (int b = 0; b <= s + 1; ++b) {
        std::vector<Eigen::Vector2d> args;
        const bool first_u = (s + 1 - b) > 0;
        args.push_back(J * (first_u ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1)));
        for (int i = 0; i < s + 1 - b - (first_u ? 1 : 0); ++i) args.emplace_back(1, 0);
        for (int i = 0; i < b - (first_u ? 0 : 1); ++i) args.emplace_back(0, 1);
        const Eigen::VectorXd lhs = cs.Js[n][s] * W.col(b);
        const Eigen::VectorXd rhs = eval_form(W, args);
        const double sc = W.col(b).norm() + rhs.norm();
        cs.relation_residual = std::max(cs.relation_residual, sc > 1e-14 ? (lhs - rhs).norm() / sc : 0.0);
      }
    }
    // Z: unit null vector of Sym(J) in the N_0 frame, back in coordinates.
    // Taken from the positively oriented J so both orientations share Z.
    const Eigen::Matrix2d J0 = opt.orientation * cs.Js[n][0];
    const Eigen::Matrix2d sym = 0.5 * (J0 + J0.transpose());
    Eigen::Vector2d z(1.0, 0.0);
    if (sym.norm() > 1e-12) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
      Eigen::Vector2d v0 = es.eigenvectors().col(0), v1 = es.eigenvectors().col(1);
      if (v0(0) < 0.0 || (v0(0) == 0.0 && v0(1) < 0.0)) v0 = -v0;
      if (v1(1) < 0.0 || (v1(1) == 0.0 && v1(0) < 0.0)) v1 = -v1;
      z = (v0 + v1).normalized();
    }
    cs.Z[n] = forms.at(n, 1).inverse() * z;
  }
  return cs;
}

EllipseReport curvature_ellipses(const Chart& chart, const NormalFlag& flag,
                                 const HigherFormTable& forms, const ComplexStructures& cs) {
  EllipseReport rep;
  rep.max_order = cs.tau_o;
  const int ns = cs.tau_o + 1;
  const int nn = chart.nodes();
  rep.nodes.assign(nn, std::vector<EllipseNode>(ns));
  rep.max_defect.assign(ns, 0.0);
  rep.min_defect.assign(ns, std::numeric_limits<double>::infinity());
  rep.degenerate_count.assign(ns, 0);
  const int N = kEllipseSamples;
  for (int n = 0; n < nn; ++n) {
    if (!std::isfinite(cs.J[n](0, 0))) {
      for (int s = 0; s < ns; ++s) {
        rep.nodes[n][s].degenerate = true;
        ++rep.degenerate_count[s];
      }
      continue;
    }
    const Eigen::Vector2d Z = cs.Z[n];
    const Eigen::Vector2d JZ = cs.J[n] * Z;
    for (int s = 0; s < ns; ++s) {
      const int d = flag.dims[s];
      const int mode = s + 1;
      std::vector<Eigen::VectorXd> vals(N);
      for (int k = 0; k < N; ++k) {
        const double psi = 2.0 * M_PI * k / N;
        const Eigen::Vector2d zp = std::cos(psi) * Z + std::sin(psi) * JZ;
        vals[k] = s == 0 ? Eigen::VectorXd(forms.at(n, 1) * zp)
                         : eval_form(forms.at(n, s + 1), std::vector<Eigen::Vector2d>(s + 1, zp));
      }
      Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
      Eigen::MatrixXd AB = Eigen::MatrixXd::Zero(d, 2);
      for (int k = 0; k < N; ++k) {
        const double psi = 2.0 * M_PI * k / N;
        center += vals[k] / N;
        AB.col(0) += (2.0 / N) * std::cos(mode * psi) * vals[k];
        AB.col(1) += (2.0 / N) * std::sin(mode * psi) * vals[k];
      }
      double resid = 0.0;
      for (int k = 0; k < N; ++k) {
        const double psi = 2.0 * M_PI * k / N;
        const Eigen::VectorXd fit = center + std::cos(mode * psi) * AB.col(0) + std::sin(mode * psi) * AB.col(1);
        resid = std::max(resid, (vals[k] - fit).norm());
      }
      EllipseNode& e = rep.nodes[n][s];
      e.center = center;
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(AB).singularValues();
      e.a = sv(0);
      e.b = sv.size() > 1 ? sv(1) : 0.0;
      double scale = 0.0;
      for (const auto& v : vals) scale = std::max(scale, v.norm());
      if (!(e.a > 1e-12 * std::max(scale, 1e-300)) || e.a == 0.0) {
        e.degenerate = true;
        ++rep.degenerate_count[s];
        continue;
      }
      e.defect = (e.a - e.b) / e.a;
      e.other_modes = resid / e.a;
      rep.max_defect[s] = std::max(rep.max_defect[s], e.defect);
      rep.min_defect[s] = std::min(rep.min_defect[s], e.defect);
      rep.max_other_modes = std::max(rep.max_other_modes, e.other_modes);
      const double od = cs.orth_defect_normalized[n][s];
      if (std::isfinite(od)) rep.max_criterion_gap = std::max(rep.max_criterion_gap, std::abs(e.defect - od));
    }
  }
  for (int s = 0; s < ns; ++s)
    if (!std::isfinite(rep.min_defect[s])) rep.min_defect[s] = 0.0;
  return rep;
}

void write_ellipse_csv(const Chart& chart, const EllipseReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GeometryError(ErrorKind::ConfigError, "cannot write " + path);
  out << "u,v,order,center_norm,semi_a,semi_b,defect\n" << std::setprecision(12);
  for (int n = 0; n < chart.nodes(); ++n) {
    for (int s = 0; s <= rep.max_order; ++s) {
      const EllipseNode& e = rep.nodes[n][s];
      if (e.degenerate) continue;
      out << chart.grid.u(chart.grid.iu(n)) << ',' << chart.grid.v(chart.grid.iv(n)) << ',' << s << ','
          << e.center.norm() << ',' << e.a << ',' << e.b << ',' << e.defect << '\n';
    }
  }
}

RotationField rotation_field(const ComplexStructures& cs, int s, double phi) {
  if (s < 0 || s > cs.tau_o)
    throw GeometryError(ErrorKind::OrderOutOfRange, "rotation order " + std::to_string(s) + " outside [0, tau_o]");
  RotationField r;
  r.phi = phi;
  r.order = s;
  r.R.resize(cs.Js.size());
  for (size_t n = 0; n < cs.Js.size(); ++n)
    r.R[n] = std::cos(phi) * Eigen::Matrix2d::Identity() + std::sin(phi) * cs.Js[n][s];
  return r;
}

TransportResiduals transport_identity_residuals(const NormalFlag& flag, const FrenetTensors& t,
                                                const ComplexStructures& cs, double phi) {
  TransportResiduals r;
  const int to = cs.tau_o;
  r.js_by_order.assign(to + 1, 0.0);
  r.jss_by_order.assign(to + 1, 0.0);
  r.one0_by_order.assign(to + 1, 0.0);
  r.two0_by_order.assign(to + 1, 0.0);
  const int nn = static_cast<int>(t.omega_u.size());
  for (int n = 0; n < nn; ++n) {
    if (!std::isfinite(cs.J[n](0, 0))) continue;
    const Eigen::Matrix2d& J = cs.J[n];
    auto blk = [&](const Eigen::MatrixXd& O, int i, int j) -> Eigen::MatrixXd {
      return O.block(flag.offset(i), flag.offset(j), flag.dims[i], flag.dims[j]);
    };
    auto rot = [&](int s) -> Eigen::Matrix2d {
      return std::cos(phi) * Eigen::Matrix2d::Identity() + std::sin(phi) * cs.Js[n][s];
    };
    for (int dir = 0; dir < 2; ++dir) {
      const Eigen::MatrixXd& O = dir == 0 ? t.omega_u[n] : t.omega_v[n];
      // J X in coordinates.
      const double cu = J(0, dir), cv = J(1, dir);
      for (int s = 1; s <= to; ++s) {
        const Eigen::MatrixXd S = blk(O, s, s - 1);
        const Eigen::MatrixXd SJ = cu * blk(t.omega_u[n], s, s - 1) + cv * blk(t.omega_v[n], s, s - 1);
        const double e1 = std::max((cs.Js[n][s] * S - S * cs.Js[n][s - 1]).norm(), (S * cs.Js[n][s - 1] - SJ).norm());
        r.js_by_order[s] = std::max(r.js_by_order[s], e1);
        const Eigen::MatrixXd L = blk(O, s - 1, s);
        const Eigen::MatrixXd LJ = cu * blk(t.omega_u[n], s - 1, s) + cv * blk(t.omega_v[n], s - 1, s);
        const double e2 = std::max((cs.Js[n][s - 1].transpose() * L - L * cs.Js[n][s].transpose()).norm(),
                                   (L * cs.Js[n][s].transpose() - LJ).norm());
        r.jss_by_order[s] = std::max(r.jss_by_order[s], e2);
      }
      for (int s = 1; s + 1 <= to; ++s) {
        const Eigen::MatrixXd S = blk(O, s + 1, s);
        r.one0_by_order[s] = std::max(r.one0_by_order[s], (rot(s + 1) * S - S * rot(s)).norm());
        const Eigen::MatrixXd L = blk(O, s, s + 1);
        r.two0_by_order[s] =
            std::max(r.two0_by_order[s], (rot(s).transpose() * L - L * rot(s + 1).transpose()).norm());
      }
    }
  }
  for (int s = 0; s <= to; ++s) {
    r.js = std::max(r.js, r.js_by_order[s]);
    r.jss = std::max(r.jss, r.jss_by_order[s]);
    r.one0 = std::max(r.one0, r.one0_by_order[s]);
    r.two0 = std::max(r.two0, r.two0_by_order[s]);
  }
  return r;
}

}  // namespace assocfam
