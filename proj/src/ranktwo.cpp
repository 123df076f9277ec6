#include "assocfam/ranktwo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "assocfam/errors.hpp"

namespace assocfam {

const char* to_string(ScalarField::Kind k) {
  switch (k) {
    case ScalarField::Kind::Zero: return "zero";
    case ScalarField::Kind::Polynomial: return "polynomial";
    case ScalarField::Kind::Height: return "height";
    case ScalarField::Kind::Sampled: return "sampled";
  }
  return "unknown";
}

ScalarField ScalarField::polynomial(std::vector<PolyTerm> terms) {
  ScalarField f;
  f.kind = Kind::Polynomial;
  for (const auto& t : terms)
    if (t.a < 0 || t.b < 0) throw GeometryError(ErrorKind::InvalidSpec, "negative exponent in omega");
  f.poly = std::move(terms);
  return f;
}

ScalarField ScalarField::height_function(const Eigen::VectorXd& a) {
  ScalarField f;
  f.kind = Kind::Height;
  f.height = a;
  return f;
}

ScalarField ScalarField::sampled(const GridParams& grid, const std::vector<double>& values, int order) {
  // chart_from_samples wants an immersion: the graph (omega, u, v).
  if (static_cast<int>(values.size()) != grid.nodes())
    throw GeometryError(ErrorKind::GridMismatch, "omega samples off grid");
  std::vector<Eigen::VectorXd> pts(values.size());
  for (int i = 0; i < grid.nodes(); ++i) pts[i] = Eigen::Vector3d(values[i], grid.u(grid.iu(i)), grid.v(grid.iv(i)));
  ScalarField f;
  f.kind = Kind::Sampled;
  f.samples = chart_from_samples(AmbientSpace::euclidean(3), grid, pts, order);
  return f;
}

Jet ScalarField::jet(const Chart& g, int node, int order) const {
  switch (kind) {
    case Kind::Zero: return Jet(order, 0.0);
    case Kind::Polynomial: {
      const Jet U = Jet::variable(order, g.grid.u(g.grid.iu(node)), 0);
      const Jet V = Jet::variable(order, g.grid.v(g.grid.iv(node)), 1);
      Jet s(order, 0.0);
      for (const auto& t : poly) s += t.coef * (pow(U, t.a) * pow(V, t.b));
      return s;
    }
    case Kind::Height: {
      if (height.size() != g.dim()) throw GeometryError(ErrorKind::InvalidSpec, "height vector has wrong size");
      if (order > g.order) throw GeometryError(ErrorKind::JetOrderTooLow, "height function beyond chart order");
      const VJet x = vjet_truncated(g.jets[node], order);
      Jet s(order, 0.0);
      for (int i = 0; i < g.dim(); ++i) s += height(i) * component(x, i);
      return s;
    }
    case Kind::Sampled:
      if (samples.nodes() != g.nodes()) throw GeometryError(ErrorKind::GridMismatch, "omega samples off grid");
      if (order > samples.order) throw GeometryError(ErrorKind::JetOrderTooLow, "sampled omega jets too short");
      return component(vjet_truncated(samples.jets[node], order), 0);
  }
  return Jet(order, 0.0);
}

namespace {

// Sum of frame columns [first, first + c.size()) with constant coefficients.
VJet frame_combination(const MJet& E, int first, const Eigen::VectorXd& c) {
  VJet v(E[0].rows(), E.size());
  for (size_t i = 0; i < E.size(); ++i) v.col(i) = E[i].middleCols(first, c.size()) * c;
  return v;
}

VJet column_jet(const MJet& E, int col) { return mjet_to_vjet(mjet_cols(E, col, 1)); }

double rel(double num, double den) { return den > 1e-300 ? num / den : num; }

// Jets feeding the sampler, per node.
struct FibreInput {
  std::vector<VJet> h;
  std::vector<MJet> lambda, normal;
  std::vector<Eigen::MatrixXd> plane;
};

RankTwoChart sample_fibres(const AmbientSpace& ambient, const GridParams& grid, int ell, const FibreInput& in,
                           const std::vector<std::vector<Eigen::VectorXd>>& ts, double rank_tol) {
  RankTwoChart rt;
  rt.ell = ell;
  rt.ambient = ambient;
  rt.grid = grid;
  rt.rank_tol = rank_tol;
  const int nn = grid.nodes();
  const int k = static_cast<int>(in.lambda[0][0].cols());
  const int n = 2 + k;
  rt.n = n;
  rt.plane = in.plane;
  rt.conn_u.resize(nn);
  rt.conn_v.resize(nn);
  for (int node = 0; node < nn; ++node) {
    const MJet& L = in.lambda[node];
    const VJet& h = in.h[node];
    const Eigen::MatrixXd nu = in.normal[node][0];
    rt.conn_u[node] = nu.transpose() * mjet_derivative(in.normal[node], 1, 0)[0];
    rt.conn_v[node] = nu.transpose() * mjet_derivative(in.normal[node], 0, 1)[0];
    const Eigen::MatrixXd L0 = L[0], Lu = mjet_derivative(L, 1, 0)[0], Lv = mjet_derivative(L, 0, 1)[0];
    const Eigen::MatrixXd Luu = mjet_derivative(L, 2, 0)[0], Luv = mjet_derivative(L, 1, 1)[0],
                          Lvv = mjet_derivative(L, 0, 2)[0];
    auto hd = [&](int a, int b) { return Eigen::VectorXd(vjet_derivative(h, a, b).col(0)); };
    const Eigen::VectorXd hu = hd(1, 0), hv = hd(0, 1), huu = hd(2, 0), huv = hd(1, 1), hvv = hd(0, 2);
    for (size_t di = 0; di < ts[node].size(); ++di) {
      const Eigen::VectorXd& t = ts[node][di];
      RankTwoSample s;
      s.node = node;
      s.delta_index = static_cast<int>(di);
      s.t = t;
      s.position = h.col(0) + L0 * t;
      Eigen::MatrixXd D(h.rows(), n);
      D.col(0) = hu + Lu * t;
      D.col(1) = hv + Lv * t;
      D.rightCols(k) = L0;
      s.jacobian = D;
      s.metric = D.transpose() * D;
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(D).singularValues();
      s.regular = sv(n - 1) > rank_tol * sv(0);
      if (s.regular) {
        // Second derivatives; d_t d_t f = 0.
        std::vector<Eigen::VectorXd> f2(n * n, Eigen::VectorXd::Zero(h.rows()));
        auto put = [&](int i, int j, const Eigen::VectorXd& w) { f2[i * n + j] = f2[j * n + i] = w; };
        put(0, 0, huu + Luu * t);
        put(0, 1, huv + Luv * t);
        put(1, 1, hvv + Lvv * t);
        for (int i = 0; i < k; ++i) {
          put(0, 2 + i, Lu.col(i));
          put(1, 2 + i, Lv.col(i));
        }
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(D.rows(), n);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd Ri = R.inverse();
        for (auto& w : f2) w -= Q * (Q.transpose() * w);
        s.alpha.resize(nu.cols(), n * n);
        for (int i = 0; i < n * n; ++i) s.alpha.col(i) = nu.transpose() * f2[i];
        // alpha in an orthonormal tangent basis: columns of D R^{-1}.
        Eigen::MatrixXd stack = Eigen::MatrixXd::Zero(h.rows() * n, n);
        Eigen::VectorXd trace = Eigen::VectorXd::Zero(h.rows());
        double norm2 = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            Eigen::VectorXd w = Eigen::VectorXd::Zero(h.rows());
            for (int i = 0; i <= p; ++i)
              for (int j = 0; j <= q; ++j) w += Ri(i, p) * Ri(j, q) * f2[i * n + j];
            stack.block(q * h.rows(), p, h.rows(), 1) = w;
            norm2 += w.squaredNorm();
            if (p == q) trace += w;
          }
        const Eigen::VectorXd asv = Eigen::JacobiSVD<Eigen::MatrixXd>(stack).singularValues();
        int rank = 0;
        for (int i = 0; i < asv.size(); ++i)
          if (asv(i) > rank_tol * asv(0)) ++rank;
        s.nullity_dim = n - rank;
        s.trace_residual = rel(trace.norm(), std::sqrt(norm2));
        for (int i = 0; i < n; ++i)
          rt.normal_residual = std::max(rt.normal_residual, rel((nu.transpose() * D.col(i)).norm(), D.col(i).norm()));
        ++rt.regular_count;
        if (s.nullity_dim != n - 2) ++rt.nullity_mismatch;
        rt.max_trace_residual = std::max(rt.max_trace_residual, s.trace_residual);
      }
      rt.samples.push_back(std::move(s));
    }
  }
  if (rt.regular_count == 0) throw GeometryError(ErrorKind::AllSingular, "no regular fibre sample");
  return rt;
}

int lambda_first(const NormalFlag& f, int ell) { return f.offset(ell + 1); }
int lambda_dim(const NormalFlag& f, int ell) { return f.frame_dim() - f.offset(ell + 1); }

}  // namespace

CrossSectionData cross_section(const SurfaceAnalysis& g, const ScalarField& omega, const Eigen::VectorXd& gamma0,
                               int ell, const std::vector<Eigen::VectorXd>& gamma_extra,
                               const CrossSectionOptions& opt) {
  const NormalFlag& fl = g.flag;
  const Chart& ch = g.chart;
  if (ell < 1 || ell > fl.tau_o - 1)
    throw GeometryError(ErrorKind::OrderOutOfRange,
                        "cross sections need 1 <= ell <= tau_o - 1 = " + std::to_string(fl.tau_o - 1));
  if (opt.check_circular && !(g.cs.max_orth_defect[ell] <= opt.tol_circle))
    throw GeometryError(ErrorKind::NotCircular, "ellipse of order " + std::to_string(ell) + " is not a circle");
  const int k = lambda_dim(fl, ell);
  if (gamma0.size() != 0 && gamma0.size() != k)
    throw GeometryError(ErrorKind::PreconditionFailed, "gamma_0 needs " + std::to_string(k) + " coordinates");
  if (static_cast<int>(gamma_extra.size()) > ell - 1)
    throw GeometryError(ErrorKind::PreconditionFailed, "extra sections only for orders 2..ell");
  for (size_t j = 0; j < gamma_extra.size(); ++j)
    if (gamma_extra[j].size() != fl.dims[j + 2])
      throw GeometryError(ErrorKind::PreconditionFailed, "gamma_" + std::to_string(j + 2) + " has wrong size");
  const int q = std::min(ch.order - 2, fl.frame_order);
  if (q < 2) throw GeometryError(ErrorKind::JetOrderTooLow, "cross sections need frame jets of order >= 2");

  CrossSectionData cs;
  cs.ell = ell;
  cs.c = ch.ambient.curvature();
  cs.omega = omega;
  cs.gamma0 = gamma0.size() ? gamma0 : Eigen::VectorXd::Zero(k);
  cs.gamma_extra = gamma_extra;
  cs.order = q;
  const int nn = ch.nodes(), d1 = fl.dims[1], o1 = fl.offset(1);
  cs.gamma1.resize(nn);
  cs.h.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const MJet E = mjet_truncated(fl.frame[n], q);
    auto xd = [&](int a, int b) { return vjet_truncated(ch.partial_jet(n, a, b), q); };
    const VJet xu = xd(1, 0), xv = xd(0, 1);
    const std::array<VJet, 3> x2 = {xd(2, 0), xd(1, 1), xd(0, 2)};
    const Jet W = omega.jet(ch, n, q + 2);
    const Jet Wu = W.derivative(1, 0).truncated(q), Wv = W.derivative(0, 1).truncated(q);
    const std::array<Jet, 3> W2 = {W.derivative(2, 0), W.derivative(1, 1), W.derivative(0, 2)};
    const Jet G11 = dot(xu, xu), G12 = dot(xu, xv), G22 = dot(xv, xv);
    const std::array<Jet, 3> Gs = {G11, G12, G22};
    const Jet det = G11 * G22 - G12 * G12;
    const Jet c1 = (G22 * Wu - G12 * Wv) / det, c2 = (G11 * Wv - G12 * Wu) / det;
    const VJet grad = vjet_add(scale(c1, xu), scale(c2, xv));
    const Jet Wq = W.truncated(q);

    // Least squares over the N_1 fibre, the off-diagonal entry counted twice.
    const std::array<double, 3> wt = {1.0, 2.0, 1.0};
    std::array<std::vector<Jet>, 3> a;
    std::array<Jet, 3> rhs;
    for (int r = 0; r < 3; ++r) {
      rhs[r] = W2[r].truncated(q) - dot(x2[r], grad) + static_cast<double>(cs.c) * (Wq * Gs[r]);
      for (int j = 0; j < d1; ++j) a[r].push_back(dot(column_jet(E, o1 + j), x2[r]));
    }
    std::vector<std::vector<Jet>> N(d1, std::vector<Jet>(d1, Jet(q))), bv(d1, std::vector<Jet>(1, Jet(q)));
    for (int r = 0; r < 3; ++r)
      for (int i = 0; i < d1; ++i) {
        bv[i][0] += wt[r] * (a[r][i] * rhs[r]);
        for (int j = 0; j < d1; ++j) N[i][j] += wt[r] * (a[r][i] * a[r][j]);
      }
    const MJet gam = mjet_mul(mjet_inverse(mjet_from_entries(N)), mjet_from_entries(bv));
    cs.gamma1[n] = gam[0].col(0);
    double res2 = 0.0, rhs2 = 0.0;
    for (int r = 0; r < 3; ++r) {
      double lhs = 0.0;
      for (int i = 0; i < d1; ++i) lhs += a[r][i].value() * gam[0](i, 0);
      res2 += wt[r] * (lhs - rhs[r].value()) * (lhs - rhs[r].value());
      rhs2 += wt[r] * rhs[r].value() * rhs[r].value();
    }
    cs.solve_residual = std::max(cs.solve_residual, rhs2 > 0.0 ? std::sqrt(res2 / rhs2) : std::sqrt(res2));

    VJet h = vjet_add(grad, mjet_to_vjet(mjet_mul(mjet_cols(E, o1, d1), gam)));
    h = vjet_add(h, frame_combination(E, lambda_first(fl, ell), cs.gamma0));
    for (size_t j = 0; j < gamma_extra.size(); ++j)
      h = vjet_add(h, frame_combination(E, fl.offset(static_cast<int>(j) + 2), gamma_extra[j]));
    if (cs.c != 0) h = vjet_add(h, scale(Wq, vjet_truncated(ch.jets[n], q)));
    cs.h[n] = h;

    const Eigen::MatrixXd low = E[0].leftCols(fl.offset(ell));
    for (const auto& dv : {Eigen::VectorXd(vjet_derivative(h, 1, 0).col(0)),
                           Eigen::VectorXd(vjet_derivative(h, 0, 1).col(0))}) {
      cs.section_residual = std::max(cs.section_residual, rel((low.transpose() * dv).norm(), dv.norm()));
    }
  }
  if (!(cs.solve_residual <= opt.solve_tol))
    throw GeometryError(ErrorKind::SolveResidualTooLarge,
                        "gamma_1 system residual " + std::to_string(cs.solve_residual) + " exceeds tolerance");
  return cs;
}

RankTwoChart build_ranktwo(const SurfaceAnalysis& g, const CrossSectionData& cs, const FiberSampling& fibers,
                           double rank_tol) {
  const NormalFlag& fl = g.flag;
  const int nn = g.chart.nodes();
  if (static_cast<int>(cs.h.size()) != nn) throw GeometryError(ErrorKind::GridMismatch, "cross section off grid");
  const int ell = cs.ell, k = lambda_dim(fl, ell), first = lambda_first(fl, ell);
  FibreInput in;
  in.h = cs.h;
  std::vector<std::vector<Eigen::VectorXd>> ts(nn);
  for (int n = 0; n < nn; ++n) {
    const MJet E = mjet_truncated(fl.frame[n], cs.order);
    in.lambda.push_back(mjet_cols(E, first, k));
    in.normal.push_back(mjet_cols(E, 0, fl.offset(ell)));
    in.plane.push_back(fl.block(n, ell));
    const double step = fibers.step * (1.0 + cs.h[n].col(0).norm());
    if (fibers.include_origin) ts[n].push_back(Eigen::VectorXd::Zero(k));
    for (int i = 0; i < k; ++i)
      for (double sgn : {1.0, -1.0}) ts[n].push_back(sgn * step * Eigen::VectorXd::Unit(k, i));
  }
  return sample_fibres(AmbientSpace::euclidean(g.chart.dim()), g.chart.grid, ell, in, ts, rank_tol);
}

RankTwoFamily ranktwo_family(const SurfaceAnalysis& g, const CrossSectionData& cs, const RankTwoChart& rt,
                             double theta, const FamilyOptions& opt, const ConnectionOptions& copt) {
  const NormalFlag& fl = g.flag;
  const int nn = g.chart.nodes();
  const int ell = cs.ell, k = lambda_dim(fl, ell), first = lambda_first(fl, ell);
  RankTwoFamily out;
  out.theta = theta;
  out.member = family_member(g, ell, theta, opt, copt);
  const FrameField& ff = out.member.frame;

  FibreInput in;
  std::vector<std::vector<Eigen::VectorXd>> ts(nn);
  for (const auto& s : rt.samples) ts[s.node].push_back(s.t);
  for (int n = 0; n < nn; ++n) {
    const MJet E = mjet_truncated(fl.frame[n], cs.order);
    const MJet F = mjet_truncated(ff.jets[n], cs.order);
    // h_theta = phi_theta h: same frame coordinates in the new frame.
    in.h.push_back(mjet_to_vjet(mjet_mul(F, mjet_mul(E, vjet_to_mjet(cs.h[n]), true))));
    in.lambda.push_back(mjet_cols(F, first, k));
    in.normal.push_back(mjet_cols(F, 0, fl.offset(ell)));
    in.plane.push_back(ff.F[n].middleCols(fl.offset(ell), fl.dims[ell]));
  }
  out.chart = sample_fibres(rt.ambient, rt.grid, ell, in, ts, rt.rank_tol);

  for (int n = 0; n < nn; ++n) {
    const double sc = std::max({1.0, rt.conn_u[n].norm(), rt.conn_v[n].norm()});
    out.connection_residual =
        std::max(out.connection_residual,
                 ((out.chart.conn_u[n] - rt.conn_u[n]).norm() + (out.chart.conn_v[n] - rt.conn_v[n]).norm()) / sc);
  }
  const int dn = rt.n;
  for (size_t i = 0; i < rt.samples.size(); ++i) {
    const RankTwoSample& a = rt.samples[i];
    const RankTwoSample& b = out.chart.samples[i];
    if (!a.regular || !b.regular) continue;
    out.metric_residual = std::max(out.metric_residual, rel((b.metric - a.metric).norm(), a.metric.norm()));
    // R_{-theta}: identity on the fibre directions, rotation by -theta in the
    // N_ell plane in the sense of J_ell.
    const Eigen::MatrixXd& P = rt.plane[a.node];
    const Eigen::Matrix2d& J = g.cs.Js[a.node][ell];
    const Eigen::Matrix2d Rm = std::cos(theta) * Eigen::Matrix2d::Identity() - std::sin(theta) * J;
    const Eigen::MatrixXd W = a.jacobian;
    Eigen::MatrixXd Wr = W + P * ((Rm - Eigen::Matrix2d::Identity()) * (P.transpose() * W));
    const Eigen::MatrixXd X = W.colPivHouseholderQr().solve(Wr);  // column j: R_{-theta} e_j
    double num = 0.0;
    for (int p = 0; p < dn; ++p)
      for (int q = 0; q < dn; ++q) {
        Eigen::VectorXd lhs = Eigen::VectorXd::Zero(a.alpha.rows());
        for (int r = 0; r < dn; ++r) lhs += X(r, p) * a.alpha.col(r * dn + q);
        num = std::max(num, (b.alpha.col(p * dn + q) - lhs).norm());
      }
    out.alpha_residual = std::max(out.alpha_residual, rel(num, a.alpha.norm()));
  }
  return out;
}

CongruenceResult congruence_test(const RankTwoChart& a, const RankTwoChart& b) {
  if (a.samples.size() != b.samples.size() || a.ambient.flat_dim != b.ambient.flat_dim)
    throw GeometryError(ErrorKind::GridMismatch, "rank-two charts have different samples");
  const int m = a.ambient.flat_dim, ns = static_cast<int>(a.samples.size());
  Eigen::MatrixXd A(m, ns), B(m, ns);
  for (int i = 0; i < ns; ++i) {
    A.col(i) = a.samples[i].position;
    B.col(i) = b.samples[i].position;
  }
  return congruence_points(A, B, true);
}

void write_ranktwo_csv(const RankTwoChart& rt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GeometryError(ErrorKind::ConfigError, "cannot write " + path);
  out << "u,v,delta_index";
  for (int i = 1; i <= rt.ambient.flat_dim; ++i) out << ",x" << i;
  out << ",nullity_dim,regular\n" << std::setprecision(12);
  for (const auto& s : rt.samples) {
    out << rt.grid.u(rt.grid.iu(s.node)) << ',' << rt.grid.v(rt.grid.iv(s.node)) << ',' << s.delta_index;
    for (int i = 0; i < s.position.size(); ++i) out << ',' << s.position(i);
    out << ',' << s.nullity_dim << ',' << (s.regular ? 1 : 0) << '\n';
  }
}

}  // namespace assocfam
