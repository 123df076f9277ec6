#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "assocfam/analysis.hpp"
#include "assocfam/compat.hpp"
#include "assocfam/errors.hpp"
#include "assocfam/family.hpp"

#ifndef ASSOCFAM_VERSION
#define ASSOCFAM_VERSION "unknown"
#endif

namespace assocfam::cli {

using nlohmann::json;

Command parse_command(const std::string& s) {
  if (s == "analyze") return Command::Analyze;
  if (s == "family") return Command::Family;
  if (s == "ranktwo") return Command::RankTwo;
  throw ConfigError("unknown command '" + s + "'");
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Family: return "family";
    case Command::RankTwo: return "ranktwo";
  }
  return "unknown";
}

const char* to_string(Action::Kind k) {
  switch (k) {
    case Action::Kind::Analyze: return "analyze";
    case Action::Kind::Family: return "family";
    case Action::Kind::Relation: return "relation";
    case Action::Kind::Polar: return "polar";
    case Action::Kind::RankTwo: return "ranktwo";
  }
  return "unknown";
}

double parse_angle(const std::string& text) {
  static const std::regex num(R"(\s*([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)\s*)");
  static const std::regex pi(R"(\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(/\s*(\d+\.?\d*))?\s*)");
  std::smatch m;
  if (std::regex_match(text, m, num)) return std::stod(m[1]);
  if (std::regex_match(text, m, pi)) {
    const std::string c = m[1];
    double k = 1.0;
    if (c == "-") k = -1.0;
    else if (!c.empty() && c != "+") k = std::stod(c);
    const double d = m[3].matched ? std::stod(m[3]) : 1.0;
    if (d == 0.0) throw ConfigError("division by zero in angle '" + text + "'");
    return k * M_PI / d;
  }
  throw ConfigError("cannot read angle '" + text + "'");
}

std::vector<double> parse_angle_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_angle(item));
  if (out.empty()) throw ConfigError("empty angle list");
  return out;
}

std::pair<int, int> parse_grid(const std::string& s) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("grid must look like NxM, got '" + s + "'");
  return {std::stoi(m[1]), std::stoi(m[2])};
}

namespace {

struct Ctx {
  std::string name;
  std::string base_dir;
};

[[noreturn]] void fail(const Ctx& ctx, const YAML::Node& n, const std::string& msg) {
  std::string loc = ctx.name;
  const YAML::Mark m = n.Mark();
  if (!m.is_null()) loc += ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  throw ConfigError(loc + ": " + msg);
}

void check_map(const Ctx& ctx, const YAML::Node& n, const std::set<std::string>& keys, const std::string& what) {
  if (!n.IsMap()) fail(ctx, n, what + " must be a mapping");
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    if (!keys.count(k)) fail(ctx, kv.first, "unknown key '" + k + "' in " + what);
  }
}

template <class T>
T as(const Ctx& ctx, const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(ctx, n, what + " has the wrong type");
  }
}

template <class T>
T opt(const Ctx& ctx, const YAML::Node& parent, const char* key, T def) {
  const YAML::Node n = parent[key];
  return n ? as<T>(ctx, n, key) : def;
}

YAML::Node need(const Ctx& ctx, const YAML::Node& parent, const char* key) {
  const YAML::Node n = parent[key];
  if (!n) fail(ctx, parent, std::string("missing key '") + key + "'");
  return n;
}

double angle(const Ctx& ctx, const YAML::Node& n) {
  if (!n.IsScalar()) fail(ctx, n, "angle must be a number or an expression like pi/3");
  try {
    return parse_angle(n.as<std::string>());
  } catch (const ConfigError& e) {
    fail(ctx, n, e.what());
  }
}

void check_theta(const Ctx& ctx, const YAML::Node& n, double t) {
  if (!(t >= 0.0 && t < M_PI)) fail(ctx, n, "theta out of [0,pi)");
}

std::vector<double> theta_list(const Ctx& ctx, const YAML::Node& n) {
  std::vector<double> out;
  if (n.IsSequence()) {
    for (const auto& x : n) {
      out.push_back(angle(ctx, x));
      check_theta(ctx, x, out.back());
    }
  } else {
    out.push_back(angle(ctx, n));
    check_theta(ctx, n, out.back());
  }
  return out;
}

std::vector<double> doubles(const Ctx& ctx, const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(ctx, n, what + " must be a list");
  std::vector<double> out;
  for (const auto& x : n) out.push_back(as<double>(ctx, x, what));
  return out;
}

Eigen::VectorXd vector(const Ctx& ctx, const YAML::Node& n, const std::string& what) {
  const std::vector<double> v = doubles(ctx, n, what);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// [coef, a, b] triples.
std::vector<PolyTerm> poly_terms(const Ctx& ctx, const YAML::Node& n) {
  if (!n.IsSequence()) fail(ctx, n, "polynomial must be a list of [coef, a, b]");
  std::vector<PolyTerm> out;
  for (const auto& t : n) {
    if (!t.IsSequence() || t.size() != 3) fail(ctx, t, "term must be [coef, a, b]");
    out.push_back({as<double>(ctx, t[0], "coef"), as<int>(ctx, t[1], "power"), as<int>(ctx, t[2], "power")});
  }
  return out;
}

json terms_json(const std::vector<PolyTerm>& terms) {
  json a = json::array();
  for (const auto& t : terms) a.push_back({t.coef, t.a, t.b});
  return a;
}

// A number or [re, im].
std::complex<double> complex_value(const Ctx& ctx, const YAML::Node& n) {
  if (n.IsSequence()) {
    if (n.size() != 2) fail(ctx, n, "complex value must be [re, im]");
    return {as<double>(ctx, n[0], "re"), as<double>(ctx, n[1], "im")};
  }
  return {as<double>(ctx, n, "coefficient"), 0.0};
}

AmbientSpace parse_ambient(const Ctx& ctx, const YAML::Node& n) {
  check_map(ctx, n, {"kind", "dim"}, "ambient");
  const std::string kind = as<std::string>(ctx, need(ctx, n, "kind"), "kind");
  const int dim = as<int>(ctx, need(ctx, n, "dim"), "dim");
  AmbientSpace a;
  if (kind == "euclidean") a = AmbientSpace::euclidean(dim);
  else if (kind == "sphere") a = AmbientSpace::sphere(dim);
  else fail(ctx, n["kind"], "ambient kind must be euclidean or sphere");
  return a;
}

SurfaceSpec parse_surface(const Ctx& ctx, const YAML::Node& n, json& echo, std::uint64_t seed) {
  if (!n.IsMap()) fail(ctx, n, "surface must be a mapping");
  const std::string gen = as<std::string>(ctx, need(ctx, n, "generator"), "generator");
  echo["generator"] = gen;
  try {
    if (gen == "plane" || gen == "catenoid") {
      check_map(ctx, n, {"generator"}, "surface");
      return gen == "plane" ? gen_plane() : gen_catenoid();
    }
    if (gen == "catenoid_associate") {
      check_map(ctx, n, {"generator", "theta"}, "surface");
      const double t = angle(ctx, need(ctx, n, "theta"));
      echo["theta"] = t;
      return gen_catenoid_associate(t);
    }
    if (gen == "poly_map") {
      check_map(ctx, n, {"generator", "components"}, "surface");
      const YAML::Node c = need(ctx, n, "components");
      if (!c.IsSequence()) fail(ctx, c, "components must be a list");
      std::vector<std::vector<PolyTerm>> comps;
      echo["components"] = json::array();
      for (const auto& x : c) {
        comps.push_back(poly_terms(ctx, x));
        echo["components"].push_back(terms_json(comps.back()));
      }
      return gen_poly_map(comps);
    }
    if (gen == "isotropic_curve" || gen == "null_curve") {
      check_map(ctx, n, {"generator", "coefficients"}, "surface");
      const YAML::Node c = need(ctx, n, "coefficients");
      if (!c.IsSequence()) fail(ctx, c, "coefficients must be a list per component");
      std::vector<std::vector<std::complex<double>>> coeffs;
      echo["coefficients"] = json::array();
      for (const auto& comp : c) {
        if (!comp.IsSequence()) fail(ctx, comp, "component must list the coefficients of z^0, z^1, ...");
        coeffs.emplace_back();
        json e = json::array();
        for (const auto& z : comp) {
          coeffs.back().push_back(complex_value(ctx, z));
          e.push_back({coeffs.back().back().real(), coeffs.back().back().imag()});
        }
        echo["coefficients"].push_back(e);
      }
      return gen == "null_curve" ? gen_null_curve(coeffs) : gen_isotropic_curve(coeffs);
    }
    if (gen == "lawson_ruled") {
      check_map(ctx, n, {"generator", "m", "k"}, "surface");
      const int m = as<int>(ctx, need(ctx, n, "m"), "m"), k = as<int>(ctx, need(ctx, n, "k"), "k");
      echo["m"] = m;
      echo["k"] = k;
      return gen_lawson_ruled(m, k);
    }
    if (gen == "lawson_sum") {
      check_map(ctx, n, {"generator", "base", "weights", "angles"}, "surface");
      json be;
      const SurfaceSpec base = parse_surface(ctx, need(ctx, n, "base"), be, seed);
      const std::vector<double> w = doubles(ctx, need(ctx, n, "weights"), "weights");
      std::vector<double> a;
      const YAML::Node an = need(ctx, n, "angles");
      if (!an.IsSequence()) fail(ctx, an, "angles must be a list");
      for (const auto& x : an) a.push_back(angle(ctx, x));
      echo["base"] = be;
      echo["weights"] = w;
      echo["angles"] = a;
      return gen_lawson_sum(base, w, a);
    }
    if (gen == "perturbed") {
      check_map(ctx, n, {"generator", "base", "epsilon"}, "surface");
      json be;
      const SurfaceSpec base = parse_surface(ctx, need(ctx, n, "base"), be, seed);
      const double eps = as<double>(ctx, need(ctx, n, "epsilon"), "epsilon");
      echo["base"] = be;
      echo["epsilon"] = eps;
      return gen_perturbed(base, eps, seed);
    }
    if (gen == "sampled") {
      check_map(ctx, n, {"generator", "path", "ambient"}, "surface");
      const std::string rel = as<std::string>(ctx, need(ctx, n, "path"), "path");
      const std::filesystem::path p = std::filesystem::path(ctx.base_dir) / rel;
      if (!std::filesystem::exists(p)) fail(ctx, n["path"], "no such file '" + p.string() + "'");
      const AmbientSpace amb = parse_ambient(ctx, need(ctx, n, "ambient"));
      echo["path"] = rel;
      echo["ambient"] = {{"kind", amb.is_sphere() ? "sphere" : "euclidean"}, {"dim", amb.flat_dim}};
      return gen_sampled(p.string(), amb);
    }
  } catch (const GeometryError& e) {
    fail(ctx, n, e.what());
  }
  fail(ctx, n["generator"], "unknown generator '" + gen + "'");
}

void parse_grid_node(const Ctx& ctx, const YAML::Node& n, GridParams& g) {
  check_map(ctx, n, {"n", "u", "v"}, "grid");
  if (const YAML::Node s = n["n"]) {
    if (s.IsSequence()) {
      if (s.size() != 2) fail(ctx, s, "grid n must be [nu, nv]");
      g.nu = as<int>(ctx, s[0], "nu");
      g.nv = as<int>(ctx, s[1], "nv");
    } else {
      g.nu = g.nv = as<int>(ctx, s, "n");
    }
  }
  auto range = [&](const char* key, double& a, double& b) {
    if (const YAML::Node r = n[key]) {
      const std::vector<double> v = doubles(ctx, r, key);
      if (v.size() != 2 || !(v[1] > v[0])) fail(ctx, r, std::string(key) + " must be [lo, hi] with lo < hi");
      a = v[0];
      b = v[1];
    }
  };
  range("u", g.u0, g.u1);
  range("v", g.v0, g.v1);
}

ScalarField parse_omega(const Ctx& ctx, const YAML::Node& n, RankTwoAction& a) {
  check_map(ctx, n, {"kind", "terms", "vector"}, "omega");
  a.omega_kind = as<std::string>(ctx, need(ctx, n, "kind"), "kind");
  if (a.omega_kind == "zero") return ScalarField::zero();
  if (a.omega_kind == "polynomial") {
    a.omega_terms = poly_terms(ctx, need(ctx, n, "terms"));
    try {
      return ScalarField::polynomial(a.omega_terms);
    } catch (const GeometryError& e) {
      fail(ctx, n, e.what());
    }
  }
  if (a.omega_kind == "height") {
    a.omega_height = vector(ctx, need(ctx, n, "vector"), "vector");
    return ScalarField::height_function(a.omega_height);
  }
  fail(ctx, n["kind"], "omega kind must be zero, polynomial or height");
}

Action parse_action(const Ctx& ctx, const YAML::Node& item) {
  Action a;
  std::string type;
  YAML::Node b(YAML::NodeType::Map);
  if (item.IsScalar()) {
    type = item.as<std::string>();
  } else if (item.IsMap() && item.size() == 1) {
    type = item.begin()->first.as<std::string>();
    if (!item.begin()->second.IsNull()) b = item.begin()->second;
  } else {
    fail(ctx, item, "action must be a name or a single-key mapping");
  }
  if (type == "analyze") {
    a.kind = Action::Kind::Analyze;
    check_map(ctx, b, {}, "analyze");
  } else if (type == "family") {
    a.kind = Action::Kind::Family;
    check_map(ctx, b, {"ell", "theta", "check_circular", "allow_any_order"}, "family");
    a.family.ell = opt<int>(ctx, b, "ell", 0);
    if (b["theta"]) a.family.theta = theta_list(ctx, b["theta"]);
    a.family.check_circular = opt<bool>(ctx, b, "check_circular", true);
    a.family.allow_any_order = opt<bool>(ctx, b, "allow_any_order", false);
    if (a.family.ell < 0) fail(ctx, b["ell"], "ell must be >= 0");
  } else if (type == "relation") {
    a.kind = Action::Kind::Relation;
    check_map(ctx, b, {"ell", "r", "theta", "allow_any_order"}, "relation");
    a.relation.ell = opt<int>(ctx, b, "ell", 0);
    a.relation.r = opt<int>(ctx, b, "r", 1);
    a.relation.theta = theta_list(ctx, need(ctx, b, "theta"));
    a.relation.allow_any_order = opt<bool>(ctx, b, "allow_any_order", false);
    if (a.relation.ell < 0 || a.relation.r < 1) fail(ctx, b, "relation needs ell >= 0 and r >= 1");
  } else if (type == "polar") {
    a.kind = Action::Kind::Polar;
    check_map(ctx, b, {"kind", "closedness_tol", "smoothing", "elliptic_tol"}, "polar");
    PolarOptions& o = a.polar.options;
    if (const YAML::Node k = b["kind"]) {
      const std::string s = as<std::string>(ctx, k, "kind");
      if (s == "odd") o.kind = PolarKind::OddSphericalNormal;
      else if (s == "even") o.kind = PolarKind::EvenIntegrated;
      else fail(ctx, k, "polar kind must be odd or even");
    }
    o.closedness_tol = opt<double>(ctx, b, "closedness_tol", o.closedness_tol);
    o.smoothing = opt<double>(ctx, b, "smoothing", o.smoothing);
    o.elliptic_tol = opt<double>(ctx, b, "elliptic_tol", o.elliptic_tol);
  } else if (type == "ranktwo") {
    a.kind = Action::Kind::RankTwo;
    RankTwoAction& r = a.ranktwo;
    check_map(ctx, b, {"ell", "omega", "gamma0", "gamma_extra", "fiber", "theta", "solve_tol", "check_circular"},
              "ranktwo");
    r.ell = opt<int>(ctx, b, "ell", 1);
    if (b["omega"]) r.omega = parse_omega(ctx, b["omega"], r);
    if (b["gamma0"]) r.gamma0 = vector(ctx, b["gamma0"], "gamma0");
    if (const YAML::Node ge = b["gamma_extra"]) {
      if (!ge.IsSequence()) fail(ctx, ge, "gamma_extra must be a list of vectors");
      for (const auto& x : ge) r.gamma_extra.push_back(vector(ctx, x, "gamma_extra"));
    }
    if (const YAML::Node f = b["fiber"]) {
      check_map(ctx, f, {"step", "include_origin"}, "fiber");
      r.fibers.step = opt<double>(ctx, f, "step", r.fibers.step);
      r.fibers.include_origin = opt<bool>(ctx, f, "include_origin", r.fibers.include_origin);
      if (r.fibers.step < 0.0) fail(ctx, f, "fiber step must be >= 0");
    }
    if (b["theta"]) r.theta = theta_list(ctx, b["theta"]);
    r.options.solve_tol = opt<double>(ctx, b, "solve_tol", r.options.solve_tol);
    r.options.check_circular = opt<bool>(ctx, b, "check_circular", true);
  } else {
    fail(ctx, item, "unknown action '" + type + "'");
  }
  return a;
}

bool selected(Action::Kind k, Command c) {
  switch (c) {
    case Command::Analyze: return k == Action::Kind::Analyze || k == Action::Kind::Polar;
    case Command::Family: return k == Action::Kind::Family || k == Action::Kind::Relation;
    case Command::RankTwo: return k == Action::Kind::RankTwo;
  }
  return false;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& name, const std::string& base_dir,
                            const Overrides& ov) {
  const Ctx ctx{name, base_dir};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(name + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  check_map(ctx, root, {"surface", "grid", "jet_order", "tolerances", "seed", "output", "actions"}, "config");
  PipelineConfig cfg;
  cfg.seed = ov.seed ? *ov.seed : opt<std::uint64_t>(ctx, root, "seed", 0);
  cfg.surface = parse_surface(ctx, need(ctx, root, "surface"), cfg.surface_echo, cfg.seed);
  const bool sampled = cfg.surface.generator == "sampled";
  cfg.grid = cfg.surface.domain;
  if (const YAML::Node g = root["grid"]) {
    if (sampled) fail(ctx, g, "the grid of sampled input comes from the file");
    parse_grid_node(ctx, g, cfg.grid);
  }
  if (ov.grid) {
    if (sampled) throw ConfigError("--grid: the grid of sampled input comes from the file");
    cfg.grid.nu = ov.grid->first;
    cfg.grid.nv = ov.grid->second;
  }
  if (!sampled && (cfg.grid.nu < 5 || cfg.grid.nv < 5)) throw ConfigError(name + ": grid needs at least 5x5 nodes");
  cfg.jet_order = opt<int>(ctx, root, "jet_order", cfg.jet_order);
  if (cfg.jet_order < 2 || cfg.jet_order > kMaxJetOrder)
    fail(ctx, root["jet_order"], "jet_order must lie in [2, " + std::to_string(kMaxJetOrder) + "]");
  if (const YAML::Node t = root["tolerances"]) {
    check_map(ctx, t, {"rank_tol", "tol_circle", "congruence_tol", "holonomy_tol"}, "tolerances");
    cfg.rank_tol = opt<double>(ctx, t, "rank_tol", cfg.rank_tol);
    cfg.tol_circle = opt<double>(ctx, t, "tol_circle", cfg.tol_circle);
    cfg.congruence_tol = opt<double>(ctx, t, "congruence_tol", cfg.congruence_tol);
    cfg.holonomy_tol = opt<double>(ctx, t, "holonomy_tol", cfg.holonomy_tol);
  }
  if (ov.tol_circle) cfg.tol_circle = *ov.tol_circle;
  for (double t : {cfg.rank_tol, cfg.tol_circle, cfg.congruence_tol, cfg.holonomy_tol})
    if (!(t > 0.0)) throw ConfigError(name + ": tolerances must be positive");
  if (const YAML::Node o = root["output"]) {
    check_map(ctx, o, {"dir", "csv"}, "output");
    if (o["dir"]) cfg.out_dir = (std::filesystem::path(base_dir) / as<std::string>(ctx, o["dir"], "dir")).string();
    cfg.write_csv = opt<bool>(ctx, o, "csv", true);
  }
  if (ov.out) cfg.out_dir = *ov.out;
  if (const YAML::Node acts = root["actions"]) {
    if (!acts.IsSequence()) fail(ctx, acts, "actions must be a list");
    for (const auto& item : acts) cfg.actions.push_back(parse_action(ctx, item));
  }
  if (ov.theta) {
    for (double t : *ov.theta)
      if (!(t >= 0.0 && t < M_PI)) throw ConfigError("--theta: theta out of [0,pi)");
    cfg.theta_override = ov.theta;
    for (Action& a : cfg.actions) {
      a.family.theta = *ov.theta;
      a.relation.theta = *ov.theta;
      a.ranktwo.theta = *ov.theta;
    }
  }
  if (ov.ell) {
    if (*ov.ell < 0) throw ConfigError("--ell must be >= 0");
    cfg.ell_override = ov.ell;
    for (Action& a : cfg.actions) {
      a.family.ell = *ov.ell;
      a.relation.ell = *ov.ell;
      a.ranktwo.ell = *ov.ell;
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path p(path);
  return parse_config(ss.str(), p.filename().string(), p.parent_path().string(), ov);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json grid_json(const GridParams& g) {
  return {{"nu", g.nu}, {"nv", g.nv}, {"u", {g.u0, g.u1}}, {"v", {g.v0, g.v1}}};
}

json ambient_json(const AmbientSpace& a) {
  return {{"kind", a.is_sphere() ? "sphere" : "euclidean"}, {"flat_dim", a.flat_dim}};
}

json omega_json(const RankTwoAction& r) {
  json o = {{"kind", r.omega_kind}};
  if (r.omega_kind == "polynomial") o["terms"] = terms_json(r.omega_terms);
  if (r.omega_kind == "height") o["vector"] = std::vector<double>(r.omega_height.data(), r.omega_height.data() + r.omega_height.size());
  return o;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json action_echo(const Action& a) {
  json e = {{"type", to_string(a.kind)}};
  switch (a.kind) {
    case Action::Kind::Analyze: break;
    case Action::Kind::Family:
      e["ell"] = a.family.ell;
      e["theta"] = a.family.theta;
      e["check_circular"] = a.family.check_circular;
      e["allow_any_order"] = a.family.allow_any_order;
      break;
    case Action::Kind::Relation:
      e["ell"] = a.relation.ell;
      e["r"] = a.relation.r;
      e["theta"] = a.relation.theta;
      e["allow_any_order"] = a.relation.allow_any_order;
      break;
    case Action::Kind::Polar: {
      const PolarOptions& o = a.polar.options;
      e["kind"] = o.kind ? json(to_string(*o.kind)) : json(nullptr);
      e["closedness_tol"] = o.closedness_tol;
      e["smoothing"] = o.smoothing;
      e["elliptic_tol"] = o.elliptic_tol;
      break;
    }
    case Action::Kind::RankTwo: {
      const RankTwoAction& r = a.ranktwo;
      e["ell"] = r.ell;
      e["omega"] = omega_json(r);
      e["gamma0"] = to_vec(r.gamma0);
      e["gamma_extra"] = json::array();
      for (const auto& g : r.gamma_extra) e["gamma_extra"].push_back(to_vec(g));
      e["fiber"] = {{"step", r.fibers.step}, {"include_origin", r.fibers.include_origin}};
      e["theta"] = r.theta;
      e["solve_tol"] = r.options.solve_tol;
      e["check_circular"] = r.options.check_circular;
      break;
    }
  }
  return e;
}

json config_echo(const PipelineConfig& cfg, const std::vector<Action>& actions) {
  json acts = json::array();
  for (const Action& a : actions) acts.push_back(action_echo(a));
  return {{"surface", cfg.surface_echo},
          {"grid", grid_json(cfg.grid)},
          {"jet_order", cfg.jet_order},
          {"tolerances",
           {{"rank_tol", cfg.rank_tol},
            {"tol_circle", cfg.tol_circle},
            {"congruence_tol", cfg.congruence_tol},
            {"holonomy_tol", cfg.holonomy_tol}}},
          {"seed", cfg.seed},
          {"output", {{"csv", cfg.write_csv}}},
          {"actions", acts}};
}

json residual_json(const EquationResidual& r) { return {{"max", r.max}, {"by_order", r.by_order}}; }

json analysis_json(const SurfaceAnalysis& g) {
  const NormalFlag& f = g.flag;
  json a = {{"flag",
             {{"dims", f.dims},
              {"tau", f.tau},
              {"tau_o", f.tau_o},
              {"substantial_dim", f.substantial_dim},
              {"frame_order", f.frame_order}}},
            {"elliptic", g.cs.elliptic},
            {"ellipticity_residual", g.cs.ellipticity_residual},
            {"mean_curvature_residual", mean_curvature_residual(g.chart)}};
  if (!g.cs.elliptic) {
    a["not_elliptic_node"] = g.cs.not_elliptic_node;
    return a;
  }
  json table = json::array();
  const EllipseReport& e = g.ellipses;
  for (size_t s = 0; s < e.max_defect.size(); ++s)
    table.push_back({{"order", s},
                     {"max_defect", e.max_defect[s]},
                     {"min_defect", e.min_defect[s]},
                     {"max_orth_defect", s < g.cs.max_orth_defect.size() ? json(g.cs.max_orth_defect[s]) : json(nullptr)},
                     {"degenerate_nodes", e.degenerate_count[s]}});
  a["ellipses"] = table;
  a["criterion_gap"] = e.max_criterion_gap;
  if (g.has_tensors) {
    const CompatReport c = compatibility_residuals(g.flag, g.forms, g.tensors);
    a["compatibility"] = {{"gengauss", residual_json(c.gengauss)},
                          {"gencodazzi", residual_json(c.gencodazzi)},
                          {"gencodazzi2", residual_json(c.gencodazzi2)},
                          {"sym", residual_json(c.sym)},
                          {"second", residual_json(c.second)},
                          {"flatness", c.flatness}};
  }
  return a;
}

json congruence_json(const CongruenceResult& c, double tol) {
  return {{"residual", c.residual}, {"reflection", c.reflection}, {"congruent", c.residual < tol}};
}

struct Runner {
  const PipelineConfig& cfg;
  AnalysisOptions aopt;
  FamilyOptions fopt;
  std::filesystem::path out;
  bool files = false;

  explicit Runner(const PipelineConfig& c) : cfg(c) {
    aopt.flag.rank_tol = c.rank_tol;
    aopt.elliptic.hard = false;
    fopt.holonomy_tol = c.holonomy_tol;
    fopt.tol_circle = c.tol_circle;
    files = !c.out_dir.empty() && c.write_csv;
    out = c.out_dir;
  }

  ConnectionOptions copt(bool check_circular, bool any_order) const {
    ConnectionOptions o;
    o.tol_circle = cfg.tol_circle;
    o.check_circular = check_circular;
    o.allow_any_order = any_order;
    return o;
  }

  std::string file(const std::string& name) const { return (out / name).string(); }

  json analyze_action(const SurfaceAnalysis& g, int idx) const {
    json r = json::object();
    if (files && g.cs.elliptic) {
      const std::string name = "a" + std::to_string(idx) + "_ellipses.csv";
      write_ellipse_csv(g.chart, g.ellipses, file(name));
      r["ellipse_table"] = name;
    }
    return r;
  }

  json family_action(const SurfaceAnalysis& g, const FamilyAction& a, int idx) const {
    json members = json::array();
    for (size_t i = 0; i < a.theta.size(); ++i) {
      const double th = a.theta[i];
      const FamilyResult fr = family_member(g, a.ell, th, fopt, copt(a.check_circular, a.allow_any_order));
      const SurfaceAnalysis gt = analyze(fr.chart, aopt);
      const FamilyVerdict v = verify_family(g, gt, fr.frame, a.ell, th);
      json m = {{"theta", th},
                {"holonomy", fr.holonomy},
                {"orthogonality", fr.frame.orthogonality},
                {"verdict",
                 {{"metric_residual", v.metric_residual},
                  {"form_residual", v.form_residual},
                  {"rotated_residual", v.rotated_residual},
                  {"normal_curvature_residual", v.normal_curvature_residual}}},
                {"congruence_to_original", congruence_json(congruence_test(g.chart, fr.chart), cfg.congruence_tol)}};
      // The catenoid's family is known in closed form.
      if (cfg.surface.generator == "catenoid" && a.ell == 0) {
        const Chart ref = evaluate_chart(gen_catenoid_associate(th), cfg.grid, cfg.jet_order);
        m["reference"] = {{"generator", "catenoid_associate"},
                          {"congruence", congruence_json(congruence_test(fr.chart, ref), cfg.congruence_tol)}};
      }
      if (files) {
        const std::string name = "a" + std::to_string(idx) + "_family_" + std::to_string(i) + ".csv";
        write_point_cloud_csv(fr.chart, file(name));
        m["point_cloud"] = name;
      }
      members.push_back(m);
    }
    return {{"ell", a.ell}, {"members", members}};
  }

  json relation_action(const SurfaceAnalysis& g, const RelationAction& a) const {
    json rows = json::array();
    const ConnectionOptions co = copt(true, a.allow_any_order);
    for (double th : a.theta) {
      const FamilyResult lo = family_member(g, a.ell, th, fopt, co);
      const FamilyResult hi = family_member(g, a.ell + a.r, th, fopt, co);
      rows.push_back({{"theta", th}, {"congruence", congruence_json(congruence_test(lo.chart, hi.chart), cfg.congruence_tol)}});
    }
    return {{"ell", a.ell}, {"r", a.r}, {"pairs", rows}};
  }

  json polar_action(const SurfaceAnalysis& g, const PolarAction& a, int idx) const {
    const PolarSurface p = polar_surface(g.chart, g.flag, a.options);
    json r = {{"kind", to_string(p.kind)},
              {"ambient", ambient_json(p.chart.ambient)},
              {"closedness_residual", p.closedness_residual},
              {"span_residual", p.span_residual},
              {"elliptic", p.elliptic},
              {"ellipticity_residual", p.ellipticity_residual}};
    if (!p.elliptic_note.empty()) r["elliptic_note"] = p.elliptic_note;
    if (files) {
      const std::string name = "a" + std::to_string(idx) + "_polar.csv";
      write_point_cloud_csv(p.chart, file(name));
      r["point_cloud"] = name;
    }
    return r;
  }

  json ranktwo_summary(const RankTwoChart& rt) const {
    return {{"n", rt.n},
            {"samples", rt.samples.size()},
            {"regular", rt.regular_count},
            {"nullity_mismatch", rt.nullity_mismatch},
            {"max_trace_residual", rt.max_trace_residual},
            {"normal_residual", rt.normal_residual}};
  }

  json ranktwo_action(const SurfaceAnalysis& g, const RankTwoAction& a, int idx) const {
    CrossSectionOptions co = a.options;
    co.tol_circle = cfg.tol_circle;
    const CrossSectionData cs = cross_section(g, a.omega, a.gamma0, a.ell, a.gamma_extra, co);
    const RankTwoChart rt = build_ranktwo(g, cs, a.fibers, cfg.rank_tol);
    json r = {{"ell", a.ell},
              {"c", cs.c},
              {"cross_section",
               {{"order", cs.order}, {"solve_residual", cs.solve_residual}, {"section_residual", cs.section_residual}}},
              {"chart", ranktwo_summary(rt)}};
    const std::string stem = "a" + std::to_string(idx) + "_ranktwo";
    if (files) {
      write_ranktwo_csv(rt, file(stem + ".csv"));
      r["chart"]["samples_csv"] = stem + ".csv";
    }
    json members = json::array();
    for (size_t i = 0; i < a.theta.size(); ++i) {
      const RankTwoFamily f =
          ranktwo_family(g, cs, rt, a.theta[i], fopt, copt(a.options.check_circular, false));
      json m = {{"theta", a.theta[i]},
                {"metric_residual", f.metric_residual},
                {"connection_residual", f.connection_residual},
                {"alpha_residual", f.alpha_residual},
                {"chart", ranktwo_summary(f.chart)},
                {"congruence_to_original", congruence_json(congruence_test(rt, f.chart), cfg.congruence_tol)}};
      if (files) {
        const std::string name = stem + "_" + std::to_string(i) + ".csv";
        write_ranktwo_csv(f.chart, file(name));
        m["chart"]["samples_csv"] = name;
      }
      members.push_back(m);
    }
    r["members"] = members;
    return r;
  }
};

}  // namespace

std::vector<Action> select_actions(const PipelineConfig& cfg, Command cmd) {
  std::vector<Action> actions;
  for (const Action& a : cfg.actions)
    if (selected(a.kind, cmd)) actions.push_back(a);
  if (actions.empty()) {
    Action a;
    a.kind = cmd == Command::Family ? Action::Kind::Family
             : cmd == Command::RankTwo ? Action::Kind::RankTwo
                                       : Action::Kind::Analyze;
    if (cfg.theta_override) a.family.theta = a.ranktwo.theta = *cfg.theta_override;
    if (cfg.ell_override) a.family.ell = a.ranktwo.ell = *cfg.ell_override;
    actions.push_back(a);
  }
  for (const Action& a : actions)
    if (a.kind == Action::Kind::Family && a.family.theta.empty())
      throw ConfigError("family action needs theta values (config or --theta)");
  return actions;
}

RunResult run_pipeline(const PipelineConfig& cfg, Command cmd) {
  const auto t_start = Clock::now();
  const std::vector<Action> actions = select_actions(cfg, cmd);

  RunResult res;
  json& rep = res.report;
  rep["schema_version"] = kSchemaVersion;
  rep["tool"] = {{"name", "assocfam"}, {"version", ASSOCFAM_VERSION}};
  rep["command"] = to_string(cmd);
  rep["config"] = config_echo(cfg, actions);
  rep["surface"] = {{"generator", cfg.surface.generator},
                    {"ambient", ambient_json(cfg.surface.ambient)},
                    {"jet_order", cfg.jet_order}};
  rep["actions"] = json::array();
  rep["status"] = "ok";
  rep["error"] = nullptr;
  json timings = {{"actions_s", json::array()}};

  Runner run(cfg);
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  std::string stage = "analysis";
  int stage_index = -1;
  try {
    auto t0 = Clock::now();
    const SurfaceAnalysis g = analyze(evaluate_chart(cfg.surface, cfg.grid, cfg.jet_order), run.aopt);
    rep["surface"]["grid"] = grid_json(g.chart.grid);
    rep["surface"]["nodes"] = g.chart.nodes();
    rep["surface"]["source"] = to_string(g.chart.source);
    rep["analysis"] = analysis_json(g);
    timings["analysis_s"] = seconds_since(t0);
    if (cmd != Command::Analyze && !g.cs.elliptic)
      throw GeometryError(ErrorKind::NotElliptic, "surface is not elliptic", g.cs.not_elliptic_node);

    for (size_t i = 0; i < actions.size(); ++i) {
      const Action& a = actions[i];
      stage = to_string(a.kind);
      stage_index = static_cast<int>(i);
      t0 = Clock::now();
      json r;
      switch (a.kind) {
        case Action::Kind::Analyze: r = run.analyze_action(g, stage_index); break;
        case Action::Kind::Family: r = run.family_action(g, a.family, stage_index); break;
        case Action::Kind::Relation: r = run.relation_action(g, a.relation); break;
        case Action::Kind::Polar: r = run.polar_action(g, a.polar, stage_index); break;
        case Action::Kind::RankTwo: r = run.ranktwo_action(g, a.ranktwo, stage_index); break;
      }
      r["type"] = to_string(a.kind);
      rep["actions"].push_back(r);
      timings["actions_s"].push_back(seconds_since(t0));
    }
  } catch (const GeometryError& e) {
    rep["status"] = "gate_failed";
    rep["error"] = {{"gate", to_string(e.kind())},
                    {"message", e.what()},
                    {"node", e.node()},
                    {"stage", stage},
                    {"action_index", stage_index}};
    res.exit_code = 2;
  }
  timings["total_s"] = seconds_since(t_start);
  rep["timings"] = timings;
  if (!cfg.out_dir.empty()) {
    std::ofstream f(run.file("report.json"));
    f << rep.dump(2) << '\n';
  }
  return res;
}

}  // namespace assocfam::cli
