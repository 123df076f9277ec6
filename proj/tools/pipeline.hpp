#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assocfam/gallery.hpp"
#include "assocfam/polar.hpp"
#include "assocfam/ranktwo.hpp"
#include "json.hpp"

namespace assocfam::cli {

// Invalid config or flag; `where` is "file:line:col" when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { Analyze, Family, RankTwo };

Command parse_command(const std::string& s);
const char* to_string(Command c);

struct FamilyAction {
  int ell = 0;
  std::vector<double> theta;
  bool check_circular = true;
  bool allow_any_order = false;
};

// Charts from G_ell and G_{ell+r} at the same angle.
struct RelationAction {
  int ell = 0;
  int r = 1;
  std::vector<double> theta;
  bool allow_any_order = false;
};

struct PolarAction {
  PolarOptions options;
};

struct RankTwoAction {
  int ell = 1;
  ScalarField omega;
  std::string omega_kind = "zero";
  std::vector<PolyTerm> omega_terms;
  Eigen::VectorXd omega_height;
  Eigen::VectorXd gamma0;
  std::vector<Eigen::VectorXd> gamma_extra;
  FiberSampling fibers;
  std::vector<double> theta;
  CrossSectionOptions options;
};

struct Action {
  enum class Kind { Analyze, Family, Relation, Polar, RankTwo } kind = Kind::Analyze;
  FamilyAction family;
  RelationAction relation;
  PolarAction polar;
  RankTwoAction ranktwo;
};

const char* to_string(Action::Kind k);

struct PipelineConfig {
  nlohmann::json surface_echo;  // the surface section as parsed
  SurfaceSpec surface;
  GridParams grid;
  int jet_order = 6;
  double rank_tol = 1e-6;
  double tol_circle = 1e-6;
  double congruence_tol = 1e-6;
  double holonomy_tol = 1e-6;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: no files written
  bool write_csv = true;
  std::vector<Action> actions;
  // Flag values, also used by the default action of a command.
  std::optional<std::vector<double>> theta_override;
  std::optional<int> ell_override;
};

struct Overrides {
  std::optional<std::pair<int, int>> grid;
  std::optional<std::vector<double>> theta;
  std::optional<int> ell;
  std::optional<std::string> out;
  std::optional<double> tol_circle;
  std::optional<std::uint64_t> seed;
};

// Parses a YAML config; relative sampled paths resolve against the file.
PipelineConfig load_config(const std::string& path, const Overrides& ov = {});
PipelineConfig parse_config(const std::string& text, const std::string& name, const std::string& base_dir,
                            const Overrides& ov = {});

// "0.5", "pi/3", "2pi/3", "2*pi/3".
double parse_angle(const std::string& s);
std::vector<double> parse_angle_list(const std::string& s);
std::pair<int, int> parse_grid(const std::string& s);

struct RunResult {
  nlohmann::json report;
  int exit_code = 0;
};

// Actions run by a command: analyze runs analyze and polar, family runs
// family and relation, ranktwo runs ranktwo. With none configured, one
// default action of the command's own kind. Throws ConfigError.
std::vector<Action> select_actions(const PipelineConfig& cfg, Command cmd);

// Runs the actions selected by the command. Report values come from the
// library calls; timings sit under the top-level "timings" key only.
RunResult run_pipeline(const PipelineConfig& cfg, Command cmd);

inline constexpr int kSchemaVersion = 1;

}  // namespace assocfam::cli
