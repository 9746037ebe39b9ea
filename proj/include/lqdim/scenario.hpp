#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lqdim/ifs_model.hpp"
#include "lqdim/lq_spectrum.hpp"

namespace lqdim {

enum class Mode { Build, Spectrum, Project, Convolve, Cocycle, Formula, Decompose };

/// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInequalityViolated = 2;

/// A validated experiment description. Every field is checked by
/// parse_scenario before anything is computed.
struct Scenario {
  std::string name = "scenario";
  Mode mode = Mode::Build;
  std::optional<RuleSet> ruleset;
  std::vector<double> driving_weights;
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> q_grid{std::begin(kDefaultQGrid), std::end(kDefaultQGrid)};
  std::pair<int, int> level_window{6, 11};
  /// Cylinder depth beyond the one matching the top of the level window.
  std::size_t extra_depth = 3;
  std::size_t direction_count = 64;
  /// Convolutions: nu may be random (driven by driving_weights), theta is deterministic.
  std::optional<RuleSet> nu;
  std::optional<RuleSet> theta;
  std::vector<double> t_grid;
  std::size_t t_count = 32;
  /// Cocycle checks and the phi estimate.
  std::size_t checks = 200;
  std::size_t max_nm = 8;
  std::vector<std::size_t> n_list;
  std::size_t samples = 16;
  /// Decomposition and Hausdorff formulas.
  std::vector<double> pbar;
  std::vector<double> scales;
  int block_len = 2;
  std::optional<double> closed_form;
  /// The configuration as given, for hashing.
  nlohmann::json raw;
};

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

/// Validates and converts; throws InvalidInput on any problem, including unknown keys.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Per-direction L^q estimates for one omega.
struct DirectionResult {
  std::size_t index = 0;
  double angle = 0.0;
  std::vector<SpectrumCurve> curves;
};

/// count directions at angles 2 pi k / count, cylinder tree traversed once.
std::vector<DirectionResult> sweep_directions(const RuleSet& rs, std::span<const int> omega,
                                              std::size_t depth, std::span<const double> q_grid,
                                              std::pair<int, int> window, std::size_t count,
                                              unsigned threads = 0);

/// Writes `index,angle,q,dimension,residual`.
void write_direction_csv(std::ostream& out, std::span<const DirectionResult> results);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  /// Human-readable lines for the terminal.
  std::vector<std::string> summary;
};

/// Runs the scenario, writing CSV/JSON artifacts and manifest.json into out_dir.
RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir, unsigned threads = 0);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace lqdim
