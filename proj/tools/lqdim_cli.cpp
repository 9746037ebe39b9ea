// lqdim: build random self-similar measures and estimate L^q dimensions of
// the measures, their projections and Cantor convolutions.
//
// Outputs (all CSV unless noted), written into the output directory:
//   measure_seed<S>.csv      "# level=L dim=D" then i,j,mass
//   spectrum_seed<S>.csv     q,level,log2_cq,slope,dimension,residual
//   projection_seed<S>.csv   index,angle,q,dimension,residual
//   convolution_seed<S>.csv  t,q,dimension,residual,closed_form,abs_err
//   cocycle_check_seed<S>.csv n,m,fiber,lhs,rhs,pass
//   cocycle_phi_q<Q>_seed<S>.csv n,avg_phi,phi_over_n,running_inf
//   formula.csv              name,value
//   decomposition.json       {block_len, pbar, classes:[{sigma, r, fiber:[{word, p}]}]}
//   orbit.csv                step,fiber
//   manifest.json            config hash, seeds, version, wall time
//
// Exit status: 0 ok, 1 input error, 2 an exact inequality was violated.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/omega.hpp"
#include "lqdim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Inline JSON or a path to a JSON file.
json read_json_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw lqdim::InvalidInput("cannot open " + arg);
  return json::parse(in);
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LQDIM_OUT_DIR"); env && *env) return env;
  return "lqdim_out";
}

struct Flags {
  std::string config;
  std::string ruleset, nu, theta;
  std::vector<double> weights, q_grid, t_grid, pbar, scales;
  std::vector<std::uint64_t> seeds;
  std::vector<int> window;
  std::vector<std::size_t> n_list;
  std::size_t directions = 0, t_count = 0, checks = 0, samples = 0, max_nm = 0;
  int block_len = 0;
  int extra_depth = -1;
  double closed_form = 0.0;
  bool has_closed_form = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "scenario JSON providing defaults (mode is overridden)");
  cmd->add_option("--seeds", f.seeds, "omega seeds");
  cmd->add_option("--q", f.q_grid, "q values (> 1)");
  cmd->add_option("--window", f.window, "level window: low high")->expected(2);
  cmd->add_option("--extra-depth", f.extra_depth, "cylinder depth beyond the matched level");
}

json scenario_json(const std::string& mode, const Flags& f) {
  json j = f.config.empty() ? json::object() : read_json_arg(f.config);
  j["mode"] = mode;
  if (!j.contains("name")) j["name"] = mode;
  if (!f.ruleset.empty()) j["ruleset"] = read_json_arg(f.ruleset);
  if (!f.nu.empty()) j["nu"] = read_json_arg(f.nu);
  if (!f.theta.empty()) j["theta"] = read_json_arg(f.theta);
  if (!f.weights.empty()) j["driving_weights"] = f.weights;
  if (!f.seeds.empty()) j["seeds"] = f.seeds;
  if (!f.q_grid.empty()) j["q_grid"] = f.q_grid;
  if (!f.window.empty()) j["level_window"] = f.window;
  if (f.extra_depth >= 0) j["extra_depth"] = f.extra_depth;
  if (f.directions) j["direction_count"] = f.directions;
  if (!f.t_grid.empty()) j["t_grid"] = f.t_grid;
  if (f.t_count) j["t_count"] = f.t_count;
  if (f.checks) j["checks"] = f.checks;
  if (f.max_nm) j["max_nm"] = f.max_nm;
  if (!f.n_list.empty()) j["n_list"] = f.n_list;
  if (f.samples) j["samples"] = f.samples;
  if (!f.pbar.empty()) j["pbar"] = f.pbar;
  if (!f.scales.empty()) j["scales"] = f.scales;
  if (f.block_len) j["block_len"] = f.block_len;
  if (f.has_closed_form) j["closed_form"] = f.closed_form;
  return j;
}

int report(const lqdim::RunResult& r, const fs::path& dir) {
  for (const auto& line : r.summary) std::cout << line << '\n';
  std::cout << "wrote " << r.files.size() << " file(s) and manifest.json to " << dir.string() << '\n';
  return r.exit_code;
}

int run_dynamics(const std::string& ruleset, const std::vector<double>& weights, std::uint64_t seed,
                 std::size_t steps, double fiber, const fs::path& dir) {
  const auto rs = lqdim::ruleset_from_json(read_json_arg(ruleset));
  const auto w = weights.empty() ? std::vector<double>(rs.size(), 1.0 / static_cast<double>(rs.size())) : weights;
  if (w.size() != rs.size()) throw lqdim::InvalidInput("weights need one entry per rule");
  const auto omega = lqdim::sample_omega(w, std::max<std::size_t>(steps, 1), seed);
  fs::create_directories(dir);
  std::ofstream out(dir / "orbit.csv");
  out << "step,fiber\n" << std::setprecision(17);
  lqdim::SkewState st{0, lqdim::reduce_angle(fiber)};
  out << 0 << ',' << st.fiber << '\n';
  for (std::size_t k = 1; k <= steps; ++k) {
    st = lqdim::skew_step(rs, omega.symbols, st, 1);
    out << k << ',' << st.fiber << '\n';
  }
  const auto levels = lqdim::normalization_levels(rs, omega.symbols, steps);
  std::cout << std::setprecision(6) << "-L_n/n = " << -static_cast<double>(levels.back()) / static_cast<double>(std::max<std::size_t>(steps, 1))
            << ", sum r log2 lambda = " << lqdim::lyapunov_constant(rs, w) << '\n';
  std::cout << "wrote orbit.csv to " << dir.string() << '\n';
  return lqdim::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lqdim: L^q dimensions of random self-similar measures, projections and convolutions"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  std::string out_flag;
  app.add_option("--threads", threads, "worker threads (0 = machine parallelism)");
  app.add_option("--out", out_flag, "output directory (default: $LQDIM_OUT_DIR or ./lqdim_out)");

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "run a scenario JSON file");
  run->add_option("scenario", scenario_path, "scenario file")->required();

  Flags f;
  struct Sub {
    std::string mode;
    CLI::App* cmd;
  };
  std::vector<Sub> subs;
  auto sub = [&](const std::string& mode, const std::string& help) {
    auto* c = app.add_subcommand(mode, help);
    add_common(c, f);
    subs.push_back({mode, c});
    return c;
  };
  auto* build = sub("build", "build the discretized measure (measure_seed<S>.csv)");
  auto* spectrum = sub("spectrum", "L^q dimension estimates (spectrum_seed<S>.csv)");
  auto* project = sub("project", "projection sweep over directions (projection_seed<S>.csv)");
  auto* convolve = sub("convolve", "convolution sweep over t (convolution_seed<S>.csv)");
  auto* cocycle = sub("cocycle", "cocycle inequality checks and phi estimate");
  auto* formula = sub("formula", "closed-form dimensions (formula.csv)");
  auto* decompose = sub("decompose", "block disintegration (decomposition.json)");
  for (auto* c : {build, spectrum, project, cocycle, formula}) {
    c->add_option("--ruleset", f.ruleset, "rule set JSON (file or inline)");
    c->add_option("--weights", f.weights, "driving weights r");
  }
  project->add_option("--directions", f.directions, "number of directions");
  project->add_option("--closed-form", f.closed_form, "expected dimension")->each([&](const std::string&) {
    f.has_closed_form = true;
  });
  convolve->add_option("--nu", f.nu, "random factor rule set JSON")->required();
  convolve->add_option("--theta", f.theta, "deterministic factor rule set JSON")->required();
  convolve->add_option("--weights", f.weights, "driving weights for nu");
  convolve->add_option("--t", f.t_grid, "explicit t values");
  convolve->add_option("--t-count", f.t_count, "log-uniform t grid size over one period");
  cocycle->add_option("--checks", f.checks, "sampled instances per seed");
  cocycle->add_option("--max-nm", f.max_nm, "upper bound for n + m");
  cocycle->add_option("--n-list", f.n_list, "n values for the phi estimate");
  cocycle->add_option("--samples", f.samples, "Monte Carlo samples for phi");
  for (auto* c : {formula, decompose}) {
    c->add_option("--pbar", f.pbar, "symbol probabilities");
    c->add_option("--block-len", f.block_len, "block length l");
  }
  formula->add_option("--scales", f.scales, "per-symbol scales for the Hausdorff formula");

  std::string dyn_ruleset;
  std::vector<double> dyn_weights;
  std::uint64_t dyn_seed = 1;
  std::size_t dyn_steps = 1000;
  double dyn_fiber = 0.0;
  auto* dynamics = app.add_subcommand("dynamics", "skew-product fiber orbit (orbit.csv)");
  dynamics->add_option("--ruleset", dyn_ruleset, "rule set JSON (file or inline)")->required();
  dynamics->add_option("--weights", dyn_weights, "driving weights r");
  dynamics->add_option("--seed", dyn_seed, "omega seed");
  dynamics->add_option("--steps", dyn_steps, "orbit length");
  dynamics->add_option("--fiber", dyn_fiber, "starting angle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? lqdim::kExitOk : lqdim::kExitInputError;
  }

  const fs::path dir = output_dir(out_flag);
  try {
    if (*run) {
      const auto sc = lqdim::load_scenario(scenario_path);
      return report(lqdim::run_scenario(sc, dir, threads), dir);
    }
    if (*dynamics) return run_dynamics(dyn_ruleset, dyn_weights, dyn_seed, dyn_steps, dyn_fiber, dir);
    for (const auto& s : subs) {
      if (!*s.cmd) continue;
      const auto sc = lqdim::parse_scenario(scenario_json(s.mode, f));
      return report(lqdim::run_scenario(sc, dir, threads), dir);
    }
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return lqdim::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return lqdim::kExitInputError;
  }
  return lqdim::kExitInputError;
}
