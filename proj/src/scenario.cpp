#include "lqdim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "lqdim/cocycle.hpp"
#include "lqdim/convolution_model.hpp"
#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/formulas.hpp"
#include "lqdim/measure_builder.hpp"
#include "lqdim/omega.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

namespace {

constexpr const char* kVersion = "1.0.0";
// Long enough that any practical level is reached well before the end.
constexpr std::size_t kOmegaLength = 4096;

const std::set<std::string> kKeys = {
    "name",    "mode",   "ruleset",    "driving_weights", "seeds",           "q_grid",
    "level_window", "extra_depth", "direction_count", "nu", "theta",      "t_grid",
    "t_count", "checks", "max_nm",     "atom_extra_depth", "n_list",         "samples",
    "pbar",    "scales", "block_len",  "closed_form"};

std::size_t atom_extra_depth_of(const nlohmann::json& j) { return j.value("atom_extra_depth", std::size_t{0}); }

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

std::string short_fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

void open_out(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p);
  if (!f) throw InvalidInput("cannot write " + p.string());
}

}  // namespace

Mode parse_mode(const std::string& s) {
  if (s == "build") return Mode::Build;
  if (s == "spectrum") return Mode::Spectrum;
  if (s == "project") return Mode::Project;
  if (s == "convolve") return Mode::Convolve;
  if (s == "cocycle") return Mode::Cocycle;
  if (s == "formula") return Mode::Formula;
  if (s == "decompose") return Mode::Decompose;
  throw InvalidInput("unknown mode: " + s);
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Build: return "build";
    case Mode::Spectrum: return "spectrum";
    case Mode::Project: return "project";
    case Mode::Convolve: return "convolve";
    case Mode::Cocycle: return "cocycle";
    case Mode::Formula: return "formula";
    case Mode::Decompose: return "decompose";
  }
  return "?";
}

Scenario parse_scenario(const nlohmann::json& j) {
  try {
    require(j.is_object(), "scenario must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      require(kKeys.contains(key), "unknown scenario key: " + key);
    }
    Scenario sc;
    sc.raw = j;
    sc.name = j.value("name", std::string("scenario"));
    require(!sc.name.empty() && sc.name.find('/') == std::string::npos, "scenario name must be a plain file name");
    require(j.contains("mode"), "scenario needs a mode");
    sc.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("ruleset")) sc.ruleset = ruleset_from_json(j.at("ruleset"));
    if (j.contains("nu")) sc.nu = ruleset_from_json(j.at("nu"));
    if (j.contains("theta")) sc.theta = ruleset_from_json(j.at("theta"));
    if (j.contains("seeds")) sc.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    require(!sc.seeds.empty(), "seeds must be nonempty");
    if (j.contains("q_grid")) sc.q_grid = j.at("q_grid").get<std::vector<double>>();
    require(!sc.q_grid.empty(), "q_grid must be nonempty");
    for (double q : sc.q_grid) require(q > 1.0 && std::isfinite(q), "q values must exceed 1");
    if (j.contains("level_window")) {
      const auto w = j.at("level_window").get<std::vector<int>>();
      require(w.size() == 2, "level_window is [low, high]");
      sc.level_window = {w[0], w[1]};
    }
    require(sc.level_window.first >= 0 && sc.level_window.second - sc.level_window.first >= 2,
            "level_window needs 0 <= low and at least three levels");
    require(sc.level_window.second <= 40, "level_window above 40 is not supported");
    sc.extra_depth = j.value("extra_depth", sc.extra_depth);
    require(sc.extra_depth <= 16, "extra_depth above 16 is not supported");
    sc.direction_count = j.value("direction_count", sc.direction_count);
    require(sc.direction_count >= 1, "direction_count must be positive");
    if (j.contains("t_grid")) sc.t_grid = j.at("t_grid").get<std::vector<double>>();
    for (double t : sc.t_grid) require(t > 0.0 && std::isfinite(t), "t values must be positive");
    sc.t_count = j.value("t_count", sc.t_count);
    sc.checks = j.value("checks", sc.checks);
    sc.max_nm = j.value("max_nm", sc.max_nm);
    require(sc.max_nm >= 2, "max_nm must be at least 2");
    if (j.contains("n_list")) sc.n_list = j.at("n_list").get<std::vector<std::size_t>>();
    for (auto n : sc.n_list) require(n >= 1, "n_list entries must be positive");
    sc.samples = j.value("samples", sc.samples);
    require(sc.samples >= 1, "samples must be positive");
    if (j.contains("pbar")) {
      sc.pbar = j.at("pbar").get<std::vector<double>>();
      validate_probability_vector(sc.pbar, "pbar");
    }
    if (j.contains("scales")) sc.scales = j.at("scales").get<std::vector<double>>();
    sc.block_len = j.value("block_len", sc.block_len);
    require(sc.block_len >= 1, "block_len must be positive");
    if (j.contains("closed_form")) sc.closed_form = j.at("closed_form").get<double>();
    (void)atom_extra_depth_of(j);

    const RuleSet* driven = sc.mode == Mode::Convolve ? (sc.nu ? &*sc.nu : nullptr)
                                                      : (sc.ruleset ? &*sc.ruleset : nullptr);
    if (j.contains("driving_weights")) {
      sc.driving_weights = j.at("driving_weights").get<std::vector<double>>();
      validate_probability_vector(sc.driving_weights, "driving weights");
      require(driven && driven->size() == sc.driving_weights.size(),
              "driving_weights needs one entry per rule");
    } else if (driven) {
      sc.driving_weights = uniform_weights(driven->size());
    }

    switch (sc.mode) {
      case Mode::Build:
      case Mode::Spectrum:
      case Mode::Cocycle:
        require(sc.ruleset.has_value(), mode_name(sc.mode) + " needs a ruleset");
        break;
      case Mode::Project:
        require(sc.ruleset.has_value() && sc.ruleset->ambient_dim() == 2, "project needs a planar ruleset");
        break;
      case Mode::Convolve:
        require(sc.nu && sc.theta, "convolve needs nu and theta");
        require(sc.nu->ambient_dim() == 1 && sc.theta->ambient_dim() == 1, "convolution factors must be 1-D");
        require(sc.theta->size() == 1, "theta must be a single deterministic rule");
        require(!sc.t_grid.empty() || sc.t_count >= 1, "convolve needs t_grid or t_count");
        break;
      case Mode::Formula:
        require(sc.ruleset || (!sc.pbar.empty() && !sc.scales.empty()),
                "formula needs a ruleset or pbar with scales");
        break;
      case Mode::Decompose:
        require(sc.pbar.size() >= 2, "decompose needs pbar with at least two symbols");
        break;
    }
    if (!sc.scales.empty()) require(sc.scales.size() == sc.pbar.size(), "scales need one entry per pbar symbol");
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

std::vector<DirectionResult> sweep_directions(const RuleSet& rs, std::span<const int> omega,
                                              std::size_t depth, std::span<const double> q_grid,
                                              std::pair<int, int> window, std::size_t count,
                                              unsigned threads) {
  std::vector<Point2> dirs;
  std::vector<DirectionResult> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k].index = k;
    out[k].angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    dirs.push_back({std::cos(out[k].angle), std::sin(out[k].angle)});
  }
  BuildOptions bo;
  bo.threads = threads;
  const auto measures = project_measures(rs, omega, dirs, depth, window.second, bo);
  parallel_for(count, threads, [&](std::size_t k) {
    for (double q : q_grid) out[k].curves.push_back(estimate_dimension(measures[k], q, window));
  });
  return out;
}

void write_direction_csv(std::ostream& out, std::span<const DirectionResult> results) {
  out << "index,angle,q,dimension,residual\n" << std::setprecision(17);
  for (const auto& r : results) {
    for (const auto& c : r.curves) {
      out << r.index << ',' << r.angle << ',' << c.q << ',' << c.dimension << ',' << c.residual << '\n';
    }
  }
}

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

namespace {

struct Runner {
  const Scenario& sc;
  std::filesystem::path dir;
  unsigned threads;
  RunResult result;

  std::filesystem::path file(const std::string& stem, std::uint64_t seed, const std::string& ext) {
    auto p = dir / (stem + "_seed" + std::to_string(seed) + ext);
    result.files.push_back(p);
    return p;
  }

  std::filesystem::path file(const std::string& name) {
    auto p = dir / name;
    result.files.push_back(p);
    return p;
  }

  void fail(const std::string& what) {
    result.exit_code = kExitInequalityViolated;
    result.summary.push_back("VIOLATED: " + what);
  }

  std::size_t top_depth(const RuleSet& rs, std::span<const int> omega) const {
    return depth_for_level(rs, omega, sc.level_window.second) + sc.extra_depth;
  }

  // Holder box bound and the normalization-level bracket on a built measure.
  void check_measure(const DyadicMeasure& m, const RuleSet& rs, std::span<const int> omega,
                     std::size_t depth, std::uint64_t seed) {
    for (double q : sc.q_grid) {
      const double bound = holder_box_lower_bound(m, q);
      if (static_cast<double>(box_count(m)) < bound * (1.0 - kRoundingSlack)) {
        fail("box count below the Holder bound (seed " + std::to_string(seed) + ", q " + short_fmt(q) + ")");
      }
    }
    const auto levels = normalization_levels(rs, omega, depth);
    double prod = 1.0;
    for (std::size_t n = 0; n <= depth; ++n) {
      if (n > 0) prod *= rs.rule(static_cast<std::size_t>(omega[n - 1])).scale();
      const int l = levels[n];
      if (!(std::ldexp(1.0, -l) <= prod && prod < std::ldexp(1.0, 1 - l))) {
        fail("normalization bracket at n " + std::to_string(n));
      }
    }
  }

  void build(bool spectrum) {
    const RuleSet& rs = *sc.ruleset;
    for (auto seed : sc.seeds) {
      const auto omega = sample_omega(sc.driving_weights, kOmegaLength, seed);
      const std::size_t depth = top_depth(rs, omega.symbols);
      BuildOptions bo;
      bo.threads = threads;
      const auto m = build_measure(rs, omega.symbols, depth, sc.level_window.second, bo);
      check_measure(m, rs, omega.symbols, depth, seed);
      if (!spectrum) {
        std::ofstream f;
        open_out(f, file("measure", seed, ".csv"));
        m.write_csv(f);
        result.summary.push_back("seed " + std::to_string(seed) + ": depth " + std::to_string(depth) + ", " +
                                 std::to_string(m.size()) + " occupied cells at level " +
                                 std::to_string(m.level()));
        continue;
      }
      std::vector<SpectrumCurve> curves;
      for (double q : sc.q_grid) curves.push_back(estimate_dimension(m, q, sc.level_window));
      std::ofstream f;
      open_out(f, file("spectrum", seed, ".csv"));
      write_spectrum_csv(f, curves);
      for (const auto& c : curves) {
        result.summary.push_back("seed " + std::to_string(seed) + " q " + short_fmt(c.q) + ": D_q " +
                                 short_fmt(c.dimension));
      }
    }
  }

  void project() {
    const RuleSet& rs = *sc.ruleset;
    for (auto seed : sc.seeds) {
      const auto omega = sample_omega(sc.driving_weights, kOmegaLength, seed);
      const std::size_t depth = top_depth(rs, omega.symbols);
      const auto res = sweep_directions(rs, omega.symbols, depth, sc.q_grid, sc.level_window,
                                        sc.direction_count, threads);
      std::ofstream f;
      open_out(f, file("projection", seed, ".csv"));
      write_direction_csv(f, res);
      for (std::size_t qi = 0; qi < sc.q_grid.size(); ++qi) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& r : res) {
          lo = std::min(lo, r.curves[qi].dimension);
          hi = std::max(hi, r.curves[qi].dimension);
        }
        std::string line = "seed " + std::to_string(seed) + " q " + short_fmt(sc.q_grid[qi]) + ": D_q in [" +
                           short_fmt(lo) + ", " + short_fmt(hi) + "], spread " + short_fmt(hi - lo);
        if (sc.closed_form) {
          line += ", max |err| " + short_fmt(std::max(std::abs(lo - *sc.closed_form), std::abs(hi - *sc.closed_form)));
        }
        result.summary.push_back(line);
      }
    }
  }

  void convolve() {
    const RuleSet& nu = *sc.nu;
    const RuleSet& theta = *sc.theta;
    std::vector<double> a;
    for (const auto& r : nu.rules()) a.push_back(r.scale());
    const double b = theta.rule(0).scale();
    const auto scheme = select_scheme(a, b);
    const auto t_grid = sc.t_grid.empty() ? log_t_grid(scheme.beta, sc.t_count) : sc.t_grid;
    const auto theta_omega = constant_omega(1, 0, kOmegaLength);
    const std::vector<double> one{1.0};
    for (auto seed : sc.seeds) {
      const auto omega = sample_omega(sc.driving_weights, kOmegaLength, seed);
      auto builder = [this](const RuleSet& rs, std::span<const int> w) {
        return [this, rsp = &rs, w](int level) {
          BuildOptions bo;
          bo.threads = threads;
          return build_measure(*rsp, w, depth_for_level(*rsp, w, level) + sc.extra_depth, level, bo);
        };
      };
      std::vector<ConvolutionPoint> all;
      for (double q : sc.q_grid) {
        std::optional<double> closed = sc.closed_form;
        bool irrational = true;
        if (!closed) {
          const double dn = dq_formula_random(nu, sc.driving_weights, q);
          const double dt = dq_formula_random(theta, one, q);
          closed = std::min(dn + dt, 1.0);
          for (double ai : a) irrational = irrational && additivity_formula(dn, dt, ai, b).irrational;
        }
        auto pts = convolution_dimension_sweep(builder(nu, omega.symbols), builder(theta, theta_omega.symbols),
                                               q, t_grid, sc.level_window, closed, 3, threads);
        const auto [err, spread] = sweep_error_and_spread(pts);
        result.summary.push_back("seed " + std::to_string(seed) + " q " + short_fmt(q) + ": closed form " +
                                 short_fmt(*closed) + (irrational ? "" : " (log a/log b looks rational)") +
                                 ", max |err| " + short_fmt(err) + ", spread " + short_fmt(spread));
        all.insert(all.end(), pts.begin(), pts.end());
      }
      std::ofstream f;
      open_out(f, file("convolution", seed, ".csv"));
      write_convolution_csv(f, all);
    }
  }

  void cocycle() {
    const RuleSet& rs = *sc.ruleset;
    CocycleOptions opts;
    opts.extra_depth = atom_extra_depth_of(sc.raw);
    for (auto seed : sc.seeds) {
      std::mt19937_64 rng(seed);
      std::ofstream fc, fe;
      open_out(fc, file("cocycle_check", seed, ".csv"));
      open_out(fe, file("cocycle_equivalence", seed, ".csv"));
      fc << "n,m,fiber,lhs,rhs,pass\n" << std::setprecision(17);
      fe << "n,fiber,q,tau,tau_smooth,ratio_low,ratio_high,pass\n" << std::setprecision(17);
      struct Instance {
        std::uint64_t omega_seed;
        std::size_t n, m;
        double fiber, q;
      };
      std::vector<Instance> inst(sc.checks);
      for (auto& in : inst) {
        in.omega_seed = rng();
        in.n = 1 + rng() % (sc.max_nm - 1);
        in.m = 1 + rng() % (sc.max_nm - in.n);
        in.fiber = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
        in.q = sc.q_grid[rng() % sc.q_grid.size()];
      }
      std::vector<InequalityCheck> sub(inst.size());
      std::vector<CocycleSample> smp(inst.size());
      parallel_for(inst.size(), threads, [&](std::size_t k) {
        const auto& in = inst[k];
        const auto omega = sample_omega(sc.driving_weights, in.n + in.m + opts.extra_depth, in.omega_seed);
        sub[k] = check_submultiplicative(rs, omega.symbols, in.fiber, in.n, in.m, in.q, 1.0, opts);
        smp[k] = sample_cocycle(rs, omega.symbols, in.fiber, in.n, in.q, opts);
      });
      std::size_t sub_fail = 0, eq_fail = 0;
      for (std::size_t k = 0; k < inst.size(); ++k) {
        const auto eq = check_equivalence(smp[k]);
        sub_fail += sub[k].pass ? 0 : 1;
        eq_fail += eq.pass ? 0 : 1;
        fc << inst[k].n << ',' << inst[k].m << ',' << inst[k].fiber << ',' << sub[k].lhs << ',' << sub[k].rhs
           << ',' << (sub[k].pass ? 1 : 0) << '\n';
        fe << inst[k].n << ',' << inst[k].fiber << ',' << inst[k].q << ',' << smp[k].tau << ','
           << smp[k].tau_smooth << ',' << eq.ratio_low << ',' << eq.ratio_high << ',' << (eq.pass ? 1 : 0)
           << '\n';
      }
      if (sub_fail) fail(std::to_string(sub_fail) + " submultiplicativity checks (seed " + std::to_string(seed) + ")");
      if (eq_fail) fail(std::to_string(eq_fail) + " tau/tau_smooth equivalence checks (seed " + std::to_string(seed) + ")");
      result.summary.push_back("seed " + std::to_string(seed) + ": " + std::to_string(inst.size()) +
                               " instances, " + std::to_string(sub_fail + eq_fail) + " failures");
      if (!sc.n_list.empty()) {
        for (double q : sc.q_grid) {
          const auto est = estimate_phi(rs, sc.driving_weights, q, sc.n_list, sc.samples, seed, opts, threads);
          std::ofstream fp;
          open_out(fp, file("cocycle_phi_q" + short_fmt(q), seed, ".csv"));
          write_phi_csv(fp, est);
          result.summary.push_back("seed " + std::to_string(seed) + " q " + short_fmt(q) +
                                   ": phi slope dimension " + short_fmt(est.dimension) +
                                   ", infimum dimension " + short_fmt(est.dimension_from_infimum));
        }
      }
    }
  }

  void formula() {
    std::ofstream f;
    open_out(f, file("formula.csv"));
    f << "name,value\n" << std::setprecision(17);
    auto row = [&](const std::string& name, double v) {
      f << name << ',' << v << '\n';
      result.summary.push_back(name + " = " + short_fmt(v));
    };
    if (sc.ruleset) {
      for (double q : sc.q_grid) row("dq_q" + short_fmt(q), dq_formula_random(*sc.ruleset, sc.driving_weights, q));
      row("entropy_limit", dq_limit_entropy(*sc.ruleset, sc.driving_weights));
    }
    if (!sc.pbar.empty() && !sc.scales.empty()) {
      row("hausdorff", hausdorff_formula(sc.pbar, sc.scales));
      row("projection_lower_bound_l" + std::to_string(sc.block_len),
          projection_hausdorff_lower_bound(sc.pbar, sc.scales, sc.block_len));
    }
  }

  void decompose() {
    const auto dec = decompose_self_similar(sc.pbar, sc.block_len);
    const double bound = static_cast<double>(sc.pbar.size()) * std::log(sc.block_len + 1.0);
    if (dec.entropy() > bound * (1.0 + kRoundingSlack)) fail("type-class entropy above k log(l+1)");
    std::ofstream f;
    open_out(f, file("decomposition.json"));
    f << decomposition_to_json(dec).dump(2) << '\n';
    result.summary.push_back(std::to_string(dec.classes.size()) + " type classes, entropy " +
                             short_fmt(dec.entropy()) + " <= " + short_fmt(bound));
  }
};

}  // namespace

RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  Runner r{sc, out_dir, threads, {}};
  switch (sc.mode) {
    case Mode::Build: r.build(false); break;
    case Mode::Spectrum: r.build(true); break;
    case Mode::Project: r.project(); break;
    case Mode::Convolve: r.convolve(); break;
    case Mode::Cocycle: r.cocycle(); break;
    case Mode::Formula: r.formula(); break;
    case Mode::Decompose: r.decompose(); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest;
  manifest["name"] = sc.name;
  manifest["mode"] = mode_name(sc.mode);
  manifest["config_hash"] = config_hash(sc.raw);
  manifest["seeds"] = sc.seeds;
  manifest["version"] = kVersion;
  manifest["threads"] = threads == 0 ? default_thread_count() : threads;
  manifest["wall_time_seconds"] = wall;
  manifest["exit_code"] = r.result.exit_code;
  manifest["files"] = nlohmann::json::array();
  for (const auto& p : r.result.files) manifest["files"].push_back(p.filename().string());
  std::ofstream f(out_dir / "manifest.json");
  f << manifest.dump(2) << '\n';
  return r.result;
}

}  // namespace lqdim
