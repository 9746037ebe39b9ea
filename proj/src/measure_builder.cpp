#include "lqdim/measure_builder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

namespace {

using Complex = std::complex<double>;

Complex to_complex(Point2 p) { return {p.x, p.y}; }
Point2 to_point(Complex z) { return {z.real(), z.imag()}; }

/// Partial composition f_{u_1} o ... o f_{u_m}: linear part as a complex
/// number (scale times rotation) plus translation.
struct Node {
  Complex linear{1.0, 0.0};
  Complex translation{0.0, 0.0};
  double mass = 1.0;
  std::size_t depth = 0;
};

struct RuleCache {
  Complex linear;
  std::vector<Complex> translations;
  std::vector<double> probs;
};

std::vector<RuleCache> cache_rules(const RuleSet& rs) {
  std::vector<RuleCache> out;
  for (const auto& r : rs.rules()) {
    RuleCache c;
    c.linear = std::polar(r.scale(), r.rotation());
    for (const auto& t : r.translations()) c.translations.push_back(to_complex(t));
    c.probs = r.probs();
    out.push_back(std::move(c));
  }
  return out;
}

void check_omega(const RuleSet& rs, std::span<const int> omega, std::size_t depth) {
  if (depth > omega.size()) {
    throw PreconditionViolation("depth " + std::to_string(depth) + " exceeds omega prefix length " +
                                std::to_string(omega.size()));
  }
  for (std::size_t m = 0; m < depth; ++m) {
    if (omega[m] < 0 || static_cast<std::size_t>(omega[m]) >= rs.size()) {
      throw InvalidInput("omega symbol out of range at position " + std::to_string(m));
    }
  }
}

template <class Visit>
void descend(const std::vector<RuleCache>& rules, std::span<const int> omega, std::size_t depth,
             Complex center, const Node& node, Visit& visit) {
  if (node.depth == depth) {
    visit(to_point(node.linear * center + node.translation), node.mass);
    return;
  }
  const RuleCache& rule = rules[static_cast<std::size_t>(omega[node.depth])];
  for (std::size_t j = 0; j < rule.translations.size(); ++j) {
    if (rule.probs[j] <= 0.0) continue;
    Node child{node.linear * rule.linear, node.linear * rule.translations[j] + node.translation,
               node.mass * rule.probs[j], node.depth + 1};
    descend(rules, omega, depth, center, child, visit);
  }
}

/// Nodes at the shallowest depth offering at least `want` subtrees (DFS order).
std::vector<Node> split_frontier(const std::vector<RuleCache>& rules, std::span<const int> omega,
                                 std::size_t depth, std::size_t want) {
  std::vector<Node> frontier{Node{}};
  while (frontier.size() < want && !frontier.empty() && frontier.front().depth < depth) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      const RuleCache& rule = rules[static_cast<std::size_t>(omega[node.depth])];
      for (std::size_t j = 0; j < rule.translations.size(); ++j) {
        if (rule.probs[j] <= 0.0) continue;
        next.push_back({node.linear * rule.linear,
                        node.linear * rule.translations[j] + node.translation,
                        node.mass * rule.probs[j], node.depth + 1});
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

void check_level(const RuleSet& rs, std::span<const int> omega, std::size_t depth, int level,
                 const BuildOptions& opts) {
  if (!opts.enforce_level) return;
  const int matched = normalization_level(rs, omega, depth);
  if (level <= matched) return;
  std::string need = "no available depth reaches it";
  const auto levels = normalization_levels(rs, omega, omega.size());
  for (std::size_t d = depth; d < levels.size(); ++d) {
    if (levels[d] >= level) {
      need = "depth " + std::to_string(d) + " is required";
      break;
    }
  }
  throw PreconditionViolation("level " + std::to_string(level) +
                              " is finer than the normalization level " +
                              std::to_string(matched) + " of depth " + std::to_string(depth) +
                              "; " + need);
}

template <class MakeVisitor, class Accum>
void traverse_parallel(const RuleSet& rs, std::span<const int> omega, std::size_t depth,
                       unsigned threads, MakeVisitor make_visitor, std::vector<Accum>& accums) {
  const auto rules = cache_rules(rs);
  const Complex center = to_complex(rs.reference().center);
  if (threads == 0) threads = default_thread_count();
  const auto frontier = split_frontier(rules, omega, depth, threads <= 1 ? 1 : 8 * threads);
  threads = static_cast<unsigned>(std::max<std::size_t>(
      1, std::min<std::size_t>(threads, frontier.size())));
  accums.resize(threads, accums.front());
  const std::size_t chunk = (frontier.size() + threads - 1) / threads;
  parallel_for(threads, threads, [&](std::size_t w) {
    auto visit = make_visitor(accums[w]);
    const std::size_t end = std::min(frontier.size(), (w + 1) * chunk);
    for (std::size_t f = w * chunk; f < end; ++f) {
      descend(rules, omega, depth, center, frontier[f], visit);
    }
  });
}

}  // namespace

void for_each_cylinder(const RuleSet& rs, std::span<const int> omega, std::size_t depth,
                       const std::function<void(Point2, double)>& visit) {
  check_omega(rs, omega, depth);
  const auto rules = cache_rules(rs);
  auto v = [&](Point2 p, double m) { visit(p, m); };
  descend(rules, omega, depth, to_complex(rs.reference().center), Node{}, v);
}

std::vector<Atom> enumerate_cylinders(const RuleSet& rs, std::span<const int> omega,
                                      std::size_t depth) {
  check_omega(rs, omega, depth);
  const auto rules = cache_rules(rs);
  std::vector<Atom> atoms;
  auto v = [&](Point2 p, double m) { atoms.push_back({p, m}); };
  descend(rules, omega, depth, to_complex(rs.reference().center), Node{}, v);
  return atoms;
}

DyadicMeasure build_measure(const RuleSet& rs, std::span<const int> omega, std::size_t depth,
                            int level, const BuildOptions& opts) {
  check_omega(rs, omega, depth);
  check_level(rs, omega, depth, level, opts);
  const int dim = rs.ambient_dim();
  std::vector<CellAccumulator> accums{CellAccumulator(dim, level)};
  traverse_parallel(
      rs, omega, depth, opts.threads,
      [](CellAccumulator& acc) { return [&acc](Point2 p, double m) { acc.deposit(p, m); }; },
      accums);
  for (std::size_t w = 1; w < accums.size(); ++w) accums.front().merge(accums[w]);
  return accums.front().finish();
}

DyadicMeasure project_atoms(std::span<const Atom> atoms, Point2 v, int level) {
  std::vector<std::pair<std::int64_t, double>> keyed;
  keyed.reserve(atoms.size());
  for (const auto& a : atoms) keyed.emplace_back(dyadic_floor(dot(a.center, v), level), a.mass);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<DyadicMeasure::Cell> cells;
  for (const auto& [k, m] : keyed) {
    if (!cells.empty() && cells.back().index.i == k) {
      cells.back().mass += m;
    } else {
      cells.push_back({{k, 0}, m});
    }
  }
  return DyadicMeasure(1, level, std::move(cells));
}

namespace {

void check_direction(const RuleSet& rs, Point2 v) {
  if (rs.ambient_dim() != 2) throw InvalidInput("projection requires a planar rule set");
  if (!(std::abs(norm(v) - 1.0) <= 1e-12)) throw InvalidInput("projection direction must be a unit vector");
}

}  // namespace

DyadicMeasure project_measure(const RuleSet& rs, std::span<const int> omega, Point2 v,
                              std::size_t depth, int level, const BuildOptions& opts) {
  check_direction(rs, v);
  check_omega(rs, omega, depth);
  check_level(rs, omega, depth, level, opts);
  std::vector<CellAccumulator> accums{CellAccumulator(1, level)};
  traverse_parallel(
      rs, omega, depth, opts.threads,
      [v](CellAccumulator& acc) {
        return [&acc, v](Point2 p, double m) { acc.deposit(Point2{dot(p, v), 0.0}, m); };
      },
      accums);
  for (std::size_t w = 1; w < accums.size(); ++w) accums.front().merge(accums[w]);
  return accums.front().finish();
}

std::vector<DyadicMeasure> project_measures(const RuleSet& rs, std::span<const int> omega,
                                            std::span<const Point2> directions,
                                            std::size_t depth, int level,
                                            const BuildOptions& opts) {
  for (const auto& v : directions) check_direction(rs, v);
  check_omega(rs, omega, depth);
  check_level(rs, omega, depth, level, opts);
  double leaves = 1.0;
  for (std::size_t m = 0; m < depth; ++m) leaves *= static_cast<double>(rs.rule(omega[m]).size());
  std::vector<DyadicMeasure> out(directions.size(), DyadicMeasure(1, level, {}));
  if (leaves <= static_cast<double>(1u << 24)) {
    const auto atoms = enumerate_cylinders(rs, omega, depth);
    parallel_for(directions.size(), opts.threads,
                 [&](std::size_t d) { out[d] = project_atoms(atoms, directions[d], level); });
  } else {
    BuildOptions inner = opts;
    inner.threads = 1;
    parallel_for(directions.size(), opts.threads, [&](std::size_t d) {
      out[d] = project_measure(rs, omega, directions[d], depth, level, inner);
    });
  }
  return out;
}

DyadicMeasure convolve_measures(const DyadicMeasure& nu, const DyadicMeasure& theta, double t,
                                int level) {
  if (nu.dim() != 1 || theta.dim() != 1) throw InvalidInput("convolution inputs must be 1-D");
  if (!(t > 0.0)) throw InvalidInput("convolution scaling t must be positive");
  if (nu.size() == 0 || theta.size() == 0) return DyadicMeasure(1, level, {});
  std::vector<double> xs, ys;
  for (const auto& c : nu.cells()) xs.push_back(nu.center(c.index.i));
  for (const auto& c : theta.cells()) ys.push_back(theta.center(c.index.i));
  const std::int64_t lo = dyadic_floor(xs.front() + t * ys.front(), level);
  const std::int64_t hi = dyadic_floor(xs.back() + t * ys.back(), level);
  const std::int64_t span = hi - lo + 1;
  std::vector<DyadicMeasure::Cell> cells;
  if (span > 0 && span <= (std::int64_t{1} << 26)) {
    std::vector<double> dense(static_cast<std::size_t>(span), 0.0);
    for (std::size_t a = 0; a < xs.size(); ++a) {
      const double mx = nu.cells()[a].mass;
      for (std::size_t b = 0; b < ys.size(); ++b) {
        const std::int64_t k = dyadic_floor(xs[a] + t * ys[b], level);
        dense[static_cast<std::size_t>(k - lo)] += mx * theta.cells()[b].mass;
      }
    }
    for (std::int64_t k = 0; k < span; ++k) {
      const double m = dense[static_cast<std::size_t>(k)];
      if (m > 0.0) cells.push_back({{lo + k, 0}, m});
    }
    return DyadicMeasure(1, level, std::move(cells));
  }
  CellAccumulator acc(1, level);
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (std::size_t b = 0; b < ys.size(); ++b) {
      acc.deposit(Point2{xs[a] + t * ys[b], 0.0}, nu.cells()[a].mass * theta.cells()[b].mass);
    }
  }
  return acc.finish();
}

CylinderMassFn product_cylinder_mass(const RuleSet& rs) {
  return [&rs](std::span<const int> omega, std::span<const int> word) {
    double m = 1.0;
    for (std::size_t k = 0; k < word.size(); ++k) {
      m *= rs.rule(static_cast<std::size_t>(omega[k])).probs().at(static_cast<std::size_t>(word[k]));
    }
    return m;
  };
}

double check_condition_c(const RuleSet& rs, std::span<const int> omega, std::size_t n,
                         std::size_t m, const CylinderMassFn& mass, std::size_t max_pairs,
                         std::uint64_t seed) {
  check_omega(rs, omega, n + m);
  const CylinderMassFn fn = mass ? mass : product_cylinder_mass(rs);
  std::vector<std::size_t> radix(n + m);
  double pairs = 1.0;
  for (std::size_t k = 0; k < n + m; ++k) {
    radix[k] = rs.rule(static_cast<std::size_t>(omega[k])).size();
    pairs *= static_cast<double>(radix[k]);
  }
  std::vector<int> word(n + m, 0);
  const auto shifted = omega.subspan(n);
  double worst = 0.0;
  auto evaluate = [&] {
    const std::span<const int> w(word);
    const double denom = fn(omega, w.first(n)) * fn(shifted, w.subspan(n));
    if (denom <= 0.0) return;
    worst = std::max(worst, fn(omega, w) / denom);
  };
  if (pairs <= static_cast<double>(max_pairs)) {
    while (true) {
      evaluate();
      std::size_t k = n + m;
      while (k > 0) {
        --k;
        if (static_cast<std::size_t>(++word[k]) < radix[k]) break;
        word[k] = 0;
        if (k == 0) return worst;
      }
      if (n + m == 0) return worst;
    }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < max_pairs; ++s) {
    for (std::size_t k = 0; k < n + m; ++k) {
      word[k] = static_cast<int>(rng() % radix[k]);
    }
    evaluate();
  }
  return worst;
}

}  // namespace lqdim
