#include "lqdim/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lqdim/error.hpp"
#include "lqdim/omega.hpp"

namespace lqdim {

namespace {

void check_inputs(std::span<const std::vector<double>> probs, std::span<const double> scales,
                  std::span<const double> weights) {
  if (probs.size() != scales.size() || probs.size() != weights.size() || probs.empty()) {
    throw InvalidInput("probs, scales and weights need one entry per rule");
  }
  validate_probability_vector(weights, "driving weights");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(scales[i] > 0.0 && scales[i] < 1.0)) throw InvalidInput("scales must lie in (0,1)");
    validate_probability_vector(probs[i], "rule probabilities");
  }
}

double lyapunov(std::span<const double> scales, std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < scales.size(); ++i) acc += weights[i] * std::log(scales[i]);
  return acc;
}

std::vector<std::vector<double>> rule_probs(const RuleSet& rs) {
  std::vector<std::vector<double>> p;
  for (const auto& r : rs.rules()) p.push_back(r.probs());
  return p;
}

std::vector<double> rule_scales(const RuleSet& rs) {
  std::vector<double> s;
  for (const auto& r : rs.rules()) s.push_back(r.scale());
  return s;
}

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Exact in double while the result stays below 2^53.
double multinomial(std::span<const int> sigma) {
  double m = 1.0;
  int n = 0;
  for (int l : sigma) {
    for (int j = 1; j <= l; ++j) m = m * (n + j) / j;
    n += l;
  }
  return m;
}

Rational multinomial_exact(std::span<const int> sigma) {
  boost::multiprecision::cpp_int m = 1;
  int n = 0;
  for (int l : sigma) {
    for (int j = 1; j <= l; ++j) m = m * (n + j) / j;
    n += l;
  }
  return Rational(m);
}

// Compositions of total into k parts, lexicographically descending.
void for_each_composition(int total, std::size_t k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> c(k, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == k) {
      c[pos] = left;
      f(c);
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

void check_word(std::span<const int> word, std::size_t k, int block_len) {
  if (block_len < 1) throw InvalidInput("block length must be at least 1");
  if (word.size() % static_cast<std::size_t>(block_len) != 0) {
    throw InvalidWord("word length " + std::to_string(word.size()) +
                      " is not a multiple of the block length " + std::to_string(block_len));
  }
  for (int s : word) {
    if (s < 0 || static_cast<std::size_t>(s) >= k) throw InvalidWord("symbol out of range");
  }
}

}  // namespace

double dq_formula_random(std::span<const std::vector<double>> probs, std::span<const double> scales,
                         std::span<const double> weights, double q) {
  if (!(q > 1.0)) throw InvalidInput("the closed form needs q > 1; use the entropy limit at q = 1");
  check_inputs(probs, scales, weights);
  double num = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double s = 0.0;
    for (double p : probs[i]) s += std::pow(p, q);
    num += weights[i] * std::log(s);
  }
  return num / ((q - 1.0) * lyapunov(scales, weights));
}

double dq_formula_random(const RuleSet& rs, std::span<const double> weights, double q) {
  const auto p = rule_probs(rs);
  const auto s = rule_scales(rs);
  return dq_formula_random(p, s, weights, q);
}

double dq_limit_entropy(std::span<const std::vector<double>> probs, std::span<const double> scales,
                        std::span<const double> weights) {
  check_inputs(probs, scales, weights);
  double num = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double s = 0.0;
    for (double p : probs[i]) s += plogp(p);
    num += weights[i] * s;
  }
  return num / lyapunov(scales, weights);
}

double dq_limit_entropy(const RuleSet& rs, std::span<const double> weights) {
  const auto p = rule_probs(rs);
  const auto s = rule_scales(rs);
  return dq_limit_entropy(p, s, weights);
}

double BlockDecomposition::entropy() const {
  double h = 0.0;
  for (const auto& c : classes) h -= plogp(c.weight);
  return h;
}

long BlockDecomposition::find_class(std::span<const int> sigma) const {
  const std::vector<int> key(sigma.begin(), sigma.end());
  auto it = std::lower_bound(classes.begin(), classes.end(), key,
                             [](const TypeClass& c, const std::vector<int>& k) { return c.sigma > k; });
  if (it == classes.end() || it->sigma != key) return -1;
  return static_cast<long>(it - classes.begin());
}

BlockDecomposition decompose_self_similar(std::span<const double> pbar, int block_len,
                                          std::size_t class_cap) {
  validate_probability_vector(pbar, "pbar");
  if (pbar.size() < 2) throw InvalidInput("decomposition needs at least two symbols");
  if (block_len < 1) throw InvalidInput("block length must be at least 1");
  const std::size_t k = pbar.size();
  // #Sigma = C(l + k - 1, k - 1).
  double count = 1.0;
  for (std::size_t j = 1; j < k; ++j) count = count * (block_len + static_cast<double>(j)) / static_cast<double>(j);
  if (count > static_cast<double>(class_cap)) {
    throw ResourceError("decomposition has " + std::to_string(count) + " type classes, above the cap");
  }
  BlockDecomposition dec;
  dec.pbar.assign(pbar.begin(), pbar.end());
  dec.block_len = block_len;
  for_each_composition(block_len, k, [&](const std::vector<int>& sigma) {
    double mass = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (sigma[i] > 0) mass *= std::pow(pbar[i], sigma[i]);
    }
    if (mass <= 0.0) return;
    TypeClass c;
    c.sigma = sigma;
    c.fiber_size = multinomial(sigma);
    c.weight = c.fiber_size * mass;
    dec.classes.push_back(std::move(c));
  });
  return dec;
}

std::vector<int> type_of(std::span<const int> block, std::size_t k) {
  std::vector<int> sigma(k, 0);
  for (int s : block) {
    if (s < 0 || static_cast<std::size_t>(s) >= k) throw InvalidWord("symbol out of range");
    ++sigma[static_cast<std::size_t>(s)];
  }
  return sigma;
}

std::vector<std::vector<int>> fiber_words(std::span<const int> sigma, std::size_t cap) {
  if (multinomial(sigma) > static_cast<double>(cap)) throw ResourceError("fiber too large to enumerate");
  std::vector<int> word;
  for (std::size_t i = 0; i < sigma.size(); ++i) word.insert(word.end(), static_cast<std::size_t>(sigma[i]), static_cast<int>(i));
  std::vector<std::vector<int>> out;
  do {
    out.push_back(word);
  } while (std::next_permutation(word.begin(), word.end()));
  return out;
}

double reconstruct_cylinder(const BlockDecomposition& dec, std::span<const int> word) {
  check_word(word, dec.symbol_count(), dec.block_len);
  const auto l = static_cast<std::size_t>(dec.block_len);
  double acc = 1.0;
  for (std::size_t b = 0; b < word.size(); b += l) {
    const long idx = dec.find_class(type_of(word.subspan(b, l), dec.symbol_count()));
    if (idx < 0) return 0.0;
    const auto& c = dec.classes[static_cast<std::size_t>(idx)];
    acc *= c.weight * c.conditional();
  }
  return acc;
}

Rational reconstruct_cylinder_exact(std::span<const Rational> pbar, int block_len,
                                    std::span<const int> word) {
  check_word(word, pbar.size(), block_len);
  Rational total = 0;
  for (const auto& p : pbar) {
    if (p < 0) throw InvalidInput("pbar has a negative entry");
    total += p;
  }
  if (total != 1) throw InvalidInput("pbar must sum to exactly 1");
  const auto l = static_cast<std::size_t>(block_len);
  Rational acc = 1;
  for (std::size_t b = 0; b < word.size(); b += l) {
    const auto sigma = type_of(word.subspan(b, l), pbar.size());
    const Rational fiber = multinomial_exact(sigma);
    Rational r = fiber;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      for (int j = 0; j < sigma[i]; ++j) r *= pbar[i];
    }
    acc *= r / fiber;
  }
  return acc;
}

double cylinder_product(std::span<const double> pbar, std::span<const int> word) {
  double acc = 1.0;
  for (int s : word) {
    if (s < 0 || static_cast<std::size_t>(s) >= pbar.size()) throw InvalidWord("symbol out of range");
    acc *= pbar[static_cast<std::size_t>(s)];
  }
  return acc;
}

Rational cylinder_product_exact(std::span<const Rational> pbar, std::span<const int> word) {
  Rational acc = 1;
  for (int s : word) {
    if (s < 0 || static_cast<std::size_t>(s) >= pbar.size()) throw InvalidWord("symbol out of range");
    acc *= pbar[static_cast<std::size_t>(s)];
  }
  return acc;
}

double hausdorff_formula(std::span<const double> pbar, std::span<const double> scales) {
  validate_probability_vector(pbar, "pbar");
  if (scales.size() != pbar.size()) throw InvalidInput("need one scale per symbol");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pbar.size(); ++i) {
    if (!(scales[i] > 0.0 && scales[i] < 1.0)) throw InvalidInput("scales must lie in (0,1)");
    num += plogp(pbar[i]);
    den += pbar[i] * std::log(scales[i]);
  }
  return num / den;
}

double projection_hausdorff_lower_bound(std::span<const double> pbar, std::span<const double> scales,
                                        int block_len) {
  if (block_len < 1) throw InvalidInput("block length must be at least 1");
  const double dim = hausdorff_formula(pbar, scales);
  double den = 0.0;
  for (std::size_t i = 0; i < pbar.size(); ++i) den += pbar[i] * std::log(scales[i]);
  const auto k = static_cast<double>(pbar.size());
  return std::min(dim, 1.0) + k * std::log(block_len + 1.0) / (block_len * den);
}

nlohmann::json decomposition_to_json(const BlockDecomposition& dec, std::size_t fiber_cap) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : dec.classes) {
    nlohmann::json fiber = nlohmann::json::array();
    for (const auto& w : fiber_words(c.sigma, fiber_cap)) {
      fiber.push_back({{"word", w}, {"p", c.conditional()}});
    }
    classes.push_back({{"sigma", c.sigma}, {"r", c.weight}, {"fiber", fiber}});
  }
  return {{"block_len", dec.block_len}, {"pbar", dec.pbar}, {"classes", classes}};
}

}  // namespace lqdim
