#include "lqdim/omega.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lqdim/error.hpp"

namespace lqdim {

void validate_probability_vector(std::span<const double> weights, const char* what) {
  if (weights.empty()) throw InvalidInput(std::string(what) + " is empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidInput(std::string(what) + " has a negative or non-finite entry");
    }
    total += w;
  }
  if (!(std::abs(total - 1.0) <= 1e-12)) {
    throw InvalidInput(std::string(what) + " must sum to 1 (got " + std::to_string(total) + ")");
  }
}

OmegaSequence sample_omega(std::span<const double> weights, std::size_t length, std::uint64_t seed) {
  validate_probability_vector(weights, "driving weights");
  if (length == 0) throw InvalidInput("omega length must be at least 1");
  std::vector<double> cdf;
  double acc = 0.0;
  for (double w : weights) cdf.push_back(acc += w);
  cdf.back() = 1.0;
  std::mt19937_64 rng(seed);
  OmegaSequence out;
  out.driving_weights.assign(weights.begin(), weights.end());
  out.seed = seed;
  out.symbols.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    // 53 random bits -> uniform in [0,1), independent of the standard library's distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    std::size_t s = 0;
    while (s + 1 < cdf.size() && (u >= cdf[s] || weights[s] == 0.0)) ++s;
    out.symbols.push_back(static_cast<int>(s));
  }
  return out;
}

OmegaSequence constant_omega(std::size_t rule_count, int rule, std::size_t length) {
  OmegaSequence out;
  out.symbols.assign(length, rule);
  out.driving_weights.assign(rule_count, 0.0);
  out.driving_weights.at(static_cast<std::size_t>(rule)) = 1.0;
  return out;
}

}  // namespace lqdim
