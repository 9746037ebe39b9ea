#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lqdim {

/// Finite prefix of the rule sequence omega (0-based rule indices) together
/// with the Bernoulli weights and seed it was drawn with.
struct OmegaSequence {
  std::vector<int> symbols;
  std::vector<double> driving_weights;
  std::uint64_t seed = 0;

  std::size_t size() const { return symbols.size(); }
  /// Symbols of T^offset(omega).
  std::span<const int> view(std::size_t offset = 0) const {
    return std::span<const int>(symbols).subspan(offset);
  }
};

/// Checks a probability vector (nonnegative, sums to 1 within 1e-12).
void validate_probability_vector(std::span<const double> weights, const char* what);

/// Draws `length` i.i.d. symbols with the given weights. Deterministic in the seed.
OmegaSequence sample_omega(std::span<const double> weights, std::size_t length, std::uint64_t seed);

/// Constant sequence (i, i, ..., i) with point-mass weights.
OmegaSequence constant_omega(std::size_t rule_count, int rule, std::size_t length);

}  // namespace lqdim
