#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lqdim {

/// Block bookkeeping for convolutions nu^(omega) * A_t theta: random scales
/// a_i, deterministic scale b, block length r and period multiplier l with
///   1 < min_i b / a_i^r   and   max_i b / a_i^r < b^-l,
/// beta = -l ln b, and alpha(i_1..i_r) = ln(b / (a_{i_1} ... a_{i_r})) (natural logs).
struct ConvolutionScheme {
  std::vector<double> random_scales;
  double deterministic_scale = 0.5;
  int r = 1;
  int l = 1;
  double beta = 0.0;
  /// Indexed by the block read as a base-N number, first symbol most significant.
  std::vector<double> alphas;

  std::size_t rule_count() const { return random_scales.size(); }
  /// Rotation increment of the block omega[0..r).
  double alpha(std::span<const int> block) const;
};

/// Minimal r, then minimal l, satisfying the two scale constraints.
ConvolutionScheme select_scheme(std::span<const double> random_scales, double deterministic_scale);

}  // namespace lqdim
