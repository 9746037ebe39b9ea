#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "lqdim/ifs_model.hpp"

namespace lqdim {

using Rational = boost::multiprecision::cpp_rational;

/// [sum_i r_i log sum_j p_ij^q] / [(q-1) sum_i r_i log lambda_i]; q > 1.
double dq_formula_random(std::span<const std::vector<double>> probs, std::span<const double> scales,
                         std::span<const double> weights, double q);
double dq_formula_random(const RuleSet& rs, std::span<const double> weights, double q);

/// The q -> 1 limit: [sum_i r_i sum_j p_ij log p_ij] / [sum_i r_i log lambda_i], 0 log 0 = 0.
double dq_limit_entropy(std::span<const std::vector<double>> probs, std::span<const double> scales,
                        std::span<const double> weights);
double dq_limit_entropy(const RuleSet& rs, std::span<const double> weights);

/// One type class sigma = (l_1..l_k), sum l_i = block length. Every word u
/// with N(u) = sigma has the same mass prod pbar_i^{l_i}, so the conditional
/// law on the fiber is uniform.
struct TypeClass {
  std::vector<int> sigma;
  /// r_sigma = multinomial(sigma) * prod pbar_i^{l_i}.
  double weight = 0.0;
  /// Number of words in the fiber, multinomial(sigma).
  double fiber_size = 0.0;
  double conditional() const { return 1.0 / fiber_size; }
};

struct BlockDecomposition {
  std::vector<double> pbar;
  int block_len = 1;
  /// Classes with positive weight, in lexicographic order of sigma (descending).
  std::vector<TypeClass> classes;

  std::size_t symbol_count() const { return pbar.size(); }
  /// -sum r_sigma log r_sigma (natural log).
  double entropy() const;
  /// Index of the class of a block, or -1 if the class has zero weight.
  long find_class(std::span<const int> sigma) const;
};

inline constexpr std::size_t kDefaultClassCap = 1000000;

/// All compositions of block_len into k parts with positive weight.
BlockDecomposition decompose_self_similar(std::span<const double> pbar, int block_len,
                                          std::size_t class_cap = kDefaultClassCap);

/// N(u): occurrence count of each symbol in a block.
std::vector<int> type_of(std::span<const int> block, std::size_t k);

/// Words of a fiber in lexicographic order; throws ResourceError above `cap` words.
std::vector<std::vector<int>> fiber_words(std::span<const int> sigma, std::size_t cap = 100000);

/// prod over consecutive blocks v of r_{N(v)} p_{N(v)}(v). The word length must be a multiple of the block length.
double reconstruct_cylinder(const BlockDecomposition& dec, std::span<const int> word);

/// Same in exact rational arithmetic for rational pbar.
Rational reconstruct_cylinder_exact(std::span<const Rational> pbar, int block_len,
                                    std::span<const int> word);

/// prod pbar_{word_i}.
double cylinder_product(std::span<const double> pbar, std::span<const int> word);
Rational cylinder_product_exact(std::span<const Rational> pbar, std::span<const int> word);

/// sum pbar_i log pbar_i / sum pbar_i log lambda_i.
double hausdorff_formula(std::span<const double> pbar, std::span<const double> scales);

/// min(dim_H, 1) + k log(l+1) / (l sum pbar_i log lambda_i).
double projection_hausdorff_lower_bound(std::span<const double> pbar, std::span<const double> scales,
                                        int block_len);

/// {block_len, classes: [{sigma, r, fiber: [{word, p}]}]}; words are 0-based.
nlohmann::json decomposition_to_json(const BlockDecomposition& dec, std::size_t fiber_cap = 100000);

}  // namespace lqdim
