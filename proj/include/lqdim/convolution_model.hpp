#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lqdim/dyadic_measure.hpp"
#include "lqdim/lq_spectrum.hpp"
#include "lqdim/scheme.hpp"

namespace lqdim {

/// Number of k <= n at which R^{k-1}(omega, 0) + alpha(k-th block) >= beta,
/// i.e. how often the beta-circle orbit from 0 wraps.
std::size_t crossing_count(const ConvolutionScheme& scheme, std::span<const int> omega, std::size_t n);

/// R^n(omega, 0) on the beta-circle, by direct accumulation.
double beta_orbit(const ConvolutionScheme& scheme, std::span<const int> omega, std::size_t n);

enum class Family { W, Y, Z };

/// Shape of the rectangles of a word-pair family at step n. Sizes are kept
/// as natural logs; a random word of length rn has width prod a, and a
/// deterministic word of length m has height b^m.
struct FamilyShape {
  Family family = Family::W;
  std::size_t n = 0;
  std::size_t random_word_len = 0;
  std::size_t deterministic_word_len = 0;
  std::size_t crossing_count = 0;
  double fiber = 0.0;
  double log_width = 0.0;
  double log_height = 0.0;
  /// height / width.
  double eccentricity = 1.0;
  /// W: [e^-beta, e^beta); Y: [e^-3beta, e^-beta); Z: [e^beta, e^3beta).
  bool in_bracket = false;
};

FamilyShape family_rectangles(const ConvolutionScheme& scheme, std::span<const int> omega,
                              std::size_t n, Family which);

/// count values of t, uniform in ln t over [e^-beta, e^beta).
std::vector<double> log_t_grid(double beta, std::size_t count);

struct ConvolutionPoint {
  double t = 1.0;
  SpectrumCurve curve;
  std::optional<double> closed_form;
  double abs_err = 0.0;
};

using MeasureAtLevel = std::function<DyadicMeasure(int level)>;

/// For each t: nu * A_t theta binned at window.second, then the L^q slope
/// over the window. nu and theta are built once, `refine` levels finer.
std::vector<ConvolutionPoint> convolution_dimension_sweep(
    const MeasureAtLevel& nu, const MeasureAtLevel& theta, double q, std::span<const double> t_grid,
    std::pair<int, int> window, std::optional<double> closed_form = std::nullopt, int refine = 3,
    unsigned threads = 0);

/// Largest |dimension - closed_form| and the spread max - min of dimensions.
std::pair<double, double> sweep_error_and_spread(std::span<const ConvolutionPoint> points);

struct Additivity {
  double value = 0.0;
  /// log a / log b passed the irrationality test; otherwise the value is
  /// only a heuristic.
  bool irrational = false;
};

/// min(D(nu) + D(theta), 1) with the irrationality flag for log a / log b.
Additivity additivity_formula(double nu_dim, double theta_dim, double a, double b);

void write_convolution_csv(std::ostream& out, std::span<const ConvolutionPoint> points);

}  // namespace lqdim
