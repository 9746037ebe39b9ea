#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lqdim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Reduces an angle to [0, 2pi).
double reduce_angle(double angle);

/// x -> scale * R(rotation) x + translation.
struct Similarity {
  double scale = 1.0;
  double rotation = 0.0;
  Point2 translation;

  Point2 apply(Point2 p) const { return scale * rotate(p, rotation) + translation; }
};

/// A homogeneous IFS: every map shares scale and rotation, only the
/// translations differ. Carries the probability vector used for its maps.
class Rule {
 public:
  Rule(double scale, double rotation, std::vector<Point2> translations,
       std::vector<double> probs);

  /// Uniform weights over the translations.
  static Rule uniform(double scale, double rotation, std::vector<Point2> translations);

  double scale() const { return scale_; }
  double rotation() const { return rotation_; }
  std::size_t size() const { return translations_.size(); }
  const std::vector<Point2>& translations() const { return translations_; }
  const std::vector<double>& probs() const { return probs_; }
  Similarity map(std::size_t j) const { return {scale_, rotation_, translations_.at(j)}; }

 private:
  double scale_;
  double rotation_;
  std::vector<Point2> translations_;
  std::vector<double> probs_;
};

/// The set every cylinder image is taken of: a closed ball (an interval in 1-D).
struct ReferenceBall {
  Point2 center;
  double radius = 0.0;
};

class RuleSet {
 public:
  /// Uses the default reference set: [0,1] for 1-D rules mapping [0,1] into
  /// itself, otherwise the ball B[0, R*] with R* = min_ball_radius.
  RuleSet(std::vector<Rule> rules, int ambient_dim);
  RuleSet(std::vector<Rule> rules, int ambient_dim, ReferenceBall reference);

  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(std::size_t i) const { return rules_.at(i); }
  std::size_t size() const { return rules_.size(); }
  int ambient_dim() const { return ambient_dim_; }
  const ReferenceBall& reference() const { return reference_; }
  double max_scale() const;
  double min_scale() const;

 private:
  std::vector<Rule> rules_;
  int ambient_dim_;
  ReferenceBall reference_;
};

/// A word read against omega starting at `offset` (symbols are 0-based).
struct Word {
  std::vector<int> symbols;
  std::size_t offset = 0;
};

/// Affine data of f_u = f_{u_1} o ... o f_{u_n}.
struct CylinderFrame {
  double scale_product = 1.0;
  double rotation_sum = 0.0;
  Point2 translation;

  Point2 apply(Point2 p) const {
    return scale_product * rotate(p, rotation_sum) + translation;
  }
  /// Frame of (*this) o inner.
  CylinderFrame then(const CylinderFrame& inner) const;
};

/// R* = max |t| / (1 - max scale).
double min_ball_radius(const RuleSet& rs);

/// Throws PreconditionViolation on length mismatch, InvalidWord on a symbol
/// outside its rule.
CylinderFrame compose_cylinder(const RuleSet& rs, std::span<const int> omega_prefix,
                               std::span<const int> word);

/// Center and diameter of f_u(reference).
std::pair<Point2, double> cylinder_center_and_diameter(const CylinderFrame& frame,
                                                       const ReferenceBall& reference);

/// Per rule: true iff the images of the reference set are pairwise strictly disjoint.
std::vector<bool> check_strong_separation(const RuleSet& rs);

/// True iff every map sends [0,1] into [0,1] (1-D only).
bool maps_unit_interval(const std::vector<Rule>& rules);

RuleSet ruleset_from_json(const nlohmann::json& j);
nlohmann::json ruleset_to_json(const RuleSet& rs);

}  // namespace lqdim
