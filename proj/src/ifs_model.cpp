#include "lqdim/ifs_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lqdim/error.hpp"

namespace lqdim {

double reduce_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Rule::Rule(double scale, double rotation, std::vector<Point2> translations,
           std::vector<double> probs)
    : scale_(scale),
      rotation_(reduce_angle(rotation)),
      translations_(std::move(translations)),
      probs_(std::move(probs)) {
  if (!(scale_ > 0.0 && scale_ < 1.0)) {
    throw InvalidInput("rule scale must lie in (0,1), got " + std::to_string(scale_));
  }
  if (translations_.empty()) throw InvalidInput("rule needs at least one map");
  if (probs_.size() != translations_.size()) {
    throw InvalidInput("rule probability vector length differs from map count");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw InvalidInput("rule probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidInput("rule probabilities must sum to 1");
  }
}

Rule Rule::uniform(double scale, double rotation, std::vector<Point2> translations) {
  const std::size_t k = translations.size();
  std::vector<double> probs(k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k));
  return Rule(scale, rotation, std::move(translations), std::move(probs));
}

namespace {

void validate_dimension(const std::vector<Rule>& rules, int ambient_dim) {
  if (ambient_dim != 1 && ambient_dim != 2) throw InvalidInput("ambient_dim must be 1 or 2");
  if (rules.empty()) throw InvalidInput("rule set needs at least one rule");
  if (ambient_dim == 1) {
    for (const auto& r : rules) {
      if (r.rotation() != 0.0) throw InvalidInput("1-D rules cannot rotate");
      for (const auto& t : r.translations()) {
        if (t.y != 0.0) throw InvalidInput("1-D translations must have zero y component");
      }
    }
  }
}

double max_translation(const std::vector<Rule>& rules) {
  double m = 0.0;
  for (const auto& r : rules) {
    for (const auto& t : r.translations()) m = std::max(m, norm(t));
  }
  return m;
}

}  // namespace

bool maps_unit_interval(const std::vector<Rule>& rules) {
  for (const auto& r : rules) {
    for (const auto& t : r.translations()) {
      if (t.x < 0.0 || t.x + r.scale() > 1.0) return false;
    }
  }
  return true;
}

RuleSet::RuleSet(std::vector<Rule> rules, int ambient_dim)
    : rules_(std::move(rules)), ambient_dim_(ambient_dim) {
  validate_dimension(rules_, ambient_dim_);
  if (ambient_dim_ == 1 && maps_unit_interval(rules_)) {
    reference_ = {{0.5, 0.0}, 0.5};
  } else {
    reference_ = {{0.0, 0.0}, min_ball_radius(*this)};
  }
}

RuleSet::RuleSet(std::vector<Rule> rules, int ambient_dim, ReferenceBall reference)
    : rules_(std::move(rules)), ambient_dim_(ambient_dim), reference_(reference) {
  validate_dimension(rules_, ambient_dim_);
  if (!(reference_.radius >= 0.0)) throw InvalidInput("reference radius must be nonnegative");
  // f(B[c,R]) = B[f(c), lambda R] sits inside B[c,R] iff |f(c)-c| + lambda R <= R.
  for (const auto& r : rules_) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const Point2 image = r.map(j).apply(reference_.center);
      const double slack = reference_.radius * (1.0 - r.scale()) - norm(image - reference_.center);
      if (slack < -1e-12 * std::max(1.0, reference_.radius)) {
        throw InvalidInput("reference ball is not mapped into itself by every map");
      }
    }
  }
}

double RuleSet::max_scale() const {
  double m = 0.0;
  for (const auto& r : rules_) m = std::max(m, r.scale());
  return m;
}

double RuleSet::min_scale() const {
  double m = 1.0;
  for (const auto& r : rules_) m = std::min(m, r.scale());
  return m;
}

CylinderFrame CylinderFrame::then(const CylinderFrame& inner) const {
  return {scale_product * inner.scale_product,
          reduce_angle(rotation_sum + inner.rotation_sum), apply(inner.translation)};
}

double min_ball_radius(const RuleSet& rs) {
  return max_translation(rs.rules()) / (1.0 - rs.max_scale());
}

CylinderFrame compose_cylinder(const RuleSet& rs, std::span<const int> omega_prefix,
                               std::span<const int> word) {
  if (omega_prefix.size() != word.size()) {
    throw PreconditionViolation("word length " + std::to_string(word.size()) +
                                " differs from omega prefix length " +
                                std::to_string(omega_prefix.size()));
  }
  CylinderFrame frame;
  for (std::size_t m = 0; m < word.size(); ++m) {
    const int i = omega_prefix[m];
    if (i < 0 || static_cast<std::size_t>(i) >= rs.size()) {
      throw InvalidInput("omega symbol " + std::to_string(i) + " out of range");
    }
    const Rule& rule = rs.rule(static_cast<std::size_t>(i));
    const int j = word[m];
    if (j < 0 || static_cast<std::size_t>(j) >= rule.size()) {
      throw InvalidWord("symbol " + std::to_string(j) + " at position " + std::to_string(m) +
                        " exceeds rule size " + std::to_string(rule.size()));
    }
    const CylinderFrame step{rule.scale(), rule.rotation(),
                             rule.translations()[static_cast<std::size_t>(j)]};
    frame = frame.then(step);
  }
  return frame;
}

std::pair<Point2, double> cylinder_center_and_diameter(const CylinderFrame& frame,
                                                       const ReferenceBall& reference) {
  return {frame.apply(reference.center), 2.0 * reference.radius * frame.scale_product};
}

std::vector<bool> check_strong_separation(const RuleSet& rs) {
  const auto& ref = rs.reference();
  std::vector<bool> out;
  out.reserve(rs.size());
  for (const auto& rule : rs.rules()) {
    const double radius = rule.scale() * ref.radius;
    bool separated = true;
    for (std::size_t a = 0; a < rule.size() && separated; ++a) {
      const Point2 ca = rule.map(a).apply(ref.center);
      for (std::size_t b = a + 1; b < rule.size(); ++b) {
        const Point2 cb = rule.map(b).apply(ref.center);
        if (!(norm(ca - cb) > 2.0 * radius)) {
          separated = false;
          break;
        }
      }
    }
    out.push_back(separated);
  }
  return out;
}

RuleSet ruleset_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("rule set must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "ambient_dim" && key != "rules" && key != "ball_radius") {
      throw InvalidInput("unknown rule set key: " + key);
    }
  }
  const int dim = j.at("ambient_dim").get<int>();
  std::vector<Rule> rules;
  for (const auto& jr : j.at("rules")) {
    for (const auto& [key, value] : jr.items()) {
      if (key != "scale" && key != "rotation" && key != "translations" && key != "probs") {
        throw InvalidInput("unknown rule key: " + key);
      }
    }
    std::vector<Point2> ts;
    for (const auto& jt : jr.at("translations")) {
      if (jt.is_number()) {
        ts.push_back({jt.get<double>(), 0.0});
      } else if (jt.is_array() && jt.size() == 2) {
        ts.push_back({jt[0].get<double>(), jt[1].get<double>()});
      } else {
        throw InvalidInput("translation must be a number or a pair");
      }
    }
    const double rotation = jr.value("rotation", 0.0);
    const double scale = jr.at("scale").get<double>();
    if (jr.contains("probs")) {
      rules.emplace_back(scale, rotation, std::move(ts), jr.at("probs").get<std::vector<double>>());
    } else {
      rules.push_back(Rule::uniform(scale, rotation, std::move(ts)));
    }
  }
  if (j.contains("ball_radius")) {
    return RuleSet(std::move(rules), dim, ReferenceBall{{0.0, 0.0}, j.at("ball_radius").get<double>()});
  }
  return RuleSet(std::move(rules), dim);
}

nlohmann::json ruleset_to_json(const RuleSet& rs) {
  nlohmann::json j;
  j["ambient_dim"] = rs.ambient_dim();
  j["rules"] = nlohmann::json::array();
  for (const auto& r : rs.rules()) {
    nlohmann::json jr;
    jr["scale"] = r.scale();
    jr["rotation"] = r.rotation();
    jr["translations"] = nlohmann::json::array();
    for (const auto& t : r.translations()) {
      if (rs.ambient_dim() == 1) {
        jr["translations"].push_back(t.x);
      } else {
        jr["translations"].push_back({t.x, t.y});
      }
    }
    jr["probs"] = r.probs();
    j["rules"].push_back(jr);
  }
  return j;
}

}  // namespace lqdim
