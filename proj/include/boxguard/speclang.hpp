#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxguard/monitor.hpp"

namespace boxguard {

/// Strong Kleene truth values, ordered so that AND is min and OR is max.
enum class Truth : std::uint8_t { False = 0, Unknown = 1, True = 2 };

std::string to_string(Truth t);
Truth truth_from_string(std::string_view s);

inline Truth operator!(Truth t) {
  return static_cast<Truth>(2 - static_cast<int>(t));
}
inline Truth operator&&(Truth a, Truth b) { return a < b ? a : b; }
inline Truth operator||(Truth a, Truth b) { return a < b ? b : a; }

/// Instance-level claims hold per query; model-level claims hold for the
/// whole input distribution.
enum class AtomLevel { Instance, Model };

std::string to_string(AtomLevel l);

struct Annotation {
  double epsilon = 0.0;
  double delta = 0.0;
  bool operator==(const Annotation &) const = default;
};

struct Interval {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool operator==(const Interval &) const = default;
};

enum class Op { Atom, Not, And, Or, Implies, Next, Always, Eventually, Until };

/// Immutable bounded temporal-logic formula with value semantics; subtrees
/// are shared.
class Formula {
public:
  static Formula atom(std::string name, AtomLevel level = AtomLevel::Instance,
                      std::optional<Annotation> annotation = std::nullopt);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  static Formula implication(Formula a, Formula b);
  static Formula next(Formula f);
  static Formula always(Interval iv, Formula f);
  static Formula eventually(Interval iv, Formula f);
  static Formula until(Interval iv, Formula a, Formula b);

  Op op() const { return node_->op; }
  const std::string &name() const { return node_->name; }
  AtomLevel level() const { return node_->level; }
  const std::optional<Annotation> &annotation() const {
    return node_->annotation;
  }
  Interval interval() const { return node_->interval; }
  std::size_t arity() const { return node_->children.size(); }
  const Formula &child(std::size_t i) const { return node_->children.at(i); }

  /// Nesting depth; atoms have depth 1.
  std::size_t depth() const;
  /// Number of future positions (beyond the current one) the formula reads.
  std::size_t horizon() const;

  /// Structural equality.
  bool operator==(const Formula &other) const;

private:
  struct Node {
    Op op = Op::Atom;
    std::string name;
    AtomLevel level = AtomLevel::Instance;
    std::optional<Annotation> annotation;
    Interval interval;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Op op, Interval iv, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

bool is_identifier(std::string_view s);

Formula parse(std::string_view text);
std::string pretty(const Formula &formula);

using State = std::map<std::string, Truth>;

class Trace {
public:
  explicit Trace(std::vector<State> states);

  std::size_t size() const { return states_.size(); }
  const State &operator[](std::size_t i) const { return states_[i]; }
  const std::vector<State> &states() const { return states_; }

  /// Value of `atom` at position t; absent atoms and positions past the end
  /// read as Unknown.
  Truth value(const std::string &atom, std::size_t t) const;

private:
  std::vector<State> states_;
};

struct Evaluation {
  Truth verdict = Truth::Unknown;
  // Distinct in-trace positions at which each atom was read; model-level
  // atoms count once.
  std::map<std::string, std::size_t> evaluations;
};

/**
 * Three-valued evaluation at position t < |trace|.
 *
 * Kleene connectives; G/F[a,b] are the conjunction/disjunction over
 * t+a..t+b; U[a,b] holds if the right side holds at some t+i, i in [a,b],
 * with the left side holding on t..t+i-1. Positions past the trace end are
 * Unknown. Model-level atoms are constant over the trace and take the value
 * recorded in the first state.
 */
Truth eval3(const Formula &formula, const Trace &trace, std::size_t t);
Evaluation evaluate(const Formula &formula, const Trace &trace, std::size_t t);

struct AtomInfo {
  std::string name;
  AtomLevel level = AtomLevel::Instance;
  std::optional<Annotation> annotation;
};

/// Distinct atoms in name order. Occurrences may omit the annotation; two
/// different annotations or levels for one name are an error.
std::vector<AtomInfo> atoms_of(const Formula &formula);

struct Detection {
  std::int64_t id = 0;
  std::string label; // class
  double pr = 0.0;
  std::array<double, 4> bb{}; // x_min, y_min, x_max, y_max
  std::optional<FeatureVector> features;
  std::optional<VerdictKind> verdict;
};

struct FrameRecord {
  std::int64_t frame = 0;
  std::vector<Detection> detections;
};

void check_frame(const FrameRecord &frame);

struct AtomRule {
  enum class Kind { Exists, Count };
  Kind kind = Kind::Exists;
  std::string label;
  double min_pr = 0.0;
  std::size_t at_least = 1; // Count only
  bool monitor_gated = false; // Exists only
};

using ExtractionRules = std::map<std::string, AtomRule>;

/**
 * One state per frame. `exists` rules are true when a detection of the
 * class has pr >= min_pr; `count` rules when at least `at_least` do.
 * A monitor-gated atom takes the best verdict over matching detections
 * (Accept -> True, Reject -> False, Uncertain -> Unknown), from `monitor`
 * when the detection carries features, else from the detection's recorded
 * verdict; it is False when nothing matches.
 */
Trace frames_to_trace(std::span<const FrameRecord> frames,
                      const ExtractionRules &rules,
                      const Monitor *monitor = nullptr);

} // namespace boxguard
