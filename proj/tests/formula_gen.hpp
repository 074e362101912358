#pragma once

// Random and exhaustive formula/trace generators for property tests.

#include <functional>
#include <string>
#include <vector>

#include "boxguard/random.hpp"
#include "boxguard/speclang.hpp"

namespace boxguard::testing {

inline Interval random_interval(Rng &rng, std::size_t max_bound) {
  std::size_t a = rng.below(max_bound + 1);
  std::size_t b = rng.below(max_bound + 1);
  if (b < a)
    std::swap(a, b);
  return {a, b};
}

struct GenOptions {
  std::vector<std::string> atoms{"p", "q"};
  std::size_t max_bound = 3;
  bool annotations = false; // random levels and (eps, delta) on atoms
};

inline Formula random_atom(Rng &rng, const GenOptions &o) {
  const auto &name = o.atoms[rng.below(o.atoms.size())];
  if (!o.annotations)
    return Formula::atom(name);
  const AtomLevel level = rng.below(2) ? AtomLevel::Model : AtomLevel::Instance;
  std::optional<Annotation> ann;
  if (rng.below(2))
    ann = Annotation{rng.uniform(), rng.uniform()};
  return Formula::atom(name, level, ann);
}

inline Formula random_formula(Rng &rng, std::size_t depth, const GenOptions &o) {
  if (depth <= 1 || rng.below(5) == 0)
    return random_atom(rng, o);
  const auto sub = [&] { return random_formula(rng, depth - 1, o); };
  switch (rng.below(9)) {
  case 0:
    return Formula::negation(sub());
  case 1:
    return Formula::conjunction(sub(), sub());
  case 2:
    return Formula::disjunction(sub(), sub());
  case 3:
    return Formula::implication(sub(), sub());
  case 4:
    return Formula::next(sub());
  case 5:
    return Formula::always(random_interval(rng, o.max_bound), sub());
  case 6:
    return Formula::eventually(random_interval(rng, o.max_bound), sub());
  default:
    return Formula::until(random_interval(rng, o.max_bound), sub(), sub());
  }
}

/// Every formula of depth exactly `depth` (atoms have depth 1) over the
/// given atoms with intervals inside [0, max_bound].
inline std::vector<Formula> formulas_of_depth(std::size_t depth,
                                              const std::vector<std::string> &atoms,
                                              std::size_t max_bound,
                                              std::vector<std::vector<Formula>> &by_depth) {
  if (by_depth.size() >= depth)
    return by_depth[depth - 1];
  if (depth == 1) {
    std::vector<Formula> out;
    for (const auto &a : atoms)
      out.push_back(Formula::atom(a));
    by_depth.push_back(out);
    return out;
  }
  formulas_of_depth(depth - 1, atoms, max_bound, by_depth);
  std::vector<Interval> intervals;
  for (std::size_t a = 0; a <= max_bound; ++a)
    for (std::size_t b = a; b <= max_bound; ++b)
      intervals.push_back({a, b});

  const auto &exact = by_depth[depth - 2];
  std::vector<Formula> shallower; // depth <= depth-1
  for (std::size_t d = 0; d + 1 < depth; ++d)
    shallower.insert(shallower.end(), by_depth[d].begin(), by_depth[d].end());

  std::vector<Formula> out;
  for (const auto &f : exact) {
    out.push_back(Formula::negation(f));
    out.push_back(Formula::next(f));
    for (const auto iv : intervals) {
      out.push_back(Formula::always(iv, f));
      out.push_back(Formula::eventually(iv, f));
    }
  }
  // Binary nodes: at least one child of depth-1 exactly.
  const auto binary = [&](const Formula &a, const Formula &b) {
    out.push_back(Formula::conjunction(a, b));
    out.push_back(Formula::disjunction(a, b));
    out.push_back(Formula::implication(a, b));
    for (const auto iv : intervals)
      out.push_back(Formula::until(iv, a, b));
  };
  for (const auto &a : shallower) {
    const bool a_exact = a.depth() == depth - 1;
    for (const auto &b : shallower) {
      if (a_exact || b.depth() == depth - 1)
        binary(a, b);
    }
  }
  by_depth.push_back(out);
  return out;
}

/// All two-valued traces of length 1..max_len over the atoms.
inline std::vector<Trace> all_boolean_traces(const std::vector<std::string> &atoms,
                                             std::size_t max_len) {
  std::vector<Trace> out;
  const std::size_t per_state = std::size_t{1} << atoms.size();
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i)
      total *= per_state;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<State> states(len);
      std::size_t c = code;
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t bits = c % per_state;
        c /= per_state;
        for (std::size_t a = 0; a < atoms.size(); ++a)
          states[t][atoms[a]] = (bits >> a) & 1 ? Truth::True : Truth::False;
      }
      out.emplace_back(std::move(states));
    }
  }
  return out;
}

inline Trace random_trace(Rng &rng, const std::vector<std::string> &atoms,
                          std::size_t len, bool allow_unknown) {
  std::vector<State> states(len);
  for (auto &s : states) {
    for (const auto &a : atoms) {
      const auto v = rng.below(allow_unknown ? 4 : 2);
      if (v == 3)
        continue; // absent reads as Unknown
      s[a] = static_cast<Truth>(allow_unknown ? std::min<std::uint64_t>(v, 2) : 2 * v);
    }
  }
  return Trace(std::move(states));
}

} // namespace boxguard::testing
