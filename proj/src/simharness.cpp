#include "boxguard/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "boxguard/error.hpp"
#include "boxguard/random.hpp"

namespace boxguard {

void SyntheticDistribution::validate() const {
  if (components.empty())
    throw InputError("distribution needs at least one component");
  const std::size_t d = components.front().mean.size();
  if (d == 0)
    throw InputError("distribution components need a non-empty mean");
  double total = 0.0;
  for (const auto &c : components) {
    if (c.label.empty())
      throw InputError("mixture component without a label");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      throw InputError("mixture weights must be positive");
    if (c.mean.size() != d || c.stddev.size() != d)
      throw InputError("mixture components have mixed dimensions");
    for (double m : c.mean) {
      if (!std::isfinite(m))
        throw InputError("mixture mean must be finite");
    }
    for (double s : c.stddev) {
      if (!(s > 0.0) || !std::isfinite(s))
        throw InputError("mixture standard deviations must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InputError("mixture weights sum to " + std::to_string(total));
  const auto labels = classes();
  for (const auto &[label, p] : noise) {
    if (std::find(labels.begin(), labels.end(), label) == labels.end())
      throw InputError("noise given for unknown class '" + label + "'");
    if (!(p >= 0.0 && p <= 1.0))
      throw InputError("noise for '" + label + "' must lie in [0, 1]");
    if (p > 0.0 && labels.size() < 2)
      throw InputError("label noise needs at least two classes");
  }
}

std::size_t SyntheticDistribution::dimension() const {
  return components.empty() ? 0 : components.front().mean.size();
}

std::vector<std::string> SyntheticDistribution::classes() const {
  std::set<std::string> s;
  for (const auto &c : components)
    s.insert(c.label);
  return {s.begin(), s.end()};
}

double SyntheticDistribution::misprediction_rate() const {
  double rate = 0.0;
  for (const auto &c : components) {
    const auto it = noise.find(c.label);
    if (it != noise.end())
      rate += c.weight * it->second;
  }
  return rate;
}

namespace {

MonitoredSample draw(const SyntheticDistribution &dist,
                     const std::vector<std::string> &classes, Rng &rng) {
  const double u = rng.uniform();
  std::size_t pick = dist.components.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.components.size(); ++i) {
    acc += dist.components[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const auto &c = dist.components[pick];
  MonitoredSample s;
  s.features.resize(c.mean.size());
  for (std::size_t j = 0; j < c.mean.size(); ++j)
    s.features[j] = c.mean[j] + c.stddev[j] * rng.normal();

  s.predicted = c.label;
  const auto it = dist.noise.find(c.label);
  const double flip = it == dist.noise.end() ? 0.0 : it->second;
  // Always consume the draw so the stream does not depend on the noise map.
  const double v = rng.uniform();
  const std::uint64_t other = classes.size() > 1 ? rng.below(classes.size() - 1) : 0;
  if (v < flip) {
    std::size_t own = std::find(classes.begin(), classes.end(), c.label) -
                      classes.begin();
    s.predicted = classes[other >= own ? other + 1 : other];
  }
  s.correct = s.predicted == c.label;
  return s;
}

} // namespace

std::vector<MonitoredSample> gen_samples(const SyntheticDistribution &dist,
                                         std::uint64_t seed, std::size_t n) {
  dist.validate();
  if (n == 0)
    throw InputError("gen_samples needs n >= 1");
  const auto classes = dist.classes();
  Rng rng(seed);
  std::vector<MonitoredSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(draw(dist, classes, rng));
  return out;
}

ErrorEstimate true_error_oracle(const SyntheticDistribution &dist,
                                const Monitor &monitor, OracleRegion region,
                                std::size_t n_mc, std::uint64_t seed,
                                std::size_t m_min) {
  dist.validate();
  if (n_mc < 10000)
    throw InputError("the error oracle needs at least 10^4 draws");
  if (dist.dimension() != monitor.dimension())
    throw InputError("distribution and monitor dimensions differ");
  const auto classes = dist.classes();
  Rng rng(seed);
  ErrorEstimate e;
  e.draws = n_mc;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const auto s = draw(dist, classes, rng);
    if (region == OracleRegion::ConfirmedBoxes) {
      bool inside = false;
      for (const auto &box : monitor.boxes_for(s.predicted)) {
        if (box.polarity == Polarity::Positive && box.count >= m_min &&
            box_contains(box, s.features)) {
          inside = true;
          break;
        }
      }
      if (!inside)
        continue;
    }
    ++e.hits;
    if (!s.correct)
      ++wrong;
  }
  if (e.hits == 0)
    throw NoMassError("the oracle region received none of " +
                      std::to_string(n_mc) + " draws");
  const double n = static_cast<double>(e.hits);
  e.estimate = static_cast<double>(wrong) / n;
  e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / n);
  return e;
}

RunSeeds RunSeeds::derive(std::uint64_t master, std::size_t run) {
  RunSeeds s;
  s.train = mix_seed(master, 3 * run);
  s.holdout = mix_seed(master, 3 * run + 1);
  s.oracle = mix_seed(master, 3 * run + 2);
  return s;
}

void RunSeeds::check() const {
  if (train == holdout || train == oracle)
    throw InputError("training seed stream reused");
  if (holdout == oracle)
    throw InputError("holdout seed stream reused for the error oracle");
}

ValidationReport validate_guarantee(const SyntheticDistribution &dist,
                                    const ValidationProtocol &protocol,
                                    std::size_t runs, std::uint64_t seed) {
  dist.validate();
  if (runs < 100)
    throw InputError("validation needs at least 100 runs");
  if (protocol.n_train == 0 || protocol.n_holdout == 0)
    throw InputError("protocol needs non-empty training and holdout sets");
  protocol.monitor.validate();

  ValidationReport report;
  report.runs = runs;
  report.seed = seed;
  double delta_sum = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto seeds = RunSeeds::derive(seed, r);
    seeds.check();
    RunRecord rec;
    rec.run = r;
    try {
      const auto train = gen_samples(dist, seeds.train, protocol.n_train);
      MonitorConfig mc = protocol.monitor;
      mc.seed = seeds.train;
      const auto monitor = build_monitor(train, mc);
      const auto holdout = gen_samples(dist, seeds.holdout, protocol.n_holdout);
      const auto g = assess(monitor, holdout, protocol.assess);
      const auto truth = true_error_oracle(dist, monitor, OracleRegion::WholeSpace,
                                           protocol.n_mc, seeds.oracle);
      rec.status = g.no_evidence.empty() ? "ok" : "no_evidence";
      rec.claimed = true;
      rec.epsilon = g.epsilon;
      rec.delta = g.delta;
      rec.vacuous = g.vacuous;
      rec.true_error = truth.estimate;
      rec.std_error = truth.std_error;
      rec.violated = truth.estimate > g.epsilon;
    } catch (const std::exception &e) {
      rec.status = e.what();
      ++report.failed;
    }
    if (rec.claimed) {
      ++report.claims;
      delta_sum += rec.delta;
      if (rec.violated)
        ++report.violations;
    }
    report.records.push_back(std::move(rec));
  }

  if (report.claims > 0) {
    const double claims = static_cast<double>(report.claims);
    report.mean_delta = delta_sum / claims;
    report.threshold =
        report.mean_delta +
        3.0 * std::sqrt(report.mean_delta * (1.0 - report.mean_delta) / claims);
    report.sound =
        static_cast<double>(report.violations) / claims <= report.threshold;
  }
  return report;
}

} // namespace boxguard
