#include "boxguard/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>

#include "boxguard/error.hpp"
#include "boxguard/io.hpp"

namespace boxguard {
namespace {

using io::json;

std::optional<std::uint64_t> env_seed() {
  const char *v = std::getenv("GUARD_SEED");
  if (v == nullptr || *v == '\0')
    return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::char_traits<char>::length(v))
      throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception &) {
    throw InputError(std::string("GUARD_SEED is not an unsigned integer: ") + v);
  }
}

void emit(const std::string &text, const std::string &path, std::ostream &out) {
  if (path.empty())
    out << text;
  else
    io::write_file_atomic(path, text);
}

std::vector<double> parse_features(const std::string &text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw InputError("cannot parse feature '" + item + "'");
    }
  }
  check_feature_vector(values);
  return values;
}

json read_json(const std::string &path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::exception &e) {
    throw InputError(path + ": " + e.what());
  }
}

struct BuildArgs {
  std::string in, out;
  std::optional<std::size_t> k, m_min, max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, eta, tol;
};

int run_build(const BuildArgs &a, std::ostream &out) {
  const auto log = io::load_samples(a.in);
  MonitorConfig c;
  c.k = a.k;
  c.seed = a.seed ? *a.seed : env_seed().value_or(0);
  c.tau = a.tau.value_or(c.tau);
  c.eta = a.eta.value_or(c.eta);
  c.m_min = a.m_min.value_or(c.m_min);
  c.max_iter = a.max_iter.value_or(c.max_iter);
  c.tol = a.tol.value_or(c.tol);
  const auto monitor = build_monitor(log.records, c);
  io::save_monitor(monitor, a.out);
  out << "built " << monitor.boxes().size() << " boxes from "
      << log.records.size() << " samples; digest "
      << io::monitor_digest(monitor) << "\n";
  return kExitOk;
}

struct QueryArgs {
  std::string monitor, features, label;
};

int run_query(const QueryArgs &a, std::ostream &out) {
  const auto monitor = io::load_monitor(a.monitor);
  const auto v = monitor.query(parse_features(a.features), a.label);
  json j = {{"verdict", to_string(v.kind)},
            {"hits", v.hits},
            {"no_coverage", v.no_coverage}};
  out << io::canonical_dump(j) << "\n";
  return kExitOk;
}

struct AssessArgs {
  std::string monitor, holdout, out;
  std::optional<std::size_t> m_min;
  double delta_cov = 0.05;
  double delta_box = 0.05;
  bool split = false;
  std::string coverage_method = "clopper_pearson";
  std::string mode = "union_bound";
};

int run_assess(const AssessArgs &a, std::ostream &out) {
  const auto monitor = io::load_monitor(a.monitor);
  const auto holdout = io::load_samples(a.holdout);
  if (holdout.records.empty())
    throw InputError("holdout " + a.holdout + " contains no records");
  AssessConfig c;
  c.m_min = a.m_min.value_or(monitor.config().m_min);
  c.delta_cov = a.delta_cov;
  c.delta_box = a.delta_box;
  c.split_box_delta = a.split;
  c.coverage_method = coverage_method_from_string(a.coverage_method);
  c.mode = composition_mode_from_string(a.mode);
  const auto g = assess(monitor, holdout.records, c);
  json report = {{"format_version", io::kFormatVersion},
                 {"kind", "assessment"},
                 {"monitor_digest", io::monitor_digest(monitor)},
                 {"config", io::to_json(c)},
                 {"holdout_records", holdout.records.size()},
                 {"component", io::to_json(g)}};
  emit(io::canonical_dump(report) + "\n", a.out, out);
  return kExitOk;
}

struct CheckArgs {
  std::string formula, trace, frames, rules, monitor, guarantee, out;
  std::vector<std::string> bind;
  std::size_t at = 0;
};

// Claims from a guarantee report: either an assessment (its component claim
// applies to `bind`, or to every unannotated atom) or an explicit atom map.
std::map<std::string, AtomClaim>
claims_from_report(const json &doc, const std::vector<AtomInfo> &atoms,
                   const std::vector<std::string> &bind) {
  std::map<std::string, AtomClaim> claims;
  if (doc.value("format_version", -1) != io::kFormatVersion)
    throw InputError("guarantee report has an incompatible format_version");
  const auto kind = doc.value("kind", std::string());
  if (kind == "assessment") {
    const auto &c = doc.at("component");
    const AtomClaim claim{c.at("epsilon").get<double>(),
                          c.at("delta").get<double>()};
    for (const auto &a : atoms) {
      const bool named = std::find(bind.begin(), bind.end(), a.name) != bind.end();
      if (bind.empty() ? !a.annotation : named)
        claims[a.name] = claim;
    }
  } else if (kind == "atom_guarantees") {
    for (auto it = doc.at("atoms").begin(); it != doc.at("atoms").end(); ++it)
      claims[it.key()] = {it.value().at("eps").get<double>(),
                          it.value().at("delta").get<double>()};
  } else {
    throw InputError("unsupported guarantee report kind '" + kind + "'");
  }
  return claims;
}

int run_check(const CheckArgs &a, std::ostream &out) {
  const auto formula = parse(io::read_file(a.formula));
  std::optional<Trace> trace;
  if (!a.trace.empty()) {
    trace = io::load_trace(a.trace);
  } else {
    if (a.frames.empty() || a.rules.empty())
      throw InputError("check-spec needs --trace, or --frames with --rules");
    const auto frames = io::load_frames(a.frames);
    const auto rules = io::rules_from_json(read_json(a.rules));
    std::optional<Monitor> monitor;
    if (!a.monitor.empty())
      monitor = io::load_monitor(a.monitor);
    trace = frames_to_trace(frames, rules, monitor ? &*monitor : nullptr);
  }

  const auto evaluation = evaluate(formula, *trace, a.at);
  const auto atoms = atoms_of(formula);
  std::map<std::string, AtomClaim> claims;
  if (!a.guarantee.empty())
    claims = claims_from_report(read_json(a.guarantee), atoms, a.bind);
  for (const auto &atom : atoms) {
    if (atom.annotation && !claims.contains(atom.name))
      claims[atom.name] = {atom.annotation->epsilon, atom.annotation->delta};
  }

  json report = {{"format_version", io::kFormatVersion},
                 {"kind", "formula_check"},
                 {"formula", pretty(formula)},
                 {"position", a.at},
                 {"trace_length", trace->size()},
                 {"verdict", to_string(evaluation.verdict)}};
  if (claims.empty()) {
    report["guarantee"] = nullptr;
  } else {
    report["guarantee"] = io::to_json(compose_formula(
        formula, evaluation.verdict, claims, evaluation.evaluations));
  }
  emit(io::canonical_dump(report) + "\n", a.out, out);
  switch (evaluation.verdict) {
  case Truth::True:
    return kExitOk;
  case Truth::False:
    return kExitSpecFails;
  case Truth::Unknown:
    return kExitSpecUnknown;
  }
  return kExitSpecUnknown;
}

struct SimulateArgs {
  std::string dist, out;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs &a, std::ostream &out) {
  const auto doc = read_json(a.dist);
  const auto dist = io::distribution_from_json(doc);
  const auto seed = a.seed ? *a.seed : env_seed().value_or(0);
  auto log = io::make_sample_log(gen_samples(dist, seed, a.n));
  emit(io::serialize_samples(log), a.out, out);
  return kExitOk;
}

struct ValidateArgs {
  std::string protocol, out;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
};

int run_validate(const ValidateArgs &a, std::ostream &out) {
  const auto doc = read_json(a.protocol);
  if (!doc.contains("distribution"))
    throw InputError("protocol needs a distribution");
  const auto dist = io::distribution_from_json(doc.at("distribution"));
  const auto protocol = io::protocol_from_json(doc);
  const std::size_t runs = a.runs ? *a.runs : doc.value("runs", std::size_t{1000});
  std::uint64_t seed = 0;
  if (a.seed)
    seed = *a.seed;
  else if (doc.contains("seed"))
    seed = doc.at("seed").get<std::uint64_t>();
  else
    seed = env_seed().value_or(0);
  const auto report = validate_guarantee(dist, protocol, runs, seed);
  json j = io::to_json(report);
  j["format_version"] = io::kFormatVersion;
  j["kind"] = "validation";
  j["distribution"] = io::to_json(dist);
  j["protocol"] = io::to_json(protocol);
  emit(io::canonical_dump(j) + "\n", a.out, out);
  return kExitOk;
}

} // namespace

int cli_dispatch(const std::vector<std::string> &args, std::ostream &out,
                 std::ostream &err) {
  CLI::App app{"Box-abstraction runtime monitors with statistical guarantees",
               "boxguard"};
  app.require_subcommand(1);

  BuildArgs build;
  auto *b = app.add_subcommand("build", "Build a monitor from a sample log");
  b->add_option("--in", build.in, "Sample log")->required();
  b->add_option("--out", build.out, "Monitor artifact to write")->required();
  b->add_option("--k", build.k, "Clusters per (label, polarity) group");
  b->add_option("--seed", build.seed, "Clustering seed (default GUARD_SEED)");
  b->add_option("--tau", build.tau, "Multiplicative box inflation");
  b->add_option("--eta", build.eta, "Additive box inflation floor");
  b->add_option("--m-min", build.m_min, "Samples needed to confirm a box");
  b->add_option("--max-iter", build.max_iter, "k-means iteration cap");
  b->add_option("--tol", build.tol, "k-means convergence tolerance");

  QueryArgs query;
  auto *q = app.add_subcommand("query", "Query a monitor with one decision");
  q->add_option("--monitor", query.monitor, "Monitor artifact")->required();
  q->add_option("--features", query.features, "Comma-separated features")
      ->required();
  q->add_option("--label", query.label, "Predicted label")->required();

  AssessArgs assess_args;
  auto *as = app.add_subcommand("assess", "Compute the component guarantee");
  as->add_option("--monitor", assess_args.monitor, "Monitor artifact")
      ->required();
  as->add_option("--holdout", assess_args.holdout, "Held-out sample log")
      ->required();
  as->add_option("--out", assess_args.out, "Report path (default stdout)");
  as->add_option("--m-min", assess_args.m_min,
                 "Confirmation threshold (default from the monitor)");
  as->add_option("--delta-cov", assess_args.delta_cov, "Coverage delta");
  as->add_option("--delta-box", assess_args.delta_box, "Per-box delta");
  as->add_flag("--split-box-delta", assess_args.split,
               "Divide --delta-box over the confirmed boxes");
  as->add_option("--coverage-method", assess_args.coverage_method,
                 "clopper_pearson or hoeffding");
  as->add_option("--mode", assess_args.mode, "union_bound or mass_weighted");

  CheckArgs check;
  auto *cs = app.add_subcommand("check-spec",
                                "Evaluate a formula on a trace with guarantees");
  cs->add_option("--formula", check.formula, "Formula file")->required();
  cs->add_option("--trace", check.trace, "Trace file");
  cs->add_option("--frames", check.frames, "Frame-record file");
  cs->add_option("--rules", check.rules, "Atom extraction rules");
  cs->add_option("--monitor", check.monitor, "Monitor for gated atoms");
  cs->add_option("--guarantee", check.guarantee, "Guarantee report");
  cs->add_option("--bind", check.bind,
                 "Atoms the assessment claim applies to");
  cs->add_option("--at", check.at, "Evaluation position");
  cs->add_option("--out", check.out, "Report path (default stdout)");

  SimulateArgs sim;
  auto *sm = app.add_subcommand("simulate", "Draw a synthetic sample log");
  sm->add_option("--dist", sim.dist, "Distribution config")->required();
  sm->add_option("--n", sim.n, "Number of samples")->required();
  sm->add_option("--seed", sim.seed, "Seed (default GUARD_SEED)");
  sm->add_option("--out", sim.out, "Sample log path (default stdout)");

  ValidateArgs val;
  auto *vs = app.add_subcommand("validate",
                                "Monte Carlo soundness check of guarantees");
  vs->add_option("--protocol", val.protocol, "Protocol config")->required();
  vs->add_option("--runs", val.runs, "Independent runs");
  vs->add_option("--seed", val.seed, "Master seed");
  vs->add_option("--out", val.out, "Report path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitInputError;
  }

  try {
    if (*b)
      return run_build(build, out);
    if (*q)
      return run_query(query, out);
    if (*as)
      return run_assess(assess_args, out);
    if (*cs)
      return run_check(check, out);
    if (*sm)
      return run_simulate(sim, out);
    if (*vs)
      return run_validate(val, out);
  } catch (const InputError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NoEvidenceError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInputError;
}

} // namespace boxguard
