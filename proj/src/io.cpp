#include "boxguard/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "boxguard/error.hpp"

namespace boxguard::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Canonical JSON

namespace {

void dump_into(const json &v, int indent, int level, std::string &out) {
  const auto newline = [&](int lvl) {
    if (indent == 0)
      return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (v.type()) {
  case json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first)
        out += ',';
      first = false;
      newline(level + 1);
      out += json(it.key()).dump();
      out += ": ";
      dump_into(it.value(), indent, level + 1, out);
    }
    newline(level);
    out += '}';
    return;
  }
  case json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::all_of(v.begin(), v.end(), [](const json &e) {
      return !e.is_structured();
    });
    out += '[';
    bool first = true;
    for (const auto &e : v) {
      if (!first)
        out += flat ? ", " : ",";
      first = false;
      if (!flat)
        newline(level + 1);
      dump_into(e, indent, level + 1, out);
    }
    if (!flat)
      newline(level);
    out += ']';
    return;
  }
  case json::value_t::number_float: {
    const double d = v.get<double>();
    if (!std::isfinite(d))
      throw InputError("cannot serialize a non-finite number");
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, ptr);
    // Keep floats recognisable as floats on re-read.
    if (s.find_first_of(".eEn") == std::string::npos)
      s += ".0";
    out += s;
    return;
  }
  default:
    out += v.dump();
    return;
  }
}

[[noreturn]] void line_error(std::size_t line, const std::string &msg) {
  throw InputError("line " + std::to_string(line) + ": " + msg);
}

void check_header(const json &header, const std::string &kind) {
  if (!header.is_object() || !header.contains("format_version"))
    throw InputError("missing format_version header for " + kind);
  const auto &v = header.at("format_version");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
    throw InputError("incompatible " + kind + " format_version " + v.dump() +
                     " (this build reads version " +
                     std::to_string(kFormatVersion) + ")");
  if (header.contains("kind") && header.at("kind") != kind)
    throw InputError("expected a " + kind + " file, got kind " +
                     header.at("kind").dump());
}

void check_keys(const json &obj, std::initializer_list<const char *> allowed,
                const std::string &what) {
  if (!obj.is_object())
    throw InputError(what + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char *a : allowed)
      known = known || it.key() == a;
    if (!known)
      throw InputError(what + ": unknown field '" + it.key() + "'");
  }
}

std::vector<double> finite_vector(const json &arr, const std::string &what) {
  if (!arr.is_array())
    throw InputError(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto &e : arr) {
    if (!e.is_number())
      throw InputError(what + " must contain only numbers");
    const double d = e.get<double>();
    if (!std::isfinite(d))
      throw InputError(what + " contains a non-finite value");
    out.push_back(d);
  }
  return out;
}

template <class F> auto with_context(const std::string &what, F &&f) {
  try {
    return f();
  } catch (const json::exception &e) {
    throw InputError(what + ": " + e.what());
  }
}

std::ifstream open_input(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open " + path.string());
  return in;
}

} // namespace

std::string canonical_dump(const json &value) {
  std::string out;
  dump_into(value, 2, 0, out);
  return out;
}

std::string sha256_hex(const std::string &data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

void write_file_atomic(const fs::path &path, const std::string &content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out)
      throw InputError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path &path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Sample logs

SampleLog make_sample_log(std::vector<MonitoredSample> records) {
  if (records.empty())
    throw InputError("a sample log needs at least one record");
  SampleLog log;
  log.dimension = records.front().features.size();
  std::set<std::string> labels;
  for (const auto &r : records) {
    if (r.features.size() != log.dimension)
      throw InputError("records have mixed dimensions");
    labels.insert(r.predicted);
  }
  log.labels.assign(labels.begin(), labels.end());
  log.records = std::move(records);
  return log;
}

SampleLog parse_samples(std::istream &in) {
  SampleLog log;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::set<std::string> alphabet;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      line_error(lineno, std::string("malformed record: ") + e.what());
    }
    if (!have_header) {
      try {
        check_header(obj, "sample_log");
        check_keys(obj, {"format_version", "kind", "dimension", "labels"},
                   "sample log header");
        const auto &d = obj.at("dimension");
        if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
          throw InputError("dimension must be a positive integer");
        log.dimension = d.get<std::size_t>();
        if (obj.contains("labels")) {
          log.labels = obj.at("labels").get<std::vector<std::string>>();
          alphabet.insert(log.labels.begin(), log.labels.end());
        }
      } catch (const std::exception &e) {
        line_error(lineno, e.what());
      }
      have_header = true;
      continue;
    }
    try {
      check_keys(obj, {"features", "predicted", "correct"}, "record");
      MonitoredSample s;
      s.features = finite_vector(obj.at("features"), "features");
      if (s.features.size() != log.dimension)
        throw InputError("record has " + std::to_string(s.features.size()) +
                         " features, header declares " +
                         std::to_string(log.dimension));
      if (!obj.at("predicted").is_string() ||
          obj.at("predicted").get<std::string>().empty())
        throw InputError("predicted must be a non-empty string");
      s.predicted = obj.at("predicted").get<std::string>();
      if (!alphabet.empty() && !alphabet.contains(s.predicted))
        throw InputError("label '" + s.predicted +
                         "' is not in the header's label alphabet");
      if (!obj.at("correct").is_boolean())
        throw InputError("correct must be a boolean");
      s.correct = obj.at("correct").get<bool>();
      log.records.push_back(std::move(s));
    } catch (const json::exception &e) {
      line_error(lineno, e.what());
    } catch (const InputError &e) {
      line_error(lineno, e.what());
    }
  }
  if (!have_header)
    throw InputError("sample log is empty (no header line)");
  return log;
}

SampleLog load_samples(const fs::path &path) {
  auto in = open_input(path);
  return parse_samples(in);
}

std::string serialize_samples(const SampleLog &log) {
  std::string out;
  json header = {{"format_version", kFormatVersion},
                 {"kind", "sample_log"},
                 {"dimension", log.dimension},
                 {"labels", log.labels}};
  out += header.dump() + "\n";
  for (const auto &r : log.records) {
    json rec = {{"features", r.features},
                {"predicted", r.predicted},
                {"correct", r.correct}};
    std::string line;
    dump_into(rec, 0, 0, line);
    out += line + "\n";
  }
  return out;
}

void save_samples(const SampleLog &log, const fs::path &path) {
  write_file_atomic(path, serialize_samples(log));
}

// ---------------------------------------------------------------------------
// Monitor artifacts

json config_to_json(const MonitorConfig &c) {
  json j = {{"seed", c.seed},          {"tau", c.tau},
            {"eta", c.eta},            {"m_min", c.m_min},
            {"max_iter", c.max_iter},  {"tol", c.tol}};
  j["k"] = c.k ? json(*c.k) : json(nullptr);
  return j;
}

MonitorConfig config_from_json(const json &doc) {
  return with_context("monitor config", [&] {
    check_keys(doc, {"k", "seed", "tau", "eta", "m_min", "max_iter", "tol"},
               "monitor config");
    MonitorConfig c;
    if (doc.contains("k") && !doc.at("k").is_null())
      c.k = doc.at("k").get<std::size_t>();
    c.seed = doc.value("seed", c.seed);
    c.tau = doc.value("tau", c.tau);
    c.eta = doc.value("eta", c.eta);
    c.m_min = doc.value("m_min", c.m_min);
    c.max_iter = doc.value("max_iter", c.max_iter);
    c.tol = doc.value("tol", c.tol);
    c.validate();
    return c;
  });
}

namespace {

json monitor_body(const Monitor &m) {
  json boxes = json::array();
  for (const auto &b : m.boxes()) {
    boxes.push_back({{"l", b.center},
                     {"r", b.radius},
                     {"c", b.cluster_id},
                     {"m", b.count},
                     {"y", b.label},
                     {"i", to_string(b.polarity)}});
  }
  json provenance = json::object();
  for (const auto &[label, counts] : m.provenance())
    provenance[label] = {{"correct", counts.correct},
                         {"incorrect", counts.incorrect}};
  return {{"format_version", kFormatVersion},
          {"kind", "monitor"},
          {"dimension", m.dimension()},
          {"config", config_to_json(m.config())},
          {"provenance", provenance},
          {"boxes", boxes}};
}

} // namespace

std::string monitor_digest(const Monitor &monitor) {
  return "sha256:" + sha256_hex(canonical_dump(monitor_body(monitor)));
}

json monitor_to_json(const Monitor &monitor) {
  json j = monitor_body(monitor);
  j["digest"] = monitor_digest(monitor);
  return j;
}

Monitor monitor_from_json(const json &doc) {
  check_header(doc, "monitor");
  return with_context("monitor artifact", [&] {
    check_keys(doc,
               {"format_version", "kind", "dimension", "config", "provenance",
                "boxes", "digest"},
               "monitor artifact");
    std::vector<AbstractionBox> boxes;
    for (const auto &jb : doc.at("boxes")) {
      check_keys(jb, {"l", "r", "c", "m", "y", "i"}, "box");
      AbstractionBox b;
      b.center = finite_vector(jb.at("l"), "box centre");
      b.radius = finite_vector(jb.at("r"), "box radius");
      b.cluster_id = jb.at("c").get<std::string>();
      b.count = jb.at("m").get<std::size_t>();
      b.label = jb.at("y").get<std::string>();
      b.polarity = polarity_from_string(jb.at("i").get<std::string>());
      boxes.push_back(std::move(b));
    }
    std::map<std::string, GroupCounts> provenance;
    for (auto it = doc.at("provenance").begin();
         it != doc.at("provenance").end(); ++it)
      provenance[it.key()] = {it.value().at("correct").get<std::size_t>(),
                              it.value().at("incorrect").get<std::size_t>()};
    Monitor m(doc.at("dimension").get<std::size_t>(),
              config_from_json(doc.at("config")), std::move(boxes),
              std::move(provenance));
    const auto stored = doc.at("digest").get<std::string>();
    if (stored != monitor_digest(m))
      throw InputError("monitor digest mismatch: artifact is corrupted or "
                       "was edited");
    return m;
  });
}

std::string serialize_monitor(const Monitor &monitor) {
  return canonical_dump(monitor_to_json(monitor)) + "\n";
}

void save_monitor(const Monitor &monitor, const fs::path &path) {
  write_file_atomic(path, serialize_monitor(monitor));
}

Monitor load_monitor(const fs::path &path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return monitor_from_json(doc);
}

// ---------------------------------------------------------------------------
// Reports

json to_json(const BoxGuarantee &g) {
  return {{"cluster_id", g.cluster_id},
          {"polarity", to_string(g.polarity)},
          {"evidence", g.evidence},
          {"errors", g.errors},
          {"empirical_error", g.empirical_error},
          {"epsilon", g.epsilon},
          {"delta", g.delta},
          {"misprediction_bound", g.misprediction_bound()}};
}

json to_json(const CoverageGuarantee &g) {
  return {{"n_holdout", g.n_holdout}, {"misses", g.misses},
          {"m_min", g.m_min},         {"method", to_string(g.method)},
          {"epsilon", g.epsilon},     {"delta", g.delta}};
}

json to_json(const ComponentGuarantee &g) {
  json boxes = json::array();
  for (const auto &b : g.boxes)
    boxes.push_back(to_json(b));
  return {{"epsilon", g.epsilon},
          {"delta", g.delta},
          {"vacuous", g.vacuous},
          {"mode", to_string(g.mode)},
          {"coverage", to_json(g.coverage)},
          {"boxes", boxes},
          {"no_evidence", g.no_evidence},
          {"assumption", g.assumption}};
}

json to_json(const FormulaGuarantee &g) {
  json atoms = json::array();
  for (const auto &a : g.atoms)
    atoms.push_back({{"name", a.name},
                     {"level", to_string(a.level)},
                     {"epsilon", a.claim.epsilon},
                     {"delta", a.claim.delta},
                     {"evaluations", a.evaluations},
                     {"delta_contribution", a.delta_contribution}});
  return {{"epsilon", g.epsilon},       {"delta", g.delta},
          {"vacuous", g.vacuous},       {"verdict", to_string(g.verdict)},
          {"evaluations", g.evaluations}, {"atoms", atoms}};
}

json to_json(const AssessConfig &c) {
  return {{"m_min", c.m_min},
          {"delta_cov", c.delta_cov},
          {"delta_box", c.delta_box},
          {"split_box_delta", c.split_box_delta},
          {"coverage_method", to_string(c.coverage_method)},
          {"mode", to_string(c.mode)}};
}

AssessConfig assess_config_from_json(const json &doc) {
  return with_context("assess config", [&] {
    check_keys(doc,
               {"m_min", "delta_cov", "delta_box", "split_box_delta",
                "coverage_method", "mode"},
               "assess config");
    AssessConfig c;
    c.m_min = doc.value("m_min", c.m_min);
    c.delta_cov = doc.value("delta_cov", c.delta_cov);
    c.delta_box = doc.value("delta_box", c.delta_box);
    c.split_box_delta = doc.value("split_box_delta", c.split_box_delta);
    if (doc.contains("coverage_method"))
      c.coverage_method = coverage_method_from_string(
          doc.at("coverage_method").get<std::string>());
    if (doc.contains("mode"))
      c.mode = composition_mode_from_string(doc.at("mode").get<std::string>());
    return c;
  });
}

json to_json(const SyntheticDistribution &d) {
  json comps = json::array();
  for (const auto &c : d.components)
    comps.push_back({{"label", c.label},
                     {"weight", c.weight},
                     {"mean", c.mean},
                     {"stddev", c.stddev}});
  json noise = json::object();
  for (const auto &[label, p] : d.noise)
    noise[label] = p;
  return {{"components", comps}, {"noise", noise}};
}

SyntheticDistribution distribution_from_json(const json &doc) {
  return with_context("distribution", [&] {
    check_keys(doc, {"format_version", "kind", "components", "noise"},
               "distribution");
    SyntheticDistribution d;
    for (const auto &jc : doc.at("components")) {
      check_keys(jc, {"label", "weight", "mean", "stddev"},
                 "mixture component");
      MixtureComponent c;
      c.label = jc.at("label").get<std::string>();
      c.weight = jc.at("weight").get<double>();
      c.mean = finite_vector(jc.at("mean"), "mean");
      c.stddev = finite_vector(jc.at("stddev"), "stddev");
      d.components.push_back(std::move(c));
    }
    if (doc.contains("noise"))
      d.noise = doc.at("noise").get<std::map<std::string, double>>();
    d.validate();
    return d;
  });
}

json to_json(const ValidationProtocol &p) {
  return {{"n_train", p.n_train},
          {"n_holdout", p.n_holdout},
          {"n_mc", p.n_mc},
          {"monitor", config_to_json(p.monitor)},
          {"assess", to_json(p.assess)}};
}

ValidationProtocol protocol_from_json(const json &doc) {
  return with_context("protocol", [&] {
    check_keys(doc,
               {"format_version", "kind", "distribution", "n_train",
                "n_holdout", "n_mc", "runs", "seed", "monitor", "assess"},
               "protocol");
    ValidationProtocol p;
    p.n_train = doc.value("n_train", p.n_train);
    p.n_holdout = doc.value("n_holdout", p.n_holdout);
    p.n_mc = doc.value("n_mc", p.n_mc);
    if (doc.contains("monitor"))
      p.monitor = config_from_json(doc.at("monitor"));
    if (doc.contains("assess"))
      p.assess = assess_config_from_json(doc.at("assess"));
    return p;
  });
}

json to_json(const ValidationReport &r) {
  json records = json::array();
  for (const auto &rec : r.records)
    records.push_back({{"run", rec.run},
                       {"status", rec.status},
                       {"claimed", rec.claimed},
                       {"epsilon", rec.epsilon},
                       {"delta", rec.delta},
                       {"vacuous", rec.vacuous},
                       {"true_error", rec.true_error},
                       {"std_error", rec.std_error},
                       {"violated", rec.violated}});
  return {{"runs", r.runs},
          {"seed", r.seed},
          {"claims", r.claims},
          {"violations", r.violations},
          {"failed", r.failed},
          {"mean_delta", r.mean_delta},
          {"threshold", r.threshold},
          {"sound", r.sound},
          {"records", records}};
}

// ---------------------------------------------------------------------------
// Traces and frames

namespace {

// Calls on_record(obj, lineno) for every record after the header.
template <class F>
void read_jsonl(std::istream &in, const std::string &kind, F &&on_record) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      line_error(lineno, std::string("malformed line: ") + e.what());
    }
    try {
      if (!have_header) {
        check_header(obj, kind);
        have_header = true;
        continue;
      }
      on_record(obj);
    } catch (const json::exception &e) {
      line_error(lineno, e.what());
    } catch (const InputError &e) {
      line_error(lineno, e.what());
    }
  }
  if (!have_header)
    throw InputError(kind + " file is empty (no header line)");
}

} // namespace

Trace parse_trace(std::istream &in) {
  std::vector<State> states;
  read_jsonl(in, "trace", [&](const json &obj) {
    if (!obj.is_object())
      throw InputError("a trace state must be an object");
    State s;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!is_identifier(it.key()))
        throw InputError("'" + it.key() + "' is not a valid atom name");
      if (it.value().is_boolean())
        s[it.key()] = it.value().get<bool>() ? Truth::True : Truth::False;
      else if (it.value().is_string())
        s[it.key()] = truth_from_string(it.value().get<std::string>());
      else
        throw InputError("atom '" + it.key() +
                         "' must be true, false or unknown");
    }
    states.push_back(std::move(s));
  });
  return Trace(std::move(states));
}

Trace load_trace(const fs::path &path) {
  auto in = open_input(path);
  return parse_trace(in);
}

std::vector<FrameRecord> parse_frames(std::istream &in) {
  std::vector<FrameRecord> frames;
  read_jsonl(in, "frames", [&](const json &obj) {
    check_keys(obj, {"frame", "detections"}, "frame");
    FrameRecord f;
    f.frame = obj.at("frame").get<std::int64_t>();
    for (const auto &jd : obj.value("detections", json::array())) {
      check_keys(jd, {"id", "class", "pr", "bb", "features", "verdict"},
                 "detection");
      Detection d;
      d.id = jd.at("id").get<std::int64_t>();
      d.label = jd.at("class").get<std::string>();
      d.pr = jd.at("pr").get<double>();
      const auto bb = finite_vector(jd.at("bb"), "bb");
      if (bb.size() != 4)
        throw InputError("bb must have four entries");
      std::copy(bb.begin(), bb.end(), d.bb.begin());
      if (jd.contains("features"))
        d.features = finite_vector(jd.at("features"), "features");
      if (jd.contains("verdict")) {
        const auto v = jd.at("verdict").get<std::string>();
        if (v == "accept")
          d.verdict = VerdictKind::Accept;
        else if (v == "reject")
          d.verdict = VerdictKind::Reject;
        else if (v == "uncertain")
          d.verdict = VerdictKind::Uncertain;
        else
          throw InputError("unknown verdict '" + v + "'");
      }
      f.detections.push_back(std::move(d));
    }
    check_frame(f);
    frames.push_back(std::move(f));
  });
  return frames;
}

std::vector<FrameRecord> load_frames(const fs::path &path) {
  auto in = open_input(path);
  return parse_frames(in);
}

ExtractionRules rules_from_json(const json &doc) {
  return with_context("extraction rules", [&] {
    check_keys(doc, {"format_version", "kind", "atoms"}, "extraction rules");
    if (doc.contains("format_version"))
      check_header(doc, "rules");
    ExtractionRules rules;
    for (auto it = doc.at("atoms").begin(); it != doc.at("atoms").end(); ++it) {
      const json &jr = it.value();
      AtomRule r;
      const auto kind = jr.at("kind").get<std::string>();
      if (kind == "exists") {
        check_keys(jr, {"kind", "class", "min_pr", "monitor_gated"},
                   "rule '" + it.key() + "'");
        r.kind = AtomRule::Kind::Exists;
        r.monitor_gated = jr.value("monitor_gated", false);
      } else if (kind == "count") {
        check_keys(jr, {"kind", "class", "min_pr", "at_least"},
                   "rule '" + it.key() + "'");
        r.kind = AtomRule::Kind::Count;
        r.at_least = jr.at("at_least").get<std::size_t>();
      } else {
        throw InputError("rule '" + it.key() + "': unknown kind '" + kind +
                         "'");
      }
      r.label = jr.at("class").get<std::string>();
      r.min_pr = jr.value("min_pr", 0.0);
      rules[it.key()] = r;
    }
    return rules;
  });
}

} // namespace boxguard::io
