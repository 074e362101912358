#include "boxguard/speclang.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "boxguard/error.hpp"

namespace boxguard {

std::string to_string(Truth t) {
  switch (t) {
  case Truth::True:
    return "true";
  case Truth::False:
    return "false";
  case Truth::Unknown:
    return "unknown";
  }
  return "unknown";
}

Truth truth_from_string(std::string_view s) {
  if (s == "true")
    return Truth::True;
  if (s == "false")
    return Truth::False;
  if (s == "unknown")
    return Truth::Unknown;
  throw InputError("expected true, false or unknown, got '" + std::string(s) +
                   "'");
}

std::string to_string(AtomLevel l) {
  return l == AtomLevel::Instance ? "instance" : "model";
}

// ---------------------------------------------------------------------------
// AST

bool is_identifier(std::string_view s) {
  if (s.empty() || s == "X" || s == "G" || s == "F" || s == "U")
    return false;
  const auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(s.front()))
    return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return alpha(c) || (c >= '0' && c <= '9');
  });
}

Formula Formula::make(Op op, Interval iv, std::vector<Formula> children) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->interval = iv;
  node->children = std::move(children);
  return Formula(std::move(node));
}

Formula Formula::atom(std::string name, AtomLevel level,
                      std::optional<Annotation> annotation) {
  if (!is_identifier(name))
    throw InputError("'" + name + "' is not a valid atom name");
  if (annotation) {
    const auto ok = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!ok(annotation->epsilon) || !ok(annotation->delta))
      throw InputError("annotation of '" + name +
                       "' must have eps and delta in [0, 1]");
  }
  auto node = std::make_shared<Node>();
  node->op = Op::Atom;
  node->name = std::move(name);
  node->level = level;
  node->annotation = annotation;
  return Formula(std::move(node));
}

Formula Formula::negation(Formula f) { return make(Op::Not, {}, {std::move(f)}); }
Formula Formula::conjunction(Formula a, Formula b) {
  return make(Op::And, {}, {std::move(a), std::move(b)});
}
Formula Formula::disjunction(Formula a, Formula b) {
  return make(Op::Or, {}, {std::move(a), std::move(b)});
}
Formula Formula::implication(Formula a, Formula b) {
  return make(Op::Implies, {}, {std::move(a), std::move(b)});
}
Formula Formula::next(Formula f) { return make(Op::Next, {}, {std::move(f)}); }

static void check_interval(Interval iv) {
  if (iv.hi < iv.lo)
    throw InputError("empty interval [" + std::to_string(iv.lo) + "," +
                     std::to_string(iv.hi) + "]");
}

Formula Formula::always(Interval iv, Formula f) {
  check_interval(iv);
  return make(Op::Always, iv, {std::move(f)});
}
Formula Formula::eventually(Interval iv, Formula f) {
  check_interval(iv);
  return make(Op::Eventually, iv, {std::move(f)});
}
Formula Formula::until(Interval iv, Formula a, Formula b) {
  check_interval(iv);
  return make(Op::Until, iv, {std::move(a), std::move(b)});
}

std::size_t Formula::depth() const {
  std::size_t d = 0;
  for (const auto &c : node_->children)
    d = std::max(d, c.depth());
  return d + 1;
}

std::size_t Formula::horizon() const {
  std::size_t h = 0;
  for (const auto &c : node_->children)
    h = std::max(h, c.horizon());
  switch (op()) {
  case Op::Next:
    return h + 1;
  case Op::Always:
  case Op::Eventually:
  case Op::Until:
    return h + interval().hi;
  default:
    return h;
  }
}

bool Formula::operator==(const Formula &other) const {
  if (node_ == other.node_)
    return true;
  const Node &a = *node_;
  const Node &b = *other.node_;
  if (a.op != b.op)
    return false;
  if (a.op == Op::Atom)
    return a.name == b.name && a.level == b.level &&
           a.annotation == b.annotation;
  if (a.interval != b.interval || a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!(a.children[i] == b.children[i]))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parser
//
//   implies := or ('->' implies)?
//   or      := and ('|' and)*
//   and     := until ('&' until)*
//   until   := unary ('U' interval until)?
//   unary   := '!' unary | 'X' unary | ('G'|'F') interval unary | primary
//   primary := atom | '(' implies ')'
//   atom    := ident ('{' key '=' value (',' key '=' value)* '}')?

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse_all() {
    Formula f = parse_implies();
    skip_ws();
    if (pos_ < text_.size())
      fail("unexpected '" + std::string(1, text_[pos_]) +
           "', expected an operator or end of input");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg, line_, column_);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  bool peek(std::string_view tok) {
    skip_ws();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek(tok))
      return false;
    for (std::size_t i = 0; i < tok.size(); ++i)
      advance();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok))
      fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           (c >= '0' && c <= '9');
  }

  // Reads an identifier-shaped word without consuming it.
  std::string_view peek_word() {
    skip_ws();
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end]))
      ++end;
    return text_.substr(pos_, end - pos_);
  }

  bool accept_keyword(std::string_view kw) {
    if (peek_word() != kw)
      return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      advance();
    return true;
  }

  std::size_t parse_natural() {
    skip_ws();
    std::size_t value = 0;
    const auto *first = text_.data() + pos_;
    const auto *last = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first)
      fail("expected a non-negative integer");
    while (text_.data() + pos_ < ptr)
      advance();
    return value;
  }

  double parse_number() {
    skip_ws();
    double value = 0.0;
    const auto *first = text_.data() + pos_;
    const auto *last = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first || !std::isfinite(value))
      fail("expected a number");
    while (text_.data() + pos_ < ptr)
      advance();
    return value;
  }

  Interval parse_interval() {
    skip_ws();
    const std::size_t line = line_, column = column_;
    expect("[");
    Interval iv;
    iv.lo = parse_natural();
    expect(",");
    iv.hi = parse_natural();
    expect("]");
    if (iv.hi < iv.lo)
      throw ParseError("empty interval [" + std::to_string(iv.lo) + "," +
                           std::to_string(iv.hi) + "]",
                       line, column);
    return iv;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept("->"))
      return Formula::implication(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (accept("|"))
      lhs = Formula::disjunction(std::move(lhs), parse_and());
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_until();
    while (accept("&"))
      lhs = Formula::conjunction(std::move(lhs), parse_until());
    return lhs;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (accept_keyword("U")) {
      const Interval iv = parse_interval();
      return Formula::until(iv, std::move(lhs), parse_until());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (accept("!"))
      return Formula::negation(parse_unary());
    if (accept_keyword("X"))
      return Formula::next(parse_unary());
    if (accept_keyword("G")) {
      const Interval iv = parse_interval();
      return Formula::always(iv, parse_unary());
    }
    if (accept_keyword("F")) {
      const Interval iv = parse_interval();
      return Formula::eventually(iv, parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (accept("(")) {
      Formula f = parse_implies();
      expect(")");
      return f;
    }
    const std::string name(peek_word());
    if (!is_identifier(name)) {
      if (pos_ >= text_.size())
        fail("unexpected end of input, expected an atom or '('");
      fail("expected an atom or '('");
    }
    for (std::size_t i = 0; i < name.size(); ++i)
      advance();

    AtomLevel level = AtomLevel::Instance;
    std::optional<double> eps, delta;
    if (accept("{")) {
      std::set<std::string> seen;
      do {
        const std::string key(peek_word());
        if (key.empty())
          fail("expected eps, delta or level");
        if (!seen.insert(key).second)
          fail("duplicate annotation key '" + key + "'");
        for (std::size_t i = 0; i < key.size(); ++i)
          advance();
        expect("=");
        if (key == "eps") {
          eps = parse_number();
        } else if (key == "delta") {
          delta = parse_number();
        } else if (key == "level") {
          if (accept_keyword("instance"))
            level = AtomLevel::Instance;
          else if (accept_keyword("model"))
            level = AtomLevel::Model;
          else
            fail("expected instance or model");
        } else {
          fail("unknown annotation key '" + key + "'");
        }
      } while (accept(","));
      expect("}");
      if (eps.has_value() != delta.has_value())
        fail("annotation of '" + name + "' needs both eps and delta");
    }
    std::optional<Annotation> annotation;
    if (eps)
      annotation = Annotation{*eps, *delta};
    try {
      return Formula::atom(name, level, annotation);
    } catch (const InputError &e) {
      fail(e.what());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

int precedence(Op op) {
  switch (op) {
  case Op::Implies:
    return 1;
  case Op::Or:
    return 2;
  case Op::And:
    return 3;
  case Op::Until:
    return 4;
  case Op::Not:
  case Op::Next:
  case Op::Always:
  case Op::Eventually:
    return 5;
  case Op::Atom:
    return 6;
  }
  return 6;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, ptr);
}

std::string format_interval(Interval iv) {
  return "[" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]";
}

void render(const Formula &f, int min_prec, std::string &out) {
  const int prec = precedence(f.op());
  const bool parens = prec < min_prec;
  if (parens)
    out += '(';
  switch (f.op()) {
  case Op::Atom:
    out += f.name();
    if (f.annotation() || f.level() != AtomLevel::Instance) {
      out += '{';
      if (f.annotation()) {
        out += "eps=" + format_number(f.annotation()->epsilon);
        out += ", delta=" + format_number(f.annotation()->delta) + ", ";
      }
      out += "level=" + to_string(f.level()) + "}";
    }
    break;
  case Op::Not:
    out += '!';
    render(f.child(0), 5, out);
    break;
  case Op::Next:
    out += "X ";
    render(f.child(0), 5, out);
    break;
  case Op::Always:
  case Op::Eventually:
    out += f.op() == Op::Always ? "G" : "F";
    out += format_interval(f.interval()) + " ";
    render(f.child(0), 5, out);
    break;
  case Op::And:
  case Op::Or:
    render(f.child(0), prec, out);
    out += f.op() == Op::And ? " & " : " | ";
    render(f.child(1), prec + 1, out);
    break;
  case Op::Implies:
    render(f.child(0), prec + 1, out);
    out += " -> ";
    render(f.child(1), prec, out);
    break;
  case Op::Until:
    render(f.child(0), prec + 1, out);
    out += " U" + format_interval(f.interval()) + " ";
    render(f.child(1), prec, out);
    break;
  }
  if (parens)
    out += ')';
}

} // namespace

Formula parse(std::string_view text) { return Parser(text).parse_all(); }

std::string pretty(const Formula &formula) {
  std::string out;
  render(formula, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

Trace::Trace(std::vector<State> states) : states_(std::move(states)) {
  if (states_.empty())
    throw InputError("a trace needs at least one state");
}

Truth Trace::value(const std::string &atom, std::size_t t) const {
  if (t >= states_.size())
    return Truth::Unknown;
  const auto it = states_[t].find(atom);
  return it == states_[t].end() ? Truth::Unknown : it->second;
}

namespace {

// Values of f at positions base .. base+len-1, computed bottom-up.
std::vector<Truth> table(const Formula &f, const Trace &trace, std::size_t base,
                         std::size_t len) {
  std::vector<Truth> out(len);
  switch (f.op()) {
  case Op::Atom:
    for (std::size_t i = 0; i < len; ++i)
      out[i] = trace.value(f.name(),
                           f.level() == AtomLevel::Model ? 0 : base + i);
    break;
  case Op::Not: {
    const auto c = table(f.child(0), trace, base, len);
    for (std::size_t i = 0; i < len; ++i)
      out[i] = !c[i];
    break;
  }
  case Op::And:
  case Op::Or:
  case Op::Implies: {
    const auto a = table(f.child(0), trace, base, len);
    const auto b = table(f.child(1), trace, base, len);
    for (std::size_t i = 0; i < len; ++i) {
      if (f.op() == Op::And)
        out[i] = a[i] && b[i];
      else if (f.op() == Op::Or)
        out[i] = a[i] || b[i];
      else
        out[i] = !a[i] || b[i];
    }
    break;
  }
  case Op::Next: {
    const auto c = table(f.child(0), trace, base + 1, len);
    out = c;
    break;
  }
  case Op::Always:
  case Op::Eventually: {
    const Interval iv = f.interval();
    const auto c = table(f.child(0), trace, base, len + iv.hi);
    const bool all = f.op() == Op::Always;
    for (std::size_t i = 0; i < len; ++i) {
      Truth acc = all ? Truth::True : Truth::False;
      for (std::size_t k = iv.lo; k <= iv.hi; ++k)
        acc = all ? (acc && c[i + k]) : (acc || c[i + k]);
      out[i] = acc;
    }
    break;
  }
  case Op::Until: {
    const Interval iv = f.interval();
    const auto lhs = table(f.child(0), trace, base, len + iv.hi);
    const auto rhs = table(f.child(1), trace, base, len + iv.hi);
    for (std::size_t i = 0; i < len; ++i) {
      Truth acc = Truth::False;
      Truth prefix = Truth::True; // lhs on i .. i+k-1
      for (std::size_t k = 0; k <= iv.hi; ++k) {
        if (k >= iv.lo)
          acc = acc || (prefix && rhs[i + k]);
        prefix = prefix && lhs[i + k];
      }
      out[i] = acc;
    }
    break;
  }
  }
  return out;
}

struct Reads {
  std::vector<bool> instance;
  bool model = false;
};

// Marks the positions each atom is read at, given the positions f is needed.
void mark_reads(const Formula &f, const std::vector<bool> &needed,
                std::map<std::string, Reads> &reads) {
  const std::size_t len = needed.size();
  const auto shifted = [&](std::size_t from, std::size_t to) {
    std::vector<bool> out(len, false);
    for (std::size_t p = 0; p < len; ++p) {
      if (!needed[p])
        continue;
      for (std::size_t k = from; k <= to && p + k < len; ++k)
        out[p + k] = true;
    }
    return out;
  };
  switch (f.op()) {
  case Op::Atom: {
    auto &r = reads[f.name()];
    if (f.level() == AtomLevel::Model) {
      r.model = r.model || std::find(needed.begin(), needed.end(), true) !=
                               needed.end();
    } else {
      r.instance.resize(len, false);
      for (std::size_t p = 0; p < len; ++p)
        r.instance[p] = r.instance[p] || needed[p];
    }
    break;
  }
  case Op::Not:
  case Op::And:
  case Op::Or:
  case Op::Implies:
    for (std::size_t i = 0; i < f.arity(); ++i)
      mark_reads(f.child(i), needed, reads);
    break;
  case Op::Next:
    mark_reads(f.child(0), shifted(1, 1), reads);
    break;
  case Op::Always:
  case Op::Eventually:
    mark_reads(f.child(0), shifted(f.interval().lo, f.interval().hi), reads);
    break;
  case Op::Until:
    if (f.interval().hi > 0)
      mark_reads(f.child(0), shifted(0, f.interval().hi - 1), reads);
    mark_reads(f.child(1), shifted(f.interval().lo, f.interval().hi), reads);
    break;
  }
}

} // namespace

Truth eval3(const Formula &formula, const Trace &trace, std::size_t t) {
  if (t >= trace.size())
    throw InputError("position " + std::to_string(t) +
                     " is outside the trace (length " +
                     std::to_string(trace.size()) + ")");
  return table(formula, trace, t, 1).front();
}

Evaluation evaluate(const Formula &formula, const Trace &trace,
                    std::size_t t) {
  Evaluation e;
  e.verdict = eval3(formula, trace, t);
  // Only in-trace positions consume a claim.
  std::vector<bool> needed(trace.size(), false);
  needed[t] = true;
  std::map<std::string, Reads> reads;
  mark_reads(formula, needed, reads);
  for (const auto &[name, r] : reads) {
    std::size_t n = r.model ? 1 : 0;
    n += static_cast<std::size_t>(
        std::count(r.instance.begin(), r.instance.end(), true));
    e.evaluations[name] = n;
  }
  return e;
}

std::vector<AtomInfo> atoms_of(const Formula &formula) {
  std::map<std::string, AtomInfo> found;
  std::vector<const Formula *> stack{&formula};
  while (!stack.empty()) {
    const Formula &f = *stack.back();
    stack.pop_back();
    if (f.op() != Op::Atom) {
      for (std::size_t i = 0; i < f.arity(); ++i)
        stack.push_back(&f.child(i));
      continue;
    }
    auto [it, inserted] =
        found.try_emplace(f.name(), AtomInfo{f.name(), f.level(), f.annotation()});
    if (inserted)
      continue;
    AtomInfo &info = it->second;
    if (info.level != f.level())
      throw InputError("atom '" + f.name() +
                       "' is used at both instance and model level");
    if (f.annotation()) {
      if (info.annotation && !(*info.annotation == *f.annotation()))
        throw InputError("atom '" + f.name() +
                         "' has conflicting annotations");
      info.annotation = f.annotation();
    }
  }
  std::vector<AtomInfo> out;
  out.reserve(found.size());
  for (auto &[name, info] : found)
    out.push_back(std::move(info));
  return out;
}

// ---------------------------------------------------------------------------
// Frames

void check_frame(const FrameRecord &frame) {
  for (const auto &d : frame.detections) {
    if (!(d.pr >= 0.0 && d.pr <= 1.0))
      throw InputError("frame " + std::to_string(frame.frame) +
                       ": detection pr must lie in [0, 1]");
    if (!(d.bb[0] <= d.bb[2] && d.bb[1] <= d.bb[3]))
      throw InputError("frame " + std::to_string(frame.frame) +
                       ": bounding box is not well ordered");
  }
}

Trace frames_to_trace(std::span<const FrameRecord> frames,
                      const ExtractionRules &rules, const Monitor *monitor) {
  for (const auto &[name, rule] : rules) {
    if (!is_identifier(name))
      throw InputError("rule name '" + name + "' is not a valid atom name");
    if (rule.label.empty())
      throw InputError("rule '" + name + "' needs a class");
    if (rule.monitor_gated && rule.kind != AtomRule::Kind::Exists)
      throw InputError("rule '" + name +
                       "': only exists rules can be monitor-gated");
  }

  std::vector<State> states;
  states.reserve(frames.size());
  for (const auto &frame : frames) {
    check_frame(frame);
    State state;
    for (const auto &[name, rule] : rules) {
      std::size_t matches = 0;
      Truth gated = Truth::False;
      for (const auto &d : frame.detections) {
        if (d.label != rule.label || d.pr < rule.min_pr)
          continue;
        ++matches;
        if (!rule.monitor_gated)
          continue;
        VerdictKind v = VerdictKind::Uncertain;
        if (monitor && d.features)
          v = monitor->query(*d.features, d.label).kind;
        else if (d.verdict)
          v = *d.verdict;
        const Truth t = v == VerdictKind::Accept   ? Truth::True
                        : v == VerdictKind::Reject ? Truth::False
                                                   : Truth::Unknown;
        gated = gated || t;
      }
      if (rule.monitor_gated)
        state[name] = gated;
      else if (rule.kind == AtomRule::Kind::Exists)
        state[name] = matches > 0 ? Truth::True : Truth::False;
      else
        state[name] = matches >= rule.at_least ? Truth::True : Truth::False;
    }
    states.push_back(std::move(state));
  }
  return Trace(std::move(states));
}

} // namespace boxguard
