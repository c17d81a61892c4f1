#include "spectraclass/rulebase.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

const MembershipTerm* ClassRule::find_term(std::string_view name) const {
  for (const auto& t : terms) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const IonTarget* RuleBase::find_ion(std::string_view symbol) const {
  for (const auto& ion : ions) {
    if (ion.symbol == symbol) return &ion;
  }
  return nullptr;
}

const ClassRule* RuleBase::find_class(std::string_view code) const {
  for (const auto& c : classes) {
    if (c.code == code) return &c;
  }
  return nullptr;
}

std::vector<std::string> RuleBase::class_codes() const {
  std::vector<std::string> codes;
  codes.reserve(classes.size());
  for (const auto& c : classes) codes.push_back(c.code);
  return codes;
}

std::vector<IonTarget> RuleBase::excluded_ions() const {
  std::vector<IonTarget> out;
  for (const auto& symbol : options.normalize_excluding) {
    if (const auto* ion = find_ion(symbol)) out.push_back(*ion);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { ident, number, string, punct, end };

struct Token {
  Tok type = Tok::end;
  std::string text;
  double number = 0.0;
  std::size_t line = 0;
  std::size_t column = 0;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        t.type = Tok::end;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (is_ident_start(c)) {
        const auto start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        t.type = Tok::ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                 c == '+') {
        const auto start = pos_;
        advance();
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                ((src_[pos_] == '-' || src_[pos_] == '+') &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')))) {
          advance();
        }
        t.type = Tok::number;
        t.text = std::string(src_.substr(start, pos_ - start));
        if (!parse_double(t.text, t.number)) {
          throw ParseError("malformed number", t.line, t.column, t.text);
        }
      } else if (c == '"') {
        advance();
        t.type = Tok::string;
        for (;;) {
          if (pos_ >= src_.size() || src_[pos_] == '\n') {
            throw ParseError("unterminated string", t.line, t.column, "\"" + t.text);
          }
          char ch = src_[pos_];
          advance();
          if (ch == '"') break;
          if (ch == '\\' && pos_ < src_.size()) {
            ch = src_[pos_];
            advance();
          }
          t.text += ch;
        }
      } else if (std::string_view("{}()[],=").find(c) != std::string_view::npos) {
        advance();
        t.type = Tok::punct;
        t.text = std::string(1, c);
      } else {
        throw ParseError("unexpected character", t.line, t.column, std::string(1, c));
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

bool is_reserved(std::string_view word) {
  return word == "and" || word == "or" || word == "not";
}

struct PendingIon {
  std::size_t class_index;
  std::size_t term_index;
  Token at;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  RuleBase run() {
    expect_keyword("rulebase");
    rb_.name = expect(Tok::string, "rule base name").text;
    while (peek().type != Tok::end) {
      const Token& t = peek();
      if (is_keyword(t, "option")) {
        parse_option();
      } else if (is_keyword(t, "ion")) {
        parse_ion();
      } else if (is_keyword(t, "class")) {
        parse_class();
      } else {
        fail("expected 'option', 'ion' or 'class'", t);
      }
    }
    resolve_ions();
    return std::move(rb_);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] static void fail(const std::string& what, const Token& t) {
    throw ParseError(what, t.line, t.column, t.type == Tok::end ? "<eof>" : t.text);
  }

  static bool is_keyword(const Token& t, std::string_view word) {
    return t.type == Tok::ident && t.text == word;
  }
  static bool is_punct(const Token& t, char c) {
    return t.type == Tok::punct && t.text[0] == c;
  }

  Token expect(Tok type, const char* what) {
    if (peek().type != type) fail(std::string("expected ") + what, peek());
    return next();
  }
  void expect_keyword(std::string_view word) {
    if (!is_keyword(peek(), word)) fail("expected '" + std::string(word) + "'", peek());
    next();
  }
  void expect_punct(char c) {
    if (!is_punct(peek(), c)) fail(std::string("expected '") + c + "'", peek());
    next();
  }
  Token expect_name(const char* what) {
    const Token t = expect(Tok::ident, what);
    if (is_reserved(t.text)) fail("reserved word used as a name", t);
    return t;
  }

  void parse_option() {
    next();
    const Token name = expect(Tok::ident, "option name");
    expect_punct('=');
    if (!seen_options_.insert(name.text).second) throw DuplicateName("option " + name.text);
    if (name.text == "epsilon" || name.text == "nu") {
      const double v = expect(Tok::number, "number").number;
      (name.text == "epsilon" ? rb_.options.epsilon : rb_.options.nu) = v;
    } else if (name.text == "normalize_excluding") {
      expect_punct('[');
      rb_.options.normalize_excluding.push_back(expect(Tok::ident, "ion symbol").text);
      while (is_punct(peek(), ',')) {
        next();
        rb_.options.normalize_excluding.push_back(expect(Tok::ident, "ion symbol").text);
      }
      expect_punct(']');
    } else {
      fail("unknown option", name);
    }
  }

  void parse_ion() {
    next();
    const Token sym = expect_name("ion symbol");
    expect_punct('=');
    const double mz = expect(Tok::number, "m/z").number;
    if (rb_.find_ion(sym.text)) throw DuplicateName(sym.text);
    rb_.ions.push_back(IonTarget{sym.text, mz});
  }

  void parse_class() {
    next();
    ClassRule rule;
    const Token code = expect_name("class code");
    rule.code = code.text;
    if (rb_.find_class(rule.code)) throw DuplicateName(rule.code);
    rule.display_name = expect(Tok::string, "display name").text;
    expect_punct('{');
    const std::size_t class_index = rb_.classes.size();
    while (is_keyword(peek(), "term")) {
      next();
      const Token tname = expect_name("term name");
      if (rule.find_term(tname.text)) throw DuplicateName(rule.code + "." + tname.text);
      expect_punct('=');
      const Token shape = expect(Tok::ident, "'high' or 'low'");
      Polarity polarity;
      if (shape.text == "high") {
        polarity = Polarity::high;
      } else if (shape.text == "low") {
        polarity = Polarity::low;
      } else if (shape.text == "medium") {
        fail("'medium' membership is reserved and not supported", shape);
      } else {
        fail("expected 'high' or 'low'", shape);
      }
      expect_punct('(');
      const Token ion = expect(Tok::ident, "ion symbol");
      expect_punct(',');
      expect_keyword("l");
      expect_punct('=');
      const double l = expect(Tok::number, "number").number;
      expect_punct(',');
      expect_keyword("h");
      expect_punct('=');
      const double h = expect(Tok::number, "number").number;
      expect_punct(')');
      pending_.push_back({class_index, rule.terms.size(), ion});
      rule.terms.push_back(
          MembershipTerm{tname.text, IonTarget{ion.text, 0.0}, MembershipFn::make(polarity, l, h)});
    }
    expect_keyword("expr");
    expect_punct('=');
    rule.expr = parse_or();
    expect_punct('}');
    for (const auto& name : rule.expr.term_names()) {
      if (!rule.find_term(name)) throw UnknownTerm(name);
    }
    rb_.classes.push_back(std::move(rule));
  }

  FuzzyExpr parse_or() {
    std::vector<FuzzyExpr> ops;
    ops.push_back(parse_and());
    while (is_keyword(peek(), "or")) {
      next();
      ops.push_back(parse_and());
    }
    return FuzzyExpr::any_of(std::move(ops));
  }

  FuzzyExpr parse_and() {
    std::vector<FuzzyExpr> ops;
    ops.push_back(parse_unary());
    while (is_keyword(peek(), "and")) {
      next();
      ops.push_back(parse_unary());
    }
    return FuzzyExpr::all_of(std::move(ops));
  }

  FuzzyExpr parse_unary() {
    if (is_keyword(peek(), "not")) {
      next();
      return FuzzyExpr::negate(parse_unary());
    }
    if (is_punct(peek(), '(')) {
      next();
      auto inner = parse_or();
      expect_punct(')');
      return inner;
    }
    return FuzzyExpr::term(expect_name("term name").text);
  }

  void resolve_ions() {
    for (const auto& p : pending_) {
      const auto* ion = rb_.find_ion(p.at.text);
      if (!ion) fail("undeclared ion", p.at);
      rb_.classes[p.class_index].terms[p.term_index].ion = *ion;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  RuleBase rb_;
  std::set<std::string> seen_options_;
  std::vector<PendingIon> pending_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

}  // namespace

RuleBase parse_rulebase(std::string_view source) {
  RuleBase rb = Parser(Lexer(source).run()).run();
  std::string errors;
  for (const auto& d : validate(rb)) {
    if (d.severity != Diagnostic::Severity::error) continue;
    if (!errors.empty()) errors += "; ";
    errors += d.message;
  }
  if (!errors.empty()) throw ValidationError(errors);
  return rb;
}

std::string serialize(const RuleBase& rb) {
  std::string out = "rulebase " + quote(rb.name) + "\n\n";
  out += "option epsilon = " + format_exact(rb.options.epsilon) + "\n";
  out += "option nu = " + format_exact(rb.options.nu) + "\n";
  if (!rb.options.normalize_excluding.empty()) {
    out += "option normalize_excluding = [";
    for (std::size_t i = 0; i < rb.options.normalize_excluding.size(); ++i) {
      if (i) out += ", ";
      out += rb.options.normalize_excluding[i];
    }
    out += "]\n";
  }
  out += "\n";
  for (const auto& ion : rb.ions) {
    out += "ion " + ion.symbol + " = " + format_exact(ion.mz) + "\n";
  }
  for (const auto& c : rb.classes) {
    out += "\nclass " + c.code + " " + quote(c.display_name) + " {\n";
    for (const auto& t : c.terms) {
      out += "  term " + t.name + " = " +
             (t.fn.polarity == Polarity::high ? "high" : "low") + "(" + t.ion.symbol +
             ", l=" + format_exact(t.fn.l) + ", h=" + format_exact(t.fn.h) + ")\n";
    }
    out += "  expr = " + c.expr.to_string() + "\n}\n";
  }
  return out;
}

std::vector<Diagnostic> validate(const RuleBase& rb) {
  std::vector<Diagnostic> out;
  auto error = [&out](std::string msg) {
    out.push_back({Diagnostic::Severity::error, std::move(msg)});
  };
  auto warning = [&out](std::string msg) {
    out.push_back({Diagnostic::Severity::warning, std::move(msg)});
  };

  std::set<std::string> symbols;
  for (const auto& ion : rb.ions) {
    if (!is_identifier(ion.symbol)) error("ion symbol '" + ion.symbol + "' is not an identifier");
    if (!symbols.insert(ion.symbol).second) error("duplicate ion '" + ion.symbol + "'");
    if (!(ion.mz > 0.0) || !std::isfinite(ion.mz)) {
      error("ion '" + ion.symbol + "' has non-positive m/z");
    }
  }
  if (!(rb.options.epsilon > 0.0) || !std::isfinite(rb.options.epsilon)) {
    error("epsilon must be positive (got " + format_exact(rb.options.epsilon) + ")");
  }
  if (!(rb.options.nu >= 0.0 && rb.options.nu <= 1.0)) {
    error("nu out of range [0,1] (got " + format_exact(rb.options.nu) + ")");
  }
  for (const auto& sym : rb.options.normalize_excluding) {
    if (!rb.find_ion(sym)) error("normalize_excluding names undeclared ion '" + sym + "'");
  }
  if (rb.classes.empty()) error("rule base declares no classes");

  std::set<std::string> codes;
  for (const auto& c : rb.classes) {
    if (!is_identifier(c.code)) error("class code '" + c.code + "' is not an identifier");
    if (c.code == "UNK") error("class code 'UNK' is reserved for unknown spectra");
    if (!codes.insert(c.code).second) error("duplicate class '" + c.code + "'");

    std::set<std::string> term_names;
    for (const auto& t : c.terms) {
      const std::string where = c.code + "." + t.name;
      if (!term_names.insert(t.name).second) error("duplicate term '" + where + "'");
      if (!(t.fn.l < t.fn.h)) error("term '" + where + "' requires l < h");
      const auto* ion = rb.find_ion(t.ion.symbol);
      if (!ion) {
        error("term '" + where + "' uses undeclared ion '" + t.ion.symbol + "'");
      } else if (ion->mz != t.ion.mz) {
        error("term '" + where + "' disagrees with ion '" + t.ion.symbol + "' on m/z");
      }
    }
    const auto used = c.expr.term_names();
    for (const auto& name : used) {
      if (!c.find_term(name)) error("class '" + c.code + "' references unknown term '" + name + "'");
    }
    for (const auto& t : c.terms) {
      if (std::find(used.begin(), used.end(), t.name) == used.end()) {
        warning("class '" + c.code + "' declares unused term '" + t.name + "'");
      }
    }
  }
  return out;
}

RuleBase builtin_basalt() {
  RuleBase rb;
  rb.name = "basalt";
  rb.options.epsilon = kDefaultEpsilon;
  rb.options.nu = 0.5;

  const IonTarget mg{"Mg", 24.312};
  const IonTarget al{"Al", 26.982};
  const IonTarget ca{"Ca", 39.95};
  const IonTarget ti{"Ti", 47.95};
  const IonTarget mn{"Mn", 54.938};
  const IonTarget fe{"Fe", 55.954};
  rb.ions = {mg, al, ca, ti, mn, fe};

  using E = FuzzyExpr;
  auto high = [](const char* name, const IonTarget& ion, double l, double h) {
    return MembershipTerm{name, ion, MembershipFn::make(Polarity::high, l, h)};
  };
  // A "~X" row is a single low-abundance ramp; the OLV expression's explicit
  // negation refers to that same ramp, not to a second complement.
  auto low = [](const char* name, const IonTarget& ion, double l, double h) {
    return MembershipTerm{name, ion, MembershipFn::make(Polarity::low, l, h)};
  };

  ClassRule ilm;
  ilm.code = "ILM";
  ilm.display_name = "Ilmenite";
  ilm.terms = {low("nal", al, 0.5, 15), high("ti", ti, 1, 17), high("fe", fe, 1, 40)};
  ilm.expr = E::all_of({E::term("fe"), E::term("ti"), E::term("nal")});

  ClassRule agt;
  agt.code = "AGT";
  agt.display_name = "Augite";
  agt.terms = {high("ca", ca, 50, 80), low("nti", ti, 1, 17), high("fe", fe, 1, 30)};
  agt.expr = E::all_of({E::term("fe"), E::term("nti"), E::term("ca")});

  ClassRule plg;
  plg.code = "PLG";
  plg.display_name = "Plagioclase";
  plg.terms = {high("al", al, 0.5, 15), low("nti", ti, 1, 17), low("nfe", fe, 10, 40)};
  plg.expr = E::all_of({E::term("al"), E::term("nfe"), E::term("nti")});

  ClassRule olv;
  olv.code = "OLV";
  olv.display_name = "Olivine";
  olv.terms = {high("mg", mg, 1, 50), low("nal", al, 0.5, 15), low("nti", ti, 1, 17),
               high("mn", mn, 10, 40), high("fe", fe, 10, 40)};
  olv.expr = E::all_of({E::any_of({E::term("mg"), E::term("mn"), E::term("fe")}),
                        E::term("nti"), E::term("nal")});

  rb.classes = {std::move(ilm), std::move(agt), std::move(plg), std::move(olv)};
  return rb;
}

}  // namespace spectraclass
