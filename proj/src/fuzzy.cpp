#include "spectraclass/fuzzy.hpp"

#include <algorithm>
#include <cmath>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

namespace {

void check_thresholds(double l, double h) {
  if (!(l < h)) throw InvalidThresholds(l, h);
}

double check_unit(double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("membership value outside [0,1]: " + format_exact(a));
  }
  return a;
}

void render(const FuzzyExpr& e, std::string& out, int parent_prec) {
  // Precedence: or = 1, and = 2, not/term = 3.
  switch (e.kind()) {
    case FuzzyExpr::Kind::term:
      out += e.name();
      return;
    case FuzzyExpr::Kind::negation:
      out += "not ";
      render(e.operands().front(), out, 3);
      return;
    case FuzzyExpr::Kind::all_of:
    case FuzzyExpr::Kind::any_of: {
      const bool is_and = e.kind() == FuzzyExpr::Kind::all_of;
      const int prec = is_and ? 2 : 1;
      const bool paren = prec < parent_prec;
      if (paren) out += '(';
      bool first = true;
      for (const auto& op : e.operands()) {
        if (!first) out += is_and ? " and " : " or ";
        first = false;
        render(op, out, prec + 1);
      }
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace

double mu_high(double p, double l, double h) {
  check_thresholds(l, h);
  if (p < l) return 0.0;
  if (p >= h) return 1.0;
  return (p - l) / (h - l);
}

double mu_low(double p, double l, double h) { return 1.0 - mu_high(p, l, h); }

double f_and(double a, double b) { return check_unit(a) * check_unit(b); }

double f_or(double a, double b) {
  check_unit(a);
  check_unit(b);
  // Same value as a + b - ab, but every step is monotone under rounding and
  // f_or(a, 1) is exactly 1.
  return 1.0 - (1.0 - a) * (1.0 - b);
}

double f_not(double a) { return 1.0 - check_unit(a); }

double f_and(std::span<const double> values) {
  double acc = 1.0;
  for (double v : values) acc = f_and(acc, v);
  return acc;
}

double f_or(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc = f_or(acc, v);
  return acc;
}

MembershipFn MembershipFn::make(Polarity polarity, double l, double h) {
  check_thresholds(l, h);
  return MembershipFn{polarity, l, h};
}

FuzzyExpr FuzzyExpr::term(std::string name) {
  FuzzyExpr e;
  e.kind_ = Kind::term;
  e.name_ = std::move(name);
  return e;
}

FuzzyExpr FuzzyExpr::negate(FuzzyExpr operand) {
  FuzzyExpr e;
  e.kind_ = Kind::negation;
  e.operands_.push_back(std::move(operand));
  return e;
}

FuzzyExpr FuzzyExpr::all_of(std::vector<FuzzyExpr> operands) {
  if (operands.empty()) throw DomainError("'and' needs at least one operand");
  if (operands.size() == 1) return std::move(operands.front());
  FuzzyExpr e;
  e.kind_ = Kind::all_of;
  for (auto& op : operands) {
    if (op.kind_ == Kind::all_of) {
      for (auto& inner : op.operands_) e.operands_.push_back(std::move(inner));
    } else {
      e.operands_.push_back(std::move(op));
    }
  }
  return e;
}

FuzzyExpr FuzzyExpr::any_of(std::vector<FuzzyExpr> operands) {
  if (operands.empty()) throw DomainError("'or' needs at least one operand");
  if (operands.size() == 1) return std::move(operands.front());
  FuzzyExpr e;
  e.kind_ = Kind::any_of;
  for (auto& op : operands) {
    if (op.kind_ == Kind::any_of) {
      for (auto& inner : op.operands_) e.operands_.push_back(std::move(inner));
    } else {
      e.operands_.push_back(std::move(op));
    }
  }
  return e;
}

std::vector<std::string> FuzzyExpr::term_names() const {
  std::vector<std::string> names;
  auto visit = [&names](const FuzzyExpr& e, auto& self) -> void {
    if (e.kind() == Kind::term) {
      if (std::find(names.begin(), names.end(), e.name()) == names.end()) {
        names.push_back(e.name());
      }
      return;
    }
    for (const auto& op : e.operands()) self(op, self);
  };
  visit(*this, visit);
  return names;
}

std::string FuzzyExpr::to_string() const {
  std::string out;
  render(*this, out, 0);
  return out;
}

double eval_expr(const FuzzyExpr& expr, const TermEnv& env) {
  return eval_expr_with(expr, [&env](std::string_view name) {
    const auto it = env.find(name);
    if (it == env.end()) throw UnknownTerm(std::string(name));
    return it->second;
  });
}

}  // namespace spectraclass
