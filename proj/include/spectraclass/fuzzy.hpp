#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spectraclass {

/// Piecewise-linear ramp: 0 below l, (p - l) / (h - l) on [l, h), 1 at and
/// above h. Throws InvalidThresholds unless l < h.
double mu_high(double p, double l, double h);

/// Exactly 1 - mu_high(p, l, h).
double mu_low(double p, double l, double h);

// Product t-norm, probabilistic-sum s-norm and standard negation. Inputs
// must lie in [0,1]; anything else (including NaN) throws DomainError.
double f_and(double a, double b);
double f_or(double a, double b);
double f_not(double a);
double f_and(std::span<const double> values);
double f_or(std::span<const double> values);

enum class Polarity { high, low };

struct MembershipFn {
  Polarity polarity = Polarity::high;
  double l = 0.0;
  double h = 1.0;

  /// Throws InvalidThresholds unless l < h.
  static MembershipFn make(Polarity polarity, double l, double h);

  double operator()(double p) const {
    return polarity == Polarity::high ? mu_high(p, l, h) : mu_low(p, l, h);
  }

  friend bool operator==(const MembershipFn&, const MembershipFn&) = default;
};

/// Logic expression over named terms. And/Or nodes are kept flat: building
/// an And whose operand is itself an And splices the grandchildren in, so
/// structurally equal formulas compare equal regardless of grouping.
class FuzzyExpr {
 public:
  enum class Kind { term, all_of, any_of, negation };

  static FuzzyExpr term(std::string name);
  static FuzzyExpr all_of(std::vector<FuzzyExpr> operands);
  static FuzzyExpr any_of(std::vector<FuzzyExpr> operands);
  static FuzzyExpr negate(FuzzyExpr operand);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  std::span<const FuzzyExpr> operands() const noexcept { return operands_; }

  /// Term names in first-appearance order, without duplicates.
  std::vector<std::string> term_names() const;

  /// Canonical text in the rule DSL expression syntax.
  std::string to_string() const;

  friend bool operator==(const FuzzyExpr&, const FuzzyExpr&) = default;

 private:
  FuzzyExpr() = default;

  Kind kind_ = Kind::term;
  std::string name_;
  std::vector<FuzzyExpr> operands_;
};

using TermEnv = std::map<std::string, double, std::less<>>;

/// Recursive evaluation with the operators above; UnknownTerm when a term is
/// missing from env.
double eval_expr(const FuzzyExpr& expr, const TermEnv& env);

/// Same evaluation with a caller-supplied lookup `double(std::string_view)`.
template <class Lookup>
double eval_expr_with(const FuzzyExpr& expr, Lookup&& lookup) {
  switch (expr.kind()) {
    case FuzzyExpr::Kind::term:
      return lookup(std::string_view(expr.name()));
    case FuzzyExpr::Kind::negation:
      return f_not(eval_expr_with(expr.operands().front(), lookup));
    case FuzzyExpr::Kind::all_of: {
      double acc = 1.0;
      for (const auto& op : expr.operands()) acc = f_and(acc, eval_expr_with(op, lookup));
      return acc;
    }
    case FuzzyExpr::Kind::any_of: {
      double acc = 0.0;
      for (const auto& op : expr.operands()) acc = f_or(acc, eval_expr_with(op, lookup));
      return acc;
    }
  }
  return 0.0;
}

}  // namespace spectraclass
