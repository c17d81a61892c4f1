#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spectraclass/fuzzy.hpp"
#include "spectraclass/spectrum.hpp"

namespace spectraclass {

/// Default m/z window when a rule file omits `option epsilon`.
inline constexpr double kDefaultEpsilon = 0.2;
inline constexpr double kDefaultNu = 0.5;

/// One membership requirement inside a class: an ion and the ramp that maps
/// its peak abundance to a truth level.
struct MembershipTerm {
  std::string name;
  IonTarget ion;
  MembershipFn fn;

  friend bool operator==(const MembershipTerm&, const MembershipTerm&) = default;
};

struct ClassRule {
  std::string code;
  std::string display_name;
  std::vector<MembershipTerm> terms;
  FuzzyExpr expr = FuzzyExpr::term("");

  const MembershipTerm* find_term(std::string_view name) const;

  friend bool operator==(const ClassRule&, const ClassRule&) = default;
};

struct RuleOptions {
  double epsilon = kDefaultEpsilon;
  double nu = kDefaultNu;
  std::vector<std::string> normalize_excluding;

  friend bool operator==(const RuleOptions&, const RuleOptions&) = default;
};

struct RuleBase {
  std::string name;
  std::vector<IonTarget> ions;
  std::vector<ClassRule> classes;
  RuleOptions options;

  const IonTarget* find_ion(std::string_view symbol) const;
  const ClassRule* find_class(std::string_view code) const;
  std::vector<std::string> class_codes() const;

  /// Ions listed under normalize_excluding, resolved to their m/z.
  std::vector<IonTarget> excluded_ions() const;

  friend bool operator==(const RuleBase&, const RuleBase&) = default;
};

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Parses the rule DSL and validates the result. Syntax errors raise
/// ParseError with line/column; semantic errors raise DuplicateName,
/// UnknownTerm, InvalidThresholds or ValidationError.
RuleBase parse_rulebase(std::string_view source);

/// Canonical DSL text; parse_rulebase(serialize(rb)) == rb.
std::string serialize(const RuleBase& rb);

/// One diagnostic per violated invariant. Unused terms are warnings.
std::vector<Diagnostic> validate(const RuleBase& rb);

/// The four-class basalt classifier (ilmenite, augite, plagioclase,
/// olivine).
RuleBase builtin_basalt();

}  // namespace spectraclass
