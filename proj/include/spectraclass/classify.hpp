#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spectraclass/rulebase.hpp"
#include "spectraclass/spectrum.hpp"

namespace spectraclass {

inline constexpr std::string_view kUnknownLabel = "UNK";

struct ClassMembership {
  std::string code;
  double mu = 0.0;

  friend bool operator==(const ClassMembership&, const ClassMembership&) = default;
};

/// Per-class membership in rule-base declaration order, plus the derived
/// unknown membership 1 - max.
struct MembershipVector {
  std::vector<ClassMembership> values;
  double unk = 1.0;

  /// Builds a vector and derives unk from the values.
  static MembershipVector from_values(std::vector<ClassMembership> values);

  double max() const noexcept;
  std::optional<double> find(std::string_view code) const;

  friend bool operator==(const MembershipVector&, const MembershipVector&) = default;
};

struct Classification {
  std::string label;
  double confidence = 0.0;

  bool is_unknown() const { return label == kUnknownLabel; }

  friend bool operator==(const Classification&, const Classification&) = default;
};

struct HardenOptions {
  /// When set, a spot where two or more classes reach this membership is
  /// labelled UNK even if the best one clears nu. Off by default.
  std::optional<double> ambiguity_threshold;
};

/// Normalizes with the rule base's exclusion list and epsilon.
Spectrum prepare(const Spectrum& raw, const RuleBase& rb);

/// Evaluates every class of rb on an already normalized spectrum.
MembershipVector memberships(const Spectrum& normalized, const RuleBase& rb);

/// Thresholded argmax. Ties go to the class declared first; the nu boundary
/// is inclusive.
Classification harden(const MembershipVector& mv, double nu,
                      const HardenOptions& options = {});

/// Index of the argmax class (first on ties); NoClasses when empty.
std::size_t argmax_index(const MembershipVector& mv);

// ---------------------------------------------------------------------------
// Batch processing

class SpectrumSource {
 public:
  static SpectrumSource from_file(std::filesystem::path path,
                                  std::optional<SpectrumFormat> format = std::nullopt);
  static SpectrumSource from_text(std::string id, std::string text,
                                  SpectrumFormat format = SpectrumFormat::csv);

  const std::string& id() const noexcept { return id_; }

  /// Reads and parses the source; file I/O errors surface as Error.
  Spectrum load() const;

 private:
  std::string id_;
  SpectrumFormat format_ = SpectrumFormat::csv;
  std::variant<std::filesystem::path, std::string> origin_;
};

/// Picks msp for .msp/.txt extensions, csv otherwise.
SpectrumFormat format_for_path(const std::filesystem::path& path);

struct BatchRecord {
  std::string id;
  std::optional<Position> position;
  MembershipVector memberships;
  Classification classification;
  std::string error;  // non-empty for a failed item

  bool ok() const noexcept { return error.empty(); }

  friend bool operator==(const BatchRecord&, const BatchRecord&) = default;
};

struct BatchOptions {
  HardenOptions harden;
};

/// Classifies one source; failures are captured in the record.
BatchRecord classify_one(const SpectrumSource& source, const RuleBase& rb,
                         const BatchOptions& options = {});

/// Reference implementation: one item after another.
std::vector<BatchRecord> classify_batch_serial(const std::vector<SpectrumSource>& sources,
                                               const RuleBase& rb,
                                               const BatchOptions& options = {});

/// OpenMP implementation with `workers` threads. Output order always matches
/// input order and is identical to classify_batch_serial.
std::vector<BatchRecord> classify_batch(const std::vector<SpectrumSource>& sources,
                                        const RuleBase& rb, int workers,
                                        const BatchOptions& options = {});

/// Batch CSV: header `id,x,y,label,confidence,mu_<CODE>...` then one row per
/// record, numbers at 6 significant digits. Failed items carry label ERROR
/// and empty numeric fields.
void write_batch_csv(std::ostream& out, const std::vector<BatchRecord>& records,
                     const std::vector<std::string>& class_codes);

inline constexpr std::string_view kErrorLabel = "ERROR";

}  // namespace spectraclass
