#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spectraclass {

/// Full scale of the relative-abundance axis after normalization.
inline constexpr double kFullScale = 100.0;

/// Absolute slack applied to every closed m/z comparison so that values
/// written with a few decimals (26.98 + 0.02 vs 27.00) compare as intended.
inline constexpr double kMzSlack = 1e-9;

struct Peak {
  double mz = 0.0;
  double abundance = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// A target ion: chemical symbol plus nominal m/z.
struct IonTarget {
  std::string symbol;
  double mz = 0.0;

  friend bool operator==(const IonTarget&, const IonTarget&) = default;
};

/// Relative abundance as a function of m/z for one desorption spot.
///
/// Construction sorts the points by m/z and merges duplicate m/z rows by
/// keeping the larger abundance, so a Spectrum is always strictly increasing
/// in m/z and non-empty.
class Spectrum {
 public:
  explicit Spectrum(std::vector<Peak> points, std::string id = {},
                    std::optional<Position> position = std::nullopt);

  std::span<const Peak> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::string& id() const noexcept { return id_; }
  const std::optional<Position>& position() const noexcept { return position_; }
  double max_abundance() const noexcept;

  Spectrum with_id(std::string id) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<Peak> points_;
  std::string id_;
  std::optional<Position> position_;
};

enum class SpectrumFormat {
  csv,  // "mz,abundance" per line
  msp,  // whitespace-separated two columns, "Key: value" metadata lines
};

/// Reads a peak list. Comment lines starting with '#' are skipped, except the
/// directives "# id: NAME" and "# position: X,Y" which fill the metadata.
Spectrum parse_spectrum(std::istream& in, SpectrumFormat format,
                        std::string id = {});
Spectrum parse_spectrum(std::string_view text, SpectrumFormat format,
                        std::string id = {});

/// Writes a spectrum in a form parse_spectrum reads back identically.
void write_spectrum(std::ostream& out, const Spectrum& s, SpectrumFormat format);

/// Rescales so the largest abundance among points not within eps of an
/// excluded ion equals kFullScale. Excluded points share the same factor.
Spectrum normalize(const Spectrum& s, std::span<const IonTarget> excluded,
                   double eps);

/// Maximum abundance with m/z in the closed window [ion.mz - eps,
/// ion.mz + eps]; 0 when the window is empty.
double peak_abundance(const Spectrum& s, const IonTarget& ion, double eps);

}  // namespace spectraclass
