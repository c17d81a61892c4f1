#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectraclass/classify.hpp"

namespace spectraclass {

enum class Topology { rectangular, hexagonal };

std::string_view to_string(Topology t);
/// Accepts "rectangular"/"rect" and "hexagonal"/"hex".
std::optional<Topology> parse_topology(std::string_view text);

/// Spots laid out row-major: index = row * cols + col. Hexagonal grids use
/// odd-row offset addressing (odd rows shifted half a spot to the right).
struct SampleGrid {
  Topology topology = Topology::rectangular;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double spacing = 1.0;
  std::vector<std::string> class_codes;
  std::vector<MembershipVector> spots;
  std::vector<std::optional<Position>> positions;  // optional, per spot

  std::size_t size() const noexcept { return rows * cols; }

  /// Checks dims against spot count and that every spot carries the same
  /// class set; throws DomainError otherwise.
  void check() const;

  /// Coordinates of a spot, from its recorded position or from the layout.
  Position position_of(std::size_t index) const;
};

/// In-bounds neighbours: 8 (Moore) for rectangular grids, 6 for hexagonal.
std::vector<std::size_t> neighbors(const SampleGrid& grid, std::size_t index);

/// Own membership plus the mean of the neighbours' raw memberships; falls
/// back to the raw value when the spot has no neighbours. Range [0,2].
double smoothed_membership(const SampleGrid& grid, std::size_t index,
                           std::string_view class_code);

struct SpotLabel {
  std::string label;
  /// Winning membership. For neighbour-assigned spots this is the smoothed
  /// value and may exceed 1.
  double confidence = 0.0;
  bool neighbor_assigned = false;

  friend bool operator==(const SpotLabel&, const SpotLabel&) = default;
};

struct ClassificationMap {
  std::vector<SpotLabel> spots;

  friend bool operator==(const ClassificationMap&, const ClassificationMap&) = default;
};

struct ReclassifyOptions {
  /// When set, a sub-nu spot whose best smoothed membership stays below the
  /// floor remains UNK. Off by default.
  std::optional<double> smoothed_floor;
};

/// Plain thresholded argmax per spot, no neighbour information.
ClassificationMap hard_map(const SampleGrid& grid, double nu);

/// Serial reference: confident spots keep their label, the rest take the
/// argmax of the smoothed memberships (one pass over raw values).
ClassificationMap reclassify_map_serial(const SampleGrid& grid, double nu,
                                        const ReclassifyOptions& options = {});

/// OpenMP version of reclassify_map_serial; identical output.
ClassificationMap reclassify_map(const SampleGrid& grid, double nu,
                                 const ReclassifyOptions& options = {}, int workers = 1);

// ---------------------------------------------------------------------------
// I/O

/// Reads a classify batch CSV annotated with `# topology:`, `# rows:`,
/// `# cols:` (and optionally `# spacing:`) header lines. Rows are taken in
/// file order as the row-major spot sequence. ERROR rows become spots with
/// zero membership in every class. A missing topology is an error unless
/// `topology_override` is given.
SampleGrid read_grid_csv(std::istream& in,
                         std::optional<Topology> topology_override = std::nullopt);

/// `x,y,label,confidence,neighbor_assigned`
void write_map_csv(std::ostream& out, const SampleGrid& grid, const ClassificationMap& map);

/// `x,y,mu_<CODE>...` with the raw memberships.
void write_membership_csv(std::ostream& out, const SampleGrid& grid);

using Rgb = std::array<std::uint8_t, 3>;

/// Class code -> colour. UNK (and ERROR) always render black.
struct Palette {
  std::map<std::string, Rgb, std::less<>> colors;
  Rgb fallback{128, 128, 128};

  Rgb color_for(std::string_view label) const;

  /// Lines of `CODE R G B`; '#' comments allowed.
  static Palette parse(std::istream& in);
  static Palette basalt();
};

/// Binary P6 image, one pixel per spot. Hexagonal offsets are not drawn.
void write_ppm(std::ostream& out, std::size_t rows, std::size_t cols,
               const std::vector<Rgb>& pixels);

std::vector<Rgb> render_labels(const ClassificationMap& map, const Palette& palette);

/// Grey levels, 0 -> black, 1 -> white.
std::vector<Rgb> render_membership(const SampleGrid& grid, std::string_view class_code);

}  // namespace spectraclass
