#include "spectraclass/spatial.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

std::string_view to_string(Topology t) {
  return t == Topology::rectangular ? "rectangular" : "hexagonal";
}

std::optional<Topology> parse_topology(std::string_view text) {
  text = trim(text);
  if (text == "rectangular" || text == "rect") return Topology::rectangular;
  if (text == "hexagonal" || text == "hex") return Topology::hexagonal;
  return std::nullopt;
}

void SampleGrid::check() const {
  if (rows == 0 || cols == 0) throw DomainError("grid dimensions must be positive");
  if (spots.size() != size()) {
    throw DomainError("grid expects " + std::to_string(size()) + " spots, got " +
                      std::to_string(spots.size()));
  }
  if (!positions.empty() && positions.size() != spots.size()) {
    throw DomainError("position list does not match spot count");
  }
  if (class_codes.empty()) throw NoClasses();
  for (const auto& mv : spots) {
    if (mv.values.size() != class_codes.size()) {
      throw DomainError("spot membership vector does not match the grid's class set");
    }
    for (std::size_t k = 0; k < class_codes.size(); ++k) {
      if (mv.values[k].code != class_codes[k]) {
        throw DomainError("spot membership vector does not match the grid's class set");
      }
    }
  }
}

Position SampleGrid::position_of(std::size_t index) const {
  if (index < positions.size() && positions[index]) return *positions[index];
  const auto row = static_cast<double>(index / cols);
  const auto col = static_cast<double>(index % cols);
  if (topology == Topology::rectangular) return {col * spacing, row * spacing};
  const double shift = (index / cols) % 2 == 1 ? 0.5 : 0.0;
  return {(col + shift) * spacing, row * spacing * std::sqrt(3.0) / 2.0};
}

std::vector<std::size_t> neighbors(const SampleGrid& grid, std::size_t index) {
  if (index >= grid.size()) throw BadIndex(index);
  const auto rows = static_cast<std::ptrdiff_t>(grid.rows);
  const auto cols = static_cast<std::ptrdiff_t>(grid.cols);
  const auto r = static_cast<std::ptrdiff_t>(index / grid.cols);
  const auto c = static_cast<std::ptrdiff_t>(index % grid.cols);

  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> offsets;
  if (grid.topology == Topology::rectangular) {
    offsets = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
  } else if (r % 2 == 0) {
    offsets = {{-1, -1}, {-1, 0}, {0, -1}, {0, 1}, {1, -1}, {1, 0}};
  } else {
    offsets = {{-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, 0}, {1, 1}};
  }

  std::vector<std::size_t> out;
  out.reserve(offsets.size());
  for (const auto& [dr, dc] : offsets) {
    const auto nr = r + dr;
    const auto nc = c + dc;
    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
    out.push_back(static_cast<std::size_t>(nr * cols + nc));
  }
  return out;
}

namespace {

std::size_t class_index(const SampleGrid& grid, std::string_view code) {
  for (std::size_t k = 0; k < grid.class_codes.size(); ++k) {
    if (grid.class_codes[k] == code) return k;
  }
  throw DomainError("grid has no class '" + std::string(code) + "'");
}

double smoothed_at(const SampleGrid& grid, std::size_t index,
                   const std::vector<std::size_t>& nbrs, std::size_t k) {
  const double own = grid.spots[index].values[k].mu;
  if (nbrs.empty()) return own;
  double sum = 0.0;
  for (auto j : nbrs) sum += grid.spots[j].values[k].mu;
  return own + sum / static_cast<double>(nbrs.size());
}

SpotLabel label_spot(const SampleGrid& grid, std::size_t index, double nu,
                     const ReclassifyOptions& options) {
  const auto& mv = grid.spots[index];
  const auto best = argmax_index(mv);
  if (mv.values[best].mu >= nu) return {mv.values[best].code, mv.values[best].mu, false};

  const auto nbrs = neighbors(grid, index);
  std::size_t winner = 0;
  double top = -1.0;
  for (std::size_t k = 0; k < grid.class_codes.size(); ++k) {
    const double v = smoothed_at(grid, index, nbrs, k);
    if (v > top) {
      top = v;
      winner = k;
    }
  }
  if (options.smoothed_floor && top < *options.smoothed_floor) {
    return {std::string(kUnknownLabel), mv.unk, false};
  }
  return {grid.class_codes[winner], top, true};
}

}  // namespace

double smoothed_membership(const SampleGrid& grid, std::size_t index,
                           std::string_view class_code) {
  const auto nbrs = neighbors(grid, index);
  return smoothed_at(grid, index, nbrs, class_index(grid, class_code));
}

ClassificationMap hard_map(const SampleGrid& grid, double nu) {
  grid.check();
  ClassificationMap map;
  map.spots.reserve(grid.size());
  for (const auto& mv : grid.spots) {
    const auto c = harden(mv, nu);
    map.spots.push_back({c.label, c.confidence, false});
  }
  return map;
}

ClassificationMap reclassify_map_serial(const SampleGrid& grid, double nu,
                                        const ReclassifyOptions& options) {
  grid.check();
  ClassificationMap map;
  map.spots.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    map.spots.push_back(label_spot(grid, i, nu, options));
  }
  return map;
}

ClassificationMap reclassify_map(const SampleGrid& grid, double nu,
                                 const ReclassifyOptions& options, int workers) {
  if (workers < 1) throw DomainError("workers must be at least 1");
  grid.check();
  ClassificationMap map;
  map.spots.resize(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  // Reads only the raw spot memberships, so spots are independent.
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    map.spots[idx] = label_spot(grid, idx, nu, options);
  }
  return map;
}

// ---------------------------------------------------------------------------
// I/O

namespace {

std::size_t parse_count(std::string_view text, std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(text, v) || v < 1.0 || v != std::floor(v)) {
    throw ParseError("expected a positive integer", line_no, 0, std::string(text));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

SampleGrid read_grid_csv(std::istream& in, std::optional<Topology> topology_override) {
  SampleGrid grid;
  std::optional<Topology> topology;
  std::optional<std::size_t> rows, cols;
  std::vector<std::string> header;
  std::vector<std::size_t> mu_columns;
  std::size_t label_col = 0, x_col = 0, y_col = 0;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, colon));
      const auto value = trim(body.substr(colon + 1));
      if (key == "topology") {
        topology = parse_topology(value);
        if (!topology) throw ParseError("unknown topology", line_no, 0, std::string(value));
      } else if (key == "rows") {
        rows = parse_count(value, line_no);
      } else if (key == "cols") {
        cols = parse_count(value, line_no);
      } else if (key == "spacing") {
        if (!parse_double(value, grid.spacing) || !(grid.spacing > 0.0)) {
          throw ParseError("spacing must be a positive number", line_no, 0, std::string(value));
        }
      }
      continue;
    }
    auto fields = split_csv(line);
    if (header.empty()) {
      header = std::move(fields);
      auto find = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
          throw ParseError("missing column '" + std::string(name) + "'", line_no);
        }
        return static_cast<std::size_t>(it - header.begin());
      };
      label_col = find("label");
      x_col = find("x");
      y_col = find("y");
      for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k].rfind("mu_", 0) == 0) {
          mu_columns.push_back(k);
          grid.class_codes.push_back(header[k].substr(3));
        }
      }
      if (mu_columns.empty()) throw ParseError("no mu_<CLASS> columns", line_no);
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields", line_no);
    }
    std::vector<ClassMembership> values;
    const bool failed = fields[label_col] == kErrorLabel;
    for (std::size_t k = 0; k < mu_columns.size(); ++k) {
      double mu = 0.0;
      if (!failed && (!parse_double(fields[mu_columns[k]], mu) || mu < 0.0 || mu > 1.0)) {
        throw ParseError("membership must be a number in [0,1]", line_no, 0,
                         fields[mu_columns[k]]);
      }
      values.push_back({grid.class_codes[k], mu});
    }
    grid.spots.push_back(MembershipVector::from_values(std::move(values)));
    Position p;
    if (parse_double(fields[x_col], p.x) && parse_double(fields[y_col], p.y)) {
      grid.positions.emplace_back(p);
    } else {
      grid.positions.emplace_back(std::nullopt);
    }
  }

  if (topology_override) topology = topology_override;
  if (!topology) throw ParseError("missing '# topology:' header", line_no);
  if (!rows || !cols) throw ParseError("missing '# rows:' or '# cols:' header", line_no);
  grid.topology = *topology;
  grid.rows = *rows;
  grid.cols = *cols;
  grid.check();
  return grid;
}

void write_map_csv(std::ostream& out, const SampleGrid& grid, const ClassificationMap& map) {
  out << "x,y,label,confidence,neighbor_assigned\n";
  for (std::size_t i = 0; i < map.spots.size(); ++i) {
    const auto p = grid.position_of(i);
    const auto& s = map.spots[i];
    out << format_g6(p.x) << ',' << format_g6(p.y) << ',' << s.label << ','
        << format_g6(s.confidence) << ',' << (s.neighbor_assigned ? "true" : "false") << '\n';
  }
}

void write_membership_csv(std::ostream& out, const SampleGrid& grid) {
  out << "x,y";
  for (const auto& code : grid.class_codes) out << ",mu_" << code;
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.position_of(i);
    out << format_g6(p.x) << ',' << format_g6(p.y);
    for (const auto& v : grid.spots[i].values) out << ',' << format_g6(v.mu);
    out << '\n';
  }
}

Rgb Palette::color_for(std::string_view label) const {
  if (label == kUnknownLabel || label == kErrorLabel) return {0, 0, 0};
  const auto it = colors.find(label);
  return it == colors.end() ? fallback : it->second;
}

Palette Palette::parse(std::istream& in) {
  Palette palette;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields{std::string(line)};
    std::string code;
    int r = -1, g = -1, b = -1;
    std::string extra;
    if (!(fields >> code >> r >> g >> b) || (fields >> extra) || r < 0 || r > 255 || g < 0 ||
        g > 255 || b < 0 || b > 255) {
      throw ParseError("expected 'CODE R G B' with components in 0..255", line_no, 0,
                       std::string(line));
    }
    palette.colors[code] = Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                               static_cast<std::uint8_t>(b)};
  }
  return palette;
}

Palette Palette::basalt() {
  Palette p;
  p.colors = {{"ILM", {128, 0, 160}},
              {"AGT", {0, 170, 0}},
              {"PLG", {235, 235, 235}},
              {"OLV", {220, 200, 0}}};
  return p;
}

void write_ppm(std::ostream& out, std::size_t rows, std::size_t cols,
               const std::vector<Rgb>& pixels) {
  if (pixels.size() != rows * cols) throw DomainError("pixel count does not match image size");
  out << "P6\n" << cols << ' ' << rows << "\n255\n";
  for (const auto& px : pixels) {
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  }
}

std::vector<Rgb> render_labels(const ClassificationMap& map, const Palette& palette) {
  std::vector<Rgb> pixels;
  pixels.reserve(map.spots.size());
  for (const auto& s : map.spots) pixels.push_back(palette.color_for(s.label));
  return pixels;
}

std::vector<Rgb> render_membership(const SampleGrid& grid, std::string_view class_code) {
  const auto k = class_index(grid, class_code);
  std::vector<Rgb> pixels;
  pixels.reserve(grid.size());
  for (const auto& mv : grid.spots) {
    const auto level =
        static_cast<std::uint8_t>(std::lround(std::clamp(mv.values[k].mu, 0.0, 1.0) * 255.0));
    pixels.push_back({level, level, level});
  }
  return pixels;
}

}  // namespace spectraclass
