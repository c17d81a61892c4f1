#include "spectraclass/spectrum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

namespace {

bool within(double mz, double center, double eps) {
  return std::abs(mz - center) <= eps + kMzSlack;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

// Splits "a,b" or "a b" into exactly two fields.
bool split_pair(std::string_view line, SpectrumFormat format,
                std::string_view& first, std::string_view& second) {
  if (format == SpectrumFormat::csv) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) return false;
    first = trim(line.substr(0, comma));
    second = trim(line.substr(comma + 1));
    return second.find(',') == std::string_view::npos;
  }
  constexpr std::string_view kSpace = " \t";
  const auto a_end = line.find_first_of(kSpace);
  if (a_end == std::string_view::npos) return false;
  first = line.substr(0, a_end);
  second = trim(line.substr(a_end));
  return !second.empty() && second.find_first_of(kSpace) == std::string_view::npos;
}

struct Metadata {
  std::string id;
  std::optional<Position> position;
};

void parse_directive(std::string_view comment, std::size_t line_no, Metadata& meta) {
  comment = trim(comment);
  if (starts_with_ci(comment, "id:")) {
    meta.id = std::string(trim(comment.substr(3)));
  } else if (starts_with_ci(comment, "position:")) {
    auto rest = trim(comment.substr(9));
    std::string_view xs, ys;
    const auto fmt = rest.find(',') != std::string_view::npos ? SpectrumFormat::csv
                                                                : SpectrumFormat::msp;
    Position p;
    if (!split_pair(rest, fmt, xs, ys) || !parse_double(xs, p.x) ||
        !parse_double(ys, p.y)) {
      throw ParseError("malformed position directive", line_no, 0, std::string(rest));
    }
    meta.position = p;
  }
}

}  // namespace

Spectrum::Spectrum(std::vector<Peak> points, std::string id,
                   std::optional<Position> position)
    : points_(std::move(points)), id_(std::move(id)), position_(position) {
  if (points_.empty()) throw EmptySpectrum();
  for (const auto& p : points_) {
    if (!std::isfinite(p.mz) || p.mz <= 0.0) {
      throw DomainError("m/z must be positive, got " + format_exact(p.mz));
    }
    if (!std::isfinite(p.abundance) || p.abundance < 0.0) {
      throw DomainError("abundance must be non-negative, got " +
                        format_exact(p.abundance));
    }
  }
  std::sort(points_.begin(), points_.end(), [](const Peak& a, const Peak& b) {
    return a.mz < b.mz || (a.mz == b.mz && a.abundance > b.abundance);
  });
  // Duplicates are adjacent with the largest abundance first.
  points_.erase(std::unique(points_.begin(), points_.end(),
                            [](const Peak& a, const Peak& b) { return a.mz == b.mz; }),
                points_.end());
}

double Spectrum::max_abundance() const noexcept {
  double best = 0.0;
  for (const auto& p : points_) best = std::max(best, p.abundance);
  return best;
}

Spectrum Spectrum::with_id(std::string id) const {
  Spectrum copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

Spectrum parse_spectrum(std::istream& in, SpectrumFormat format, std::string id) {
  std::vector<Peak> points;
  Metadata meta;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_directive(line.substr(1), line_no, meta);
      continue;
    }
    if (format == SpectrumFormat::msp) {
      const auto colon = line.find(':');
      if (colon != std::string_view::npos) {
        if (starts_with_ci(line, "name:")) meta.id = std::string(trim(line.substr(5)));
        continue;
      }
    }
    std::string_view mz_text, ab_text;
    Peak peak;
    if (!split_pair(line, format, mz_text, ab_text)) {
      throw ParseError("expected two fields", line_no, 0, std::string(line));
    }
    if (!parse_double(mz_text, peak.mz)) {
      throw ParseError("non-numeric m/z", line_no, 0, std::string(mz_text));
    }
    if (!parse_double(ab_text, peak.abundance)) {
      throw ParseError("non-numeric abundance", line_no, 0, std::string(ab_text));
    }
    if (peak.abundance < 0.0) {
      throw DomainError("line " + std::to_string(line_no) +
                        ": negative abundance " + std::string(ab_text));
    }
    if (peak.mz <= 0.0) {
      throw DomainError("line " + std::to_string(line_no) +
                        ": non-positive m/z " + std::string(mz_text));
    }
    points.push_back(peak);
  }
  if (in.bad()) throw Error("read failure while parsing spectrum");
  if (points.empty()) throw EmptySpectrum();
  if (!meta.id.empty()) id = std::move(meta.id);
  return Spectrum(std::move(points), std::move(id), meta.position);
}

Spectrum parse_spectrum(std::string_view text, SpectrumFormat format, std::string id) {
  std::istringstream in{std::string(text)};
  return parse_spectrum(in, format, std::move(id));
}

void write_spectrum(std::ostream& out, const Spectrum& s, SpectrumFormat format) {
  if (format == SpectrumFormat::csv) {
    if (!s.id().empty()) out << "# id: " << s.id() << '\n';
    if (s.position()) {
      out << "# position: " << format_exact(s.position()->x) << ','
          << format_exact(s.position()->y) << '\n';
    }
    for (const auto& p : s.points()) {
      out << format_exact(p.mz) << ',' << format_exact(p.abundance) << '\n';
    }
    return;
  }
  if (!s.id().empty()) out << "Name: " << s.id() << '\n';
  if (s.position()) {
    out << "# position: " << format_exact(s.position()->x) << ' '
        << format_exact(s.position()->y) << '\n';
  }
  for (const auto& p : s.points()) {
    out << format_exact(p.mz) << ' ' << format_exact(p.abundance) << '\n';
  }
}

Spectrum normalize(const Spectrum& s, std::span<const IonTarget> excluded, double eps) {
  if (!(eps >= 0.0)) throw DomainError("epsilon must be non-negative");
  double reference = 0.0;
  bool any_included = false;
  for (const auto& p : s.points()) {
    const bool is_excluded = std::any_of(
        excluded.begin(), excluded.end(),
        [&](const IonTarget& ion) { return within(p.mz, ion.mz, eps); });
    if (is_excluded) continue;
    any_included = true;
    reference = std::max(reference, p.abundance);
  }
  if (!any_included) throw CannotNormalize("every point lies in an excluded window");
  if (reference == 0.0) throw CannotNormalize("all non-excluded abundances are zero");
  if (reference == kFullScale) return s;

  const double factor = kFullScale / reference;
  std::vector<Peak> scaled(s.points().begin(), s.points().end());
  for (auto& p : scaled) {
    // Pin the reference peak so a second pass sees exactly full scale.
    p.abundance = p.abundance == reference ? kFullScale : p.abundance * factor;
  }
  return Spectrum(std::move(scaled), s.id(), s.position());
}

double peak_abundance(const Spectrum& s, const IonTarget& ion, double eps) {
  if (!(eps >= 0.0)) throw DomainError("epsilon must be non-negative");
  const auto pts = s.points();
  const double lo = ion.mz - eps - kMzSlack;
  const double hi = ion.mz + eps + kMzSlack;
  auto it = std::lower_bound(pts.begin(), pts.end(), lo,
                             [](const Peak& p, double v) { return p.mz < v; });
  double best = 0.0;
  for (; it != pts.end() && it->mz <= hi; ++it) best = std::max(best, it->abundance);
  return best;
}

}  // namespace spectraclass
