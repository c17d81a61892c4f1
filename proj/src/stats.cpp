#include "spectraclass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

namespace {

bool close_enough(double a, double b, double eps) { return std::abs(a - b) <= eps + kMzSlack; }

struct TaggedPeak {
  double phi;
  double a;
  std::size_t spectrum;
};

class BinAccumulator {
 public:
  bool empty() const { return members_.empty(); }
  double center() const { return phi_sum_ / static_cast<double>(members_.size()); }

  void add(const TaggedPeak& p) {
    for (auto& m : members_) {
      if (m.spectrum != p.spectrum) continue;
      if (p.a > m.a) {
        phi_sum_ += p.phi - m.phi;
        m = p;
      }
      return;
    }
    members_.push_back(p);
    phi_sum_ += p.phi;
  }

  StatBin finish() {
    StatBin bin;
    bin.c = members_.size();
    bin.a_min = std::numeric_limits<double>::infinity();
    double phi_total = 0.0;
    for (const auto& m : members_) {
      phi_total += m.phi;
      bin.a_tot += m.a;
      bin.a_tot2 += m.a * m.a;
      bin.a_max = std::max(bin.a_max, m.a);
      bin.a_min = std::min(bin.a_min, m.a);
    }
    bin.phi = phi_total / static_cast<double>(bin.c);
    members_.clear();
    phi_sum_ = 0.0;
    return bin;
  }

 private:
  std::vector<TaggedPeak> members_;
  double phi_sum_ = 0.0;
};

double mean_of(const StatBin& bin, std::size_t n_spectra, MeanMode mode) {
  const auto denom = mode == MeanMode::present ? bin.c : n_spectra;
  return bin.a_tot / static_cast<double>(denom);
}

const StatBin* nearest_bin(const StatDB& db, double phi) {
  auto it = std::lower_bound(db.bins.begin(), db.bins.end(), phi,
                             [](const StatBin& b, double v) { return b.phi < v; });
  const StatBin* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (auto cand : {it, it == db.bins.begin() ? db.bins.end() : std::prev(it)}) {
    if (cand == db.bins.end()) continue;
    const double d = std::abs(cand->phi - phi);
    if (d < best_dist && close_enough(cand->phi, phi, db.epsilon)) {
      best = &*cand;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace

std::vector<Peak> peak_list(const Spectrum& s, double eps) {
  if (!(eps >= 0.0)) throw DomainError("epsilon must be non-negative");
  const auto pts = s.points();
  const std::size_t n = pts.size();

  std::vector<Peak> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].abundance <= 0.0) continue;
    const bool rises = i == 0 || !close_enough(pts[i].mz, pts[i - 1].mz, eps) ||
                       pts[i - 1].abundance < pts[i].abundance;
    const bool falls = i + 1 == n || !close_enough(pts[i + 1].mz, pts[i].mz, eps) ||
                       pts[i + 1].abundance <= pts[i].abundance;
    if (rises && falls) maxima.push_back(pts[i]);
  }

  std::vector<Peak> consolidated;
  double prev_mz = 0.0;
  for (const auto& m : maxima) {
    if (!consolidated.empty() && close_enough(m.mz, prev_mz, eps)) {
      if (m.abundance > consolidated.back().abundance) consolidated.back() = m;
    } else {
      consolidated.push_back(m);
    }
    prev_mz = m.mz;
  }
  return consolidated;
}

StatDB build_statdb(std::span<const Spectrum> spectra, double eps) {
  if (spectra.empty()) throw EmptyEnsemble();
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");

  std::vector<TaggedPeak> stream;
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    for (const auto& p : peak_list(spectra[k], eps)) stream.push_back({p.mz, p.abundance, k});
  }
  std::sort(stream.begin(), stream.end(), [](const TaggedPeak& x, const TaggedPeak& y) {
    return x.phi < y.phi || (x.phi == y.phi && x.a > y.a);
  });

  StatDB db;
  db.n_spectra = spectra.size();
  db.epsilon = eps;
  BinAccumulator current;
  for (const auto& p : stream) {
    if (!current.empty() && p.phi > current.center() + eps + kMzSlack) {
      db.bins.push_back(current.finish());
    }
    current.add(p);
  }
  if (!current.empty()) db.bins.push_back(current.finish());
  return db;
}

StatDB merge(const StatDB& a, const StatDB& b) {
  if (a.epsilon != b.epsilon || a.full_scale != b.full_scale) {
    throw IncompatibleDBs("cannot merge databases with different epsilon or scale");
  }
  StatDB out;
  out.n_spectra = a.n_spectra + b.n_spectra;
  out.epsilon = a.epsilon;
  out.full_scale = a.full_scale;
  std::size_t i = 0, j = 0;
  while (i < a.bins.size() || j < b.bins.size()) {
    if (j == b.bins.size() ||
        (i < a.bins.size() && a.bins[i].phi < b.bins[j].phi &&
         !close_enough(a.bins[i].phi, b.bins[j].phi, a.epsilon))) {
      out.bins.push_back(a.bins[i++]);
    } else if (i == a.bins.size() || !close_enough(a.bins[i].phi, b.bins[j].phi, a.epsilon)) {
      out.bins.push_back(b.bins[j++]);
    } else {
      const StatBin& x = a.bins[i++];
      const StatBin& y = b.bins[j++];
      StatBin m;
      m.c = x.c + y.c;
      m.phi = (x.phi * static_cast<double>(x.c) + y.phi * static_cast<double>(y.c)) /
              static_cast<double>(m.c);
      m.a_tot = x.a_tot + y.a_tot;
      m.a_tot2 = x.a_tot2 + y.a_tot2;
      m.a_max = std::max(x.a_max, y.a_max);
      m.a_min = std::min(x.a_min, y.a_min);
      out.bins.push_back(m);
    }
  }
  return out;
}

std::vector<StatBin> full_presence_bins(const StatDB& db) {
  std::vector<StatBin> out;
  for (const auto& bin : db.bins) {
    if (bin.c == db.n_spectra) out.push_back(bin);
  }
  return out;
}

std::string_view to_string(ReportFlag flag) {
  switch (flag) {
    case ReportFlag::key_candidate: return "key-candidate";
    case ReportFlag::low_candidate: return "low-candidate";
    case ReportFlag::unique: return "unique";
    case ReportFlag::partial_presence: return "partial-presence";
    case ReportFlag::none: return "-";
  }
  return "-";
}

std::vector<ReportRow> class_vs_ensemble_report(const StatDB& class_db,
                                                const StatDB& ensemble_db,
                                                const ReportOptions& options) {
  if (std::abs(class_db.epsilon - ensemble_db.epsilon) > 1e-12 ||
      class_db.full_scale != ensemble_db.full_scale) {
    throw IncompatibleDBs("class and ensemble databases differ in epsilon or scale");
  }
  std::vector<ReportRow> rows;
  for (const auto& bin : class_db.bins) {
    const bool full = bin.c == class_db.n_spectra;
    if (!full && !options.include_partial) continue;
    ReportRow row;
    row.phi = bin.phi;
    row.count = bin.c;
    row.n_spectra = class_db.n_spectra;
    row.class_mean = mean_of(bin, class_db.n_spectra, options.mode);
    const StatBin* match = nearest_bin(ensemble_db, bin.phi);
    if (match) {
      row.ensemble_mean = mean_of(*match, ensemble_db.n_spectra, options.mode);
      row.ratio = row.class_mean / row.ensemble_mean;
    } else {
      row.ratio = std::numeric_limits<double>::infinity();
    }
    if (!full) {
      row.flag = ReportFlag::partial_presence;
    } else if (!match) {
      row.flag = ReportFlag::unique;
    } else if (row.ratio >= options.key_ratio) {
      row.flag = ReportFlag::key_candidate;
    } else if (row.ratio <= options.low_ratio) {
      row.flag = ReportFlag::low_candidate;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "phi,class_mean,ensemble_mean,ratio,count,n_spectra,flag\n";
  for (const auto& r : rows) {
    out << format_g6(r.phi) << ',' << format_g6(r.class_mean) << ','
        << format_g6(r.ensemble_mean) << ',' << format_g6(r.ratio) << ',' << r.count << ','
        << r.n_spectra << ',' << to_string(r.flag) << '\n';
  }
}

void render_histogram(std::ostream& out, const std::vector<ReportRow>& rows,
                      std::size_t width) {
  double scale = 1.0;
  for (const auto& r : rows) {
    if (std::isfinite(r.ratio)) scale = std::max(scale, r.ratio);
  }
  for (const auto& r : rows) {
    std::string label = format_g6(r.phi);
    if (label.size() < 10) label.insert(0, 10 - label.size(), ' ');
    std::string bar;
    if (std::isfinite(r.ratio)) {
      const auto len = static_cast<std::size_t>(std::lround(r.ratio / scale * double(width)));
      bar.assign(std::min(len, width), '#');
    } else {
      bar.assign(width - 1, '#');
      bar += '>';
    }
    bar.resize(width, ' ');
    out << label << " |" << bar << "| " << format_g6(r.ratio);
    if (r.flag != ReportFlag::none) out << "  " << to_string(r.flag);
    out << '\n';
  }
}

}  // namespace spectraclass
