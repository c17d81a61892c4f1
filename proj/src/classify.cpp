#include "spectraclass/classify.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"

namespace spectraclass {

MembershipVector MembershipVector::from_values(std::vector<ClassMembership> values) {
  MembershipVector mv;
  mv.values = std::move(values);
  mv.unk = 1.0 - mv.max();
  return mv;
}

double MembershipVector::max() const noexcept {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, v.mu);
  return best;
}

std::optional<double> MembershipVector::find(std::string_view code) const {
  for (const auto& v : values) {
    if (v.code == code) return v.mu;
  }
  return std::nullopt;
}

Spectrum prepare(const Spectrum& raw, const RuleBase& rb) {
  const auto excluded = rb.excluded_ions();
  return normalize(raw, excluded, rb.options.epsilon);
}

MembershipVector memberships(const Spectrum& normalized, const RuleBase& rb) {
  std::vector<ClassMembership> values;
  values.reserve(rb.classes.size());
  std::vector<double> term_values;
  for (const auto& rule : rb.classes) {
    term_values.clear();
    for (const auto& term : rule.terms) {
      const double p = peak_abundance(normalized, term.ion, rb.options.epsilon);
      term_values.push_back(term.fn(p));
    }
    const double mu = eval_expr_with(rule.expr, [&](std::string_view name) {
      for (std::size_t i = 0; i < rule.terms.size(); ++i) {
        if (rule.terms[i].name == name) return term_values[i];
      }
      throw UnknownTerm(std::string(name));
    });
    values.push_back({rule.code, mu});
  }
  return MembershipVector::from_values(std::move(values));
}

std::size_t argmax_index(const MembershipVector& mv) {
  if (mv.values.empty()) throw NoClasses();
  std::size_t best = 0;
  for (std::size_t i = 1; i < mv.values.size(); ++i) {
    if (mv.values[i].mu > mv.values[best].mu) best = i;
  }
  return best;
}

Classification harden(const MembershipVector& mv, double nu, const HardenOptions& options) {
  const std::size_t best = argmax_index(mv);
  const double top = mv.values[best].mu;
  const Classification unknown{std::string(kUnknownLabel), mv.unk};
  if (top < nu) return unknown;
  if (options.ambiguity_threshold) {
    const auto high = std::count_if(mv.values.begin(), mv.values.end(), [&](const auto& v) {
      return v.mu >= *options.ambiguity_threshold;
    });
    if (high >= 2) return unknown;
  }
  return Classification{mv.values[best].code, top};
}

// ---------------------------------------------------------------------------

SpectrumFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".msp" || ext == ".txt" ? SpectrumFormat::msp : SpectrumFormat::csv;
}

SpectrumSource SpectrumSource::from_file(std::filesystem::path path,
                                         std::optional<SpectrumFormat> format) {
  SpectrumSource s;
  s.id_ = path.stem().string();
  s.format_ = format.value_or(format_for_path(path));
  s.origin_ = std::move(path);
  return s;
}

SpectrumSource SpectrumSource::from_text(std::string id, std::string text,
                                         SpectrumFormat format) {
  SpectrumSource s;
  s.id_ = std::move(id);
  s.format_ = format;
  s.origin_ = std::move(text);
  return s;
}

Spectrum SpectrumSource::load() const {
  if (const auto* text = std::get_if<std::string>(&origin_)) {
    return parse_spectrum(std::string_view(*text), format_, id_);
  }
  const auto& path = std::get<std::filesystem::path>(origin_);
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_spectrum(in, format_, id_);
}

BatchRecord classify_one(const SpectrumSource& source, const RuleBase& rb,
                         const BatchOptions& options) {
  BatchRecord record;
  record.id = source.id();
  try {
    const Spectrum raw = source.load();
    record.id = raw.id();
    record.position = raw.position();
    record.memberships = memberships(prepare(raw, rb), rb);
    record.classification = harden(record.memberships, rb.options.nu, options.harden);
  } catch (const std::exception& e) {
    record.error = e.what();
    record.memberships = {};
    record.classification = {std::string(kErrorLabel), 0.0};
  }
  return record;
}

std::vector<BatchRecord> classify_batch_serial(const std::vector<SpectrumSource>& sources,
                                               const RuleBase& rb,
                                               const BatchOptions& options) {
  std::vector<BatchRecord> out;
  out.reserve(sources.size());
  for (const auto& src : sources) out.push_back(classify_one(src, rb, options));
  return out;
}

std::vector<BatchRecord> classify_batch(const std::vector<SpectrumSource>& sources,
                                        const RuleBase& rb, int workers,
                                        const BatchOptions& options) {
  if (workers < 1) throw DomainError("workers must be at least 1");
  std::vector<BatchRecord> out(sources.size());
  const auto n = static_cast<std::ptrdiff_t>(sources.size());
  // classify_one never throws, so no exception escapes the parallel region.
#pragma omp parallel for num_threads(workers) schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        classify_one(sources[static_cast<std::size_t>(i)], rb, options);
  }
  return out;
}

void write_batch_csv(std::ostream& out, const std::vector<BatchRecord>& records,
                     const std::vector<std::string>& class_codes) {
  out << "id,x,y,label,confidence";
  for (const auto& code : class_codes) out << ",mu_" << code;
  out << '\n';
  for (const auto& r : records) {
    out << csv_field(r.id) << ',';
    if (r.position) {
      out << format_g6(r.position->x) << ',' << format_g6(r.position->y);
    } else {
      out << ',';
    }
    out << ',' << r.classification.label << ',';
    if (r.ok()) out << format_g6(r.classification.confidence);
    for (const auto& code : class_codes) {
      out << ',';
      if (!r.ok()) continue;
      const auto mu = r.memberships.find(code);
      if (mu) out << format_g6(*mu);
    }
    out << '\n';
  }
}

}  // namespace spectraclass
