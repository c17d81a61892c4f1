#include "spectraclass/spectrum.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "spectraclass/error.hpp"

namespace spectraclass {
namespace {

// Independent oracle for the peak window: scan every point.
double scan_window(const std::vector<Peak>& pts, double center, double eps) {
  double best = 0.0;
  for (const auto& p : pts) {
    if (p.mz >= center - eps - kMzSlack && p.mz <= center + eps + kMzSlack) {
      best = std::max(best, p.abundance);
    }
  }
  return best;
}

Spectrum random_spectrum(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> mz(10.0, 100.0);
  std::uniform_real_distribution<double> ab(0.0, 250.0);
  std::vector<Peak> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({mz(rng), ab(rng)});
  return Spectrum(std::move(pts), "r");
}

TEST(ParseSpectrum, EchoesCsvRows) {
  const auto s = parse_spectrum("26.98,40\n55.95,100", SpectrumFormat::csv);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.points()[0], (Peak{26.98, 40}));
  EXPECT_EQ(s.points()[1], (Peak{55.95, 100}));
}

TEST(ParseSpectrum, SortsByMz) {
  EXPECT_EQ(parse_spectrum("55.95,100\n26.98,40", SpectrumFormat::csv),
            parse_spectrum("26.98,40\n55.95,100", SpectrumFormat::csv));
}

TEST(ParseSpectrum, NonNumericFieldReportsLine) {
  try {
    parse_spectrum("26.98,abc", SpectrumFormat::csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse_spectrum("# header\n\n10,1\n12x,4\n", SpectrumFormat::csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseSpectrum, ErrorCases) {
  EXPECT_THROW(parse_spectrum("", SpectrumFormat::csv), EmptySpectrum);
  EXPECT_THROW(parse_spectrum("# only a comment\n\n", SpectrumFormat::csv), EmptySpectrum);
  EXPECT_THROW(parse_spectrum("26.98,-1", SpectrumFormat::csv), DomainError);
  EXPECT_THROW(parse_spectrum("0,5", SpectrumFormat::csv), DomainError);
  EXPECT_THROW(parse_spectrum("1,2,3", SpectrumFormat::csv), ParseError);
  EXPECT_THROW(parse_spectrum("26.98", SpectrumFormat::csv), ParseError);
}

TEST(ParseSpectrum, DuplicateMzKeepsMax) {
  const auto s = parse_spectrum("10,3\n10,7\n10,5\n", SpectrumFormat::csv);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.points()[0].abundance, 7);
}

TEST(ParseSpectrum, MspVariantAndDirectives) {
  const auto s = parse_spectrum(
      "Name: spot-7\nNum Peaks: 2\n# position: 30 60\n55.954\t100\n26.982  4\n",
      SpectrumFormat::msp, "fallback");
  EXPECT_EQ(s.id(), "spot-7");
  ASSERT_TRUE(s.position());
  EXPECT_EQ(*s.position(), (Position{30, 60}));
  EXPECT_EQ(s.points()[0], (Peak{26.982, 4}));

  const auto c = parse_spectrum("# id: a\n# position: 1.5,2\n10,1\n", SpectrumFormat::csv, "x");
  EXPECT_EQ(c.id(), "a");
  EXPECT_EQ(*c.position(), (Position{1.5, 2}));
  EXPECT_EQ(parse_spectrum("10,1", SpectrumFormat::csv, "x").id(), "x");
}

TEST(ParseSpectrum, WriteThenParseIsIdentity) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_spectrum(rng, 1 + trial);
    if (trial % 2) s = Spectrum({s.points().begin(), s.points().end()}, "id", Position{1.25, -3});
    for (auto fmt : {SpectrumFormat::csv, SpectrumFormat::msp}) {
      std::stringstream ss;
      write_spectrum(ss, s, fmt);
      const auto back = parse_spectrum(ss, fmt, s.id());
      EXPECT_EQ(back, s);
      std::stringstream again;
      write_spectrum(again, back, fmt);
      EXPECT_EQ(parse_spectrum(again, fmt, s.id()), back);
    }
  }
}

TEST(Normalize, RescalesExcludingPotassium) {
  const Spectrum s({{38.963, 200}, {55.954, 50}});
  const IonTarget k{"K", 38.963};
  const auto n = normalize(s, std::span(&k, 1), 0.1);
  EXPECT_EQ(n.points()[0].abundance, 400);
  EXPECT_EQ(n.points()[1].abundance, 100);
}

TEST(Normalize, AlreadyAtScaleIsUnchanged) {
  const Spectrum s({{55.954, 100}});
  EXPECT_EQ(normalize(s, {}, 0.1), s);
}

TEST(Normalize, NothingLeftToScaleBy) {
  const IonTarget k{"K", 38.963};
  EXPECT_THROW(normalize(Spectrum({{38.963, 200}}), std::span(&k, 1), 0.1), CannotNormalize);
  EXPECT_THROW(normalize(Spectrum({{10, 0}, {20, 0}}), {}, 0.1), CannotNormalize);
}

TEST(Normalize, IdempotentAndRatioPreserving) {
  std::mt19937 rng(11);
  const IonTarget k{"K", 39.098};
  for (int trial = 0; trial < 200; ++trial) {
    auto raw = random_spectrum(rng, 2 + trial % 30);
    std::vector<Peak> pts(raw.points().begin(), raw.points().end());
    pts.push_back({39.098, 900.0});
    const Spectrum s(std::move(pts));
    const auto once = normalize(s, std::span(&k, 1), 0.05);
    const auto twice = normalize(once, std::span(&k, 1), 0.05);
    ASSERT_EQ(once.size(), twice.size());
    double top = 0.0;
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_NEAR(once.points()[i].abundance, twice.points()[i].abundance, 1e-9);
      if (std::abs(once.points()[i].mz - k.mz) > 0.05) {
        top = std::max(top, once.points()[i].abundance);
      }
    }
    EXPECT_EQ(top, kFullScale);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double a0 = s.points()[0].abundance, ai = s.points()[i].abundance;
      if (a0 == 0.0 || ai == 0.0) continue;
      EXPECT_NEAR((once.points()[i].abundance / once.points()[0].abundance) / (ai / a0), 1.0,
                  1e-12);
    }
  }
}

TEST(PeakAbundance, TakesMaxInWindow) {
  const Spectrum s({{47.90, 5}, {47.96, 12}, {48.30, 7}});
  EXPECT_EQ(peak_abundance(s, {"Ti", 47.95}, 0.10), 12);
  EXPECT_EQ(scan_window({{47.90, 5}, {47.96, 12}, {48.30, 7}}, 47.95, 0.10), 12);
}

TEST(PeakAbundance, EmptyWindowIsZero) {
  EXPECT_EQ(peak_abundance(Spectrum({{47.90, 5}}), {"Fe", 55.954}, 0.10), 0);
}

TEST(PeakAbundance, WindowEndpointsInclusive) {
  EXPECT_EQ(peak_abundance(Spectrum({{55.954, 40}}), {"Fe", 55.954}, 0.0), 40);
  EXPECT_EQ(peak_abundance(Spectrum({{27.00, 9}}), {"X", 26.98}, 0.02), 9);
  EXPECT_EQ(peak_abundance(Spectrum({{26.96, 9}}), {"X", 26.98}, 0.02), 9);
  EXPECT_THROW(peak_abundance(Spectrum({{1, 1}}), {"X", 1}, -0.1), DomainError);
}

TEST(PeakAbundance, MatchesScanMonotoneAndBounded) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> center(5.0, 105.0), width(0.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_spectrum(rng, 1 + trial % 60);
    const std::vector<Peak> pts(s.points().begin(), s.points().end());
    const IonTarget ion{"X", center(rng)};
    double e1 = width(rng), e2 = width(rng);
    if (e1 > e2) std::swap(e1, e2);
    const double r1 = peak_abundance(s, ion, e1);
    const double r2 = peak_abundance(s, ion, e2);
    EXPECT_EQ(r1, scan_window(pts, ion.mz, e1));
    EXPECT_LE(r1, r2);
    EXPECT_LE(r2, s.max_abundance());
  }
}

}  // namespace
}  // namespace spectraclass
