#include "spectraclass/spatial.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "spectraclass/error.hpp"

namespace spectraclass {
namespace {

const std::vector<std::string> kCodes = {"ILM", "AGT", "PLG", "OLV"};

SampleGrid make_grid(Topology topo, std::size_t rows, std::size_t cols,
                     const std::vector<std::vector<double>>& mu) {
  SampleGrid g;
  g.topology = topo;
  g.rows = rows;
  g.cols = cols;
  g.class_codes = std::vector<std::string>(kCodes.begin(), kCodes.begin() + mu[0].size());
  for (const auto& row : mu) {
    std::vector<ClassMembership> values;
    for (std::size_t k = 0; k < row.size(); ++k) values.push_back({g.class_codes[k], row[k]});
    g.spots.push_back(MembershipVector::from_values(std::move(values)));
  }
  g.positions.assign(g.size(), std::nullopt);
  g.check();
  return g;
}

SampleGrid random_grid(std::mt19937& rng, Topology topo, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> mu(rows * cols);
  for (auto& v : mu) {
    for (int k = 0; k < 4; ++k) v.push_back(u(rng) * u(rng));
  }
  return make_grid(topo, rows, cols, mu);
}

SampleGrid read_fixture(const std::string& name, std::optional<Topology> topo = std::nullopt) {
  std::ifstream in(std::string(SPECTRACLASS_SOURCE_DIR) + "/tests/fixtures/grids/" + name);
  return read_grid_csv(in, topo);
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

TEST(Neighbors, RectangularMoore) {
  const auto g = make_grid(Topology::rectangular, 3, 4, std::vector<std::vector<double>>(12, {0}));
  EXPECT_EQ(as_set(neighbors(g, 5)), (std::set<std::size_t>{0, 1, 2, 4, 6, 8, 9, 10}));
  EXPECT_EQ(as_set(neighbors(g, 0)), (std::set<std::size_t>{1, 4, 5}));
  EXPECT_EQ(neighbors(g, 11).size(), 3u);
  EXPECT_EQ(neighbors(g, 1).size(), 5u);
  EXPECT_THROW(neighbors(g, 12), BadIndex);
}

TEST(Neighbors, HexagonalOddRowOffset) {
  const auto g = make_grid(Topology::hexagonal, 4, 4, std::vector<std::vector<double>>(16, {0}));
  // Odd row: the row is shifted right, so it touches col and col+1 above and below.
  EXPECT_EQ(as_set(neighbors(g, 5)), (std::set<std::size_t>{1, 2, 4, 6, 9, 10}));
  // Even row: touches col-1 and col above and below.
  EXPECT_EQ(as_set(neighbors(g, 10)), (std::set<std::size_t>{5, 6, 9, 11, 13, 14}));
  EXPECT_EQ(as_set(neighbors(g, 0)), (std::set<std::size_t>{1, 4}));
  EXPECT_EQ(as_set(neighbors(g, 7)), (std::set<std::size_t>{3, 6, 11}));
}

TEST(Neighbors, Symmetric) {
  std::mt19937 rng(2);
  for (auto topo : {Topology::rectangular, Topology::hexagonal}) {
    const auto g = random_grid(rng, topo, 7, 6);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (auto j : neighbors(g, i)) {
        ASSERT_NE(i, j);
        ASSERT_TRUE(as_set(neighbors(g, j)).count(i));
      }
    }
  }
}

TEST(SmoothedMembership, Examples) {
  const auto ring = read_fixture("rect3x3.csv");
  EXPECT_NEAR(smoothed_membership(ring, 4, "AGT"), 1.2, 1e-12);
  EXPECT_EQ(smoothed_membership(ring, 4, "OLV"), 0.0);

  std::vector<std::vector<double>> mu(9, {0.0});
  mu[0] = {0.3};
  mu[1] = mu[3] = mu[4] = {0.6};
  const auto corner = make_grid(Topology::rectangular, 3, 3, mu);
  EXPECT_NEAR(smoothed_membership(corner, 0, "ILM"), 0.9, 1e-12);

  const auto single = make_grid(Topology::rectangular, 1, 1, {{0.4}});
  EXPECT_EQ(smoothed_membership(single, 0, "ILM"), 0.4);
  EXPECT_THROW(smoothed_membership(single, 0, "XXX"), DomainError);
}

TEST(SmoothedMembership, TranslationInvariant) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto topo : {Topology::rectangular, Topology::hexagonal}) {
    const std::size_t rows = 6, cols = 7, dr = 2, dc = 3;  // even row shift keeps hex parity
    const auto a = random_grid(rng, topo, rows, cols);
    std::vector<std::vector<double>> mu((rows + dr) * (cols + dc));
    for (auto& v : mu) v = {u(rng), u(rng), u(rng), u(rng)};
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        auto& dst = mu[(r + dr) * (cols + dc) + (c + dc)];
        for (std::size_t k = 0; k < 4; ++k) dst[k] = a.spots[r * cols + c].values[k].mu;
      }
    }
    const auto b = make_grid(topo, rows + dr, cols + dc, mu);
    for (std::size_t r = 1; r + 1 < rows; ++r) {
      for (std::size_t c = 1; c + 1 < cols; ++c) {
        for (const auto& code : kCodes) {
          ASSERT_EQ(smoothed_membership(a, r * cols + c, code),
                    smoothed_membership(b, (r + dr) * (cols + dc) + c + dc, code));
        }
      }
    }
  }
}

TEST(ReclassifyMap, RingRelabelsCenter) {
  const auto g = read_fixture("rect3x3.csv");
  const auto pre = hard_map(g, 0.5);
  EXPECT_EQ(pre.spots[4].label, kUnknownLabel);
  const auto post = reclassify_map(g, 0.5);
  EXPECT_EQ(post.spots[4].label, "AGT");
  EXPECT_TRUE(post.spots[4].neighbor_assigned);
  EXPECT_NEAR(post.spots[4].confidence, 1.2, 1e-12);
  for (std::size_t i = 0; i < 9; ++i) {
    if (i != 4) {
      EXPECT_EQ(post.spots[i], pre.spots[i]);
    }
  }
}

TEST(ReclassifyMap, AllConfidentIsNoOp) {
  const auto g = read_fixture("confident3x3.csv");
  const auto post = reclassify_map(g, 0.5);
  EXPECT_EQ(post, hard_map(g, 0.5));
  for (const auto& s : post.spots) EXPECT_FALSE(s.neighbor_assigned);
}

TEST(ReclassifyMap, WeakNeighborhoodStillPicksClass) {
  std::vector<std::vector<double>> mu(9, {0.0, 0.01, 0.0, 0.0});
  mu[4] = {0.02, 0.0, 0.0, 0.0};
  const auto g = make_grid(Topology::rectangular, 3, 3, mu);
  const auto post = reclassify_map(g, 0.5);
  EXPECT_EQ(post.spots[4].label, "ILM");  // 0.02 beats 0.01
  EXPECT_TRUE(post.spots[4].neighbor_assigned);
  EXPECT_EQ(post.spots[0].label, "AGT");

  const auto floored = reclassify_map(g, 0.5, {.smoothed_floor = 0.1});
  EXPECT_EQ(floored.spots[4].label, kUnknownLabel);
  EXPECT_FALSE(floored.spots[4].neighbor_assigned);
}

TEST(ReclassifyMap, HexagonalDiffersFromRectangular) {
  EXPECT_EQ(reclassify_map(read_fixture("hex4x4.csv"), 0.5).spots[5].label, "PLG");
  EXPECT_EQ(reclassify_map(read_fixture("hex4x4.csv", Topology::rectangular), 0.5).spots[5].label,
            "AGT");
}

TEST(ReclassifyMap, PropertiesOverRandomGrids) {
  std::mt19937 rng(77);
  std::uniform_int_distribution<std::size_t> dim(1, 9);
  std::uniform_real_distribution<double> nu_dist(0.05, 0.9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto topo = trial % 2 ? Topology::hexagonal : Topology::rectangular;
    const auto g = random_grid(rng, topo, dim(rng), dim(rng));
    const double nu = nu_dist(rng);
    const auto pre = hard_map(g, nu);
    const auto serial = reclassify_map_serial(g, nu);
    ASSERT_EQ(reclassify_map(g, nu, {}, 4), serial);
    ASSERT_EQ(reclassify_map(g, nu, {}, 1), serial);
    ASSERT_EQ(reclassify_map_serial(g, nu), serial);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.spots[i].max() >= nu) {
        ASSERT_EQ(serial.spots[i], pre.spots[i]);
      } else {
        ASSERT_TRUE(serial.spots[i].neighbor_assigned);
      }
    }
  }
}

TEST(ReadGridCsv, ParsesHeadersAndRows) {
  const auto g = read_fixture("rect3x3.csv");
  EXPECT_EQ(g.topology, Topology::rectangular);
  EXPECT_EQ(g.rows, 3u);
  EXPECT_EQ(g.spacing, 30);
  EXPECT_EQ(g.class_codes, kCodes);
  EXPECT_EQ(g.position_of(5), (Position{60, 30}));
  const auto h = read_fixture("hex4x4.csv");
  EXPECT_EQ(h.topology, Topology::hexagonal);
  EXPECT_EQ(h.position_of(5).x, 1.5);
  EXPECT_NEAR(h.position_of(5).y, 0.8660254037844386, 1e-15);
}

TEST(ReadGridCsv, Errors) {
  const std::string body = "id,x,y,label,confidence,mu_A\na,,,A,1,1\n";
  std::istringstream no_topo("# rows: 1\n# cols: 1\n" + body);
  EXPECT_THROW(read_grid_csv(no_topo), ParseError);
  std::istringstream with_override("# rows: 1\n# cols: 1\n" + body);
  EXPECT_EQ(read_grid_csv(with_override, Topology::hexagonal).topology, Topology::hexagonal);
  std::istringstream bad_dims("# topology: rect\n# rows: 2\n# cols: 1\n" + body);
  EXPECT_THROW(read_grid_csv(bad_dims), DomainError);
  std::istringstream bad_mu("# topology: rect\n# rows: 1\n# cols: 1\n"
                            "id,x,y,label,confidence,mu_A\na,,,A,1,1.5\n");
  EXPECT_THROW(read_grid_csv(bad_mu), ParseError);
  std::istringstream error_row("# topology: rect\n# rows: 1\n# cols: 1\n"
                               "id,x,y,label,confidence,mu_A\na,,,ERROR,,\n");
  EXPECT_EQ(read_grid_csv(error_row).spots[0].max(), 0.0);
}

TEST(Output, MapCsvAndPixmap) {
  const auto g = read_fixture("rect3x3.csv");
  const auto post = reclassify_map(g, 0.5);
  std::ostringstream csv;
  write_map_csv(csv, g, post);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "x,y,label,confidence,neighbor_assigned");
  for (int i = 0; i < 5; ++i) std::getline(lines, line);
  EXPECT_EQ(line, "30,30,AGT,1.2,true");

  std::ostringstream ppm;
  write_ppm(ppm, 3, 3, render_labels(hard_map(g, 0.5), Palette::basalt()));
  const auto img = ppm.str();
  const std::string header = "P6\n3 3\n255\n";
  ASSERT_EQ(img.size(), header.size() + 27);
  EXPECT_EQ(img.substr(0, header.size()), header);
  EXPECT_EQ(img.substr(header.size() + 12, 3), std::string(3, '\0'));  // UNK center
  EXPECT_EQ(static_cast<unsigned char>(img[header.size() + 1]), 170);   // AGT green
  EXPECT_THROW(write_ppm(ppm, 2, 2, {}), DomainError);

  const auto grey = render_membership(g, "AGT");
  EXPECT_EQ(grey[0], (Rgb{230, 230, 230}));
  EXPECT_EQ(render_membership(g, "OLV")[4], (Rgb{0, 0, 0}));
}

TEST(Palette, ParseAndLookup) {
  std::istringstream in("# basalt\nILM 1 2 3\nPLG 255 255 255\n");
  const auto p = Palette::parse(in);
  EXPECT_EQ(p.color_for("ILM"), (Rgb{1, 2, 3}));
  EXPECT_EQ(p.color_for("UNK"), (Rgb{0, 0, 0}));
  EXPECT_EQ(p.color_for("ERROR"), (Rgb{0, 0, 0}));
  EXPECT_EQ(p.color_for("XYZ"), p.fallback);
  std::istringstream bad("ILM 1 2 300\n");
  EXPECT_THROW(Palette::parse(bad), ParseError);
  EXPECT_EQ(parse_topology("hex"), Topology::hexagonal);
  EXPECT_EQ(parse_topology("rectangular"), Topology::rectangular);
  EXPECT_FALSE(parse_topology("square"));
}

}  // namespace
}  // namespace spectraclass
