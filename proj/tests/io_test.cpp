#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "gaecausal/io.hpp"
#include "oracles.hpp"

using namespace gaecausal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gaecausal_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(FormatDouble, ShortestForms) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(1.5), "1.5");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Grid, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  Matrix m = oracle::random_matrix(7, 5, rng, -1e3, 1e3);
  m(0, 0) = 0.1;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  m(2, 2) = -std::numeric_limits<double>::max();
  m(3, 3) = 1.0 / 3.0;
  const Matrix back = parse_grid(format_grid(m));
  ASSERT_EQ(back.rows(), 7u);
  ASSERT_EQ(back.cols(), 5u);
  EXPECT_TRUE(bitwise_equal(back.data(), m.data()));
}

TEST(Grid, ToleratesWhitespaceCrlfAndBlankLines) {
  const Matrix m = parse_grid(" 1, 2.5 \r\n\n-3,4e-2\n");
  EXPECT_EQ(m, (Matrix{{1, 2.5}, {-3, 0.04}}));
}

TEST(Grid, MalformedNumberReportsLineAndColumn) {
  try {
    parse_grid("1,2\n3,abc\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
}

TEST(Grid, RaggedAndEmptyRejected) {
  try {
    parse_grid("1,2\n3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_grid(""), ParseError);
  EXPECT_THROW(parse_grid("1,,2\n"), ParseError);
  EXPECT_THROW(parse_grid("1,2x\n"), ParseError);
}

TEST(Grid, FileErrorsNamePath) {
  const fs::path dir = scratch_dir("grid");
  EXPECT_THROW(read_grid(dir / "missing.csv"), IoError);
  write_atomic(dir / "bad.csv", "1,2\nx,3\n");
  try {
    read_grid(dir / "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemporaries) {
  const fs::path dir = scratch_dir("atomic");
  write_atomic(dir / "sub" / "f.txt", "first");
  write_atomic(dir / "sub" / "f.txt", "second");
  EXPECT_EQ(read_text(dir / "sub" / "f.txt"), "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) files += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(files, 1u);
}

TEST(Json, ParseErrorCarriesPosition) {
  try {
    parse_json("{\n  \"a\": 1,\n  oops\n}", "cfg.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("cfg.json"), std::string::npos);
  }
}

TEST(Json, GridRoundTrip) {
  const Matrix m{{0.1, -2}, {3, 1e-300}};
  EXPECT_EQ(grid_from_json(grid_json(m), "m"), m);
  EXPECT_THROW(grid_from_json(Json::parse("[[1,2],[3]]"), "m"), ParseError);
  EXPECT_THROW(grid_from_json(Json::parse("[[1,\"a\"]]"), "m"), ParseError);
}

TEST(Dataset, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("dataset");
  GraphSpec g;
  g.d = 6;
  g.seed = 3;
  for (SemKind kind : {SemKind::Gim, SemKind::VectorValued}) {
    SemSpec s;
    s.kind = kind;
    s.l = kind == SemKind::VectorValued ? 3 : 1;
    const Dataset ds = generate_dataset(g, s, 40, 5);
    const fs::path path = dir / (to_string(kind) + ".csv");
    write_dataset(path, ds);
    EXPECT_TRUE(fs::exists(sidecar_path(path)));
    const Dataset back = read_dataset(path);
    EXPECT_EQ(back.x.n(), 40u);
    EXPECT_EQ(back.x.d(), 6u);
    EXPECT_EQ(back.x.l(), s.l);
    EXPECT_TRUE(bitwise_equal(back.x.data(), ds.x.data()));
    EXPECT_EQ(back.truth.matrix(), ds.truth.matrix());
    EXPECT_EQ(back.spec.kind, kind);
    EXPECT_EQ(back.seed, ds.seed);
    EXPECT_EQ(back.scales, ds.scales);
    EXPECT_EQ(back.offsets, ds.offsets);
    // Variable-major columns: variable v, dimension k sits at column v*l + k.
    const Matrix grid = read_grid(path);
    EXPECT_EQ(grid(7, 4 * s.l + (s.l - 1)), ds.x(7, 4, s.l - 1));
  }
}

TEST(Dataset, ShapeMismatchRejected) {
  const fs::path dir = scratch_dir("dataset_bad");
  GraphSpec g;
  g.d = 4;
  const Dataset ds = generate_dataset(g, SemSpec{}, 10, 1);
  write_dataset(dir / "x.csv", ds);
  write_atomic(dir / "x.csv", "1,2,3,4\n");
  EXPECT_THROW(read_dataset(dir / "x.csv"), ParseError);
  EXPECT_THROW(read_dataset(dir / "missing.csv"), IoError);
}

TEST(TrainReport, JsonRoundTrip) {
  TrainReport r;
  r.method = "gae";
  r.encoder_dims = {1, 16, 16, 1};
  r.decoder_dims = {1, 16, 16, 1};
  r.trace.push_back(OuterRecord{0, 0.0, 1.0, 0.25, 3.5, 0.1, 3.7, 999});
  r.trace.push_back(OuterRecord{1, 0.25, 10.0, 1e-9, 3.6, 0.09, 3.69, 1000});
  r.termination = Termination::Converged;
  r.outer_iterations = 2;
  r.final_h = 1e-9;
  r.final_alpha = 0.25 + 1e-8;
  r.final_rho = 10.0;
  r.wall_time_seconds = 12.25;
  const TrainReport back = train_report_from_json(Json::parse(to_json(r).dump()));
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.encoder_dims, r.encoder_dims);
  EXPECT_EQ(back.termination, r.termination);
  EXPECT_EQ(back.outer_iterations, 2u);
  EXPECT_EQ(back.final_alpha, r.final_alpha);
  ASSERT_EQ(back.trace.size(), 2u);
  EXPECT_EQ(back.trace[1].h, 1e-9);
  EXPECT_EQ(back.trace[1].best_step, 1000u);
  EXPECT_EQ(back.trace[0].lagrangian, 3.7);
  EXPECT_THROW(parse_termination("stopped"), ParseError);
}

TEST(Metrics, RoundTrip) {
  MetricsRow r;
  r.method = "gae";
  r.sem_kind = "gim";
  r.d = 10;
  r.l = 1;
  r.seed = 3;
  r.metrics.shd = 2;
  r.metrics.tpr = 0.875;
  r.metrics.extra = 1;
  r.metrics.missing = 1;
  r.metrics.wall_time_seconds = 101.5;
  r.repairs = 1;
  const std::string text = std::string(kMetricsHeader) + "\n" + format_metrics_row(r) + "\n";
  const std::vector<MetricsRow> rows = parse_metrics(text);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "gae");
  EXPECT_EQ(rows[0].metrics.shd, 2u);
  EXPECT_EQ(rows[0].metrics.tpr, 0.875);
  EXPECT_EQ(rows[0].metrics.wall_time_seconds, 101.5);
  EXPECT_EQ(rows[0].repairs, 1u);
}

TEST(Metrics, BadFieldReportsColumn) {
  const std::string text = std::string(kMetricsHeader) + "\ngae,gim,10,1,0,x,1,0,0,0,1.0,0\n";
  try {
    parse_metrics(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 16u);
  }
  EXPECT_THROW(parse_metrics("wrong,header\n"), ParseError);
  EXPECT_THROW(parse_metrics(std::string(kMetricsHeader) + "\ngae,gim\n"), ParseError);
}
