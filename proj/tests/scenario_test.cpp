#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "twobody/twobody.hpp"

namespace twobody {
namespace {

namespace fs = std::filesystem;
const double kSqrt2 = std::sqrt(2.0);

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("twobody_test_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::size_t column(const OutputTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw std::out_of_range(name);
}

TEST(ParseArgs, FigureOnePreset) {
  const ScenarioSpec spec = parse_args(std::vector<std::string>{"figure1"});
  EXPECT_EQ(spec.kind, SpecKind::figure1);
  EXPECT_EQ(spec.cfg.m1_inf, 1.0);
  EXPECT_EQ(spec.cfg.s, kSqrt2);
  EXPECT_EQ(spec.cfg.G, 1.0);
  EXPECT_EQ(spec.cfg.c, 1.0);
  EXPECT_EQ(spec.grid.lo, 0.0);
  EXPECT_NEAR(spec.grid.hi, kSqrt2, 1e-15);
  EXPECT_EQ(spec.grid.count, 512u);
  EXPECT_EQ(spec.format, TableFormat::csv);
  EXPECT_EQ(spec.out, "-");
  EXPECT_EQ(spec.units, Units::geometrized);
}

TEST(ParseArgs, AutoUpperEnergy) {
  const ScenarioSpec spec = parse_args(std::vector<std::string>{"general", "--m1", "1", "--s", "2", "--eb-max", "auto"});
  EXPECT_NEAR(spec.grid.hi, 3.0 - std::sqrt(3.0), 1e-15);
  EXPECT_EQ(spec.cfg.s, 2.0);
}

TEST(ParseArgs, OtherPresets) {
  const ScenarioSpec f3 = parse_args(std::vector<std::string>{"figure3"});
  EXPECT_EQ(f3.cfg.s, 1e4);
  EXPECT_DOUBLE_EQ(f3.grid.hi, 6e4);
  EXPECT_GT(f3.grid.lo, 0.0);
  const ScenarioSpec f4 = parse_args(std::vector<std::string>{"figure4", "--samples", "7"});
  EXPECT_EQ(f4.cfg.s, 1.0);
  EXPECT_DOUBLE_EQ(f4.grid.hi, 3.0);
  EXPECT_EQ(f4.grid.count, 7u);
  const ScenarioSpec si = parse_args(std::vector<std::string>{"celestial", "--units", "si", "--m1", "5", "--s", "100"});
  EXPECT_EQ(si.cfg.G, 6.67430e-11);
  EXPECT_EQ(si.cfg.c, 299792458.0);
}

void expect_usage_error(const std::vector<std::string>& args, const std::string& flag) {
  try {
    parse_args(args);
    FAIL() << "no error for " << flag;
  } catch (const UsageError& e) {
    EXPECT_EQ(e.flag(), flag) << e.what();
  }
}

TEST(ParseArgs, UsageErrors) {
  expect_usage_error({"figure1", "--c", "-1"}, "--c");
  expect_usage_error({"general", "--s", "0.5"}, "--s");
  expect_usage_error({"general", "--samples", "1"}, "--samples");
  expect_usage_error({"general", "--eb-max", "9"}, "--eb-max");
  expect_usage_error({"figure2", "--format", "xml"}, "--format");
  expect_usage_error({"equal-mass", "--s", "2"}, "--s");
  EXPECT_THROW(parse_args(std::vector<std::string>{"figure1", "--bogus", "1"}), UsageError);
  EXPECT_THROW(parse_args(std::vector<std::string>{}), UsageError);
  EXPECT_THROW(parse_args(std::vector<std::string>{"figure9"}), UsageError);
}

TEST(Run, FigureOneEndpoints) {
  ScenarioSpec spec = parse_args(std::vector<std::string>{"figure1", "--samples", "32"});
  const OutputTable t = run(spec);
  ASSERT_EQ(t.rows.size(), 32u);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"eb", "m1", "m2", "v1_abs", "f1"}));
  const auto& first = t.rows.front();
  EXPECT_EQ(first[0], 0.0);
  EXPECT_DOUBLE_EQ(first[1], 1.0);
  EXPECT_DOUBLE_EQ(first[2], kSqrt2);
  EXPECT_EQ(first[3], 0.0);
  EXPECT_NEAR(first[4], 0.585786, 1e-6);
  const auto& last = t.rows.back();
  EXPECT_NEAR(last[0], kSqrt2, 1e-10);
  EXPECT_NEAR(last[1], 0.0, 1e-10);
  EXPECT_NEAR(last[2], 1.0, 1e-10);
  EXPECT_NEAR(last[3], 1.0, 1e-10);
  EXPECT_NEAR(last[4], 1.0 / kSqrt2, 1e-10);
}

TEST(Run, FigureThreeRow) {
  ScenarioSpec spec = parse_args(std::vector<std::string>{"figure3", "--r-min", "1e4", "--r-max", "2e4"});
  const OutputTable t = run(spec);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"r", "m1", "eb", "v1_abs"}));
  EXPECT_EQ(t.rows.front()[0], 1e4);
  EXPECT_NEAR(t.rows.front()[1], 0.367879, 1e-6);
  EXPECT_FALSE(t.metadata.contains("limit_row"));
}

TEST(Run, FigureFourLimitRowAndHalfEnergy) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure4", "--samples", "10"}));
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_EQ(t.rows.front()[0], 0.0);
  EXPECT_DOUBLE_EQ(t.rows.front()[2], 1.0);  // eb1 = E_c(s=1)/2
  EXPECT_TRUE(t.metadata.contains("limit_row"));
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i][0], t.rows[i - 1][0]);
}

TEST(Run, FigureTwoIsMonotoneAndEndsAtExhaustion) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure2", "--samples", "64"}));
  const std::size_t r = column(t, "r"), m1 = column(t, "m1");
  ASSERT_EQ(t.rows.size(), 64u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i][r], t.rows[i - 1][r]);
  EXPECT_LT(t.rows.back()[m1], 1e-9);
  EXPECT_TRUE(t.metadata.contains("terminal_row"));
  EXPECT_EQ(t.metadata["solver"]["stop"], "mass_exhausted");
}

TEST(Run, RowsSatisfyInvariants) {
  std::mt19937_64 rng(301);
  for (const char* kind : {"figure1", "figure2", "general"}) {
    const ScenarioSpec spec = parse_args(std::vector<std::string>{kind, "--s", "3", "--samples", "200"});
    const OutputTable t = run(spec);
    const std::size_t eb = column(t, "eb"), m1 = column(t, "m1"), m2 = column(t, "m2"), v1 = column(t, "v1_abs");
    std::uniform_int_distribution<std::size_t> pick(0, t.rows.size() - 1);
    for (int k = 0; k < 10; ++k) {
      const auto& row = t.rows[pick(rng)];
      const double s = spec.cfg.s;
      EXPECT_NEAR(row[m1] + row[m2], 1.0 + s - row[eb], 1e-10) << kind;
      EXPECT_NEAR(row[m1] * row[m1], 1.0 - row[v1] * row[v1], 1e-10) << kind;
      EXPECT_NEAR(row[m2] * row[m2], s * s - row[v1] * row[v1], 1e-10) << kind;
    }
  }
}

TEST(Run, WithTimeAddsIncreasingColumn) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"equal-mass", "--r-min", "0.1", "--r-max", "3", "--samples", "50", "--with-time"}));
  const std::size_t tc = column(t, "t");
  EXPECT_EQ(t.rows.back()[tc], 0.0);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i][tc], t.rows[i - 1][tc]);
}

TEST(Run, ErrataDiagnostic) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure2", "--samples", "16", "--errata-diagnostic"}));
  const auto& e = t.metadata["errata_diagnostic"];
  EXPECT_NEAR(e["m2_printed_at_zero"].get<double>(), -kSqrt2, 1e-15);
  EXPECT_NEAR(e["m2_corrected_at_zero"].get<double>(), kSqrt2, 1e-15);
  EXPECT_GT(e["riccati_printed_max_residual"].get<double>(), 1e-3);
  EXPECT_LT(e["riccati_corrected_max_residual"].get<double>(), 1e-8);
}

TEST(Table, NumbersUseDotAndSeventeenDigits) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(parse_number(format_number(0.1)), 0.1);
  EXPECT_EQ(format_number(1.0 / 3.0), "0.33333333333333331");
}

TEST(Table, CsvAndJsonRoundTripBitExact) {
  OutputTable t;
  t.columns = {"a", "b"};
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> uni(-1e6, 1e6);
  for (int i = 0; i < 50; ++i) t.rows.push_back({uni(rng), uni(rng) * 1e-300});
  t.rows.push_back({0.5, -0.0});
  for (TableFormat f : {TableFormat::csv, TableFormat::json}) {
    const std::string text = serialize(t, f);
    const OutputTable back = f == TableFormat::csv ? from_csv(text) : from_json(text);
    EXPECT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(back.rows[i][j], t.rows[i][j]);
  }
  EXPECT_EQ(to_csv(t).find("0,5"), std::string::npos);
}

TEST(Table, JsonShape) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure1", "--samples", "17"}));
  const auto j = nlohmann::json::parse(to_json(t));
  EXPECT_EQ(j["rows"].size(), 17u);
  EXPECT_TRUE(j.contains("metadata"));
  EXPECT_EQ(j["metadata"]["version"], kVersion);
}

TEST(Table, MetadataSurvivesCsv) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure4", "--samples", "5"}));
  const OutputTable back = from_csv(to_csv(t));
  EXPECT_EQ(back.metadata["kind"], "figure4");
  EXPECT_EQ(back.metadata["config"]["s"], 1.0);
}

TEST(Table, WriteErrorsNameThePath) {
  OutputTable t;
  t.columns = {"x"};
  t.rows = {{1.0}};
  try {
    write_table(t, TableFormat::csv, "/nonexistent-dir/sub/out.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/sub/out.csv"), std::string::npos);
  }
}

TEST(Plot, DeterministicSvg) {
  const OutputTable t = run(parse_args(std::vector<std::string>{"figure4", "--samples", "40"}));
  const std::string a = render_svg(t), b = render_svg(t);
  EXPECT_EQ(a, b);
  std::size_t polylines = 0;
  for (std::size_t pos = a.find("<polyline"); pos != std::string::npos; pos = a.find("<polyline", pos + 1)) ++polylines;
  EXPECT_EQ(polylines, 3u);
  for (const char* name : {"m1", "eb1", "v1_abs"}) EXPECT_NE(a.find(name), std::string::npos);
}

TEST(Plot, ConstantColumnAndTooFewRows) {
  OutputTable t;
  t.columns = {"x", "flat"};
  t.rows = {{0.0, 2.0}, {1.0, 2.0}, {2.0, 2.0}};
  const std::string svg = render_svg(t);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  t.rows.resize(1);
  EXPECT_THROW(render_svg(t), DomainError);
}

TEST(Cli, ExitCodesAndDeterminism) {
  TempDir dir;
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string(), plot = (dir / "p.svg").string();
  std::ostringstream err;
  EXPECT_EQ(run_cli({"figure1", "--samples", "32", "--out", a}, err), kExitOk);
  EXPECT_EQ(run_cli({"figure1", "--samples", "32", "--out", b, "--plot", plot}, err), kExitOk);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_TRUE(fs::exists(plot));
  EXPECT_EQ(run_cli({"figure1", "--c", "-1"}, err), kExitUsage);
  EXPECT_NE(err.str().find("--c"), std::string::npos);
  EXPECT_EQ(run_cli({"general", "--out", "/nonexistent-dir/x.csv", "--samples", "4"}, err), kExitSolver);
}

}  // namespace
}  // namespace twobody
