#include "iga/runner.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using iga::RunConfig;
using iga::RunReport;

RunConfig small_config() {
  RunConfig cfg;
  cfg.dim = 2;
  cfg.nel = 24;
  cfg.degree = 2;
  cfg.interp_degree = 3;
  cfg.skip = 4;
  cfg.geometry = "quarter_annulus_bumps";
  cfg.solution = "smooth";
  return cfg;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

TEST(Run, SingleThreadedRunsAreDeterministic) {
  const RunConfig cfg = small_config();
  const RunReport a = iga::run(cfg);
  const RunReport b = iga::run(cfg);
  EXPECT_EQ(a.err_std.l2, b.err_std.l2);
  EXPECT_EQ(a.err_std.h1, b.err_std.h1);
  EXPECT_EQ(a.err_surr.l2, b.err_surr.l2);
  EXPECT_EQ(a.err_surr.h1, b.err_surr.h1);
  EXPECT_EQ(a.max_diff, b.max_diff);
  EXPECT_EQ(a.a_max, b.a_max);
}

TEST(Run, SpeedupIsTheRatioOfTheReportedTimes) {
  const RunReport r = iga::run(small_config());
  EXPECT_DOUBLE_EQ(r.speedup, r.t_assembly_std / r.t_assembly_surr);
  EXPECT_GT(r.t_assembly_std, 0.0);
  EXPECT_GT(r.t_assembly_surr, 0.0);
}

TEST(Run, SkipOneMatchesStandardAssemblyAndErrors) {
  RunConfig cfg = small_config();
  cfg.skip = 1;
  const RunReport r = iga::run(cfg);
  EXPECT_LE(r.max_diff, 1e-12 * r.a_max);
  char a[64], b[64];
  std::snprintf(a, sizeof(a), "%.6e %.6e", r.err_std.l2, r.err_std.h1);
  std::snprintf(b, sizeof(b), "%.6e %.6e", r.err_surr.l2, r.err_surr.h1);
  EXPECT_STREQ(a, b);
}

TEST(Run, IdentityGeometryIsExactForAnySkip) {
  RunConfig cfg = small_config();
  cfg.geometry = "identity";
  cfg.skip = 5;
  const RunReport r = iga::run(cfg);
  EXPECT_LE(r.max_diff, 1e-12 * r.a_max);
}

TEST(Run, ReportContainsTheConsoleFields) {
  const RunReport r = iga::run(small_config());
  std::ostringstream os;
  iga::print_report(os, r);
  const std::string text = os.str();
  for (const char* needle :
       {"standard assembly time", "surrogate assembly time", "standard solve time",
        "surrogate solve time", "relative errors (standard)", "relative errors (surrogate)",
        "max matrix difference", "assembly speed-up"})
    EXPECT_NE(text.find(needle), std::string::npos) << needle;
}

TEST(Run, DumpsMatrixMarketFiles) {
  RunConfig cfg = small_config();
  cfg.nel = 16;
  cfg.skip = 3;
  cfg.dump_dir = std::filesystem::temp_directory_path() / "iga_dump_test";
  const RunReport r = iga::run(cfg);
  (void)r;
  const auto a = iga::read_matrix_market_file(
      (std::filesystem::path(cfg.dump_dir) / "standard.mtx").string());
  const auto s = iga::read_matrix_market_file(
      (std::filesystem::path(cfg.dump_dir) / "surrogate.mtx").string());
  EXPECT_EQ(a.size(), 18 * 18);
  EXPECT_NEAR(iga::matrix_max_diff(a, s), r.max_diff, 1e-18);
  std::filesystem::remove_all(cfg.dump_dir);
}

TEST(Run, InvalidConfigurationsAreRejected) {
  RunConfig cfg = small_config();
  cfg.interp_degree = 2;
  EXPECT_THROW(iga::run(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.geometry = "moebius";
  EXPECT_THROW(iga::run(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.nel = 8;  // violates nel > 4p
  EXPECT_THROW(iga::run(cfg), std::invalid_argument);
}

TEST(Sweep, EmptyFileGivesHeaderOnlyCsv) {
  const auto path = std::filesystem::temp_directory_path() / "iga_sweep_empty.cfg";
  std::ofstream(path.string()) << "# nothing here\n\n";
  const auto configs = iga::parse_sweep_file(path.string(), small_config());
  EXPECT_TRUE(configs.empty());
  std::ostringstream csv, log;
  iga::sweep(configs, csv, log);
  EXPECT_EQ(csv.str(), iga::csv_header() + "\n");
  std::filesystem::remove(path);
}

TEST(Sweep, MaxDiffShrinksWithSmallerSkip) {
  const auto path = std::filesystem::temp_directory_path() / "iga_sweep_m.cfg";
  {
    std::ofstream os(path.string());
    os << "skip=20\n\nskip=10\n\nskip=5\n";
  }
  RunConfig base = small_config();
  base.nel = 60;
  const auto configs = iga::parse_sweep_file(path.string(), base);
  ASSERT_EQ(configs.size(), 3u);
  std::ostringstream csv, log;
  const int failures = iga::sweep(configs, csv, log);
  EXPECT_EQ(failures, 0);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  const auto col = std::find(header.begin(), header.end(), "max_diff") - header.begin();
  std::vector<double> diffs;
  while (std::getline(in, line)) diffs.push_back(std::stod(split(line)[col]));
  ASSERT_EQ(diffs.size(), 3u);
  EXPECT_GE(diffs[0], diffs[1]);
  EXPECT_GE(diffs[1], diffs[2]);
  std::filesystem::remove(path);
}

TEST(Sweep, RefinementSweepShowsOrderPDecayOfTheH1Column) {
  const auto path = std::filesystem::temp_directory_path() / "iga_sweep_nel.cfg";
  {
    std::ofstream os(path.string());
    os << "nel=20\n\nnel=40\n\nnel=80\n";
  }
  RunConfig base = small_config();
  base.skip = 5;
  const auto configs = iga::parse_sweep_file(path.string(), base);
  std::ostringstream csv, log;
  ASSERT_EQ(iga::sweep(configs, csv, log), 0);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  const auto col = std::find(header.begin(), header.end(), "h1_surr") - header.begin();
  std::vector<double> errs;
  while (std::getline(in, line)) errs.push_back(std::stod(split(line)[col]));
  ASSERT_EQ(errs.size(), 3u);
  const double order =
      0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));
  EXPECT_NEAR(order, 2.0, 0.25);  // degree-p decay under dyadic refinement
  std::filesystem::remove(path);
}

TEST(Sweep, RowFailuresAreRecordedAndTheSweepContinues) {
  const auto path = std::filesystem::temp_directory_path() / "iga_sweep_fail.cfg";
  {
    std::ofstream os(path.string());
    os << "nel=8\n\nnel=20\nskip=3\n";
  }
  const auto configs = iga::parse_sweep_file(path.string(), small_config());
  ASSERT_EQ(configs.size(), 2u);
  std::ostringstream csv, log;
  const int failures = iga::sweep(configs, csv, log);
  EXPECT_EQ(failures, 1);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_NE(line.find("error"), std::string::npos);
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_NE(line.find(",ok,"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Sweep, ParserHandlesBlocksCommentsAndUnknownKeys) {
  const auto path = std::filesystem::temp_directory_path() / "iga_sweep_parse.cfg";
  {
    std::ofstream os(path.string());
    os << "# comment only\n"
       << "nel=40  # inline comment\nskip=5\n\n"
       << "degree=3\ninterp-degree=1\n";
  }
  const auto configs = iga::parse_sweep_file(path.string(), small_config());
  ASSERT_EQ(configs.size(), 2u);
  EXPECT_EQ(configs[0].nel, 40);
  EXPECT_EQ(configs[0].skip, 5);
  EXPECT_EQ(configs[0].degree, 2);  // inherited from base
  EXPECT_EQ(configs[1].degree, 3);
  EXPECT_EQ(configs[1].interp_degree, 1);
  {
    std::ofstream os(path.string());
    os << "mesh=40\n";
  }
  EXPECT_THROW(iga::parse_sweep_file(path.string(), small_config()), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST(CsvRow, ColumnCountMatchesHeader) {
  const RunReport r = iga::run(small_config());
  const auto header = split(iga::csv_header());
  const auto ok_row = split(iga::csv_row(r, "ok", ""));
  RunReport empty;
  empty.config = small_config();
  const auto err_row = split(iga::csv_row(empty, "error", "some, message"));
  EXPECT_EQ(header.size(), ok_row.size());
  EXPECT_EQ(header.size(), err_row.size());
  EXPECT_EQ(err_row.back(), "some; message");
}

}  // namespace
