#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli/cli.hpp"
#include "mlsort/distributions.hpp"
#include "mlsort/key_io.hpp"
#include "mlsort/random.hpp"
#include "test_support.hpp"

using namespace mlsort;
using nlohmann::json;
using mlsort::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

double log_log_slope(const std::vector<double>& n, const std::vector<double>& t) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(t[i]);
  }
  mx /= n.size();
  my /= n.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxy += (std::log(n[i]) - mx) * (std::log(t[i]) - my);
    sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(CliGen, RawMillionKeysIsEightMillionBytes) {
  TempDir dir("cli");
  const auto path = (dir / "u.bin").string();
  const auto r = run_cli({"gen", "--dist", "uniform", "--lo", "-1000", "--hi", "1000", "--n",
                          "1000000", "--seed", "7", "--format", "raw", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::filesystem::file_size(path), 8'000'000u);
  const auto keys = read_keys(path, KeyFormat::Raw);
  EXPECT_EQ(keys, generate(DistributionSpec::uniform(-1000, 1000, 7), 1'000'000));
}

TEST(CliGen, TruncnormPassesKsCheck) {
  TempDir dir("cli");
  const auto path = (dir / "t.txt").string();
  const auto r = run_cli({"gen", "--dist", "truncnorm", "--lo", "-1000", "--hi", "1000", "--mean",
                          "0", "--stddev", "300", "--n", "200000", "--seed", "3", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  auto keys = read_keys(path, KeyFormat::Text);
  std::sort(keys.begin(), keys.end());
  const auto spec = DistributionSpec::truncated_normal(0, 300, -1000, 1000);
  double worst = 0;
  for (int i = 1; i <= 100; ++i) {
    const double x = -1000 + 2000.0 * i / 101;
    const double emp = static_cast<double>(std::upper_bound(keys.begin(), keys.end(), x) - keys.begin()) /
                       keys.size();
    worst = std::max(worst, std::abs(emp - exact_cdf(spec, x)));
  }
  EXPECT_LT(worst, 0.005);
}

TEST(CliGen, InvalidBoundsNameTheFlag) {
  TempDir dir("cli");
  const auto r = run_cli({"gen", "--dist", "uniform", "--lo", "5", "--hi", "1", "--n", "10",
                          "--out", (dir / "x").string()});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("--lo"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "x"));
}

TEST(CliGen, PresetsAndFlagErrors) {
  TempDir dir("cli");
  const auto path = (dir / "p.txt").string();
  EXPECT_EQ(run_cli({"gen", "--dist", "comb5", "--n", "100", "--out", path}).code, 0);
  EXPECT_EQ(read_keys(path, KeyFormat::Text).size(), 100u);
  EXPECT_EQ(run_cli({"gen", "--dist", "comb5", "--lo", "0", "--n", "100", "--out", path}).code,
            cli::kValidation);
  EXPECT_EQ(run_cli({"gen", "--dist", "nope", "--n", "100", "--out", path}).code, cli::kValidation);
  EXPECT_EQ(run_cli({"gen", "--n", "0", "--out", path}).code, cli::kValidation);
  EXPECT_EQ(run_cli({"gen", "--out", path}).code, cli::kValidation);
  EXPECT_EQ(run_cli({"gen", "--n", "10", "--out", (dir / "no/such/dir.txt").string()}).code,
            cli::kIo);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kValidation);
}

TEST(CliGen, EnvironmentOverridesMirrorFlags) {
  TempDir dir("cli");
  const auto path = (dir / "e.txt").string();
  ::setenv("MLSORT_N", "37", 1);
  const auto r = run_cli({"gen", "--out", path});
  ::unsetenv("MLSORT_N");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_keys(path, KeyFormat::Text).size(), 37u);
}

TEST(CliSort, VerifiedOutputAndStats) {
  TempDir dir("cli");
  const auto in = (dir / "in.txt").string(), out = (dir / "out.txt").string();
  write_keys(in, generate(preset("bimodal", 1), 50000), KeyFormat::Text);
  const auto r = run_cli({"sort", "--in", in, "--out", out, "--order", "desc"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = json::parse(r.out);
  EXPECT_TRUE(stats.at("verified").get<bool>());
  EXPECT_EQ(stats.at("n"), 50000);
  EXPECT_EQ(stats.at("order"), "desc");
  EXPECT_TRUE(stats.contains("timings_ns"));
  EXPECT_TRUE(stats.contains("train"));
  for (const auto& [k, v] : stats.at("timings_ns").items()) EXPECT_GE(v.get<long long>(), 0) << k;
  auto sorted = read_keys(out, KeyFormat::Text);
  EXPECT_TRUE(std::is_sorted(sorted.rbegin(), sorted.rend()));
}

TEST(CliSort, NanNamesRecordIndex) {
  TempDir dir("cli");
  const auto in = dir / "nan.txt";
  std::ofstream(in) << "1\n2\n3\nnan\n5\n";
  const auto r = run_cli({"sort", "--in", in.string(), "--out", (dir / "o.txt").string()});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("record index 3"), std::string::npos) << r.err;
}

TEST(CliSort, EmptyAndMissingInputs) {
  TempDir dir("cli");
  std::ofstream(dir / "empty.txt");
  EXPECT_EQ(run_cli({"sort", "--in", (dir / "empty.txt").string(), "--out", (dir / "o").string()}).code,
            cli::kValidation);
  EXPECT_EQ(run_cli({"sort", "--in", (dir / "absent").string(), "--out", (dir / "o").string()}).code,
            cli::kIo);
}

TEST(CliSort, MixturePresetMillionKeys) {
  TempDir dir("cli");
  const auto in = (dir / "in.bin").string(), out = (dir / "out.bin").string();
  ASSERT_EQ(run_cli({"gen", "--dist", "trimodal", "--n", "1000000", "--seed", "2", "--format",
                     "raw", "--out", in}).code, 0);
  const auto r = run_cli({"sort", "--in", in, "--out", out, "--format", "raw", "--m", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).at("verified").get<bool>());
  auto expect = read_keys(in, KeyFormat::Raw);
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(read_keys(out, KeyFormat::Raw), expect);
}

TEST(CliSort, InferPlaceScalesWithSize) {
  TempDir dir("cli");
  auto best_infer = [&](std::size_t n) {
    const auto in = (dir / ("s" + std::to_string(n))).string();
    EXPECT_EQ(run_cli({"gen", "--dist", "uniform", "--n", std::to_string(n), "--format", "raw",
                       "--out", in}).code, 0);
    long long best = -1;
    for (int rep = 0; rep < 3; ++rep) {
      const auto r = run_cli({"sort", "--in", in, "--out", in + ".out", "--format", "raw", "--m", "10"});
      EXPECT_EQ(r.code, 0) << r.err;
      const long long t = json::parse(r.out).at("timings_ns").at("infer_place").get<long long>();
      best = best < 0 ? t : std::min(best, t);
    }
    return static_cast<double>(best);
  };
  const double ratio = best_infer(1'000'000) / best_infer(100'000);
  EXPECT_GE(ratio, 10.0 / 2);
  EXPECT_LE(ratio, 10.0 * 2);
}

TEST(CliSort, OmitTimingsIsReproducible) {
  TempDir dir("cli");
  const auto in = (dir / "in.txt").string();
  write_keys(in, generate(preset("comb5", 4), 20000), KeyFormat::Text);
  const auto a = run_cli({"sort", "--in", in, "--out", (dir / "a").string(), "--omit-timings"});
  const auto b = run_cli({"sort", "--in", in, "--out", (dir / "b").string(), "--omit-timings"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(json::parse(a.out).contains("timings_ns"));
}

TEST(CliBench, HeaderMatchesGoldenFile) {
  std::ifstream golden(std::string(MLSORT_GOLDEN_DIR) + "/bench_header.csv");
  std::string expected;
  ASSERT_TRUE(std::getline(golden, expected));
  std::ostringstream joined;
  for (std::size_t i = 0; i < cli::bench_columns().size(); ++i) {
    joined << (i ? "," : "") << cli::bench_columns()[i];
  }
  EXPECT_EQ(joined.str(), expected);

  const auto r = run_cli({"bench", "--n", "1000", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), expected);
}

TEST(CliBench, RowCountIsMatrixProduct) {
  const auto r = run_cli({"bench", "--dist", "uniform,truncnorm", "--n", "1000,2000,5000,10000",
                          "--repeats", "10", "--iterations", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 1u + 80u);
  const auto& header = rows[0];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), header.size());
    EXPECT_EQ(rows[i][column(header, "verified")], "true") << rows[i][column(header, "error")];
    EXPECT_TRUE(rows[i][column(header, "error")].empty());
    for (const char* c : {"train_ns", "infer_place_ns", "fixup_ns", "sort_ns", "total_ns",
                          "baseline_sort_ns", "baseline_stable_sort_ns"}) {
      EXPECT_GE(std::stoll(rows[i][column(header, c)]), 0) << c;
    }
  }
}

TEST(CliBench, SortTimeSlopeIsLinear) {
  const auto r = run_cli({"bench", "--dist", "uniform", "--n", "10000,100000,1000000",
                          "--repeats", "3", "--m", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  const auto& h = rows[0];
  std::map<double, double> best;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double n = std::stod(rows[i][column(h, "n")]);
    const double t = std::stod(rows[i][column(h, "sort_ns")]);
    best[n] = best.count(n) ? std::min(best[n], t) : t;
  }
  std::vector<double> ns, ts;
  for (auto [n, t] : best) {
    ns.push_back(n);
    ts.push_back(t);
  }
  const double slope = log_log_slope(ns, ts);
  EXPECT_GE(slope, 0.8);
  EXPECT_LE(slope, 1.2);
}

TEST(CliBench, MixtureOccupancyFit) {
  const auto r = run_cli({"bench", "--dist", "bimodal,trimodal,comb5", "--n", "100000",
                          "--repeats", "2", "--m", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  const auto& h = rows[0];
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(std::stod(rows[i][column(h, "occupancy_fit")]), 0.03) << rows[i][0];
    EXPECT_EQ(rows[i][column(h, "m")], "50");
  }
}

TEST(CliBench, RowFailuresAreRecordedAndDeskCeilingEnforced) {
  const auto r = run_cli({"bench", "--dist", "uniform,bogus", "--n", "500", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][column(rows[0], "verified")], "true");
  EXPECT_EQ(rows[2][column(rows[0], "verified")], "false");
  EXPECT_FALSE(rows[2][column(rows[0], "error")].empty());

  EXPECT_EQ(run_cli({"bench", "--n", "2000000"}).code, cli::kValidation);
}

TEST(CliAnalyze, IdenticalFilesHaveZeroDeviation) {
  TempDir dir("cli");
  auto keys = generate(preset("uniform", 1), 1000);
  std::sort(keys.begin(), keys.end());
  const auto path = (dir / "k.txt").string();
  write_keys(path, keys, KeyFormat::Text);
  const auto r = run_cli({"analyze", "--estimates", path, "--estimates-format", "text", "--truth", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("deviation").at("max_abs"), 0);
  EXPECT_EQ(doc.at("occupancy").at("counts").at("1"), 1000);
}

TEST(CliAnalyze, ShuffledTruthAndLengthMismatchFail) {
  TempDir dir("cli");
  const auto keys = generate(preset("uniform", 1), 1000);
  write_keys(dir / "shuffled.txt", keys, KeyFormat::Text);
  write_keys(dir / "short.txt", std::span(keys).first(10), KeyFormat::Text);
  EXPECT_EQ(run_cli({"analyze", "--estimates", (dir / "shuffled.txt").string(), "--estimates-format", "text", "--truth",
                     (dir / "shuffled.txt").string()}).code, cli::kValidation);
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  write_keys(dir / "sorted.txt", sorted, KeyFormat::Text);
  EXPECT_EQ(run_cli({"analyze", "--estimates", (dir / "short.txt").string(), "--estimates-format", "text", "--truth",
                     (dir / "sorted.txt").string()}).code, cli::kValidation);
}

TEST(CliAnalyze, OccupancyNearPoissonForMillionKeys) {
  TempDir dir("cli");
  const auto in = (dir / "in.bin").string(), out = (dir / "out.bin").string();
  const auto est = (dir / "est.csv").string();
  ASSERT_EQ(run_cli({"gen", "--dist", "truncnorm", "--n", "1000000", "--format", "raw",
                     "--out", in}).code, 0);
  ASSERT_EQ(run_cli({"sort", "--in", in, "--out", out, "--format", "raw", "--m", "10",
                     "--estimates", est}).code, 0);
  const auto r = run_cli({"analyze", "--estimates", est, "--truth", out, "--format", "raw"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto occ = json::parse(r.out).at("occupancy");
  const double poisson[] = {0.367879, 0.367879, 0.183940, 0.061313};
  for (int q = 0; q < 4; ++q) {
    EXPECT_NEAR(occ.at("proportions").at(std::to_string(q)).get<double>(), poisson[q], 0.03) << q;
  }
  EXPECT_LT(occ.at("fit_error").get<double>(), 0.03);
}

TEST(CliIndex, BuildAndQuery) {
  TempDir dir("cli");
  const auto in = (dir / "in.txt").string(), prefix = (dir / "idx").string();
  write_keys(in, KeyVector{5, 1, 3, 3, 9, 7}, KeyFormat::Text);
  const auto built = run_cli({"index", "--in", in, "--out", prefix});
  ASSERT_EQ(built.code, 0) << built.err;
  EXPECT_EQ(json::parse(built.out).at("n"), 6);
  const auto q = run_cli({"query", "--index", prefix, "--key", "3,6", "--key=-1"});
  ASSERT_EQ(q.code, 0) << q.err;
  const auto res = json::parse(q.out);
  ASSERT_EQ(res.size(), 3u);
  EXPECT_TRUE(res[0].at("found").get<bool>());
  EXPECT_EQ(res[0].at("first"), 1);
  EXPECT_EQ(res[0].at("last"), 3);
  EXPECT_FALSE(res[1].at("found").get<bool>());
  EXPECT_EQ(res[1].at("first"), 4);
  EXPECT_EQ(res[2].at("first"), 0);
  EXPECT_EQ(run_cli({"query", "--index", (dir / "none").string(), "--key", "1"}).code, cli::kIo);
}
