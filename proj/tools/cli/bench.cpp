#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cli/cli.hpp"
#include "mlsort/mlsort.hpp"

namespace mlsort::cli {
namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
std::int64_t time_ns(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Row {
  std::string dist;
  std::size_t n = 0, n0 = 0, m = 0, repeat = 0;
  std::string model;
  std::uint64_t seed = 0;
  PhaseTimings timings;
  std::int64_t baseline_sort_ns = 0, baseline_stable_sort_ns = 0;
  double occupancy_fit = 0.0;
  std::size_t deviation_max = 0;
  double deviation_mean = 0.0;
  std::size_t low_tail = 0, high_tail = 0;
  bool verified = false;
  std::string error;
};

void write_row(std::ostream& csv, const Row& r) {
  csv << csv_quote(r.dist) << ',' << r.n << ',' << r.n0 << ',' << r.m << ',' << r.model << ','
      << r.repeat << ',' << r.seed << ',' << r.timings.train_ns << ',' << r.timings.infer_place_ns
      << ',' << r.timings.fixup_ns << ',' << r.timings.sort_ns() << ',' << r.timings.total_ns()
      << ',' << r.baseline_sort_ns << ',' << r.baseline_stable_sort_ns << ','
      << fmt_double(r.occupancy_fit) << ',' << r.deviation_max << ',' << fmt_double(r.deviation_mean)
      << ',' << r.low_tail << ',' << r.high_tail << ',' << (r.verified ? "true" : "false") << ','
      << csv_quote(r.error) << '\n';
}

}  // namespace

const std::vector<std::string>& bench_columns() {
  static const std::vector<std::string> columns = {
      "distribution", "n",           "n0",          "m",
      "model",        "repeat",      "seed",        "train_ns",
      "infer_place_ns", "fixup_ns",  "sort_ns",     "total_ns",
      "baseline_sort_ns", "baseline_stable_sort_ns", "occupancy_fit", "deviation_max",
      "deviation_mean", "low_tail",  "high_tail",   "verified",
      "error"};
  return columns;
}

void run_bench(const BenchOptions& opts, std::ostream& csv, std::ostream& log) {
  const auto& cols = bench_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';

  std::uint64_t cell = 0;
  for (const auto& dist : opts.dists) {
    for (const std::size_t n : opts.sizes) {
      for (std::size_t rep = 0; rep < opts.repeats; ++rep, ++cell) {
        Row row;
        row.dist = dist;
        row.n = n;
        row.repeat = rep;
        row.model = opts.model;
        row.seed = derive_seed(opts.seed, cell);
        try {
          const DistributionSpec spec = preset(dist, row.seed);
          const KeyVector data = generate(spec, n);

          SortConfig cfg;
          cfg.model_kind = opts.model == "pl" ? ModelKind::PiecewiseLinear : ModelKind::Gvm;
          cfg.train.m = opts.m != 0 ? opts.m : default_neurons(spec);
          if (opts.iterations != 0) cfg.train.iterations = opts.iterations;
          cfg.n0 = opts.n0;
          cfg.seed = row.seed;
          cfg.threads = opts.threads;
          cfg.on_warning = [&log, &row](std::string_view msg) {
            log << "mlsort: warning: " << row.dist << " n=" << row.n << ": " << msg << '\n';
          };

          const SortReport report = ml_sort_report(data, cfg);
          row.n0 = report.n0;
          row.m = report.model ? report.model->neuron_count() : 0;
          row.timings = report.timings;
          row.low_tail = report.low_tail;
          row.high_tail = report.high_tail;
          row.occupancy_fit = report.occupancy.n == 0 ? 0.0 : occupancy_fit(report.occupancy);

          KeyVector baseline = data;
          row.baseline_sort_ns = time_ns([&] { std::sort(baseline.begin(), baseline.end()); });
          KeyVector stable = data;
          row.baseline_stable_sort_ns =
              time_ns([&] { std::stable_sort(stable.begin(), stable.end()); });

          row.verified = report.verified && report.sorted == baseline;
          if (report.model) {
            const auto ranks = estimate_ranks(data, *report.model, n, cfg.threads);
            std::vector<RankEstimate> est(n);
            for (std::size_t i = 0; i < n; ++i) est[i] = {data[i], ranks[i]};
            const auto dev = deviation_stats(est, baseline);
            row.deviation_max = dev.max_abs;
            row.deviation_mean = dev.mean_abs;
          }
          if (!row.verified) row.error = "output differs from comparison-sort oracle";
        } catch (const std::exception& e) {
          row.verified = false;
          row.error = e.what();
          log << "mlsort: bench row failed: " << dist << " n=" << n << ": " << e.what() << '\n';
        }
        write_row(csv, row);
      }
    }
  }
}

}  // namespace mlsort::cli
