#include "cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlsort/mlsort.hpp"

namespace mlsort::cli {
namespace {

using nlohmann::json;

constexpr std::size_t kDeskScaleCeiling = 1000000;
constexpr std::size_t kIndexNeurons = 10;

struct SortFlags {
  std::string model = "gvm";
  std::size_t m = 0;
  std::size_t n0 = 0;
  std::size_t iterations = 0;
  std::string order = "asc";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tail_fraction = 0.0;
  std::size_t comb_size = 8;
};

// Adds a flag and its MLSORT_<NAME> environment override.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  std::string env = "MLSORT_" + name;
  std::transform(env.begin(), env.end(), env.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::toupper(c));
  });
  return app->add_option("--" + name, target, help)->envname(env);
}

void add_sort_flags(CLI::App* app, SortFlags& f, std::size_t default_m) {
  flag(app, "model", f.model, "CDF model: gvm or pl")->check(CLI::IsMember({"gvm", "pl"}));
  flag(app, "m", f.m, "hidden-layer neurons (default " + std::to_string(default_m) + ")");
  flag(app, "n0", f.n0, "training sample size (default min(10^4, N))");
  flag(app, "iterations", f.iterations, "Monte-Carlo proposals per training run");
  flag(app, "order", f.order, "asc or desc")->check(CLI::IsMember({"asc", "desc"}));
  flag(app, "seed", f.seed, "master seed");
  flag(app, "threads", f.threads, "inference shards")->check(CLI::PositiveNumber);
  flag(app, "tail-fraction", f.tail_fraction, "rank fraction at each end sent to the fallback sort");
  flag(app, "comb-size", f.comb_size, "repair window for non-monotone models");
}

SortConfig make_config(const SortFlags& f) {
  SortConfig cfg;
  cfg.model_kind = f.model == "pl" ? ModelKind::PiecewiseLinear : ModelKind::Gvm;
  if (f.m != 0) cfg.train.m = f.m;
  cfg.n0 = f.n0;
  if (f.iterations != 0) cfg.train.iterations = f.iterations;
  cfg.order = f.order == "desc" ? SortOrder::Descending : SortOrder::Ascending;
  cfg.seed = f.seed;
  cfg.threads = f.threads;
  cfg.tail_fraction = f.tail_fraction;
  cfg.comb_size = f.comb_size;
  return cfg;
}

KeyVector read_input(const std::string& path, KeyFormat format) {
  KeyVector keys = read_keys(path, format);
  if (keys.empty()) throw ValidationError("input '" + path + "' holds no keys");
  try {
    require_finite(keys);
  } catch (const KeyError& e) {
    throw KeyError(e.index(), "input '" + path + "': non-finite key at record index " +
                                  std::to_string(e.index()));
  }
  return keys;
}

// ---- gen -----------------------------------------------------------------

struct GenFlags {
  std::string dist = "uniform";
  double lo = -1000.0;
  double hi = 1000.0;
  double mean = 0.0;
  double stddev = 300.0;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string out;
};

int cmd_gen(const GenFlags& f, const CLI::App& sub, std::ostream& out) {
  DistributionSpec spec;
  const bool custom_bounds = sub.count("--lo") + sub.count("--hi") > 0;
  if (f.dist == "uniform" || f.dist == "truncnorm") {
    if (!(f.lo < f.hi)) throw ValidationError("--lo/--hi: lower bound must be below upper bound");
    spec = f.dist == "uniform" ? DistributionSpec::uniform(f.lo, f.hi, f.seed)
                               : DistributionSpec::truncated_normal(f.mean, f.stddev, f.lo, f.hi, f.seed);
    if (f.dist == "truncnorm" && !(f.stddev > 0.0)) throw ValidationError("--stddev: must be > 0");
  } else {
    if (custom_bounds) throw ValidationError("--lo/--hi: only valid for uniform and truncnorm");
    spec = preset(f.dist, f.seed);
  }
  if (f.n == 0) throw ValidationError("--n: must be >= 1");
  const KeyVector keys = generate(spec, f.n);
  write_keys(f.out, keys, parse_key_format(f.format));
  out << json{{"dist", f.dist}, {"n", f.n}, {"seed", f.seed}, {"format", f.format}, {"out", f.out}}.dump()
      << '\n';
  return kOk;
}

// ---- sort ----------------------------------------------------------------

struct SortCmdFlags {
  std::string in;
  std::string out;
  std::string format = "text";
  std::string estimates;
  bool omit_timings = false;
};

int cmd_sort(const SortCmdFlags& io, const SortFlags& f, std::ostream& out, std::ostream& err) {
  const KeyFormat format = parse_key_format(io.format);
  const KeyVector keys = read_input(io.in, format);
  SortConfig cfg = make_config(f);
  cfg.on_warning = [&err](std::string_view msg) { err << "mlsort: warning: " << msg << '\n'; };

  const SortReport report = ml_sort_report(keys, cfg);
  write_keys(io.out, report.sorted, format);

  const KeyVector readback = read_keys(io.out, format);
  const bool readback_ok = readback.size() == keys.size() && verify_sorted(readback, cfg.order);

  if (!io.estimates.empty()) {
    std::ofstream est(io.estimates, std::ios::trunc);
    if (!est) throw IoError("cannot open '" + io.estimates + "' for writing");
    std::vector<std::size_t> ranks;
    if (report.model) {
      ranks = estimate_ranks(keys, *report.model, keys.size(), cfg.threads);
    } else {
      KeyVector sorted = report.sorted;
      std::sort(sorted.begin(), sorted.end());
      for (const double k : keys) {
        ranks.push_back(static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin()));
      }
    }
    char buf[40];
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, keys[i]);
      est.write(buf, res.ptr - buf);
      est << ',' << ranks[i] << '\n';
    }
    if (!est) throw IoError("write error on '" + io.estimates + "'");
  }

  json stats = {
      {"n", keys.size()},
      {"n0", report.n0},
      {"model", f.model},
      {"m", report.model ? report.model->neuron_count() : 0},
      {"order", f.order},
      {"seed", f.seed},
      {"body", report.body_size},
      {"low_tail", report.low_tail},
      {"high_tail", report.high_tail},
      {"drift_warning", report.drift_warning},
      {"used_comb", report.used_comb},
      {"occupancy", to_json(report.occupancy)},
      {"verified", report.verified && readback_ok},
  };
  if (const auto* gvm = dynamic_cast<const GvmModel*>(report.model.get())) {
    stats["train"] = {{"final_loss", gvm->stats().final_loss},
                      {"initial_loss", gvm->stats().initial_loss},
                      {"accepted", gvm->stats().accepted},
                      {"iterations", gvm->stats().iterations_run}};
  }
  if (!io.omit_timings) {
    const auto& t = report.timings;
    stats["timings_ns"] = {{"train", t.train_ns},
                           {"infer_place", t.infer_place_ns},
                           {"fixup", t.fixup_ns},
                           {"sort", t.sort_ns()},
                           {"total", t.total_ns()}};
  }
  out << stats.dump(2) << '\n';
  if (!readback_ok) throw VerificationError("output '" + io.out + "' failed read-back verification");
  return kOk;
}

// ---- analyze ---------------------------------------------------------------

// "csv": key,rank per line. "text"/"raw": a key file whose position is the rank.
std::vector<RankEstimate> read_estimates(const std::string& path, const std::string& format) {
  std::vector<RankEstimate> estimates;
  if (format != "csv") {
    const KeyVector keys = read_keys(path, parse_key_format(format));
    for (std::size_t i = 0; i < keys.size(); ++i) estimates.push_back({keys[i], i});
    return estimates;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const char* b = line.data();
    double key = 0.0;
    std::size_t rank = 0;
    bool ok = comma != std::string::npos;
    if (ok) {
      const auto k = std::from_chars(b, b + comma, key);
      const auto r = std::from_chars(b + comma + 1, b + line.size(), rank);
      ok = k.ec == std::errc() && k.ptr == b + comma && r.ec == std::errc() &&
           r.ptr == b + line.size();
    }
    if (!ok) throw IoError("'" + path + "' line " + std::to_string(line_no) + ": expected key,rank");
    estimates.push_back({key, rank});
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return estimates;
}

int cmd_analyze(const std::string& estimates_path, const std::string& estimates_format,
                const std::string& truth_path, const std::string& truth_format, std::ostream& out) {
  const auto estimates = read_estimates(estimates_path, estimates_format);
  const KeyVector truth = read_keys(truth_path, parse_key_format(truth_format));
  require_finite(truth);
  if (estimates.size() != truth.size()) {
    throw ValidationError("length mismatch: " + std::to_string(estimates.size()) +
                          " estimates vs " + std::to_string(truth.size()) + " truth keys");
  }
  if (!verify_sorted(truth)) throw ValidationError("truth '" + truth_path + "' is not sorted ascending");
  if (truth.empty()) throw ValidationError("no keys to analyze");

  std::vector<std::size_t> ranks;
  ranks.reserve(estimates.size());
  for (const auto& e : estimates) ranks.push_back(std::min(e.rank, truth.size() - 1));
  const auto hist = occupancy_from_ranks(ranks, truth.size());
  const auto dev = deviation_stats(estimates, truth);
  out << json{{"n", truth.size()}, {"occupancy", to_json(hist)}, {"deviation", to_json(dev)}}.dump(2)
      << '\n';
  return kOk;
}

// ---- index / query -----------------------------------------------------------

int cmd_index(const std::string& in, const std::string& prefix, const std::string& format,
              const SortFlags& f, std::ostream& out, std::ostream& err) {
  const KeyVector keys = read_input(in, parse_key_format(format));
  SortConfig cfg = make_config(f);
  if (f.m == 0) cfg.train.m = kIndexNeurons;
  cfg.on_warning = [&err](std::string_view msg) { err << "mlsort: warning: " << msg << '\n'; };
  const RankIndex index = RankIndex::build(keys, cfg);
  index.save(prefix);
  out << json{{"n", index.size()},
              {"m", index.model().neuron_count()},
              {"max_observed_deviation", index.max_observed_deviation()},
              {"final_loss", index.model().stats().final_loss}}
             .dump(2)
      << '\n';
  return kOk;
}

int cmd_query(const std::string& prefix, const std::vector<double>& keys, std::ostream& out) {
  const RankIndex index = RankIndex::load(prefix);
  json results = json::array();
  for (const double k : keys) {
    const auto hit = index.query(k);
    results.push_back({{"key", k}, {"found", hit.found}, {"first", hit.first}, {"last", hit.last}});
  }
  out << results.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned-CDF sorting: generate, sort, benchmark and analyze key sets"};
  app.name("mlsort");
  app.require_subcommand(1);

  GenFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "generate synthetic keys");
  flag(gen, "dist", gen_flags.dist, "uniform, truncnorm, bimodal, trimodal or comb5");
  flag(gen, "lo", gen_flags.lo, "lower bound (uniform/truncnorm)");
  flag(gen, "hi", gen_flags.hi, "upper bound (uniform/truncnorm)");
  flag(gen, "mean", gen_flags.mean, "truncnorm mean");
  flag(gen, "stddev", gen_flags.stddev, "truncnorm standard deviation");
  flag(gen, "n", gen_flags.n, "number of keys")->required();
  flag(gen, "seed", gen_flags.seed, "generator seed");
  flag(gen, "format", gen_flags.format, "text or raw")->check(CLI::IsMember({"text", "raw"}));
  flag(gen, "out", gen_flags.out, "output path")->required();

  SortCmdFlags sort_io;
  SortFlags sort_flags;
  auto* sort = app.add_subcommand("sort", "sort a key file; stats JSON on stdout");
  flag(sort, "in", sort_io.in, "input key file")->required();
  flag(sort, "out", sort_io.out, "output key file")->required();
  flag(sort, "format", sort_io.format, "text or raw")->check(CLI::IsMember({"text", "raw"}));
  flag(sort, "estimates", sort_io.estimates, "also write key,rank estimates (CSV) here");
  sort->add_flag("--omit-timings", sort_io.omit_timings, "leave timings out of the stats JSON")
      ->envname("MLSORT_OMIT_TIMINGS");
  add_sort_flags(sort, sort_flags, TrainConfig{}.m);

  BenchOptions bench_opts;
  std::string bench_out;
  bool full_scale = false;
  auto* bench = app.add_subcommand("bench", "run a distribution x size x repeat matrix; CSV out");
  flag(bench, "dist", bench_opts.dists, "comma-separated distributions")->delimiter(',');
  flag(bench, "n", bench_opts.sizes, "comma-separated sizes")->delimiter(',');
  flag(bench, "repeats", bench_opts.repeats, "repeats per cell")->check(CLI::PositiveNumber);
  flag(bench, "m", bench_opts.m, "hidden-layer neurons (default per distribution)");
  flag(bench, "n0", bench_opts.n0, "training sample size");
  flag(bench, "iterations", bench_opts.iterations, "Monte-Carlo proposals");
  flag(bench, "model", bench_opts.model, "gvm or pl")->check(CLI::IsMember({"gvm", "pl"}));
  flag(bench, "seed", bench_opts.seed, "master seed");
  flag(bench, "threads", bench_opts.threads, "inference shards")->check(CLI::PositiveNumber);
  flag(bench, "out", bench_out, "CSV path (default stdout)");
  bench->add_flag("--full-scale", full_scale, "allow sizes above 10^6")->envname("MLSORT_FULL_SCALE");

  std::string est_path, truth_path, analyze_format = "text", est_format = "csv";
  auto* analyze = app.add_subcommand("analyze", "occupancy and deviation stats for rank estimates");
  flag(analyze, "estimates", est_path, "rank estimates file")->required();
  flag(analyze, "estimates-format", est_format,
       "csv (key,rank lines) or text/raw (a key file; rank = position)")
      ->check(CLI::IsMember({"csv", "text", "raw"}));
  flag(analyze, "truth", truth_path, "ascending sorted key file")->required();
  flag(analyze, "format", analyze_format, "truth file format: text or raw")->check(CLI::IsMember({"text", "raw"}));

  std::string index_in, index_out, index_format = "text";
  SortFlags index_flags;
  auto* index = app.add_subcommand("index", "build a learned rank index");
  flag(index, "in", index_in, "input key file")->required();
  flag(index, "out", index_out, "artifact prefix (<prefix>.model.json, <prefix>.keys)")->required();
  flag(index, "format", index_format, "text or raw")->check(CLI::IsMember({"text", "raw"}));
  add_sort_flags(index, index_flags, kIndexNeurons);

  std::string query_prefix;
  std::vector<double> query_keys;
  auto* query = app.add_subcommand("query", "look keys up in a saved rank index");
  flag(query, "index", query_prefix, "artifact prefix")->required();
  flag(query, "key", query_keys, "keys to look up")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) return cmd_gen(gen_flags, *gen, out);
    if (*sort) return cmd_sort(sort_io, sort_flags, out, err);
    if (*bench) {
      for (const auto n : bench_opts.sizes) {
        if (n > kDeskScaleCeiling && !full_scale) {
          throw ValidationError("--n: " + std::to_string(n) + " exceeds the desk-scale ceiling 10^6; pass --full-scale");
        }
      }
      if (bench_out.empty()) {
        run_bench(bench_opts, out, err);
      } else {
        std::ofstream csv(bench_out, std::ios::trunc);
        if (!csv) throw IoError("cannot open '" + bench_out + "' for writing");
        run_bench(bench_opts, csv, err);
        if (!csv) throw IoError("write error on '" + bench_out + "'");
      }
      return kOk;
    }
    if (*analyze) return cmd_analyze(est_path, est_format, truth_path, analyze_format, out);
    if (*index) return cmd_index(index_in, index_out, index_format, index_flags, out, err);
    if (*query) return cmd_query(query_prefix, query_keys, out);
  } catch (const ValidationError& e) {
    err << "mlsort: error: " << e.what() << '\n';
    return kValidation;
  } catch (const TrainingError& e) {
    err << "mlsort: error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "mlsort: error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "mlsort: internal error: " << e.what() << '\n';
    return kVerification;
  }
  return kValidation;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"mlsort"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mlsort::cli
