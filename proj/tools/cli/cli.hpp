#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlsort::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kVerification = 3,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for tests: args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchOptions {
  std::vector<std::string> dists{"uniform", "truncnorm"};
  std::vector<std::size_t> sizes{1000, 10000, 100000, 1000000};
  std::size_t repeats = 10;
  std::size_t m = 0;  // 0: per-distribution default
  std::size_t n0 = 0;
  std::size_t iterations = 0;  // 0: library default
  std::string model = "gvm";
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Column order of the bench CSV. Stable; guarded by a golden test.
const std::vector<std::string>& bench_columns();

// Runs the matrix and writes header + one row per (dist, size, repeat).
// Row failures are reported in the error column; the run continues.
void run_bench(const BenchOptions& opts, std::ostream& csv, std::ostream& log);

}  // namespace mlsort::cli
