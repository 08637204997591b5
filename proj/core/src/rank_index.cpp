#include "mlsort/rank_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "mlsort/error.hpp"
#include "mlsort/key_io.hpp"
#include "mlsort/random.hpp"

namespace mlsort {
namespace {

constexpr std::uint64_t kIndexTrainStream = 2;
constexpr char kKeysMagic[7] = {'M', 'L', 'S', 'R', 'I', 'D', 'X'};
constexpr std::size_t kKeysHeaderSize = 16;

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  std::filesystem::path p = prefix;
  p += suffix;
  return p;
}

std::vector<std::pair<double, double>> position_pairs(std::span<const double> sorted,
                                                      std::size_t count) {
  const std::size_t n = sorted.size();
  if (n == 1 || sorted.front() == sorted.back()) return {{sorted.front(), 0.0}};
  count = std::clamp<std::size_t>(count, 2, n);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(count);
  const double step = static_cast<double>(n - 1) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = static_cast<std::size_t>(std::llround(step * static_cast<double>(k)));
    pairs.emplace_back(sorted[p], static_cast<double>(p) / static_cast<double>(n));
  }
  return pairs;
}

}  // namespace

RankIndex::RankIndex(KeyVector keys, GvmModel model, std::size_t max_deviation)
    : keys_(std::move(keys)), model_(std::move(model)), max_deviation_(max_deviation) {}

RankIndex RankIndex::build(std::span<const double> data, const SortConfig& cfg) {
  if (data.empty()) throw ValidationError("rank index: no keys");
  SortConfig sort_cfg = cfg;
  sort_cfg.order = SortOrder::Ascending;
  KeyVector sorted = ml_sort(data, sort_cfg);
  const std::size_t n = sorted.size();

  const std::size_t n0 = cfg.n0 == 0 ? std::min(kDefaultTrainingSize, n) : cfg.n0;
  TrainConfig train = cfg.train;
  train.seed = derive_seed(cfg.seed, kIndexTrainStream);
  GvmModel model(train_gvm(position_pairs(sorted, std::min(n0, cfg.max_train_pairs)), train));

  std::size_t max_dev = 0;
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first + 1;
    while (last < n && sorted[last] == sorted[first]) ++last;
    const std::size_t r = estimate_rank(model, sorted[first], n).rank;
    const std::size_t dev = r < first ? first - r : r >= last ? r - (last - 1) : 0;
    max_dev = std::max(max_dev, dev);
    first = last;
  }

  RankIndex index(std::move(sorted), std::move(model), max_dev);
  for (const double x : index.keys_) {
    const auto [lo, hi] = index.search_window(x);
    const auto it = std::lower_bound(index.keys_.begin() + static_cast<std::ptrdiff_t>(lo),
                                     index.keys_.begin() + static_cast<std::ptrdiff_t>(hi), x);
    if (it == index.keys_.begin() + static_cast<std::ptrdiff_t>(hi) || *it != x) {
      throw VerificationError("rank index: deviation window misses a stored key");
    }
  }
  return index;
}

std::pair<std::size_t, std::size_t> RankIndex::search_window(double x) const {
  const std::size_t n = keys_.size();
  const std::size_t r = estimate_rank(model_, x, n).rank;
  const std::size_t lo = r > max_deviation_ ? r - max_deviation_ : 0;
  const std::size_t hi = std::min(n, r + max_deviation_ + 1);
  return {lo, hi};
}

RankLookup RankIndex::query(double x) const {
  if (!std::isfinite(x)) throw KeyError(0, "rank index: non-finite query key");
  const std::size_t n = keys_.size();
  const auto [lo, hi] = search_window(x);
  const auto begin = keys_.begin();

  // The global lower bound lies in [lo, hi] iff both window edges agree.
  std::size_t first;
  if (lo > 0 && !(keys_[lo - 1] < x)) {
    first = static_cast<std::size_t>(
        std::lower_bound(begin, begin + static_cast<std::ptrdiff_t>(lo), x) - begin);
  } else if (hi < n && keys_[hi] < x) {
    first = static_cast<std::size_t>(
        std::lower_bound(begin + static_cast<std::ptrdiff_t>(hi), keys_.end(), x) - begin);
  } else {
    first = static_cast<std::size_t>(std::lower_bound(begin + static_cast<std::ptrdiff_t>(lo),
                                                      begin + static_cast<std::ptrdiff_t>(hi), x) -
                                     begin);
  }

  if (first == n || keys_[first] != x) return {false, first, first};

  // Gallop to the end of the block of equals.
  std::size_t step = 1;
  while (first + step < n && keys_[first + step] == x) step *= 2;
  const auto from = begin + static_cast<std::ptrdiff_t>(first + step / 2);
  const auto to = begin + static_cast<std::ptrdiff_t>(std::min(n, first + step));
  const auto last = static_cast<std::size_t>(std::upper_bound(from, to, x) - begin);
  return {true, first, last};
}

void RankIndex::save(const std::filesystem::path& prefix) const {
  const auto keys_path = with_suffix(prefix, ".keys");
  const auto model_path = with_suffix(prefix, ".model.json");

  std::string bytes(kKeysMagic, sizeof kKeysMagic);
  bytes.push_back(static_cast<char>(kRankIndexFormatVersion));
  const auto count = static_cast<std::uint64_t>(keys_.size());
  for (int shift = 0; shift < 64; shift += 8) bytes.push_back(static_cast<char>((count >> shift) & 0xffU));
  bytes.reserve(bytes.size() + keys_.size() * 8);
  for (const double k : keys_) append_le64(bytes, k);
  {
    std::ofstream out(keys_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + keys_path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write error on '" + keys_path.string() + "'");
  }

  const nlohmann::json doc = {
      {"format", "mlsort.rank_index"},
      {"version", kRankIndexFormatVersion},
      {"n", keys_.size()},
      {"max_observed_deviation", max_deviation_},
      {"keys_file", keys_path.filename().string()},
      {"model", model_.to_json()},
  };
  std::ofstream out(model_path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + model_path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write error on '" + model_path.string() + "'");
}

RankIndex RankIndex::load(const std::filesystem::path& prefix) {
  const auto keys_path = with_suffix(prefix, ".keys");
  const auto model_path = with_suffix(prefix, ".model.json");

  nlohmann::json doc;
  {
    std::ifstream in(model_path);
    if (!in) throw IoError("cannot open '" + model_path.string() + "' for reading");
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("'" + model_path.string() + "': " + e.what());
    }
  }

  std::size_t n = 0;
  std::size_t max_dev = 0;
  try {
    if (doc.at("format").get<std::string>() != "mlsort.rank_index" ||
        doc.at("version").get<int>() != kRankIndexFormatVersion) {
      throw ValidationError("'" + model_path.string() + "': unsupported index format/version");
    }
    n = doc.at("n").get<std::size_t>();
    max_dev = doc.at("max_observed_deviation").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + model_path.string() + "': " + e.what());
  }
  GvmModel model = GvmModel::from_json(doc.at("model"));

  std::ifstream in(keys_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + keys_path.string() + "' for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kKeysHeaderSize || !std::equal(kKeysMagic, kKeysMagic + 7, bytes.begin()) ||
      static_cast<int>(static_cast<unsigned char>(bytes[7])) != kRankIndexFormatVersion) {
    throw IoError("'" + keys_path.string() + "': not a version-1 mlsort index key file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint64_t count = 0;
  for (int k = 15; k >= 8; --k) count = (count << 8) | p[k];
  if (count != n || bytes.size() != kKeysHeaderSize + count * 8) {
    throw IoError("'" + keys_path.string() + "': key count does not match the model document");
  }
  KeyVector keys(count);
  for (std::size_t i = 0; i < count; ++i) keys[i] = load_le64(p + kKeysHeaderSize + 8 * i);
  if (!std::is_sorted(keys.begin(), keys.end())) {
    throw ValidationError("'" + keys_path.string() + "': stored keys are not sorted");
  }
  return RankIndex(std::move(keys), std::move(model), max_dev);
}

}  // namespace mlsort
