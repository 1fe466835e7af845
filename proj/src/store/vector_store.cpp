#include "biaslens/store/vector_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include <fmt/format.h>

namespace biaslens::store {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'B', 'L', 'V', 'S'};

double squared_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return sum;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    auto length = u32();
    need(length);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), length);
    pos_ += length;
    return s;
  }
  [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::format_error, "vector store truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large stores.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    auto n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

template <typename Enum>
Enum checked_enum(std::uint8_t raw, std::uint8_t max, std::string_view what) {
  if (raw > max) throw Error(ErrorCode::format_error, fmt::format("invalid {} code {}", what, raw));
  return static_cast<Enum>(raw);
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("cosine of vectors with dimensions {} and {}", a.size(), b.size()));
  }
  double na = std::sqrt(squared_norm(a));
  double nb = std::sqrt(squared_norm(b));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::zero_norm, "cosine of a zero-norm vector");
  return dot(a, b) / (na * nb);
}

VectorStore::VectorStore(std::uint32_t dimension, std::string embedding_model,
                         std::string build_params_digest) {
  if (dimension == 0) throw Error(ErrorCode::invalid_argument, "store dimension must be positive");
  header_.dimension = dimension;
  header_.embedding_model = std::move(embedding_model);
  header_.build_params_digest = std::move(build_params_digest);
}

void VectorStore::add(IndicatorRecord record, Embedding embedding) {
  if (embedding.size() != header_.dimension) {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("indicator {} has dimension {}, store expects {}", record.id,
                            embedding.size(), header_.dimension));
  }
  double norm = std::sqrt(squared_norm(embedding));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::zero_norm, fmt::format("indicator {} has a degenerate embedding", record.id));
  }
  if (index_.contains(record.id)) {
    throw Error(ErrorCode::invalid_argument, fmt::format("duplicate indicator id {}", record.id));
  }
  index_.emplace(record.id, entries_.size());
  entries_.push_back({std::move(record), std::move(embedding)});
  norms_.push_back(norm);
  header_.entry_count = entries_.size();
}

std::vector<MatchResult> VectorStore::top_m_query(std::span<const float> query,
                                                  std::size_t m) const {
  if (entries_.empty()) throw Error(ErrorCode::empty_store, "query against an empty store");
  if (m == 0) throw Error(ErrorCode::invalid_argument, "m must be at least 1");
  if (query.size() != header_.dimension) {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("query has dimension {}, store expects {}", query.size(),
                            header_.dimension));
  }
  double qnorm = std::sqrt(squared_norm(query));
  if (qnorm == 0.0) throw Error(ErrorCode::zero_norm, "query has zero norm");

  std::vector<double> sims(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    sims[i] = dot(query, entries_[i].embedding) / (qnorm * norms_[i]);
  }
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), 0);
  auto k = std::min(m, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return entries_[a].record.id < entries_[b].record.id;
                    });

  std::vector<MatchResult> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& rec = entries_[order[i]].record;
    out.push_back({rec.id, sims[order[i]], rec.leaning, rec.category, rec.text});
  }
  return out;
}

std::array<std::size_t, 3> VectorStore::leaning_counts() const {
  std::array<std::size_t, 3> counts{};
  for (const auto& e : entries_) ++counts[index_of(e.record.leaning)];
  return counts;
}

std::vector<std::uint8_t> VectorStore::serialize() const {
  Writer w;
  for (auto b : kMagic) w.u8(b);
  w.u32(header_.format_version);
  w.u32(header_.dimension);
  w.u64(entries_.size());
  w.str(header_.embedding_model);
  w.str(header_.build_params_digest);
  for (const auto& [rec, emb] : entries_) {
    w.str(rec.id);
    w.u8(static_cast<std::uint8_t>(rec.category));
    w.str(rec.text);
    w.u8(static_cast<std::uint8_t>(rec.leaning));
    w.u8(static_cast<std::uint8_t>(rec.confidence.value_or(0)));
    w.str(rec.source_article_id);
    w.u8(static_cast<std::uint8_t>(rec.stage));
    for (float x : emb) w.f32(x);
  }
  auto crc = crc32_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

VectorStore VectorStore::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::format_error, "not a vector store file");
  }
  Reader prefix(bytes.subspan(4, 4));
  if (auto version = prefix.u32(); version != kFormatVersion) {
    throw Error(ErrorCode::version_mismatch,
                fmt::format("store format version {} (supported: {})", version, kFormatVersion));
  }
  auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (crc32_of(body) != tail.u32()) {
    throw Error(ErrorCode::checksum_mismatch, "vector store checksum mismatch (corrupt or truncated)");
  }

  Reader r(body.subspan(8));
  auto dimension = r.u32();
  auto count = r.u64();
  auto model = r.str();
  auto digest = r.str();
  VectorStore store(dimension, std::move(model), std::move(digest));
  for (std::uint64_t i = 0; i < count; ++i) {
    IndicatorRecord rec;
    rec.id = r.str();
    rec.category = checked_enum<Category>(r.u8(), 4, "category");
    rec.text = r.str();
    rec.leaning = checked_enum<Leaning>(r.u8(), 2, "leaning");
    if (auto c = r.u8(); c != 0) rec.confidence = c;
    rec.source_article_id = r.str();
    rec.stage = checked_enum<Stage>(r.u8(), 2, "stage");
    Embedding emb(dimension);
    for (auto& x : emb) x = r.f32();
    store.add(std::move(rec), std::move(emb));
  }
  if (!r.at_end()) {
    throw Error(ErrorCode::dimension_mismatch,
                "vector store payload size disagrees with its header dimension/count");
  }
  return store;
}

void VectorStore::save(const std::filesystem::path& path) const {
  auto bytes = serialize();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace biaslens::store
