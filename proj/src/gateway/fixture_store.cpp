#include "biaslens/gateway/fixture_store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "biaslens/common.hpp"

namespace biaslens::gateway {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io_error, "sha256 failed");
  }
  std::string out;
  out.reserve(length * 2);
  for (unsigned i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string request_digest(std::string_view kind, std::string_view rendered,
                           std::string_view model) {
  std::string buffer;
  buffer.reserve(kind.size() + rendered.size() + model.size() + 2);
  buffer.append(kind).push_back('\x1f');
  buffer.append(model).push_back('\x1f');
  buffer.append(rendered);
  return sha256_hex(buffer);
}

FixtureStore FixtureStore::load(const std::filesystem::path& path, bool must_exist) {
  FixtureStore store;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (must_exist) {
      throw Error(ErrorCode::io_error, fmt::format("fixture file {} not readable", path.string()));
    }
    return store;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::format_error,
                  fmt::format("{}:{}: fixture record lacks a tab separator", path.string(), line_no));
    }
    try {
      auto value = nlohmann::json::parse(line.substr(tab + 1));
      store.put(line.substr(0, tab), value.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::format_error,
                  fmt::format("{}:{}: bad fixture response: {}", path.string(), line_no, e.what()));
    }
  }
  return store;
}

const std::string* FixtureStore::find(std::string_view digest) const {
  auto it = entries_.find(std::string(digest));
  return it == entries_.end() ? nullptr : &it->second;
}

void FixtureStore::put(std::string digest, std::string response) {
  entries_.insert_or_assign(std::move(digest), std::move(response));
}

std::string FixtureStore::encode_line(std::string_view digest, std::string_view response) {
  return fmt::format("{}\t{}\n", digest, nlohmann::json(std::string(response)).dump());
}

void FixtureStore::append(const std::filesystem::path& path, std::string_view digest,
                          std::string_view response) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << encode_line(digest, response);
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, fmt::format("cannot append to {}", path.string()));
}

void FixtureStore::save(const std::filesystem::path& path) const {
  std::vector<const std::pair<const std::string, std::string>*> sorted;
  sorted.reserve(entries_.size());
  for (const auto& entry : entries_) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto* entry : sorted) out << encode_line(entry->first, entry->second);
  if (!out) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", path.string()));
}

}  // namespace biaslens::gateway
