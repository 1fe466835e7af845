#include "biaslens/gateway/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "biaslens/common.hpp"

namespace biaslens::gateway {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::indicator_generation: return "indicator_generation";
    case PromptKind::descriptor_generation: return "descriptor_generation";
    case PromptKind::descriptor_mapping: return "descriptor_mapping";
    case PromptKind::confidence_scoring: return "confidence_scoring";
  }
  return "unknown";
}

namespace {

struct Placeholder {
  std::size_t begin;  // offset of "{{"
  std::size_t end;    // one past "}}"
  std::string name;
  bool optional;
};

std::vector<Placeholder> scan(const std::string& source) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = source.find("{{", pos)) != std::string::npos) {
    auto close = source.find("}}", pos + 2);
    if (close == std::string::npos) break;
    std::string name = source.substr(pos + 2, close - pos - 2);
    bool optional = !name.empty() && name.front() == '?';
    if (optional) name.erase(0, 1);
    out.push_back({pos, close + 2, text::trim(name), optional});
    pos = close + 2;
  }
  return out;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string source) : source_(std::move(source)) {
  for (auto& p : scan(source_)) {
    if (!p.optional && std::find(required_.begin(), required_.end(), p.name) == required_.end()) {
      required_.push_back(p.name);
    }
  }
}

std::string PromptTemplate::render(const SlotMap& slots) const {
  std::string out;
  out.reserve(source_.size());
  std::size_t cursor = 0;
  for (const auto& p : scan(source_)) {
    out.append(source_, cursor, p.begin - cursor);
    auto it = slots.find(p.name);
    if (it == slots.end() || text::is_blank(it->second)) {
      if (!p.optional) {
        throw Error(ErrorCode::missing_slot, fmt::format("prompt slot '{}' is missing", p.name));
      }
    } else {
      out += it->second;
    }
    cursor = p.end;
  }
  out.append(source_, cursor, std::string::npos);
  return out;
}

void PromptLibrary::set_asset(std::string_view name, std::string content) {
  for (auto kind : kAllPromptKinds) {
    if (to_string(kind) == name) {
      templates_[kind] = PromptTemplate(std::move(content));
      return;
    }
  }
  if (name == "zero_shot_classification") {
    zero_shot_ = PromptTemplate(std::move(content));
  } else if (name == "category_demonstrations") {
    demonstrations_ = text::trim(content);
  } else if (name == "descriptor_examples") {
    descriptor_examples_ = text::trim(content);
  }
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  for (auto name : assets::names()) lib.set_asset(name, std::string(assets::lookup(name)));
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  auto lib = defaults();
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::io_error, fmt::format("prompt directory {} not found", dir.string()));
  }
  for (auto name : assets::names()) {
    auto path = dir / (std::string(name) + ".txt");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    lib.set_asset(name, buffer.str());
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(PromptKind kind) const { return templates_.at(kind); }

}  // namespace biaslens::gateway
