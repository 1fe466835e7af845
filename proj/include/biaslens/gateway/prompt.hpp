#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens::gateway {

enum class PromptKind {
  indicator_generation,
  descriptor_generation,
  descriptor_mapping,
  confidence_scoring,
};

inline constexpr PromptKind kAllPromptKinds[] = {
    PromptKind::indicator_generation, PromptKind::descriptor_generation,
    PromptKind::descriptor_mapping, PromptKind::confidence_scoring};

/// Stable tag, also the asset file stem ("indicator_generation").
std::string_view to_string(PromptKind kind);

using SlotMap = std::map<std::string, std::string, std::less<>>;

/// A prompt template with `{{SLOT}}` placeholders. `{{?SLOT}}` marks an
/// optional slot that may be absent or empty.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  explicit PromptTemplate(std::string source);

  /// Substitutes every placeholder. Throws Error(missing_slot) if a
  /// required slot is absent or blank.
  [[nodiscard]] std::string render(const SlotMap& slots) const;

  [[nodiscard]] const std::vector<std::string>& required_slots() const { return required_; }
  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> required_;
};

/// Templates for the four prompt kinds plus the auxiliary text blocks
/// (category demonstrations, descriptor output examples, zero-shot
/// classification template).
class PromptLibrary {
 public:
  /// Compiled-in defaults from assets/prompts.
  static PromptLibrary defaults();

  /// Defaults overridden by any `<name>.txt` present in `dir`.
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  [[nodiscard]] const PromptTemplate& get(PromptKind kind) const;
  [[nodiscard]] const PromptTemplate& zero_shot_classification() const { return zero_shot_; }

  /// Fills the DESC_EX slot of indicator generation.
  [[nodiscard]] const std::string& category_demonstrations() const { return demonstrations_; }
  /// Fills the EXAMPLES slot of descriptor generation.
  [[nodiscard]] const std::string& descriptor_examples() const { return descriptor_examples_; }

 private:
  void set_asset(std::string_view name, std::string content);

  std::map<PromptKind, PromptTemplate> templates_;
  PromptTemplate zero_shot_;
  std::string demonstrations_;
  std::string descriptor_examples_;
};

namespace assets {
/// Raw text of a compiled-in asset; empty view when unknown.
std::string_view lookup(std::string_view name);
std::vector<std::string_view> names();
}  // namespace assets

}  // namespace biaslens::gateway
