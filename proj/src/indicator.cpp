#include "biaslens/indicator.hpp"

#include <fmt/format.h>

namespace biaslens {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::raw: return "raw";
    case Stage::verified: return "verified";
    case Stage::final: return "final";
  }
  return "raw";
}

IndicatorRecord advance(IndicatorRecord record, Stage next) {
  if (static_cast<int>(next) != static_cast<int>(record.stage) + 1) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("indicator {}: illegal stage transition {} -> {}", record.id,
                            to_string(record.stage), to_string(next)));
  }
  if (!record.confidence || *record.confidence < 1 || *record.confidence > 10) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("indicator {}: stage {} requires a confidence in [1, 10]", record.id,
                            to_string(next)));
  }
  record.stage = next;
  return record;
}

}  // namespace biaslens
