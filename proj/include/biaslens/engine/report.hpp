#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "biaslens/engine/types.hpp"

namespace biaslens::engine {

using ordered_json = nlohmann::ordered_json;

/// Wire form of a report. Field order is fixed so dumps are byte-stable.
/// Descriptor embeddings are not part of the wire form.
ordered_json to_json(const AnalysisReport& report);
ordered_json to_json(const SpanMapping& mapping, std::string_view body);
ordered_json to_json(const BiasPrediction& prediction);

/// Inverse of to_json. Throws Error(format_error) on schema problems.
AnalysisReport report_from_json(const nlohmann::json& j);

/// Pretty-printed (2-space) wire form.
std::string serialize_report(const AnalysisReport& report);

/// Substring of `body` covering code points [span.start, span.end).
std::string span_text(std::string_view body, const Span& span);

}  // namespace biaslens::engine
