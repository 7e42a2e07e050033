#pragma once

#include <string_view>

#include "driftwatch/types.hpp"

namespace driftwatch {

/// Parse one JSONL record into either a PredictionEvent or an OutcomeRecord
/// (records with an "outcome" but no "pred"). Unknown fields are ignored.
/// Throws FieldError naming the offending field on malformed input.
StreamRecord parse_record(std::string_view line);

/// Convenience for callers that expect a prediction event.
PredictionEvent ingest_event(std::string_view line);

/// Serialize back to the canonical one-line JSON form.
std::string to_jsonl(const PredictionEvent& event);
std::string to_jsonl(const OutcomeRecord& record);
std::string to_jsonl(const StreamRecord& record);

}  // namespace driftwatch
