#pragma once

#include <json.hpp>

#include "turntake/baseline.hpp"
#include "turntake/judge.hpp"
#include "turntake/stats.hpp"
#include "turntake/synthgen.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

using Json = nlohmann::ordered_json;

Json timeline_to_json(const EventTimeline& tl);

Json counts_to_json(const EventCounts& c);
Json stats_to_json(const CorpusStats& s);

Json thresholds_to_json(const Thresholds& t);  // difference/probability thresholds only
Json operating_points_to_json(const ProbRow& op);
/// Reads the keys present in `j` over `base`; unknown keys are errors.
Thresholds thresholds_from_json(const Json& j, Thresholds base);
ProbRow operating_points_from_json(const Json& j, ProbRow base);

Json model_to_json(const BaselineModel& m);
BaselineModel model_from_json(const Json& j);  // throws ValidationError

Json params_to_json(const SynthParams& p);
/// Missing keys keep their defaults; unknown keys are errors.
SynthParams params_from_json(const Json& j);

/// Parse JSON text, reporting syntax errors against `source`.
Json parse_json(std::string_view text, const std::string& source);

}  // namespace turntake
