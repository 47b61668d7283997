#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "turntake/baseline.hpp"
#include "turntake/judge.hpp"
#include "turntake/labeler.hpp"
#include "turntake/serialize.hpp"
#include "turntake/stats.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

inline constexpr int kDefaultWindowMs = 30000;

enum class AiSide { kOne, kTwo, kBoth };

struct RunConfig {
  int chunk_ms = kDefaultChunkMs;
  int min_sil_ms = kDefaultMinSilenceMs;
  int window_ms = kDefaultWindowMs;
  Thresholds thresholds;
  std::optional<std::filesystem::path> fillers_path;
  AiSide ai = AiSide::kOne;
  std::uint64_t seed = 0;

  int window_chunks() const;
  std::vector<Speaker> ai_speakers() const;
  void validate() const;  // throws ConfigError
};

AiSide ai_side_from_name(const std::string& s);  // "1", "2" or "both"
std::string ai_side_name(AiSide a);

/// Apply the keys present in a JSON config object; relative filler paths
/// resolve against `base_dir`.
void apply_config_json(RunConfig& cfg, const Json& j, const std::filesystem::path& base_dir);
Json config_to_json(const RunConfig& cfg);

/// Filler set from the configured path, or the built-in list.
FillerSet load_fillers(const RunConfig& cfg);

/// One conversation on disk: a directory holding va.csv (or va.rttm) and
/// optionally transcript.csv, stream.csv and meta.json {"duration_ms": N}.
/// Without meta.json the duration is the latest interval or token end.
struct Conversation {
  std::string id;
  std::int64_t duration_ms = 0;
  std::vector<SpeechInterval> intervals;
  std::vector<TranscriptToken> tokens;
  std::optional<LikelihoodStream> stream;
};

Conversation load_conversation(const std::filesystem::path& dir);

/// Segmentation and labels of one conversation.
struct Analysis {
  std::string id;
  std::int64_t duration_ms = 0;
  std::array<VoiceActivitySequence, 2> va;
  EventTimeline timeline;
  std::array<BackchannelSequence, 2> bc;
  TurnLabelSequence labels;
  EventCounts counts;

  ChannelView view() const { return {&va[0], &va[1], &bc[0], &bc[1]}; }
};

Analysis analyze(const Conversation& conv, const RunConfig& cfg, const FillerSet& fillers);

/// Judge-side results, additive across conversations.
struct Evaluation {
  std::vector<std::string> ids;
  EventCounts counts;
  std::array<MetricTally, 5> tallies{};
  std::array<std::vector<ScoredInstance>, 5> scored;  // pooled, for threshold sensitivity
  ConfusionMatrix confusion;
  std::vector<ProbRow> auc_rows;
  std::vector<Label> auc_labels;
  std::vector<std::string> warnings;

  Evaluation& operator+=(const Evaluation& o);
};

/// Score one analyzed conversation against a likelihood stream, once per AI
/// perspective the config selects.
Evaluation evaluate(const Analysis& a, const LikelihoodStream& stream, const RunConfig& cfg);

Json build_report(const Evaluation& ev, const RunConfig& cfg, bool include_judge);
Json tune_report(const TuneResult& r);

}  // namespace turntake
