#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "turntake/timeline.hpp"
#include "turntake/types.hpp"

namespace turntake {

/// 30 s context window at the default 40 ms grid.
inline constexpr int kDefaultWindowChunks = 750;

struct TranscriptToken {
  int speaker = 1;
  std::string word;  // lowercase
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

using FillerSet = std::unordered_set<std::string>;

/// Built-in filler phrases; data/fillers.txt ships the same list.
FillerSet default_fillers();

/// bc^k: chunks where speaker k produces a backchannel.
struct BackchannelSequence {
  Speaker speaker = Speaker::kOne;
  std::vector<std::uint8_t> bc;

  bool at(ChunkIndex i) const { return bc[static_cast<std::size_t>(i)] != 0; }
};

/// Mark isolated one- or two-word filler phrases uttered inside the other
/// speaker's turn. A phrase is a maximal run of one speaker's tokens with no
/// inactive chunk of that speaker between consecutive tokens.
std::array<BackchannelSequence, 2> label_backchannels(std::span<const TranscriptToken> tokens,
                                                      const VoiceActivitySequence& va1,
                                                      const VoiceActivitySequence& va2,
                                                      const EventTimeline& timeline,
                                                      const FillerSet& fillers);

/// Backchannel sequences with no backchannel anywhere.
std::array<BackchannelSequence, 2> empty_backchannels(ChunkIndex num_chunks);

/// Chunk owner: the earliest-onset turn whose hull contains the chunk, else
/// the most recent turn (ownership extends through trailing silence), else
/// none before the first turn.
std::vector<Owner> attribute_ownership(const EventTimeline& timeline);

struct TurnLabelSequence {
  std::vector<Label> labels;
  std::vector<Owner> owner;

  ChunkIndex size() const { return static_cast<ChunkIndex>(labels.size()); }
  Label at(ChunkIndex i) const { return labels[static_cast<std::size_t>(i)]; }
  friend bool operator==(const TurnLabelSequence&, const TurnLabelSequence&) = default;
};

/// Chunks that open a turn change: onsets of every turn after the first, plus
/// the transfer chunk of each floor-taking interruption.
std::vector<ChunkIndex> turn_change_chunks(const EventTimeline& timeline);

/// Per-chunk labels; first matching rule wins: NA, BC, I, T, C.
TurnLabelSequence derive_labels(const VoiceActivitySequence& va1, const VoiceActivitySequence& va2,
                                const BackchannelSequence& bc1, const BackchannelSequence& bc2,
                                const EventTimeline& timeline);

enum class MetricId : int { kA = 0, kB, kC, kD, kE };
inline constexpr std::array<MetricId, 5> kAllMetrics = {MetricId::kA, MetricId::kB, MetricId::kC,
                                                        MetricId::kD, MetricId::kE};
char metric_char(MetricId m);
MetricId metric_from_char(char c);  // throws ConfigError

/// Label the judge compares against in the positive branch (T, BC, I, T, T).
Label positive_label(MetricId m);

enum class Actor { kAI, kHuman };

struct DecisionInstance {
  MetricId metric = MetricId::kA;
  ChunkIndex chunk = 0;  // decision chunk i
  Actor actor = Actor::kAI;
  bool positive = false;  // actual decision took the positive branch
  ChunkSpan context;      // [max(0, i - W), i - 1]
  friend bool operator==(const DecisionInstance&, const DecisionInstance&) = default;
};

/// Decision instances of one metric, attributed with `ai` as the evaluated
/// system. Metrics a, b, c take decisions at chunks whose predecessor is owned
/// by the other side (AI listening); d and e those owned by `ai`.
std::vector<DecisionInstance> extract_instances(const TurnLabelSequence& labels,
                                                const VoiceActivitySequence& va1,
                                                const VoiceActivitySequence& va2, MetricId metric,
                                                Speaker ai,
                                                int window_chunks = kDefaultWindowChunks);

/// Balanced positive/negative sample drawn without replacement (fewer when a
/// side runs short). Output sorted by chunk.
std::vector<DecisionInstance> sample_balanced(std::span<const DecisionInstance> instances,
                                              std::size_t per_side, std::uint64_t seed);

struct BenchmarkSegment {
  ChunkSpan span;
  bool positive = false;
};

/// Non-overlapping windows of `window_chunks` chunks; positive when some chunk
/// carries `target`, negative when none does.
std::vector<BenchmarkSegment> understanding_segments(const TurnLabelSequence& labels, Label target,
                                                     ChunkIndex window_chunks);

}  // namespace turntake
