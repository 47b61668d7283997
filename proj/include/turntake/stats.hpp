#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "turntake/labeler.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

/// Raw event counts and durations; additive across conversations.
struct EventCounts {
  std::int64_t total_ms = 0;
  std::array<std::int64_t, 2> ipus{};  // per speaker
  std::int64_t pauses = 0;
  std::int64_t gaps = 0;
  std::int64_t overlaps = 0;
  std::int64_t turns = 0;
  std::int64_t interruptions = 0;
  std::int64_t floor_taking = 0;
  // Cumulated durations in ms; they partition total_ms.
  std::int64_t single_speech_ms = 0;
  std::int64_t overlap_ms = 0;
  std::int64_t pause_ms = 0;
  std::int64_t gap_ms = 0;
  std::int64_t edge_ms = 0;
  // Transcript-derived word counts, per speaker.
  std::array<std::int64_t, 2> words{};
  std::array<std::int64_t, 2> backchannel_words{};

  EventCounts& operator+=(const EventCounts& o);
};

/// Events per minute.
struct EventRates {
  double ipu = 0;
  std::array<double, 2> ipu_per_speaker{};
  double pause = 0;
  double gap = 0;
  double overlap = 0;
  double turn = 0;
  double interruption = 0;
};

/// Percentage of total duration per mutually exclusive category.
struct DurationShares {
  double single_speech = 0;
  double overlap = 0;
  double pause = 0;
  double gap = 0;
  double edge = 0;

  double sum() const { return single_speech + overlap + pause + gap + edge; }
};

/// Words per minute, per speaker.
struct SpeechRates {
  std::array<double, 2> speaking{};
  std::array<double, 2> backchannel{};
};

struct CorpusStats {
  EventRates rates;
  DurationShares shares;
  SpeechRates speech;
};

/// Counts from one segmented conversation. total_ms must agree with the grid:
/// ceil(total_ms / chunk_ms) == num_chunks.
EventCounts count_events(const EventTimeline& timeline, std::int64_t total_ms);

/// Adds word counts from a transcript; backchannel words are tokens touching a
/// chunk marked in their speaker's bc sequence.
void count_words(EventCounts& counts, std::span<const TranscriptToken> tokens,
                 const std::array<BackchannelSequence, 2>& bc, int chunk_ms);

EventRates event_rates(const EventCounts& counts);
DurationShares duration_shares(const EventCounts& counts);
SpeechRates speech_rates(const EventCounts& counts);
CorpusStats corpus_stats(const EventCounts& counts);

EventRates event_rates(const EventTimeline& timeline, std::int64_t total_ms);
DurationShares duration_shares(const EventTimeline& timeline, std::int64_t total_ms);
SpeechRates speech_rates(std::span<const TranscriptToken> tokens,
                         const std::array<BackchannelSequence, 2>& bc, std::int64_t total_ms,
                         int chunk_ms);

}  // namespace turntake
