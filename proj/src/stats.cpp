#include "turntake/stats.hpp"

#include <algorithm>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

constexpr double kMsPerMinute = 60000.0;

void require_duration(std::int64_t total_ms) {
  if (total_ms < 0) throw ValidationError("conversation duration must not be negative");
}

// Zero duration (an empty recording) yields all-zero statistics.
double scale(std::int64_t total_ms, double unit) {
  return total_ms == 0 ? 0.0 : unit / static_cast<double>(total_ms);
}

// Milliseconds covered by chunks [a, b]; the final chunk may be partial.
std::int64_t span_ms(const ChunkSpan& s, int chunk_ms, std::int64_t total_ms) {
  const std::int64_t lo = s.start * chunk_ms;
  const std::int64_t hi = std::min<std::int64_t>((s.end + 1) * chunk_ms, total_ms);
  return hi - lo;
}

}  // namespace

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  total_ms += o.total_ms;
  for (std::size_t k = 0; k < 2; ++k) {
    ipus[k] += o.ipus[k];
    words[k] += o.words[k];
    backchannel_words[k] += o.backchannel_words[k];
  }
  pauses += o.pauses;
  gaps += o.gaps;
  overlaps += o.overlaps;
  turns += o.turns;
  interruptions += o.interruptions;
  floor_taking += o.floor_taking;
  single_speech_ms += o.single_speech_ms;
  overlap_ms += o.overlap_ms;
  pause_ms += o.pause_ms;
  gap_ms += o.gap_ms;
  edge_ms += o.edge_ms;
  return *this;
}

EventCounts count_events(const EventTimeline& tl, std::int64_t total_ms) {
  require_duration(total_ms);
  const ChunkIndex expected = (total_ms + tl.chunk_ms - 1) / tl.chunk_ms;
  if (expected != tl.num_chunks)
    throw ValidationError("duration " + std::to_string(total_ms) + " ms does not match a grid of " +
                          std::to_string(tl.num_chunks) + " chunks");
  EventCounts c;
  c.total_ms = total_ms;
  c.ipus = {static_cast<std::int64_t>(tl.ipus[0].size()),
            static_cast<std::int64_t>(tl.ipus[1].size())};
  c.overlaps = static_cast<std::int64_t>(tl.overlaps.size());
  c.turns = static_cast<std::int64_t>(tl.turns.size());
  c.interruptions = static_cast<std::int64_t>(tl.interruptions.size());
  c.floor_taking = std::count_if(tl.interruptions.begin(), tl.interruptions.end(),
                                 [](const Interruption& i) {
                                   return i.type == InterruptionType::kFloorTaking;
                                 });
  for (const auto& run : tl.overlaps) c.overlap_ms += span_ms(run, tl.chunk_ms, total_ms);
  std::int64_t silent_ms = 0;
  for (const auto& s : tl.silences) {
    const std::int64_t ms = span_ms(s.span, tl.chunk_ms, total_ms);
    silent_ms += ms;
    switch (s.kind) {
      case SilenceKind::kPause: ++c.pauses; c.pause_ms += ms; break;
      case SilenceKind::kGap: ++c.gaps; c.gap_ms += ms; break;
      case SilenceKind::kEdge: c.edge_ms += ms; break;
    }
  }
  c.single_speech_ms = total_ms - silent_ms - c.overlap_ms;
  return c;
}

void count_words(EventCounts& counts, std::span<const TranscriptToken> tokens,
                 const std::array<BackchannelSequence, 2>& bc, int chunk_ms) {
  for (const auto& tok : tokens) {
    const auto k = static_cast<std::size_t>(to_int(speaker_from_int(tok.speaker)) - 1);
    ++counts.words[k];
    const auto& seq = bc[k];
    const ChunkIndex first = tok.start_ms / chunk_ms;
    const ChunkIndex last = std::min<ChunkIndex>((tok.end_ms - 1) / chunk_ms,
                                                 static_cast<ChunkIndex>(seq.bc.size()) - 1);
    for (ChunkIndex i = first; i <= last; ++i) {
      if (seq.at(i)) {
        ++counts.backchannel_words[k];
        break;
      }
    }
  }
}

EventRates event_rates(const EventCounts& c) {
  require_duration(c.total_ms);
  const double per_min = scale(c.total_ms, kMsPerMinute);
  EventRates r;
  r.ipu_per_speaker = {c.ipus[0] * per_min, c.ipus[1] * per_min};
  r.ipu = static_cast<double>(c.ipus[0] + c.ipus[1]) * per_min;
  r.pause = c.pauses * per_min;
  r.gap = c.gaps * per_min;
  r.overlap = c.overlaps * per_min;
  r.turn = c.turns * per_min;
  r.interruption = c.interruptions * per_min;
  return r;
}

DurationShares duration_shares(const EventCounts& c) {
  require_duration(c.total_ms);
  const double pct = scale(c.total_ms, 100.0);
  return {c.single_speech_ms * pct, c.overlap_ms * pct, c.pause_ms * pct, c.gap_ms * pct,
          c.edge_ms * pct};
}

SpeechRates speech_rates(const EventCounts& c) {
  require_duration(c.total_ms);
  const double per_min = scale(c.total_ms, kMsPerMinute);
  SpeechRates r;
  for (std::size_t k = 0; k < 2; ++k) {
    r.speaking[k] = c.words[k] * per_min;
    r.backchannel[k] = c.backchannel_words[k] * per_min;
  }
  return r;
}

CorpusStats corpus_stats(const EventCounts& counts) {
  return {event_rates(counts), duration_shares(counts), speech_rates(counts)};
}

EventRates event_rates(const EventTimeline& timeline, std::int64_t total_ms) {
  return event_rates(count_events(timeline, total_ms));
}

DurationShares duration_shares(const EventTimeline& timeline, std::int64_t total_ms) {
  return duration_shares(count_events(timeline, total_ms));
}

SpeechRates speech_rates(std::span<const TranscriptToken> tokens,
                         const std::array<BackchannelSequence, 2>& bc, std::int64_t total_ms,
                         int chunk_ms) {
  EventCounts c;
  c.total_ms = total_ms;
  count_words(c, tokens, bc, chunk_ms);
  return speech_rates(c);
}

}  // namespace turntake
