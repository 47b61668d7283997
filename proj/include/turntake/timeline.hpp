#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "turntake/types.hpp"

namespace turntake {

inline constexpr int kDefaultChunkMs = 40;
inline constexpr int kDefaultMinSilenceMs = 200;

/// One speaker's voice activity on the chunk grid (y^k).
struct VoiceActivitySequence {
  Speaker speaker = Speaker::kOne;
  int chunk_ms = kDefaultChunkMs;
  std::vector<std::uint8_t> active;

  ChunkIndex size() const { return static_cast<ChunkIndex>(active.size()); }
  bool at(ChunkIndex i) const { return active[static_cast<std::size_t>(i)] != 0; }
};

/// Raw annotation record: speaker id (validated to {1,2}) and a half-open
/// millisecond range [start_ms, end_ms).
struct SpeechInterval {
  int speaker = 1;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

/// Map interval annotations onto the chunk grid. A chunk is active for a
/// speaker when the union of that speaker's intervals covers at least half of
/// the chunk's span (the final chunk's span is clipped to total_ms).
std::array<VoiceActivitySequence, 2> chunkize(std::span<const SpeechInterval> intervals,
                                              std::int64_t total_ms,
                                              int chunk_ms = kDefaultChunkMs);

struct Ipu {
  Speaker speaker = Speaker::kOne;
  ChunkSpan span;
  friend bool operator==(const Ipu&, const Ipu&) = default;
};

/// Number of inactive chunks that separates two IPUs.
int silence_threshold_chunks(int chunk_ms, int min_sil_ms);

/// Inter-pausal units: maximal activity runs whose internal inactive runs are
/// all shorter than min_sil_ms. Sorted by start.
std::vector<Ipu> segment_ipus(const VoiceActivitySequence& va,
                              int min_sil_ms = kDefaultMinSilenceMs);

enum class SilenceKind { kPause, kGap, kEdge };
std::string_view silence_kind_name(SilenceKind k);

struct SilenceRun {
  ChunkSpan span;
  SilenceKind kind = SilenceKind::kEdge;
  friend bool operator==(const SilenceRun&, const SilenceRun&) = default;
};

struct Turn {
  Speaker speaker = Speaker::kOne;
  std::vector<Ipu> ipus;
  ChunkSpan hull;

  ChunkIndex onset() const { return hull.start; }
  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class InterruptionType { kFloorTaking, kButtingIn };
std::string_view interruption_type_name(InterruptionType t);

struct Interruption {
  Speaker interrupter = Speaker::kTwo;
  Speaker interrupted = Speaker::kOne;
  Ipu interrupted_ipu;
  Ipu interrupter_ipu;
  InterruptionType type = InterruptionType::kButtingIn;
  /// Floor-taking only: first chunk after the interrupted IPU where the
  /// interrupter speaks alone. Absent when both IPUs end together.
  std::optional<ChunkIndex> transfer_chunk;
  friend bool operator==(const Interruption&, const Interruption&) = default;
};

/// Segmented conversation.
///
/// Turns are built from the IPUs that are not nested inside an IPU of the
/// other speaker (an IPU starting no earlier and ending strictly earlier than
/// an opposing IPU that contains its start is "absorbed": backchannels and
/// butting-in attempts never hold the floor). Remaining IPUs are sorted by
/// (start, speaker) and consecutive same-speaker IPUs form one turn, so turns
/// alternate speakers and successive IPUs of a turn are separated by joint
/// silence only.
///
/// Silence runs are the maximal jointly silent runs: `edge` when touching the
/// grid boundary, `pause` when inside a turn hull, `gap` otherwise (between
/// the hulls of two consecutive turns).
struct EventTimeline {
  int chunk_ms = kDefaultChunkMs;
  int min_sil_ms = kDefaultMinSilenceMs;
  ChunkIndex num_chunks = 0;
  std::array<std::vector<Ipu>, 2> ipus;  // indexed by speaker - 1
  std::vector<SilenceRun> silences;
  std::vector<Turn> turns;
  std::vector<ChunkSpan> overlaps;  // maximal runs with both speakers active
  std::vector<Interruption> interruptions;

  const std::vector<Ipu>& ipus_of(Speaker s) const {
    return ipus[static_cast<std::size_t>(to_int(s) - 1)];
  }
  std::size_t ipu_count() const { return ipus[0].size() + ipus[1].size(); }
  std::vector<ChunkIndex> overlap_chunks() const;

  friend bool operator==(const EventTimeline&, const EventTimeline&) = default;
};

/// Segment a two-speaker activity pair into the event timeline.
EventTimeline build_timeline(const VoiceActivitySequence& va1,
                             const VoiceActivitySequence& va2,
                             int min_sil_ms = kDefaultMinSilenceMs);

/// Throws ValidationError unless both sequences share speaker ids 1/2, chunk
/// size and length.
void check_pair(const VoiceActivitySequence& va1, const VoiceActivitySequence& va2);

}  // namespace turntake
