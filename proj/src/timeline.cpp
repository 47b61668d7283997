#include "turntake/timeline.hpp"

#include <algorithm>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

// Index of the IPU in `sorted` whose span contains chunk i, if any.
const Ipu* ipu_containing(const std::vector<Ipu>& sorted, ChunkIndex i) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), i,
                             [](ChunkIndex v, const Ipu& u) { return v < u.span.start; });
  if (it == sorted.begin()) return nullptr;
  --it;
  return it->span.contains(i) ? &*it : nullptr;
}

bool is_absorbed(const Ipu& ipu, const std::vector<Ipu>& opposing) {
  const Ipu* host = ipu_containing(opposing, ipu.span.start);
  return host != nullptr && ipu.span.end < host->span.end;
}

}  // namespace

std::array<VoiceActivitySequence, 2> chunkize(std::span<const SpeechInterval> intervals,
                                              std::int64_t total_ms, int chunk_ms) {
  if (chunk_ms <= 0) throw ConfigError("chunk_ms must be positive");
  if (total_ms < 0) throw ValidationError("total duration must be non-negative");

  std::array<std::vector<std::pair<std::int64_t, std::int64_t>>, 2> per_speaker;
  for (const auto& iv : intervals) {
    Speaker s = speaker_from_int(iv.speaker);
    if (iv.start_ms < 0 || iv.end_ms < 0)
      throw ValidationError("negative interval time " + std::to_string(iv.start_ms) + ".." +
                            std::to_string(iv.end_ms));
    if (iv.end_ms <= iv.start_ms)
      throw ValidationError("interval end must exceed start: " + std::to_string(iv.start_ms) +
                            ".." + std::to_string(iv.end_ms));
    if (iv.end_ms > total_ms)
      throw ValidationError("interval ends at " + std::to_string(iv.end_ms) +
                            " ms, after conversation end " + std::to_string(total_ms));
    per_speaker[static_cast<std::size_t>(to_int(s) - 1)].emplace_back(iv.start_ms, iv.end_ms);
  }

  const ChunkIndex n = (total_ms + chunk_ms - 1) / chunk_ms;
  std::array<VoiceActivitySequence, 2> out;
  for (std::size_t k = 0; k < 2; ++k) {
    out[k].speaker = speaker_from_int(static_cast<int>(k) + 1);
    out[k].chunk_ms = chunk_ms;
    out[k].active.assign(static_cast<std::size_t>(n), 0);

    auto& ivs = per_speaker[k];
    std::sort(ivs.begin(), ivs.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> merged;
    for (const auto& iv : ivs) {
      if (!merged.empty() && iv.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, iv.second);
      } else {
        merged.push_back(iv);
      }
    }

    std::vector<std::int64_t> covered(static_cast<std::size_t>(n), 0);
    for (const auto& [lo, hi] : merged) {
      for (ChunkIndex c = lo / chunk_ms; c < n && c * chunk_ms < hi; ++c) {
        const std::int64_t c0 = c * chunk_ms;
        const std::int64_t c1 = std::min<std::int64_t>(c0 + chunk_ms, total_ms);
        covered[static_cast<std::size_t>(c)] += std::min(hi, c1) - std::max(lo, c0);
      }
    }
    for (ChunkIndex c = 0; c < n; ++c) {
      const std::int64_t c0 = c * chunk_ms;
      const std::int64_t span = std::min<std::int64_t>(c0 + chunk_ms, total_ms) - c0;
      out[k].active[static_cast<std::size_t>(c)] = 2 * covered[static_cast<std::size_t>(c)] >= span;
    }
  }
  return out;
}

int silence_threshold_chunks(int chunk_ms, int min_sil_ms) {
  if (chunk_ms <= 0) throw ConfigError("chunk_ms must be positive");
  if (min_sil_ms <= 0 || min_sil_ms % chunk_ms != 0)
    throw ConfigError("min_sil_ms (" + std::to_string(min_sil_ms) +
                      ") must be a positive multiple of chunk_ms (" + std::to_string(chunk_ms) +
                      ")");
  return min_sil_ms / chunk_ms;
}

std::vector<Ipu> segment_ipus(const VoiceActivitySequence& va, int min_sil_ms) {
  const ChunkIndex threshold = silence_threshold_chunks(va.chunk_ms, min_sil_ms);
  std::vector<Ipu> out;
  const ChunkIndex n = va.size();
  ChunkIndex i = 0;
  while (i < n) {
    if (!va.at(i)) {
      ++i;
      continue;
    }
    ChunkIndex run_end = i;
    while (run_end + 1 < n && va.at(run_end + 1)) ++run_end;
    const ChunkIndex silence_before = out.empty() ? threshold : i - out.back().span.end - 1;
    if (!out.empty() && silence_before < threshold) {
      out.back().span.end = run_end;
    } else {
      out.push_back(Ipu{va.speaker, {i, run_end}});
    }
    i = run_end + 1;
  }
  return out;
}

std::string_view silence_kind_name(SilenceKind k) {
  switch (k) {
    case SilenceKind::kPause: return "pause";
    case SilenceKind::kGap: return "gap";
    case SilenceKind::kEdge: return "edge";
  }
  return "?";
}

std::string_view interruption_type_name(InterruptionType t) {
  return t == InterruptionType::kFloorTaking ? "floor_taking" : "butting_in";
}

std::vector<ChunkIndex> EventTimeline::overlap_chunks() const {
  std::vector<ChunkIndex> out;
  for (const auto& run : overlaps)
    for (ChunkIndex i = run.start; i <= run.end; ++i) out.push_back(i);
  return out;
}

void check_pair(const VoiceActivitySequence& va1, const VoiceActivitySequence& va2) {
  if (va1.speaker != Speaker::kOne || va2.speaker != Speaker::kTwo)
    throw ValidationError("activity sequences must belong to speakers 1 and 2");
  if (va1.chunk_ms != va2.chunk_ms)
    throw ValidationError("activity sequences disagree on chunk size");
  if (va1.size() != va2.size())
    throw ValidationError("activity sequences disagree on length: " + std::to_string(va1.size()) +
                          " vs " + std::to_string(va2.size()));
}

EventTimeline build_timeline(const VoiceActivitySequence& va1, const VoiceActivitySequence& va2,
                             int min_sil_ms) {
  check_pair(va1, va2);
  EventTimeline tl;
  tl.chunk_ms = va1.chunk_ms;
  tl.min_sil_ms = min_sil_ms;
  tl.num_chunks = va1.size();
  tl.ipus[0] = segment_ipus(va1, min_sil_ms);
  tl.ipus[1] = segment_ipus(va2, min_sil_ms);
  const ChunkIndex n = tl.num_chunks;
  auto both = [&](ChunkIndex i) { return va1.at(i) && va2.at(i); };

  // Overlap runs.
  for (ChunkIndex i = 0; i < n; ++i) {
    if (!both(i)) continue;
    if (!tl.overlaps.empty() && tl.overlaps.back().end == i - 1) {
      tl.overlaps.back().end = i;
    } else {
      tl.overlaps.push_back({i, i});
    }
  }

  // Interruptions: the interrupter's IPU starts strictly inside the
  // interrupted IPU and the two share at least one jointly active chunk.
  for (int k = 0; k < 2; ++k) {
    const auto& interrupted = tl.ipus[static_cast<std::size_t>(k)];
    const auto& interrupters = tl.ipus[static_cast<std::size_t>(1 - k)];
    const VoiceActivitySequence& y_interrupted = k == 0 ? va1 : va2;
    const VoiceActivitySequence& y_interrupter = k == 0 ? va2 : va1;
    for (const Ipu& o : interrupters) {
      const Ipu* h = ipu_containing(interrupted, o.span.start);
      if (h == nullptr || !(h->span.start < o.span.start && o.span.start < h->span.end)) continue;
      const ChunkIndex shared_end = std::min(h->span.end, o.span.end);
      bool overlapped = false;
      for (ChunkIndex i = o.span.start; i <= shared_end && !overlapped; ++i)
        overlapped = both(i);
      if (!overlapped) continue;

      Interruption intr;
      intr.interrupter = o.speaker;
      intr.interrupted = h->speaker;
      intr.interrupted_ipu = *h;
      intr.interrupter_ipu = o;
      intr.type = o.span.end >= h->span.end ? InterruptionType::kFloorTaking
                                            : InterruptionType::kButtingIn;
      if (intr.type == InterruptionType::kFloorTaking) {
        for (ChunkIndex i = h->span.end + 1; i <= o.span.end; ++i) {
          if (y_interrupter.at(i) && !y_interrupted.at(i)) {
            intr.transfer_chunk = i;
            break;
          }
        }
      }
      tl.interruptions.push_back(intr);
    }
  }
  std::sort(tl.interruptions.begin(), tl.interruptions.end(),
            [](const Interruption& a, const Interruption& b) {
              return std::pair(a.interrupter_ipu.span.start, to_int(a.interrupter)) <
                     std::pair(b.interrupter_ipu.span.start, to_int(b.interrupter));
            });

  // Turns.
  std::vector<Ipu> floor_ipus;
  for (int k = 0; k < 2; ++k) {
    for (const Ipu& u : tl.ipus[static_cast<std::size_t>(k)]) {
      if (!is_absorbed(u, tl.ipus[static_cast<std::size_t>(1 - k)])) floor_ipus.push_back(u);
    }
  }
  std::sort(floor_ipus.begin(), floor_ipus.end(), [](const Ipu& a, const Ipu& b) {
    return std::pair(a.span.start, to_int(a.speaker)) < std::pair(b.span.start, to_int(b.speaker));
  });
  for (const Ipu& u : floor_ipus) {
    if (!tl.turns.empty() && tl.turns.back().speaker == u.speaker) {
      tl.turns.back().ipus.push_back(u);
      tl.turns.back().hull.end = u.span.end;
    } else {
      tl.turns.push_back(Turn{u.speaker, {u}, u.span});
    }
  }

  // Silence runs, classified against turn hulls. Hulls are ordered by onset
  // and only consecutive hulls may overlap, so a sweep suffices.
  std::size_t hull_cursor = 0;
  for (ChunkIndex i = 0; i < n;) {
    if (va1.at(i) || va2.at(i)) {
      ++i;
      continue;
    }
    ChunkIndex j = i;
    while (j + 1 < n && !va1.at(j + 1) && !va2.at(j + 1)) ++j;
    SilenceKind kind = SilenceKind::kGap;
    if (i == 0 || j == n - 1) {
      kind = SilenceKind::kEdge;
    } else {
      while (hull_cursor < tl.turns.size() && tl.turns[hull_cursor].hull.end < i) ++hull_cursor;
      for (std::size_t t = hull_cursor; t < tl.turns.size() && tl.turns[t].hull.start <= i; ++t) {
        if (tl.turns[t].hull.contains(ChunkSpan{i, j})) {
          kind = SilenceKind::kPause;
          break;
        }
      }
    }
    tl.silences.push_back(SilenceRun{{i, j}, kind});
    i = j + 1;
  }
  return tl;
}

}  // namespace turntake
