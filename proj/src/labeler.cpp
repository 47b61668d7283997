#include "turntake/labeler.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

constexpr const char* kDefaultFillerList[] = {
    "um",   "uh-huh", "right", "yeah",   "okay", "oh",  "i see", "hmm",
    "mm-hmm", "uh",   "sure",  "really", "wow",  "yes", "huh"};

struct TokenChunks {
  const TranscriptToken* token;
  ChunkIndex first;
  ChunkIndex last;
};

std::vector<std::uint8_t> hull_mask(const EventTimeline& tl, Speaker s) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(tl.num_chunks), 0);
  for (const Turn& t : tl.turns) {
    if (t.speaker != s) continue;
    for (ChunkIndex i = t.hull.start; i <= t.hull.end; ++i) mask[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

}  // namespace

FillerSet default_fillers() {
  return FillerSet(std::begin(kDefaultFillerList), std::end(kDefaultFillerList));
}

std::array<BackchannelSequence, 2> empty_backchannels(ChunkIndex num_chunks) {
  std::array<BackchannelSequence, 2> out;
  for (std::size_t k = 0; k < 2; ++k) {
    out[k].speaker = speaker_from_int(static_cast<int>(k) + 1);
    out[k].bc.assign(static_cast<std::size_t>(num_chunks), 0);
  }
  return out;
}

std::array<BackchannelSequence, 2> label_backchannels(std::span<const TranscriptToken> tokens,
                                                      const VoiceActivitySequence& va1,
                                                      const VoiceActivitySequence& va2,
                                                      const EventTimeline& timeline,
                                                      const FillerSet& fillers) {
  check_pair(va1, va2);
  const ChunkIndex n = va1.size();
  const std::int64_t grid_ms = n * va1.chunk_ms;
  auto out = empty_backchannels(n);

  std::array<std::vector<TokenChunks>, 2> by_speaker;
  for (const auto& tok : tokens) {
    Speaker s = speaker_from_int(tok.speaker);
    if (tok.start_ms < 0 || tok.end_ms <= tok.start_ms || tok.end_ms > grid_ms)
      throw ValidationError("token '" + tok.word + "' at " + std::to_string(tok.start_ms) + ".." +
                            std::to_string(tok.end_ms) + " ms lies outside the " +
                            std::to_string(grid_ms) + " ms grid");
    by_speaker[static_cast<std::size_t>(to_int(s) - 1)].push_back(
        {&tok, tok.start_ms / va1.chunk_ms, (tok.end_ms - 1) / va1.chunk_ms});
  }

  for (std::size_t k = 0; k < 2; ++k) {
    const VoiceActivitySequence& y = k == 0 ? va1 : va2;
    const Speaker listener = y.speaker;
    const auto in_other_turn = hull_mask(timeline, other(listener));
    auto& toks = by_speaker[k];
    std::stable_sort(toks.begin(), toks.end(), [](const TokenChunks& a, const TokenChunks& b) {
      return a.token->start_ms < b.token->start_ms;
    });

    auto separated = [&](const TokenChunks& a, const TokenChunks& b) {
      for (ChunkIndex i = a.last + 1; i < b.first; ++i)
        if (!y.at(i)) return true;
      return false;
    };

    std::size_t p = 0;
    while (p < toks.size()) {
      std::size_t q = p;
      ChunkIndex last = toks[p].last;
      while (q + 1 < toks.size() && !separated(toks[q], toks[q + 1])) {
        ++q;
        last = std::max(last, toks[q].last);
      }
      const std::size_t words = q - p + 1;
      if (words <= 2) {
        std::string phrase = toks[p].token->word;
        if (words == 2) phrase += " " + toks[q].token->word;
        const ChunkSpan span{toks[p].first, last};
        bool inside = fillers.count(phrase) > 0;
        for (ChunkIndex i = span.start; inside && i <= span.end; ++i)
          inside = in_other_turn[static_cast<std::size_t>(i)] != 0;
        if (inside) {
          for (ChunkIndex i = span.start; i <= span.end; ++i)
            if (y.at(i)) out[k].bc[static_cast<std::size_t>(i)] = 1;
        }
      }
      p = q + 1;
    }
  }
  return out;
}

std::vector<Owner> attribute_ownership(const EventTimeline& timeline) {
  std::vector<Owner> owner(static_cast<std::size_t>(timeline.num_chunks));
  const auto& turns = timeline.turns;
  std::size_t j = 0;  // number of turns with onset <= i
  for (ChunkIndex i = 0; i < timeline.num_chunks; ++i) {
    while (j < turns.size() && turns[j].onset() <= i) ++j;
    if (j == 0) continue;
    const Turn& latest = turns[j - 1];
    if (j >= 2 && turns[j - 2].hull.end >= i) {
      owner[static_cast<std::size_t>(i)] = turns[j - 2].speaker;
    } else {
      owner[static_cast<std::size_t>(i)] = latest.speaker;
    }
  }
  return owner;
}

std::vector<ChunkIndex> turn_change_chunks(const EventTimeline& timeline) {
  std::vector<ChunkIndex> out;
  for (std::size_t t = 1; t < timeline.turns.size(); ++t) out.push_back(timeline.turns[t].onset());
  for (const auto& intr : timeline.interruptions) {
    if (intr.type == InterruptionType::kFloorTaking && intr.transfer_chunk)
      out.push_back(*intr.transfer_chunk);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TurnLabelSequence derive_labels(const VoiceActivitySequence& va1, const VoiceActivitySequence& va2,
                                const BackchannelSequence& bc1, const BackchannelSequence& bc2,
                                const EventTimeline& timeline) {
  check_pair(va1, va2);
  const ChunkIndex n = va1.size();
  if (static_cast<ChunkIndex>(bc1.bc.size()) != n || static_cast<ChunkIndex>(bc2.bc.size()) != n ||
      timeline.num_chunks != n)
    throw ValidationError("backchannel/timeline grid does not match activity grid");
  for (ChunkIndex i = 0; i < n; ++i) {
    if ((bc1.at(i) && !va1.at(i)) || (bc2.at(i) && !va2.at(i)))
      throw ValidationError("backchannel marked at inactive chunk " + std::to_string(i));
  }

  const auto in_turn1 = hull_mask(timeline, Speaker::kOne);
  const auto in_turn2 = hull_mask(timeline, Speaker::kTwo);
  std::vector<std::uint8_t> change(static_cast<std::size_t>(n), 0);
  for (ChunkIndex i : turn_change_chunks(timeline)) change[static_cast<std::size_t>(i)] = 1;

  TurnLabelSequence out;
  out.labels.resize(static_cast<std::size_t>(n), Label::kC);
  out.owner = attribute_ownership(timeline);
  for (ChunkIndex i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const bool y1 = va1.at(i);
    const bool y2 = va2.at(i);
    Label l = Label::kC;
    if (!y1 && !y2) {
      l = Label::kNA;
    } else if ((bc1.at(i) && in_turn2[u]) || (bc2.at(i) && in_turn1[u])) {
      l = Label::kBC;
    } else if (y1 && y2 && !bc1.at(i) && !bc2.at(i)) {
      l = Label::kI;
    } else if (change[u]) {
      l = Label::kT;
    }
    out.labels[u] = l;
  }
  return out;
}

char metric_char(MetricId m) { return static_cast<char>('a' + static_cast<int>(m)); }

MetricId metric_from_char(char c) {
  if (c < 'a' || c > 'e') throw ConfigError(std::string("unknown metric id '") + c + "'");
  return static_cast<MetricId>(c - 'a');
}

Label positive_label(MetricId m) {
  switch (m) {
    case MetricId::kB: return Label::kBC;
    case MetricId::kC: return Label::kI;
    default: return Label::kT;
  }
}

std::vector<DecisionInstance> extract_instances(const TurnLabelSequence& labels,
                                                const VoiceActivitySequence& va1,
                                                const VoiceActivitySequence& va2, MetricId metric,
                                                Speaker ai, int window_chunks) {
  check_pair(va1, va2);
  const ChunkIndex n = labels.size();
  if (va1.size() != n || static_cast<ChunkIndex>(labels.owner.size()) != n)
    throw ValidationError("label sequence does not match activity grid");
  if (window_chunks <= 0) throw ConfigError("context window must be positive");
  if (static_cast<int>(metric) < 0 || static_cast<int>(metric) > 4)
    throw ConfigError("unknown metric id");

  const bool ai_listening = metric == MetricId::kA || metric == MetricId::kB ||
                            metric == MetricId::kC;
  const Speaker decider_owner = ai_listening ? other(ai) : ai;
  auto active = [&](Speaker s, ChunkIndex i) {
    return s == Speaker::kOne ? va1.at(i) : va2.at(i);
  };

  std::vector<DecisionInstance> out;
  for (ChunkIndex i = 1; i < n; ++i) {
    const Owner& prev_owner = labels.owner[static_cast<std::size_t>(i - 1)];
    if (prev_owner != decider_owner) continue;
    const Label prev = labels.at(i - 1);
    const Label cur = labels.at(i);
    const Speaker listener = other(*prev_owner);
    bool eligible = false;
    bool positive = false;
    switch (metric) {
      case MetricId::kA:
      case MetricId::kD:
        eligible = prev == Label::kNA && (cur == Label::kT || cur == Label::kC);
        positive = cur == Label::kT;
        break;
      case MetricId::kB:
        eligible = prev != Label::kBC && !active(listener, i - 1);
        positive = cur == Label::kBC;
        break;
      case MetricId::kC:
        eligible = prev == Label::kC && active(*prev_owner, i - 1) && !active(listener, i - 1) &&
                   (cur == Label::kI || cur == Label::kC);
        positive = cur == Label::kI;
        break;
      case MetricId::kE:
        eligible = prev == Label::kI && (cur == Label::kT || cur == Label::kC);
        positive = cur == Label::kT;
        break;
    }
    if (!eligible) continue;
    DecisionInstance inst;
    inst.metric = metric;
    inst.chunk = i;
    inst.actor = *prev_owner == ai ? Actor::kHuman : Actor::kAI;
    inst.positive = positive;
    inst.context = {std::max<ChunkIndex>(0, i - window_chunks), i - 1};
    out.push_back(inst);
  }
  return out;
}

std::vector<DecisionInstance> sample_balanced(std::span<const DecisionInstance> instances,
                                              std::size_t per_side, std::uint64_t seed) {
  std::vector<DecisionInstance> pos;
  std::vector<DecisionInstance> neg;
  for (const auto& inst : instances) (inst.positive ? pos : neg).push_back(inst);
  std::mt19937_64 rng(seed);
  std::vector<DecisionInstance> out;
  for (auto* side : {&pos, &neg}) {
    std::shuffle(side->begin(), side->end(), rng);
    const std::size_t take = std::min(per_side, side->size());
    out.insert(out.end(), side->begin(), side->begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end(), [](const DecisionInstance& a, const DecisionInstance& b) {
    return a.chunk < b.chunk;
  });
  return out;
}

std::vector<BenchmarkSegment> understanding_segments(const TurnLabelSequence& labels, Label target,
                                                     ChunkIndex window_chunks) {
  if (window_chunks <= 0) throw ConfigError("benchmark window must be positive");
  std::vector<BenchmarkSegment> out;
  for (ChunkIndex s = 0; s + window_chunks <= labels.size(); s += window_chunks) {
    BenchmarkSegment seg{{s, s + window_chunks - 1}, false};
    for (ChunkIndex i = s; i <= seg.span.end && !seg.positive; ++i)
      seg.positive = labels.at(i) == target;
    out.push_back(seg);
  }
  return out;
}

}  // namespace turntake
