#include "turntake/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

constexpr int kMsPerWord = 300;

enum class Special { kBackchannel, kButtingIn };

// Listener utterance nested inside an IPU.
struct Inner {
  Special kind = Special::kBackchannel;
  ChunkIndex len = 0;
  ChunkIndex off = 0;  // from the host's start
};

struct PlannedIpu {
  Speaker speaker = Speaker::kOne;
  std::size_t turn = 0;
  bool last_in_turn = false;
  ChunkIndex overlap_in = 0;  // chunks the previous speaker still holds at our start
  std::vector<Inner> inner;
  ChunkIndex floor_len = 0;  // overlap with the next turn's first IPU
  ChunkIndex len = 0;
  ChunkIndex start = 0;

  ChunkIndex end() const { return start + len - 1; }
  ChunkSpan span_of(const Inner& x) const { return {start + x.off, start + x.off + x.len - 1}; }
  ChunkSpan floor_span() const { return {end() - floor_len + 1, end()}; }
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  // Normal sample in chunks, rounded and clipped below at `lo`.
  ChunkIndex chunks(const Distribution& d, int chunk_ms, ChunkIndex lo) {
    double v = d.mean;
    if (d.sd > 0) v = std::normal_distribution<double>(d.mean, d.sd)(rng_);
    return std::max(lo, static_cast<ChunkIndex>(std::llround(v / chunk_ms)));
  }
  ChunkIndex count(const Distribution& d, ChunkIndex lo) {
    double v = d.mean;
    if (d.sd > 0) v = std::normal_distribution<double>(d.mean, d.sd)(rng_);
    return std::max(lo, static_cast<ChunkIndex>(std::llround(v)));
  }
  ChunkIndex uniform(ChunkIndex lo, ChunkIndex hi) {
    return std::uniform_int_distribution<ChunkIndex>(lo, hi)(rng_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

std::int64_t event_count(double rate, std::int64_t duration_ms) {
  return std::llround(rate * static_cast<double>(duration_ms) / 60000.0);
}

// Share `total` out in proportion to `weights` (largest remainder, ties to the
// lower index).
std::vector<ChunkIndex> apportion(const std::vector<ChunkIndex>& weights, ChunkIndex total) {
  std::vector<ChunkIndex> out(weights.size(), 0);
  if (weights.empty()) return out;
  ChunkIndex wsum = std::accumulate(weights.begin(), weights.end(), ChunkIndex{0});
  std::vector<ChunkIndex> w = weights;
  if (wsum == 0) {
    std::fill(w.begin(), w.end(), 1);
    wsum = static_cast<ChunkIndex>(w.size());
  }
  std::vector<std::pair<double, std::size_t>> rem;
  ChunkIndex given = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double exact = static_cast<double>(total) * static_cast<double>(w[k]) /
                         static_cast<double>(wsum);
    out[k] = static_cast<ChunkIndex>(std::floor(exact));
    given += out[k];
    rem.emplace_back(exact - static_cast<double>(out[k]), k);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++out[rem[k % rem.size()].second];
  return out;
}

void check_distribution(const Distribution& d, const char* name) {
  if (!std::isfinite(d.mean) || !std::isfinite(d.sd) || d.mean <= 0 || d.sd < 0)
    throw ConfigError(std::string(name) + ": mean must be positive and sd non-negative");
}

}  // namespace

const std::vector<std::string>& synth_vocabulary() {
  static const std::vector<std::string> words = {
      "garden", "table",  "window", "river", "seven",  "market", "yellow", "winter",
      "paper",  "letter", "planet", "forest", "silver", "bridge", "engine", "little",
      "number", "morning", "kitchen", "travel", "summer", "pocket", "basket", "harbor"};
  return words;
}

void SynthParams::validate() const {
  const int m = silence_threshold_chunks(chunk_ms, min_sil_ms);
  if (duration_ms <= 0 || duration_ms % chunk_ms != 0)
    throw ConfigError("duration_ms must be a positive multiple of chunk_ms");
  check_distribution(ipu_ms[0], "ipu_ms[0]");
  check_distribution(ipu_ms[1], "ipu_ms[1]");
  check_distribution(pause_ms, "pause_ms");
  check_distribution(gap_ms, "gap_ms");
  check_distribution(turn_ipus, "turn_ipus");
  check_distribution(overlap_ms, "overlap_ms");
  if (pause_ms.mean < min_sil_ms)
    throw ConfigError("pause_ms mean " + std::to_string(pause_ms.mean) +
                      " is below the IPU silence threshold " + std::to_string(min_sil_ms));
  for (double r : {gap_rate, interruption_rate, backchannel_rate})
    if (!std::isfinite(r) || r < 0) throw ConfigError("event rates must be non-negative");
  if (!(floor_taking_prob >= 0 && floor_taking_prob <= 1))
    throw ConfigError("floor_taking_prob must lie in [0, 1]");
  if (backchannel_ms % chunk_ms != 0 || backchannel_ms <= 0 || backchannel_ms / chunk_ms >= m)
    throw ConfigError("backchannel_ms must be a positive multiple of chunk_ms below min_sil_ms");
  if (backchannel_words.empty() && backchannel_rate > 0)
    throw ConfigError("backchannel_words is empty");
}

SynthConversation generate(const SynthParams& params) {
  params.validate();
  const int c = params.chunk_ms;
  const ChunkIndex m = silence_threshold_chunks(c, params.min_sil_ms);
  const ChunkIndex n = params.duration_ms / c;
  Sampler rng(params.seed);

  const std::int64_t gaps = event_count(params.gap_rate, params.duration_ms);
  const std::int64_t interruptions = event_count(params.interruption_rate, params.duration_ms);
  const std::int64_t backchannels = event_count(params.backchannel_rate, params.duration_ms);
  std::int64_t floor_takings = 0;
  for (std::int64_t k = 0; k < interruptions; ++k) floor_takings += rng.bernoulli(params.floor_taking_prob);
  const std::int64_t butting_ins = interruptions - floor_takings;

  // Turn transitions: true = floor-taking, false = gap.
  std::vector<bool> floor_transition(static_cast<std::size_t>(gaps), false);
  floor_transition.insert(floor_transition.end(), static_cast<std::size_t>(floor_takings), true);
  std::shuffle(floor_transition.begin(), floor_transition.end(), rng.engine());
  const std::size_t num_turns = floor_transition.size() + 1;

  std::vector<PlannedIpu> ipus;
  std::vector<std::size_t> turn_first(num_turns);
  Speaker speaker = rng.bernoulli(0.5) ? Speaker::kOne : Speaker::kTwo;
  for (std::size_t t = 0; t < num_turns; ++t) {
    turn_first[t] = ipus.size();
    const ChunkIndex count = rng.count(params.turn_ipus, 1);
    for (ChunkIndex k = 0; k < count; ++k) {
      PlannedIpu u;
      u.speaker = speaker;
      u.turn = t;
      u.last_in_turn = k + 1 == count;
      ipus.push_back(u);
    }
    speaker = other(speaker);
  }
  for (std::size_t t = 0; t + 1 < num_turns; ++t) {
    if (!floor_transition[t]) continue;
    PlannedIpu& host = ipus[turn_first[t + 1] - 1];
    host.floor_len = rng.chunks(params.overlap_ms, c, 2);
    ipus[turn_first[t + 1]].overlap_in = host.floor_len;
  }

  // Butting-ins and backchannels go to uniformly drawn host IPUs; one IPU may
  // host several.
  const ChunkIndex bc_len = params.backchannel_ms / c;
  for (std::int64_t k = 0; k < butting_ins + backchannels; ++k) {
    PlannedIpu& host = ipus[static_cast<std::size_t>(rng.uniform(0, static_cast<ChunkIndex>(ipus.size()) - 1))];
    if (k < butting_ins) {
      host.inner.push_back({Special::kButtingIn, rng.chunks(params.overlap_ms, c, 1), 0});
    } else {
      host.inner.push_back({Special::kBackchannel, bc_len, 0});
    }
  }
  for (auto& u : ipus) std::shuffle(u.inner.begin(), u.inner.end(), rng.engine());

  // Minimum lengths keep every listener utterance at least m chunks away from
  // that listener's other speech, so it stays a separate IPU:
  // [overlap_in][m]([inner][m])*[floor overlap].
  std::vector<ChunkIndex> min_len(ipus.size());
  std::vector<ChunkIndex> extra(ipus.size());
  std::vector<ChunkIndex> pause_len;
  std::vector<ChunkIndex> gap_len;
  ChunkIndex fixed = 0;  // silence minus floor-taking overlap
  for (std::size_t k = 0; k < ipus.size(); ++k) {
    const PlannedIpu& u = ipus[k];
    const bool plain = u.overlap_in == 0 && u.inner.empty() && u.floor_len == 0;
    min_len[k] = plain ? 1 : u.overlap_in + m + u.floor_len;
    for (const Inner& x : u.inner) min_len[k] += x.len + m;
    const ChunkIndex raw =
        rng.chunks(params.ipu_ms[static_cast<std::size_t>(to_int(u.speaker) - 1)], c, 1);
    extra[k] = std::max<ChunkIndex>(0, raw - min_len[k]);
    if (!u.last_in_turn) {
      pause_len.push_back(rng.chunks(params.pause_ms, c, m));
      fixed += pause_len.back();
    } else if (u.turn + 1 < num_turns && !floor_transition[u.turn]) {
      gap_len.push_back(rng.chunks(params.gap_ms, c, 1));
      fixed += gap_len.back();
    } else if (u.turn + 1 < num_turns) {
      fixed -= u.floor_len;
    }
  }
  const ChunkIndex lead = rng.uniform(m, 3 * m);
  const ChunkIndex trail = rng.uniform(m, 3 * m);
  const ChunkIndex speech = n - lead - trail - fixed;
  const ChunkIndex needed = std::accumulate(min_len.begin(), min_len.end(), ChunkIndex{0});
  if (speech < needed)
    throw ConfigError("events do not fit in " + std::to_string(params.duration_ms) +
                      " ms; need at least " + std::to_string((needed + n - speech) * c) + " ms");
  const auto alloc = apportion(extra, speech - needed);

  ChunkIndex cursor = lead;
  std::size_t pause_k = 0;
  std::size_t gap_k = 0;
  for (std::size_t k = 0; k < ipus.size(); ++k) {
    PlannedIpu& u = ipus[k];
    u.len = min_len[k] + alloc[k];
    u.start = cursor;
    cursor = u.end() + 1;
    if (!u.last_in_turn) {
      cursor += pause_len[pause_k++];
    } else if (u.turn + 1 < num_turns) {
      if (floor_transition[u.turn]) {
        cursor = u.end() - u.floor_len + 1;
      } else {
        cursor += gap_len[gap_k++];
      }
    }
    // Spread the slack over the gaps around the inner utterances.
    const ChunkIndex slack = u.len - min_len[k];
    std::vector<ChunkIndex> cuts(u.inner.size());
    for (auto& x : cuts) x = rng.uniform(0, slack);
    std::sort(cuts.begin(), cuts.end());
    ChunkIndex off = u.overlap_in + m;
    for (std::size_t j = 0; j < u.inner.size(); ++j) {
      u.inner[j].off = off + cuts[j];
      off += u.inner[j].len + m;
    }
  }
  if (cursor != n - trail) throw Error("synthetic layout does not fill the duration");

  SynthConversation out;
  out.duration_ms = params.duration_ms;
  for (std::size_t k = 0; k < 2; ++k) {
    out.va[k].speaker = speaker_from_int(static_cast<int>(k) + 1);
    out.va[k].chunk_ms = c;
    out.va[k].active.assign(static_cast<std::size_t>(n), 0);
  }
  out.bc = empty_backchannels(n);
  auto mark = [&](std::vector<std::uint8_t>& v, ChunkSpan s, std::uint8_t value) {
    for (ChunkIndex i = s.start; i <= s.end; ++i) v[static_cast<std::size_t>(i)] = value;
  };
  auto idx = [](Speaker s) { return static_cast<std::size_t>(to_int(s) - 1); };

  EventTimeline& tl = out.timeline;
  tl.chunk_ms = c;
  tl.min_sil_ms = params.min_sil_ms;
  tl.num_chunks = n;
  std::vector<ChunkIndex> transfers;
  for (const auto& u : ipus) {
    const ChunkSpan span{u.start, u.end()};
    const Speaker listener = other(u.speaker);
    mark(out.va[idx(u.speaker)].active, span, 1);
    tl.ipus[idx(u.speaker)].push_back({u.speaker, span});
    if (tl.turns.size() <= u.turn) tl.turns.push_back({u.speaker, {}, span});
    tl.turns[u.turn].ipus.push_back({u.speaker, span});
    tl.turns[u.turn].hull.end = u.end();
    for (const Inner& x : u.inner) {
      const ChunkSpan s = u.span_of(x);
      mark(out.va[idx(listener)].active, s, 1);
      tl.ipus[idx(listener)].push_back({listener, s});
      if (x.kind == Special::kBackchannel) {
        // The speaker leaves a micro-gap, shorter than m, for the backchannel.
        mark(out.va[idx(u.speaker)].active, s, 0);
        mark(out.bc[idx(listener)].bc, s, 1);
        continue;
      }
      tl.overlaps.push_back(s);
      Interruption intr;
      intr.interrupter = listener;
      intr.interrupted = u.speaker;
      intr.interrupted_ipu = {u.speaker, span};
      intr.interrupter_ipu = {listener, s};
      intr.type = InterruptionType::kButtingIn;
      tl.interruptions.push_back(intr);
    }
    if (u.floor_len > 0) {
      tl.overlaps.push_back(u.floor_span());
      transfers.push_back(u.end() + 1);
    }
  }
  // Floor-taking records need the interrupter's IPU, known once laid out.
  for (std::size_t t = 0; t + 1 < num_turns; ++t) {
    if (!floor_transition[t]) continue;
    const PlannedIpu& host = ipus[turn_first[t + 1] - 1];
    const PlannedIpu& taker = ipus[turn_first[t + 1]];
    Interruption intr;
    intr.interrupter = taker.speaker;
    intr.interrupted = host.speaker;
    intr.interrupted_ipu = {host.speaker, {host.start, host.end()}};
    intr.interrupter_ipu = {taker.speaker, {taker.start, taker.end()}};
    intr.type = InterruptionType::kFloorTaking;
    intr.transfer_chunk = host.end() + 1;
    tl.interruptions.push_back(intr);
  }

  for (auto& v : tl.ipus)
    std::sort(v.begin(), v.end(), [](const Ipu& a, const Ipu& b) { return a.span.start < b.span.start; });
  std::sort(tl.overlaps.begin(), tl.overlaps.end(),
            [](const ChunkSpan& a, const ChunkSpan& b) { return a.start < b.start; });
  std::sort(tl.interruptions.begin(), tl.interruptions.end(),
            [](const Interruption& a, const Interruption& b) {
              return std::pair(a.interrupter_ipu.span.start, to_int(a.interrupter)) <
                     std::pair(b.interrupter_ipu.span.start, to_int(b.interrupter));
            });

  tl.silences.push_back({{0, lead - 1}, SilenceKind::kEdge});
  for (std::size_t k = 0; k + 1 < ipus.size(); ++k) {
    const PlannedIpu& u = ipus[k];
    const PlannedIpu& next = ipus[k + 1];
    if (next.start > u.end() + 1)
      tl.silences.push_back({{u.end() + 1, next.start - 1},
                             u.last_in_turn ? SilenceKind::kGap : SilenceKind::kPause});
  }
  tl.silences.push_back({{n - trail, n - 1}, SilenceKind::kEdge});

  // Labels and ownership from the plan.
  std::vector<std::uint8_t> change(static_cast<std::size_t>(n), 0);
  for (std::size_t t = 1; t < num_turns; ++t) change[static_cast<std::size_t>(tl.turns[t].onset())] = 1;
  for (ChunkIndex i : transfers) change[static_cast<std::size_t>(i)] = 1;
  out.labels.labels.assign(static_cast<std::size_t>(n), Label::kC);
  out.labels.owner.assign(static_cast<std::size_t>(n), std::nullopt);
  for (ChunkIndex i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const bool a = out.va[0].active[u];
    const bool b = out.va[1].active[u];
    Label& l = out.labels.labels[u];
    if (!a && !b) {
      l = Label::kNA;
    } else if (out.bc[0].bc[u] || out.bc[1].bc[u]) {
      l = Label::kBC;
    } else if (a && b) {
      l = Label::kI;
    } else if (change[u]) {
      l = Label::kT;
    }
  }
  for (std::size_t t = 0; t < num_turns; ++t) {
    ChunkIndex from = tl.turns[t].onset();
    if (t > 0 && floor_transition[t - 1]) from = tl.turns[t - 1].hull.end + 1;
    for (ChunkIndex i = from; i < n; ++i) out.labels.owner[static_cast<std::size_t>(i)] = tl.turns[t].speaker;
  }

  // Tokens: one word per 300 ms of each active run, fillers for backchannels.
  const auto& vocab = synth_vocabulary();
  std::uniform_int_distribution<std::size_t> pick_word(0, vocab.size() - 1);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& act = out.va[k].active;
    for (ChunkIndex i = 0; i < n;) {
      if (!act[static_cast<std::size_t>(i)]) {
        ++i;
        continue;
      }
      ChunkIndex j = i;
      while (j + 1 < n && act[static_cast<std::size_t>(j + 1)]) ++j;
      const std::int64_t lo = i * c;
      const std::int64_t run_ms = (j - i + 1) * c;
      const int spk = static_cast<int>(k) + 1;
      out.intervals.push_back({spk, lo, lo + run_ms});
      if (out.bc[k].bc[static_cast<std::size_t>(i)]) {
        std::uniform_int_distribution<std::size_t> pick(0, params.backchannel_words.size() - 1);
        out.tokens.push_back({spk, params.backchannel_words[pick(rng.engine())], lo, lo + run_ms});
      } else {
        const std::int64_t words = std::max<std::int64_t>(1, run_ms / kMsPerWord);
        for (std::int64_t w = 0; w < words; ++w)
          out.tokens.push_back({spk, vocab[pick_word(rng.engine())], lo + w * run_ms / words,
                                lo + (w + 1) * run_ms / words});
      }
      i = j + 1;
    }
  }
  std::sort(out.intervals.begin(), out.intervals.end(), [](const SpeechInterval& a, const SpeechInterval& b) {
    return std::pair(a.start_ms, a.speaker) < std::pair(b.start_ms, b.speaker);
  });
  std::stable_sort(out.tokens.begin(), out.tokens.end(),
                   [](const TranscriptToken& a, const TranscriptToken& b) {
                     return std::pair(a.start_ms, a.speaker) < std::pair(b.start_ms, b.speaker);
                   });
  return out;
}

}  // namespace turntake
