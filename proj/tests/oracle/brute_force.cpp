#include "oracle/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace oracle {

namespace {

std::string str(const Span& s) {
  return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + "]";
}

bool contains(const Span& outer, std::int64_t i) { return outer.start <= i && i <= outer.end; }

}  // namespace

Timeline segment(const Grid& y1, const Grid& y2, int m) {
  const auto n = static_cast<std::int64_t>(y1.size());
  const Grid* y[2] = {&y1, &y2};
  Timeline tl;

  // IPUs: successive active chunks belong together unless at least m
  // inactive chunks separate them.
  for (int k = 0; k < 2; ++k) {
    std::int64_t prev = -1;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!(*y[k])[i]) continue;
      if (prev >= 0 && i - prev - 1 < m) {
        tl.ipus[k].back().end = i;
      } else {
        tl.ipus[k].push_back({i, i});
      }
      prev = i;
    }
  }

  for (std::int64_t i = 0; i < n; ++i) {
    if (!(y1[i] && y2[i])) continue;
    if (!tl.overlaps.empty() && tl.overlaps.back().end == i - 1) {
      tl.overlaps.back().end = i;
    } else {
      tl.overlaps.push_back({i, i});
    }
  }

  // Every ordered pair of opposing IPUs is tested for an interruption.
  for (int x = 0; x < 2; ++x) {
    const int yk = 1 - x;
    for (const Span& u : tl.ipus[x]) {
      for (const Span& o : tl.ipus[yk]) {
        if (!(u.start < o.start && o.start < u.end)) continue;
        bool shared = false;
        for (std::int64_t t = o.start; t <= std::min(u.end, o.end); ++t)
          shared = shared || (y1[t] && y2[t]);
        if (!shared) continue;
        Interruption in;
        in.interrupter = yk + 1;
        in.interrupter_ipu = o;
        in.interrupted_ipu = u;
        in.floor_taking = o.end >= u.end;
        if (in.floor_taking) {
          for (std::int64_t t = u.end + 1; t <= o.end; ++t) {
            if ((*y[yk])[t] && !(*y[x])[t]) {
              in.transfer = t;
              break;
            }
          }
        }
        tl.interruptions.push_back(in);
      }
    }
  }
  std::sort(tl.interruptions.begin(), tl.interruptions.end(),
            [](const Interruption& a, const Interruption& b) {
              return std::tie(a.interrupter_ipu.start, a.interrupter) <
                     std::tie(b.interrupter_ipu.start, b.interrupter);
            });

  // An IPU that starts inside an opposing IPU and ends before it never holds
  // the floor.
  struct Floor {
    Span s;
    int speaker;
  };
  std::vector<Floor> floor;
  for (int k = 0; k < 2; ++k) {
    for (const Span& u : tl.ipus[k]) {
      bool absorbed = false;
      for (const Span& w : tl.ipus[1 - k])
        absorbed = absorbed || (contains(w, u.start) && u.end < w.end);
      if (!absorbed) floor.push_back({u, k + 1});
    }
  }
  std::sort(floor.begin(), floor.end(), [](const Floor& a, const Floor& b) {
    return std::tie(a.s.start, a.speaker) < std::tie(b.s.start, b.speaker);
  });
  for (const Floor& f : floor) {
    if (tl.turns.empty() || tl.turns.back().speaker != f.speaker) tl.turns.push_back({f.speaker, {}});
    tl.turns.back().ipus.push_back(f.s);
  }

  for (std::int64_t i = 0; i < n; ++i) {
    if (y1[i] || y2[i]) continue;
    if (i > 0 && !y1[i - 1] && !y2[i - 1]) continue;  // not a run start
    std::int64_t j = i;
    while (j + 1 < n && !y1[j + 1] && !y2[j + 1]) ++j;
    Silence s{{i, j}, "gap"};
    if (i == 0 || j == n - 1) {
      s.kind = "edge";
    } else {
      for (const Turn& t : tl.turns) {
        if (t.ipus.front().start <= i && j <= t.ipus.back().end) s.kind = "pause";
      }
    }
    tl.silences.push_back(s);
  }
  return tl;
}

std::string compare(const turntake::EventTimeline& got, const Timeline& want) {
  std::ostringstream os;
  for (int k = 0; k < 2; ++k) {
    const auto& g = got.ipus[k];
    if (g.size() != want.ipus[k].size()) {
      os << "speaker " << k + 1 << " IPU count " << g.size() << " vs " << want.ipus[k].size();
      return os.str();
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Span s{g[i].span.start, g[i].span.end};
      if (!(s == want.ipus[k][i]) || turntake::to_int(g[i].speaker) != k + 1) {
        os << "speaker " << k + 1 << " IPU " << i << ": " << str(s) << " vs " << str(want.ipus[k][i]);
        return os.str();
      }
    }
  }
  if (got.overlaps.size() != want.overlaps.size()) return "overlap count differs";
  for (std::size_t i = 0; i < got.overlaps.size(); ++i)
    if (!(Span{got.overlaps[i].start, got.overlaps[i].end} == want.overlaps[i]))
      return "overlap " + std::to_string(i) + " differs";
  if (got.silences.size() != want.silences.size()) {
    os << "silence count " << got.silences.size() << " vs " << want.silences.size();
    return os.str();
  }
  for (std::size_t i = 0; i < got.silences.size(); ++i) {
    const auto& s = got.silences[i];
    const Silence g{{s.span.start, s.span.end}, std::string(turntake::silence_kind_name(s.kind))};
    if (!(g == want.silences[i])) {
      os << "silence " << str(g.span) << " " << g.kind << " vs " << str(want.silences[i].span) << " "
         << want.silences[i].kind;
      return os.str();
    }
  }
  if (got.turns.size() != want.turns.size()) {
    os << "turn count " << got.turns.size() << " vs " << want.turns.size();
    return os.str();
  }
  for (std::size_t i = 0; i < got.turns.size(); ++i) {
    const auto& t = got.turns[i];
    Turn g{turntake::to_int(t.speaker), {}};
    for (const auto& u : t.ipus) g.ipus.push_back({u.span.start, u.span.end});
    if (!(g == want.turns[i])) return "turn " + std::to_string(i) + " differs";
    if (t.hull.start != g.ipus.front().start || t.hull.end != g.ipus.back().end)
      return "turn " + std::to_string(i) + " hull differs";
  }
  if (got.interruptions.size() != want.interruptions.size()) {
    os << "interruption count " << got.interruptions.size() << " vs " << want.interruptions.size();
    return os.str();
  }
  for (std::size_t i = 0; i < got.interruptions.size(); ++i) {
    const auto& in = got.interruptions[i];
    Interruption g;
    g.interrupter = turntake::to_int(in.interrupter);
    g.interrupter_ipu = {in.interrupter_ipu.span.start, in.interrupter_ipu.span.end};
    g.interrupted_ipu = {in.interrupted_ipu.span.start, in.interrupted_ipu.span.end};
    g.floor_taking = in.type == turntake::InterruptionType::kFloorTaking;
    g.transfer = in.transfer_chunk ? *in.transfer_chunk : -1;
    if (!(g == want.interruptions[i]) || turntake::to_int(in.interrupted) == g.interrupter)
      return "interruption " + std::to_string(i) + " differs";
  }
  return "";
}

Labels label(const Grid& y1, const Grid& y2, const Grid& bc1, const Grid& bc2, const Timeline& tl) {
  const auto n = static_cast<std::int64_t>(y1.size());
  std::vector<std::int64_t> changes;
  for (std::size_t t = 1; t < tl.turns.size(); ++t) changes.push_back(tl.turns[t].ipus.front().start);
  for (const auto& in : tl.interruptions)
    if (in.floor_taking && in.transfer >= 0) changes.push_back(in.transfer);

  auto in_turn_of = [&](int speaker, std::int64_t i) {
    for (const Turn& t : tl.turns)
      if (t.speaker == speaker && t.ipus.front().start <= i && i <= t.ipus.back().end) return true;
    return false;
  };

  Labels out;
  for (std::int64_t i = 0; i < n; ++i) {
    using turntake::Label;
    Label l;
    if (!y1[i] && !y2[i]) {
      l = Label::kNA;
    } else if ((bc1[i] && in_turn_of(2, i)) || (bc2[i] && in_turn_of(1, i))) {
      l = Label::kBC;
    } else if (y1[i] && y2[i] && !bc1[i] && !bc2[i]) {
      l = Label::kI;
    } else if (std::find(changes.begin(), changes.end(), i) != changes.end()) {
      l = Label::kT;
    } else {
      l = Label::kC;
    }
    out.label.push_back(static_cast<int>(l));

    // Owner: earliest-onset turn covering i, else the latest turn begun.
    int owner = 0;
    std::int64_t best_onset = -1;
    for (const Turn& t : tl.turns) {
      if (t.ipus.front().start <= i && i <= t.ipus.back().end &&
          (best_onset < 0 || t.ipus.front().start < best_onset)) {
        best_onset = t.ipus.front().start;
        owner = t.speaker;
      }
    }
    if (owner == 0) {
      for (const Turn& t : tl.turns)
        if (t.ipus.front().start <= i) owner = t.speaker;
    }
    out.owner.push_back(owner);
  }
  return out;
}

std::string compare(const turntake::TurnLabelSequence& got, const Labels& want) {
  if (got.labels.size() != want.label.size()) return "label length differs";
  for (std::size_t i = 0; i < got.labels.size(); ++i) {
    if (static_cast<int>(got.labels[i]) != want.label[i])
      return "chunk " + std::to_string(i) + ": label " + std::string(turntake::label_name(got.labels[i])) +
             " vs " + std::string(turntake::label_name(static_cast<turntake::Label>(want.label[i])));
    const int o = got.owner[i] ? turntake::to_int(*got.owner[i]) : 0;
    if (o != want.owner[i])
      return "chunk " + std::to_string(i) + ": owner " + std::to_string(o) + " vs " +
             std::to_string(want.owner[i]);
  }
  return "";
}

Grid random_grid(std::mt19937_64& rng, std::size_t n, double density, double mean_run) {
  const double on_len = mean_run;
  const double off_len = mean_run * (1.0 - density) / density;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid g(n);
  bool on = u(rng) < density;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = on;
    const double leave = on ? 1.0 / on_len : 1.0 / std::max(1.0, off_len);
    if (u(rng) < leave) on = !on;
  }
  return g;
}

void random_backchannels(std::mt19937_64& rng, const Grid& y1, const Grid& y2, const Timeline& tl,
                         Grid& bc1, Grid& bc2) {
  bc1.assign(y1.size(), 0);
  bc2.assign(y2.size(), 0);
  Grid* bc[2] = {&bc1, &bc2};
  const Grid* y[2] = {&y1, &y2};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    for (const Span& s : tl.ipus[k]) {
      bool nested = false;
      for (const Span& w : tl.ipus[1 - k]) nested = nested || (contains(w, s.start) && s.end < w.end);
      if (!nested || u(rng) >= 0.5) continue;
      for (std::int64_t i = s.start; i <= s.end; ++i) (*bc[k])[i] = (*y[k])[i];
    }
    for (std::size_t i = 0; i < y[k]->size(); ++i)
      if ((*y[k])[i] && u(rng) < 0.02) (*bc[k])[i] = 1;
  }
}

turntake::VoiceActivitySequence to_va(const Grid& g, int speaker, int chunk_ms) {
  turntake::VoiceActivitySequence va;
  va.speaker = turntake::speaker_from_int(speaker);
  va.chunk_ms = chunk_ms;
  va.active = g;
  return va;
}

turntake::BackchannelSequence to_bc(const Grid& g, int speaker) {
  turntake::BackchannelSequence bc;
  bc.speaker = turntake::speaker_from_int(speaker);
  bc.bc = g;
  return bc;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

double pairwise_sd(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) sum += (xs[i] - xs[j]) * (xs[i] - xs[j]);
  return std::sqrt(sum / (n * (n - 1)));
}

double branch_agreement(const std::vector<turntake::ScoredInstance>& s, double threshold,
                        bool positive_branch) {
  double n = 0;
  double hit = 0;
  for (const auto& x : s) {
    if (x.positive != positive_branch) continue;
    n += 1;
    const bool judged = x.score > threshold;
    if (judged == positive_branch) hit += 1;
  }
  return hit / n;
}

}  // namespace oracle
