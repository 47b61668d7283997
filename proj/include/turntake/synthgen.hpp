#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "turntake/labeler.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

/// Normal distribution, clipped to the caller's minimum after sampling.
struct Distribution {
  double mean = 0;
  double sd = 0;
};

/// Generator settings. Event rates are per minute and realized exactly
/// (count = round(rate * minutes)); only the floor-taking share of
/// interruptions is drawn per event.
struct SynthParams {
  std::int64_t duration_ms = 30 * 60 * 1000;  // multiple of chunk_ms
  int chunk_ms = kDefaultChunkMs;
  int min_sil_ms = kDefaultMinSilenceMs;
  // Relative IPU lengths; actual lengths are rescaled to fill the duration.
  std::array<Distribution, 2> ipu_ms = {Distribution{2000, 800}, Distribution{2000, 800}};
  Distribution pause_ms{600, 200};
  Distribution gap_ms{500, 200};
  Distribution turn_ipus{2.0, 1.0};
  Distribution overlap_ms{240, 80};
  double gap_rate = 2.3;           // turn changes through silence
  double interruption_rate = 0.5;  // overlapping onsets inside the other's IPU
  double floor_taking_prob = 0.6;
  double backchannel_rate = 4.0;   // both speakers together
  int backchannel_ms = 160;        // shorter than min_sil_ms
  std::vector<std::string> backchannel_words = {"yeah", "right", "uh-huh", "mm-hmm", "okay"};
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct SynthConversation {
  std::int64_t duration_ms = 0;
  std::vector<SpeechInterval> intervals;  // chunk-aligned, per speaker disjoint
  std::vector<TranscriptToken> tokens;
  // Ground truth as constructed, in the same form the pipeline computes.
  std::array<VoiceActivitySequence, 2> va;
  EventTimeline timeline;
  std::array<BackchannelSequence, 2> bc;
  TurnLabelSequence labels;
};

/// Non-filler vocabulary for ordinary speech tokens.
const std::vector<std::string>& synth_vocabulary();

/// Deterministic given params.seed. Throws ConfigError when the params are
/// invalid or the events do not fit the duration.
SynthConversation generate(const SynthParams& params);

}  // namespace turntake
