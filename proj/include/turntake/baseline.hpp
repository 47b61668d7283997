#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "turntake/judge.hpp"
#include "turntake/labeler.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

inline constexpr int kFeatureSpecVersion = 1;

/// Feature layout (all computed from chunks [max(0, i - W), i - 1]):
///   0..7   activity fraction of speaker 1 / 2 over the last 5, 25, 125, 750
///          chunks (horizons clipped to W; chunks before the conversation
///          start count as silent)
///   8      joint-silence run ending at i - 1
///   9      overlap run ending at i - 1
///   10,11  activity run of speaker 1 / 2 ending at i - 1
///   12     chunks since the last change of sole speaker (W + 1 if none)
///   13,14  last sole speaker was 1 / 2
///   15,16  chunks since speaker 1 / 2 last backchanneled (W + 1 if none)
///   17,18  log1p of the silence and overlap runs
///   19,20  speaker 1 / 2 backchanneling at i - 1
///   21,22  speaker 1 / 2 active at i - 1
inline constexpr std::size_t kFeatureDim = 23;
using FeatureVector = std::array<double, kFeatureDim>;

/// The four input channels a causal predictor sees.
struct ChannelView {
  const VoiceActivitySequence* va1 = nullptr;
  const VoiceActivitySequence* va2 = nullptr;
  const BackchannelSequence* bc1 = nullptr;
  const BackchannelSequence* bc2 = nullptr;

  ChunkIndex size() const { return va1->size(); }
};

/// Straightforward per-chunk computation; throws ValidationError unless
/// 1 <= i <= N.
FeatureVector featurize(const ChannelView& in, ChunkIndex i,
                        int window_chunks = kDefaultWindowChunks);

/// Features for every chunk i in [1, N - 1] in one forward pass; element k
/// belongs to chunk k + 1.
std::vector<FeatureVector> featurize_all(const ChannelView& in,
                                         int window_chunks = kDefaultWindowChunks);

struct LabeledExample {
  FeatureVector x{};
  Label y = Label::kC;
};

/// (features at i, l_i) for every chunk i >= 1.
std::vector<LabeledExample> training_examples(const ChannelView& in, const TurnLabelSequence& labels,
                                              int window_chunks = kDefaultWindowChunks);

struct TrainOptions {
  bool downsample = true;
  std::uint64_t seed = 0;
  int epochs = 200;
  double step_size = 0.1;
};

struct BaselineModel {
  std::array<FeatureVector, kNumLabels> weights{};  // applied to standardized features
  ProbRow bias{};
  FeatureVector feature_mean{};
  FeatureVector feature_scale{};  // divides (x - mean); 1 for constant features
  int window_chunks = kDefaultWindowChunks;
  int chunk_ms = kDefaultChunkMs;
  int feature_version = kFeatureSpecVersion;
  TrainOptions options;
  std::array<std::int64_t, kNumLabels> class_counts{};  // before downsampling
  std::array<std::int64_t, kNumLabels> used_counts{};   // after
  std::vector<double> loss_history;  // before the first step, then after every step

  BaselineModel() { feature_scale.fill(1.0); }
};

struct Gradient {
  std::array<FeatureVector, kNumLabels> weights{};
  ProbRow bias{};
};

/// Mean cross-entropy of the model on `batch`; fills `grad` when given.
double cross_entropy(const BaselineModel& model, std::span<const LabeledExample> batch,
                     Gradient* grad = nullptr);

/// Multinomial logistic regression by full-batch gradient descent from zero
/// weights. Throws ValidationError when a class has no example.
BaselineModel train(std::span<const LabeledExample> examples, const TrainOptions& options = {});

ProbRow predict_row(const BaselineModel& model, const FeatureVector& x);

/// One row per chunk i in [1, N - 1], each from chunks < i only.
LikelihoodStream predict_stream(const BaselineModel& model, const ChannelView& in);

}  // namespace turntake
