#include "turntake/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

constexpr std::array<int, 4> kHorizons = {5, 25, 125, 750};

void check_inputs(const ChannelView& in, int window_chunks) {
  if (!in.va1 || !in.va2 || !in.bc1 || !in.bc2) throw ValidationError("missing input channel");
  check_pair(*in.va1, *in.va2);
  if (static_cast<ChunkIndex>(in.bc1->bc.size()) != in.size() ||
      static_cast<ChunkIndex>(in.bc2->bc.size()) != in.size())
    throw ValidationError("backchannel sequences do not match the activity grid");
  if (window_chunks <= 0) throw ConfigError("context window must be positive");
}

std::optional<Speaker> sole_speaker(const ChannelView& in, ChunkIndex j) {
  const bool a = in.va1->at(j);
  const bool b = in.va2->at(j);
  if (a == b) return std::nullopt;
  return a ? Speaker::kOne : Speaker::kTwo;
}

// Shared tail of both feature paths: everything except the activity
// fractions, from already-known run lengths and recency values.
struct Recency {
  ChunkIndex silence_run = 0;
  ChunkIndex overlap_run = 0;
  std::array<ChunkIndex, 2> active_run{};
  ChunkIndex since_switch = 0;
  std::optional<Speaker> last_sole;
  std::array<ChunkIndex, 2> since_bc{};
};

void fill_tail(FeatureVector& f, const Recency& r, const ChannelView& in, ChunkIndex i) {
  f[8] = static_cast<double>(r.silence_run);
  f[9] = static_cast<double>(r.overlap_run);
  f[10] = static_cast<double>(r.active_run[0]);
  f[11] = static_cast<double>(r.active_run[1]);
  f[12] = static_cast<double>(r.since_switch);
  f[13] = r.last_sole == Speaker::kOne ? 1.0 : 0.0;
  f[14] = r.last_sole == Speaker::kTwo ? 1.0 : 0.0;
  f[15] = static_cast<double>(r.since_bc[0]);
  f[16] = static_cast<double>(r.since_bc[1]);
  f[17] = std::log1p(f[8]);
  f[18] = std::log1p(f[9]);
  f[19] = in.bc1->at(i - 1) ? 1.0 : 0.0;
  f[20] = in.bc2->at(i - 1) ? 1.0 : 0.0;
  f[21] = in.va1->at(i - 1) ? 1.0 : 0.0;
  f[22] = in.va2->at(i - 1) ? 1.0 : 0.0;
}

ProbRow softmax(const ProbRow& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  ProbRow p;
  double sum = 0;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    p[k] = std::exp(logits[k] - top);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

FeatureVector standardize(const BaselineModel& m, const FeatureVector& x) {
  FeatureVector z;
  for (std::size_t d = 0; d < kFeatureDim; ++d) z[d] = (x[d] - m.feature_mean[d]) / m.feature_scale[d];
  return z;
}

ProbRow logits_of(const BaselineModel& m, const FeatureVector& z) {
  ProbRow logits = m.bias;
  for (std::size_t k = 0; k < kNumLabels; ++k)
    for (std::size_t d = 0; d < kFeatureDim; ++d) logits[k] += m.weights[k][d] * z[d];
  return logits;
}

}  // namespace

FeatureVector featurize(const ChannelView& in, ChunkIndex i, int window_chunks) {
  check_inputs(in, window_chunks);
  if (i < 1 || i > in.size())
    throw ValidationError("feature chunk " + std::to_string(i) + " outside [1, " +
                          std::to_string(in.size()) + "]");
  const ChunkIndex ws = std::max<ChunkIndex>(0, i - window_chunks);
  const std::array<const VoiceActivitySequence*, 2> va = {in.va1, in.va2};
  const std::array<const BackchannelSequence*, 2> bc = {in.bc1, in.bc2};

  FeatureVector f{};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t h = 0; h < kHorizons.size(); ++h) {
      const ChunkIndex span = std::min(kHorizons[h], window_chunks);
      ChunkIndex active = 0;
      for (ChunkIndex j = std::max<ChunkIndex>(0, i - span); j < i; ++j) active += va[k]->at(j);
      f[k * 4 + h] = static_cast<double>(active) / static_cast<double>(span);
    }
  }

  Recency r;
  auto run_back = [&](auto pred) {
    ChunkIndex n = 0;
    for (ChunkIndex j = i - 1; j >= ws && pred(j); --j) ++n;
    return n;
  };
  r.silence_run = run_back([&](ChunkIndex j) { return !in.va1->at(j) && !in.va2->at(j); });
  r.overlap_run = run_back([&](ChunkIndex j) { return in.va1->at(j) && in.va2->at(j); });
  for (std::size_t k = 0; k < 2; ++k)
    r.active_run[k] = run_back([&](ChunkIndex j) { return va[k]->at(j); });

  std::optional<ChunkIndex> last_switch;
  for (ChunkIndex j = ws; j < i; ++j) {
    const auto s = sole_speaker(in, j);
    if (!s) continue;
    if (r.last_sole && *r.last_sole != *s) last_switch = j;
    r.last_sole = s;
  }
  r.since_switch = last_switch ? i - *last_switch : window_chunks + 1;
  for (std::size_t k = 0; k < 2; ++k) {
    r.since_bc[k] = window_chunks + 1;
    for (ChunkIndex j = i - 1; j >= ws; --j) {
      if (bc[k]->at(j)) {
        r.since_bc[k] = i - j;
        break;
      }
    }
  }
  fill_tail(f, r, in, i);
  return f;
}

std::vector<FeatureVector> featurize_all(const ChannelView& in, int window_chunks) {
  check_inputs(in, window_chunks);
  const ChunkIndex n = in.size();
  const std::array<const VoiceActivitySequence*, 2> va = {in.va1, in.va2};
  const std::array<const BackchannelSequence*, 2> bc = {in.bc1, in.bc2};

  std::array<std::vector<ChunkIndex>, 2> prefix;  // prefix[k][j]: active chunks in [0, j)
  for (std::size_t k = 0; k < 2; ++k) {
    prefix[k].assign(static_cast<std::size_t>(n) + 1, 0);
    for (ChunkIndex j = 0; j < n; ++j)
      prefix[k][static_cast<std::size_t>(j + 1)] = prefix[k][static_cast<std::size_t>(j)] + va[k]->at(j);
  }

  std::vector<FeatureVector> out;
  if (n < 2) return out;
  out.reserve(static_cast<std::size_t>(n - 1));

  ChunkIndex silence = 0;
  ChunkIndex overlap = 0;
  std::array<ChunkIndex, 2> active{};
  std::optional<Speaker> last_sole;
  ChunkIndex last_sole_chunk = -1;
  ChunkIndex last_switch = -1;
  ChunkIndex last_switch_pred = -1;  // sole chunk preceding last_switch
  std::array<ChunkIndex, 2> last_bc = {-1, -1};
  const ChunkIndex w = window_chunks;

  for (ChunkIndex i = 1; i < n; ++i) {
    const ChunkIndex j = i - 1;
    const bool a = in.va1->at(j);
    const bool b = in.va2->at(j);
    silence = !a && !b ? silence + 1 : 0;
    overlap = a && b ? overlap + 1 : 0;
    active[0] = a ? active[0] + 1 : 0;
    active[1] = b ? active[1] + 1 : 0;
    if (const auto s = sole_speaker(in, j)) {
      if (last_sole && *last_sole != *s) {
        last_switch = j;
        last_switch_pred = last_sole_chunk;
      }
      last_sole = s;
      last_sole_chunk = j;
    }
    for (std::size_t k = 0; k < 2; ++k)
      if (bc[k]->at(j)) last_bc[k] = j;

    const ChunkIndex ws = std::max<ChunkIndex>(0, i - w);
    FeatureVector f{};
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t h = 0; h < kHorizons.size(); ++h) {
        const ChunkIndex span = std::min<ChunkIndex>(kHorizons[h], w);
        const ChunkIndex lo = std::max<ChunkIndex>(0, i - span);
        const ChunkIndex cnt = prefix[k][static_cast<std::size_t>(i)] - prefix[k][static_cast<std::size_t>(lo)];
        f[k * 4 + h] = static_cast<double>(cnt) / static_cast<double>(span);
      }
    }
    Recency r;
    r.silence_run = std::min(silence, w);
    r.overlap_run = std::min(overlap, w);
    r.active_run = {std::min(active[0], w), std::min(active[1], w)};
    // A switch is visible only if the sole chunk it switched from is too.
    r.since_switch = last_switch >= ws && last_switch_pred >= ws ? i - last_switch : w + 1;
    if (last_sole_chunk >= ws) r.last_sole = last_sole;
    for (std::size_t k = 0; k < 2; ++k) r.since_bc[k] = last_bc[k] >= ws ? i - last_bc[k] : w + 1;
    fill_tail(f, r, in, i);
    out.push_back(f);
  }
  return out;
}

std::vector<LabeledExample> training_examples(const ChannelView& in, const TurnLabelSequence& labels,
                                              int window_chunks) {
  if (labels.size() != in.size()) throw ValidationError("labels do not match the activity grid");
  const auto feats = featurize_all(in, window_chunks);
  std::vector<LabeledExample> out;
  out.reserve(feats.size());
  for (std::size_t k = 0; k < feats.size(); ++k)
    out.push_back({feats[k], labels.at(static_cast<ChunkIndex>(k) + 1)});
  return out;
}

double cross_entropy(const BaselineModel& model, std::span<const LabeledExample> batch,
                     Gradient* grad) {
  if (batch.empty()) throw ValidationError("empty batch");
  if (grad) *grad = Gradient{};
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const FeatureVector z = standardize(model, ex.x);
    const ProbRow logits = logits_of(model, z);
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0;
    for (double l : logits) sum += std::exp(l - top);
    const auto y = static_cast<std::size_t>(ex.y);
    loss += (top + std::log(sum) - logits[y]) * inv_n;
    if (!grad) continue;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double delta = (std::exp(logits[k] - top) / sum - (k == y ? 1.0 : 0.0)) * inv_n;
      grad->bias[k] += delta;
      for (std::size_t d = 0; d < kFeatureDim; ++d) grad->weights[k][d] += delta * z[d];
    }
  }
  return loss;
}

BaselineModel train(std::span<const LabeledExample> examples, const TrainOptions& options) {
  if (options.epochs < 0 || !(options.step_size > 0))
    throw ConfigError("training needs a positive step size and non-negative epochs");
  BaselineModel model;
  model.options = options;
  for (const auto& ex : examples) {
    for (double v : ex.x)
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    ++model.class_counts[static_cast<std::size_t>(ex.y)];
  }
  for (Label l : kAllLabels) {
    if (model.class_counts[static_cast<std::size_t>(l)] == 0)
      throw ValidationError("no training example for class " + std::string(label_name(l)));
  }

  // Canonical order first, so the result does not depend on input order.
  std::vector<LabeledExample> data(examples.begin(), examples.end());
  std::sort(data.begin(), data.end(), [](const LabeledExample& a, const LabeledExample& b) {
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  if (options.downsample) {
    const std::int64_t target =
        *std::min_element(model.class_counts.begin(), model.class_counts.end());
    std::mt19937_64 rng(options.seed);
    std::vector<LabeledExample> kept;
    std::size_t begin = 0;
    for (Label l : kAllLabels) {
      const auto count = static_cast<std::size_t>(model.class_counts[static_cast<std::size_t>(l)]);
      std::vector<std::size_t> idx(count);
      for (std::size_t k = 0; k < count; ++k) idx[k] = begin + k;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(target));
      std::sort(idx.begin(), idx.end());
      for (std::size_t k : idx) kept.push_back(data[k]);
      begin += count;
    }
    data = std::move(kept);
  }
  for (const auto& ex : data) ++model.used_counts[static_cast<std::size_t>(ex.y)];

  const double n = static_cast<double>(data.size());
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    double mean = 0;
    for (const auto& ex : data) mean += ex.x[d];
    mean /= n;
    double var = 0;
    for (const auto& ex : data) var += (ex.x[d] - mean) * (ex.x[d] - mean);
    const double sd = std::sqrt(var / n);
    model.feature_mean[d] = mean;
    model.feature_scale[d] = sd > 1e-12 ? sd : 1.0;
  }

  Gradient g;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    model.loss_history.push_back(cross_entropy(model, data, &g));
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      model.bias[k] -= options.step_size * g.bias[k];
      for (std::size_t d = 0; d < kFeatureDim; ++d)
        model.weights[k][d] -= options.step_size * g.weights[k][d];
    }
  }
  model.loss_history.push_back(cross_entropy(model, data));
  return model;
}

ProbRow predict_row(const BaselineModel& model, const FeatureVector& x) {
  return softmax(logits_of(model, standardize(model, x)));
}

LikelihoodStream predict_stream(const BaselineModel& model, const ChannelView& in) {
  LikelihoodStream s;
  s.first_chunk = 1;
  for (const auto& f : featurize_all(in, model.window_chunks)) s.rows.push_back(predict_row(model, f));
  return s;
}

}  // namespace turntake
