#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "turntake/labeler.hpp"
#include "turntake/types.hpp"

namespace turntake {

/// Class probabilities in label order (NA, BC, I, T, C).
using ProbRow = std::array<double, kNumLabels>;

inline double prob(const ProbRow& p, Label l) { return p[static_cast<std::size_t>(l)]; }

/// Throws ValidationError unless every entry is in [0,1] and the row sums to
/// 1 within 1e-6.
void validate_row(const ProbRow& p);

/// Judge-model likelihoods for a contiguous chunk range starting at
/// first_chunk.
struct LikelihoodStream {
  ChunkIndex first_chunk = 0;
  std::vector<ProbRow> rows;

  ChunkIndex end_chunk() const { return first_chunk + static_cast<ChunkIndex>(rows.size()); }
  bool has(ChunkIndex i) const { return i >= first_chunk && i < end_chunk(); }
  const ProbRow& at(ChunkIndex i) const {
    return rows[static_cast<std::size_t>(i - first_chunk)];
  }
  friend bool operator==(const LikelihoodStream&, const LikelihoodStream&) = default;
};

void validate_stream(const LikelihoodStream& s);

/// Stream placing `p_true` on the reference label of every chunk and spreading
/// the remainder evenly over the other classes.
LikelihoodStream idealized_stream(const TurnLabelSequence& labels, double p_true = 0.9,
                                  ChunkIndex first_chunk = 1);

struct Thresholds {
  double speak_up = 0.0;       // J1: p_T - p_C, metrics a and d
  double backchannel = 0.1;    // J2: p_BC
  double interrupt = -0.45;    // J3: p_I - p_C
  double yield = -0.1;         // J4: p_T - p_C, metric e
  ProbRow operating_points = {0.45, 0.4, 0.4, 0.4, 0.2};

  /// Threshold applied to the metric's judge label.
  double for_metric(MetricId m) const;
  void set_for_metric(MetricId m, double v);
  void validate() const;  // throws ConfigError
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

Label judge_label_a(const ProbRow& p, double threshold);  // T or C
bool judge_label_b(const ProbRow& p, double threshold);   // true: BC
Label judge_label_c(const ProbRow& p, double threshold);  // I or C
Label judge_label_e(const ProbRow& p, double threshold);  // T or C

/// Statistic the metric's judge label thresholds: p_T - p_C (a, d, e), p_BC (b)
/// or p_I - p_C (c).
double judge_score(MetricId m, const ProbRow& p);

/// An instance reduced to its judge statistic and actual decision.
struct ScoredInstance {
  double score = 0;
  bool positive = false;
  ChunkIndex chunk = 0;
};

/// Attach judge statistics to instances. Throws ValidationError naming every
/// decision chunk the stream lacks.
std::vector<ScoredInstance> score_instances(std::span<const DecisionInstance> instances,
                                            const LikelihoodStream& stream);

/// Agreement tally for one branch; n and matches suffice for the normal CI.
struct BranchTally {
  std::int64_t n = 0;
  std::int64_t matches = 0;
  BranchTally& operator+=(const BranchTally& o) {
    n += o.n;
    matches += o.matches;
    return *this;
  }
};

struct BranchResult {
  std::int64_t n = 0;
  std::int64_t matches = 0;
  std::optional<double> agreement;  // undefined when n == 0
  double half_width = 0;            // 1.96 * sample sd / sqrt(n)
  double ci_lo = 0;
  double ci_hi = 0;
};

BranchResult finalize_branch(const BranchTally& t);

/// Additive per-metric tally.
struct MetricTally {
  BranchTally positive;  // actual decision took the positive branch
  BranchTally negative;
  std::int64_t events = 0;           // runs of consecutive decision chunks
  std::int64_t positive_events = 0;  // runs containing a positive instance
  MetricTally& operator+=(const MetricTally& o);
};

MetricTally tally_metric(MetricId metric, std::span<const ScoredInstance> scored,
                         const Thresholds& thresholds);

struct MetricResult {
  MetricId metric = MetricId::kA;
  BranchResult positive;
  BranchResult negative;
  std::int64_t instances = 0;
  std::optional<double> positive_share_instances;  // % of instances, Table-2 style
  std::optional<double> positive_share_events;     // % of decision runs
  std::optional<double> me_positive;               // threshold-sensitivity margin of error
  std::optional<double> me_negative;
};

MetricResult finalize_metric(MetricId metric, const MetricTally& tally);

/// Threshold grid idx/denominator for idx in [lo_idx, hi_idx].
struct GridSpec {
  int lo_idx = -50;
  int hi_idx = 50;
  int denominator = 100;

  std::size_t size() const { return static_cast<std::size_t>(hi_idx - lo_idx + 1); }
  double at(std::size_t k) const {
    return static_cast<double>(lo_idx + static_cast<int>(k)) / denominator;
  }
  static GridSpec difference() { return {-50, 50, 100}; }
  static GridSpec probability() { return {0, 100, 100}; }
  static GridSpec for_metric(MetricId m) {
    return m == MetricId::kB ? probability() : difference();
  }
};

/// Per-branch agreement at every grid point.
struct AgreementCurve {
  std::vector<double> thresholds;
  std::vector<std::optional<double>> positive;
  std::vector<std::optional<double>> negative;
  std::vector<std::optional<double>> objective;  // mean of defined branches
};

AgreementCurve agreement_curve(std::span<const ScoredInstance> scored, const GridSpec& grid);

/// Margin of error 1.96 * sd / sqrt(n) of a curve (sample sd, n = points).
double sensitivity_me(std::span<const double> curve);

struct TuneOutcome {
  double threshold = 0;
  std::optional<double> objective;  // unset when no instances
  bool defaulted = false;
};

/// Exhaustive grid search maximizing the mean of the two branch agreements;
/// ties go to the smallest threshold. Empty input keeps `fallback`.
TuneOutcome tune_threshold(std::span<const ScoredInstance> scored, const GridSpec& grid,
                           double fallback);

struct TuneResult {
  Thresholds thresholds;
  std::array<TuneOutcome, 4> outcomes;  // speak_up, backchannel, interrupt, yield
  std::vector<std::string> warnings;
};

/// Tune J1 on metric-a instances, J2 on b, J3 on c and J4 on e. Callers pool
/// instances from both speaker perspectives for human-human validation data.
TuneResult tune_thresholds(std::span<const ScoredInstance> a, std::span<const ScoredInstance> b,
                           std::span<const ScoredInstance> c, std::span<const ScoredInstance> e,
                           const Thresholds& defaults = {});

/// Single label per chunk from operating points; covers the stream's range.
struct GeneratedLabels {
  ChunkIndex first_chunk = 0;
  std::vector<Label> labels;
};

Label single_label(const ProbRow& p, const ProbRow& operating_points);
GeneratedLabels single_label(const LikelihoodStream& stream, const ProbRow& operating_points);

/// Counts indexed [generated][dialogue].
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> counts{};

  std::int64_t total() const;
  std::array<std::array<double, kNumLabels>, kNumLabels> percentages() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

/// Confusion of the dialogue's labels against generated labels over the AI's
/// decision chunks (predecessor owned by the other speaker). Throws
/// ValidationError when no chunk qualifies and `allow_empty` is false.
ConfusionMatrix confusion(const TurnLabelSequence& dialogue, const GeneratedLabels& generated,
                          Speaker ai, bool allow_empty = false);

/// Probability that a random positive outranks a random negative (ties count
/// one half). Undefined without both classes.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// One-vs-rest AUC per class over chunks the stream covers.
std::array<std::optional<double>, kNumLabels> per_class_auc(
    std::span<const ProbRow> rows, std::span<const Label> reference);

}  // namespace turntake
