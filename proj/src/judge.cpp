#include "turntake/judge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

constexpr double kZ95 = 1.96;
constexpr double kRowSumTolerance = 1e-6;

double sample_sd(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

void validate_row(const ProbRow& p) {
  double sum = 0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError("probability " + std::to_string(v) + " outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance)
    throw ValidationError("probabilities sum to " + std::to_string(sum) + ", expected 1");
}

void validate_stream(const LikelihoodStream& s) {
  if (s.first_chunk < 0) throw ValidationError("stream starts at a negative chunk");
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    try {
      validate_row(s.rows[r]);
    } catch (const ValidationError& e) {
      throw ValidationError("chunk " + std::to_string(s.first_chunk + static_cast<ChunkIndex>(r)) +
                            ": " + e.what());
    }
  }
}

LikelihoodStream idealized_stream(const TurnLabelSequence& labels, double p_true,
                                  ChunkIndex first_chunk) {
  LikelihoodStream s;
  s.first_chunk = first_chunk;
  const double rest = (1.0 - p_true) / (kNumLabels - 1);
  for (ChunkIndex i = first_chunk; i < labels.size(); ++i) {
    ProbRow row;
    row.fill(rest);
    row[static_cast<std::size_t>(labels.at(i))] = p_true;
    s.rows.push_back(row);
  }
  return s;
}

double Thresholds::for_metric(MetricId m) const {
  switch (m) {
    case MetricId::kA:
    case MetricId::kD: return speak_up;
    case MetricId::kB: return backchannel;
    case MetricId::kC: return interrupt;
    case MetricId::kE: return yield;
  }
  return 0;
}

void Thresholds::set_for_metric(MetricId m, double v) {
  switch (m) {
    case MetricId::kA:
    case MetricId::kD: speak_up = v; break;
    case MetricId::kB: backchannel = v; break;
    case MetricId::kC: interrupt = v; break;
    case MetricId::kE: yield = v; break;
  }
}

void Thresholds::validate() const {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(speak_up, -1, 1) || !in(interrupt, -1, 1) || !in(yield, -1, 1))
    throw ConfigError("difference thresholds must lie in [-1, 1]");
  if (!in(backchannel, 0, 1)) throw ConfigError("backchannel threshold must lie in [0, 1]");
  for (double op : operating_points)
    if (!in(op, 0, 1)) throw ConfigError("operating points must lie in [0, 1]");
}

Label judge_label_a(const ProbRow& p, double threshold) {
  validate_row(p);
  return prob(p, Label::kT) - prob(p, Label::kC) > threshold ? Label::kT : Label::kC;
}

bool judge_label_b(const ProbRow& p, double threshold) {
  validate_row(p);
  return prob(p, Label::kBC) > threshold;
}

Label judge_label_c(const ProbRow& p, double threshold) {
  validate_row(p);
  return prob(p, Label::kI) - prob(p, Label::kC) > threshold ? Label::kI : Label::kC;
}

Label judge_label_e(const ProbRow& p, double threshold) {
  validate_row(p);
  return prob(p, Label::kT) - prob(p, Label::kC) > threshold ? Label::kT : Label::kC;
}

double judge_score(MetricId m, const ProbRow& p) {
  switch (m) {
    case MetricId::kB: return prob(p, Label::kBC);
    case MetricId::kC: return prob(p, Label::kI) - prob(p, Label::kC);
    default: return prob(p, Label::kT) - prob(p, Label::kC);
  }
}

std::vector<ScoredInstance> score_instances(std::span<const DecisionInstance> instances,
                                            const LikelihoodStream& stream) {
  std::vector<ScoredInstance> out;
  std::vector<ChunkIndex> missing;
  for (const auto& inst : instances) {
    if (!stream.has(inst.chunk)) {
      missing.push_back(inst.chunk);
      continue;
    }
    const ProbRow& p = stream.at(inst.chunk);
    validate_row(p);
    out.push_back({judge_score(inst.metric, p), inst.positive, inst.chunk});
  }
  if (!missing.empty()) {
    std::string msg = "likelihood stream lacks rows for decision chunks:";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + std::to_string(missing[i]);
    if (shown < missing.size()) msg += " ... (" + std::to_string(missing.size()) + " total)";
    throw ValidationError(msg);
  }
  return out;
}

BranchResult finalize_branch(const BranchTally& t) {
  BranchResult r;
  r.n = t.n;
  r.matches = t.matches;
  if (t.n == 0) return r;
  const double n = static_cast<double>(t.n);
  const double p = static_cast<double>(t.matches) / n;
  r.agreement = p;
  // Sample sd of the 0/1 agreement indicator; a single instance has none.
  const double sd = t.n > 1 ? std::sqrt(n * p * (1.0 - p) / (n - 1.0)) : 0.0;
  r.half_width = kZ95 * sd / std::sqrt(n);
  r.ci_lo = p - r.half_width;
  r.ci_hi = p + r.half_width;
  return r;
}

MetricTally& MetricTally::operator+=(const MetricTally& o) {
  positive += o.positive;
  negative += o.negative;
  events += o.events;
  positive_events += o.positive_events;
  return *this;
}

MetricTally tally_metric(MetricId metric, std::span<const ScoredInstance> scored,
                         const Thresholds& thresholds) {
  const double threshold = thresholds.for_metric(metric);
  MetricTally t;
  bool run_positive = false;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    const auto& s = scored[k];
    const bool judged_positive = s.score > threshold;
    BranchTally& branch = s.positive ? t.positive : t.negative;
    ++branch.n;
    if (judged_positive == s.positive) ++branch.matches;

    const bool starts_run = k == 0 || scored[k - 1].chunk + 1 != s.chunk;
    if (starts_run) {
      if (k > 0 && run_positive) ++t.positive_events;
      ++t.events;
      run_positive = false;
    }
    run_positive = run_positive || s.positive;
  }
  if (!scored.empty() && run_positive) ++t.positive_events;
  return t;
}

MetricResult finalize_metric(MetricId metric, const MetricTally& tally) {
  MetricResult r;
  r.metric = metric;
  r.positive = finalize_branch(tally.positive);
  r.negative = finalize_branch(tally.negative);
  r.instances = tally.positive.n + tally.negative.n;
  if (r.instances > 0)
    r.positive_share_instances = 100.0 * static_cast<double>(tally.positive.n) /
                                 static_cast<double>(r.instances);
  if (tally.events > 0)
    r.positive_share_events = 100.0 * static_cast<double>(tally.positive_events) /
                              static_cast<double>(tally.events);
  return r;
}

AgreementCurve agreement_curve(std::span<const ScoredInstance> scored, const GridSpec& grid) {
  AgreementCurve c;
  std::int64_t n_pos = 0;
  for (const auto& s : scored) n_pos += s.positive ? 1 : 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(scored.size()) - n_pos;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double th = grid.at(k);
    std::int64_t pos_ok = 0;
    std::int64_t neg_ok = 0;
    for (const auto& s : scored) {
      const bool judged = s.score > th;
      if (s.positive && judged) ++pos_ok;
      if (!s.positive && !judged) ++neg_ok;
    }
    std::optional<double> ap;
    std::optional<double> an;
    if (n_pos > 0) ap = static_cast<double>(pos_ok) / static_cast<double>(n_pos);
    if (n_neg > 0) an = static_cast<double>(neg_ok) / static_cast<double>(n_neg);
    std::optional<double> obj;
    if (ap && an) {
      obj = (*ap + *an) / 2.0;
    } else if (ap || an) {
      obj = ap ? *ap : *an;
    }
    c.thresholds.push_back(th);
    c.positive.push_back(ap);
    c.negative.push_back(an);
    c.objective.push_back(obj);
  }
  return c;
}

double sensitivity_me(std::span<const double> curve) {
  if (curve.size() < 2)
    throw ValidationError("margin of error needs at least two curve points");
  return kZ95 * sample_sd(curve) / std::sqrt(static_cast<double>(curve.size()));
}

TuneOutcome tune_threshold(std::span<const ScoredInstance> scored, const GridSpec& grid,
                           double fallback) {
  TuneOutcome out;
  out.threshold = fallback;
  if (scored.empty()) {
    out.defaulted = true;
    return out;
  }
  const AgreementCurve curve = agreement_curve(scored, grid);
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    if (!curve.objective[k]) continue;
    if (!out.objective || *curve.objective[k] > *out.objective) {
      out.objective = curve.objective[k];
      out.threshold = curve.thresholds[k];
    }
  }
  return out;
}

TuneResult tune_thresholds(std::span<const ScoredInstance> a, std::span<const ScoredInstance> b,
                           std::span<const ScoredInstance> c, std::span<const ScoredInstance> e,
                           const Thresholds& defaults) {
  TuneResult r;
  r.thresholds = defaults;
  const std::array<std::span<const ScoredInstance>, 4> sets = {a, b, c, e};
  const std::array<MetricId, 4> metrics = {MetricId::kA, MetricId::kB, MetricId::kC,
                                           MetricId::kE};
  const std::array<const char*, 4> names = {"speak_up", "backchannel", "interrupt", "yield"};
  for (std::size_t k = 0; k < 4; ++k) {
    const MetricId m = metrics[k];
    r.outcomes[k] = tune_threshold(sets[k], GridSpec::for_metric(m), defaults.for_metric(m));
    if (r.outcomes[k].defaulted) {
      r.warnings.push_back(std::string("no validation instances for ") + names[k] +
                           " threshold; keeping default");
    }
    r.thresholds.set_for_metric(m, r.outcomes[k].threshold);
  }
  return r;
}

Label single_label(const ProbRow& p, const ProbRow& operating_points) {
  Label best = Label::kC;
  double best_ratio = -1.0;
  for (Label l : kAllLabels) {
    const auto k = static_cast<std::size_t>(l);
    if (!(p[k] > operating_points[k])) continue;
    const double ratio = operating_points[k] > 0 ? p[k] / operating_points[k]
                                                 : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = l;
    }
  }
  return best;
}

GeneratedLabels single_label(const LikelihoodStream& stream, const ProbRow& operating_points) {
  GeneratedLabels g;
  g.first_chunk = stream.first_chunk;
  g.labels.reserve(stream.rows.size());
  for (const auto& row : stream.rows) g.labels.push_back(single_label(row, operating_points));
  return g;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  return t;
}

std::array<std::array<double, kNumLabels>, kNumLabels> ConfusionMatrix::percentages() const {
  std::array<std::array<double, kNumLabels>, kNumLabels> pct{};
  const std::int64_t t = total();
  if (t == 0) return pct;
  for (std::size_t r = 0; r < kNumLabels; ++r)
    for (std::size_t c = 0; c < kNumLabels; ++c)
      pct[r][c] = 100.0 * static_cast<double>(counts[r][c]) / static_cast<double>(t);
  return pct;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  for (std::size_t r = 0; r < kNumLabels; ++r)
    for (std::size_t c = 0; c < kNumLabels; ++c) counts[r][c] += o.counts[r][c];
  return *this;
}

ConfusionMatrix confusion(const TurnLabelSequence& dialogue, const GeneratedLabels& generated,
                          Speaker ai, bool allow_empty) {
  ConfusionMatrix m;
  const Speaker human = other(ai);
  const ChunkIndex gen_end = generated.first_chunk + static_cast<ChunkIndex>(generated.labels.size());
  for (ChunkIndex i = std::max<ChunkIndex>(1, generated.first_chunk);
       i < std::min(gen_end, dialogue.size()); ++i) {
    if (dialogue.owner[static_cast<std::size_t>(i - 1)] != human) continue;
    const Label g = generated.labels[static_cast<std::size_t>(i - generated.first_chunk)];
    ++m.counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(dialogue.at(i))];
  }
  if (m.total() == 0 && !allow_empty)
    throw ValidationError("no chunks attributed to the AI side; confusion matrix undefined");
  return m;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw ValidationError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0;
  std::int64_t n_pos = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi + 1 < n && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const double midrank = (static_cast<double>(lo + 1) + static_cast<double>(hi + 1)) / 2.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += midrank;
        ++n_pos;
      }
    }
    lo = hi + 1;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double p = static_cast<double>(n_pos);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

std::array<std::optional<double>, kNumLabels> per_class_auc(std::span<const ProbRow> rows,
                                                            std::span<const Label> reference) {
  if (rows.size() != reference.size())
    throw ValidationError("per_class_auc: rows and reference labels differ in length");
  std::array<std::optional<double>, kNumLabels> out;
  std::vector<double> scores(rows.size());
  std::vector<std::uint8_t> labels(rows.size());
  for (Label l : kAllLabels) {
    const auto k = static_cast<std::size_t>(l);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      scores[i] = rows[i][k];
      labels[i] = reference[i] == l;
    }
    out[k] = roc_auc(scores, labels);
  }
  return out;
}

}  // namespace turntake
