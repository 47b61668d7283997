#include "turntake/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "turntake/error.hpp"
#include "turntake/io.hpp"

namespace turntake {

namespace {

constexpr std::array<const char*, 5> kMetricStatistic = {"p_t - p_c", "p_bc", "p_i - p_c",
                                                         "p_t - p_c", "p_t - p_c"};

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

std::optional<double> curve_me(const std::vector<std::optional<double>>& curve) {
  std::vector<double> values;
  for (const auto& v : curve)
    if (v) values.push_back(*v);
  if (values.size() < 2) return std::nullopt;
  return sensitivity_me(values);
}

Json branch_json(const BranchResult& b, const std::optional<double>& me) {
  return Json{{"n", b.n},
              {"matches", b.matches},
              {"agreement", opt_json(b.agreement)},
              {"ci_half_width", b.half_width},
              {"ci_low", b.ci_lo},
              {"ci_high", b.ci_hi},
              {"threshold_me", opt_json(me)}};
}

}  // namespace

int RunConfig::window_chunks() const {
  if (chunk_ms <= 0 || window_ms <= 0 || window_ms % chunk_ms != 0)
    throw ConfigError("window_ms must be a positive multiple of chunk_ms");
  return window_ms / chunk_ms;
}

std::vector<Speaker> RunConfig::ai_speakers() const {
  switch (ai) {
    case AiSide::kOne: return {Speaker::kOne};
    case AiSide::kTwo: return {Speaker::kTwo};
    case AiSide::kBoth: return {Speaker::kOne, Speaker::kTwo};
  }
  return {};
}

void RunConfig::validate() const {
  silence_threshold_chunks(chunk_ms, min_sil_ms);
  window_chunks();
  thresholds.validate();
}

AiSide ai_side_from_name(const std::string& s) {
  if (s == "1") return AiSide::kOne;
  if (s == "2") return AiSide::kTwo;
  if (s == "both") return AiSide::kBoth;
  throw ConfigError("ai speaker must be 1, 2 or both, got '" + s + "'");
}

std::string ai_side_name(AiSide a) {
  switch (a) {
    case AiSide::kOne: return "1";
    case AiSide::kTwo: return "2";
    case AiSide::kBoth: return "both";
  }
  return "?";
}

void apply_config_json(RunConfig& cfg, const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "chunk_ms") {
        cfg.chunk_ms = v.get<int>();
      } else if (key == "min_sil_ms") {
        cfg.min_sil_ms = v.get<int>();
      } else if (key == "window_ms") {
        cfg.window_ms = v.get<int>();
      } else if (key == "thresholds") {
        cfg.thresholds = thresholds_from_json(v, cfg.thresholds);
      } else if (key == "operating_points") {
        cfg.thresholds.operating_points = operating_points_from_json(v, cfg.thresholds.operating_points);
      } else if (key == "fillers") {
        std::filesystem::path p = v.get<std::string>();
        cfg.fillers_path = p.is_relative() ? base_dir / p : p;
      } else if (key == "ai_speaker") {
        cfg.ai = ai_side_from_name(v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>()));
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "tuning") {
        // Informational block written by `tune`.
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mistyped config value: ") + e.what());
  }
}

Json config_to_json(const RunConfig& cfg) {
  return Json{{"chunk_ms", cfg.chunk_ms},
              {"min_sil_ms", cfg.min_sil_ms},
              {"window_ms", cfg.window_ms},
              {"thresholds", thresholds_to_json(cfg.thresholds)},
              {"operating_points", operating_points_to_json(cfg.thresholds.operating_points)},
              {"fillers", cfg.fillers_path ? Json(cfg.fillers_path->string()) : Json("builtin")},
              {"ai_speaker", ai_side_name(cfg.ai)},
              {"seed", cfg.seed}};
}

FillerSet load_fillers(const RunConfig& cfg) {
  if (!cfg.fillers_path) return default_fillers();
  return parse_fillers(read_text_file(*cfg.fillers_path));
}

Conversation load_conversation(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError(dir.string() + ": not a conversation directory");
  Conversation conv;
  conv.id = dir.filename().string();
  if (conv.id.empty()) conv.id = dir.parent_path().filename().string();
  if (fs::exists(dir / "va.csv")) {
    conv.intervals = read_intervals(dir / "va.csv");
  } else if (fs::exists(dir / "va.rttm")) {
    conv.intervals = read_intervals(dir / "va.rttm");
  } else {
    throw ValidationError(dir.string() + ": needs va.csv or va.rttm");
  }
  if (fs::exists(dir / "transcript.csv")) {
    const auto p = dir / "transcript.csv";
    conv.tokens = parse_transcript_csv(read_text_file(p), p.string());
  }
  if (fs::exists(dir / "stream.csv")) {
    const auto p = dir / "stream.csv";
    conv.stream = parse_stream_csv(read_text_file(p), p.string());
  }
  if (fs::exists(dir / "meta.json")) {
    const auto p = dir / "meta.json";
    const Json meta = parse_json(read_text_file(p), p.string());
    if (!meta.is_object() || !meta.contains("duration_ms") || !meta["duration_ms"].is_number_integer())
      throw ValidationError(p.string() + ": needs integer duration_ms");
    conv.duration_ms = meta["duration_ms"].get<std::int64_t>();
    if (conv.duration_ms < 0) throw ValidationError(p.string() + ": negative duration_ms");
  } else {
    for (const auto& iv : conv.intervals) conv.duration_ms = std::max(conv.duration_ms, iv.end_ms);
    for (const auto& t : conv.tokens) conv.duration_ms = std::max(conv.duration_ms, t.end_ms);
  }
  return conv;
}

Analysis analyze(const Conversation& conv, const RunConfig& cfg, const FillerSet& fillers) {
  Analysis a;
  a.id = conv.id;
  a.duration_ms = conv.duration_ms;
  try {
    a.va = chunkize(conv.intervals, conv.duration_ms, cfg.chunk_ms);
    a.timeline = build_timeline(a.va[0], a.va[1], cfg.min_sil_ms);
    a.bc = conv.tokens.empty()
               ? empty_backchannels(a.va[0].size())
               : label_backchannels(conv.tokens, a.va[0], a.va[1], a.timeline, fillers);
    a.labels = derive_labels(a.va[0], a.va[1], a.bc[0], a.bc[1], a.timeline);
    a.counts = count_events(a.timeline, conv.duration_ms);
    count_words(a.counts, conv.tokens, a.bc, cfg.chunk_ms);
  } catch (const ValidationError& e) {
    throw ValidationError(conv.id + ": " + e.what());
  }
  return a;
}

Evaluation& Evaluation::operator+=(const Evaluation& o) {
  ids.insert(ids.end(), o.ids.begin(), o.ids.end());
  counts += o.counts;
  for (std::size_t m = 0; m < 5; ++m) {
    tallies[m] += o.tallies[m];
    scored[m].insert(scored[m].end(), o.scored[m].begin(), o.scored[m].end());
  }
  confusion += o.confusion;
  auc_rows.insert(auc_rows.end(), o.auc_rows.begin(), o.auc_rows.end());
  auc_labels.insert(auc_labels.end(), o.auc_labels.begin(), o.auc_labels.end());
  warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
  return *this;
}

Evaluation evaluate(const Analysis& a, const LikelihoodStream& stream, const RunConfig& cfg) {
  validate_stream(stream);
  Evaluation ev;
  ev.ids.push_back(a.id);
  ev.counts = a.counts;
  const GeneratedLabels generated = single_label(stream, cfg.thresholds.operating_points);
  try {
    for (Speaker ai : cfg.ai_speakers()) {
      for (MetricId m : kAllMetrics) {
        const auto k = static_cast<std::size_t>(m);
        const auto inst = extract_instances(a.labels, a.va[0], a.va[1], m, ai, cfg.window_chunks());
        const auto scored = score_instances(inst, stream);
        // Tally per perspective so decision runs never join across them.
        ev.tallies[k] += tally_metric(m, scored, cfg.thresholds);
        ev.scored[k].insert(ev.scored[k].end(), scored.begin(), scored.end());
      }
      ev.confusion += confusion(a.labels, generated, ai, true);
    }
  } catch (const ValidationError& e) {
    throw ValidationError(a.id + ": " + e.what());
  }
  for (ChunkIndex i = std::max<ChunkIndex>(0, stream.first_chunk);
       i < std::min(stream.end_chunk(), a.labels.size()); ++i) {
    ev.auc_rows.push_back(stream.at(i));
    ev.auc_labels.push_back(a.labels.at(i));
  }
  return ev;
}

Json build_report(const Evaluation& ev, const RunConfig& cfg, bool include_judge) {
  Json r;
  r["format"] = "turntake-report";
  r["version"] = 1;
  r["config"] = config_to_json(cfg);
  r["conversations"] = ev.ids;
  r["counts"] = counts_to_json(ev.counts);
  r["corpus_stats"] = stats_to_json(corpus_stats(ev.counts));
  std::vector<std::string> warnings = ev.warnings;
  if (include_judge) {
    Json metrics = Json::object();
    for (MetricId m : kAllMetrics) {
      const auto k = static_cast<std::size_t>(m);
      const MetricResult res = finalize_metric(m, ev.tallies[k]);
      const AgreementCurve curve = agreement_curve(ev.scored[k], GridSpec::for_metric(m));
      const std::string id(1, metric_char(m));
      if (res.positive.n == 0) warnings.push_back("metric " + id + ": no positive instances");
      if (res.negative.n == 0) warnings.push_back("metric " + id + ": no negative instances");
      metrics[id] = Json{{"statistic", kMetricStatistic[k]},
                         {"threshold", cfg.thresholds.for_metric(m)},
                         {"positive_label", label_name(positive_label(m))},
                         {"instances", res.instances},
                         {"decision_runs", ev.tallies[k].events},
                         {"positive_share_instances", opt_json(res.positive_share_instances)},
                         {"positive_share_events", opt_json(res.positive_share_events)},
                         {"positive", branch_json(res.positive, curve_me(curve.positive))},
                         {"negative", branch_json(res.negative, curve_me(curve.negative))}};
    }
    r["metrics"] = metrics;

    Json labels = Json::array();
    for (Label l : kAllLabels) labels.push_back(label_name(l));
    if (ev.confusion.total() > 0) {
      Json counts = Json::array();
      Json pct = Json::array();
      const auto p = ev.confusion.percentages();
      for (std::size_t g = 0; g < kNumLabels; ++g) {
        counts.push_back(ev.confusion.counts[g]);
        pct.push_back(p[g]);
      }
      r["confusion"] = Json{{"rows", "generated"}, {"columns", "dialogue"}, {"labels", labels},
                            {"counts", counts}, {"percent", pct}};
    } else {
      r["confusion"] = nullptr;
      warnings.push_back("no chunks attributed to the AI side; confusion matrix omitted");
    }

    const auto auc = per_class_auc(ev.auc_rows, ev.auc_labels);
    Json aj;
    std::vector<double> defined;
    for (Label l : kAllLabels) {
      const auto& v = auc[static_cast<std::size_t>(l)];
      std::string key(label_name(l));
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
      aj[key] = opt_json(v);
      if (v) defined.push_back(*v);
    }
    aj["macro"] = defined.empty()
                      ? Json()
                      : Json(std::accumulate(defined.begin(), defined.end(), 0.0) /
                             static_cast<double>(defined.size()));
    r["roc_auc"] = aj;
  }
  r["warnings"] = warnings;
  return r;
}

Json tune_report(const TuneResult& res) {
  constexpr std::array<const char*, 4> names = {"speak_up", "backchannel", "interrupt", "yield"};
  Json objective;
  Json defaulted;
  for (std::size_t k = 0; k < 4; ++k) {
    objective[names[k]] = opt_json(res.outcomes[k].objective);
    defaulted[names[k]] = res.outcomes[k].defaulted;
  }
  return Json{{"thresholds", thresholds_to_json(res.thresholds)},
              {"tuning", {{"objective", objective}, {"defaulted", defaulted}, {"warnings", res.warnings}}}};
}

}  // namespace turntake
