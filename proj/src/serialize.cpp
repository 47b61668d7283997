#include "turntake/serialize.hpp"

#include <set>
#include <string>

#include "turntake/error.hpp"

namespace turntake {

namespace {

Json span_json(const ChunkSpan& s) { return Json::array({s.start, s.end}); }

Json ipu_json(const Ipu& u) {
  return Json{{"speaker", to_int(u.speaker)}, {"start", u.span.start}, {"end", u.span.end}};
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* what,
                    bool config) {
  if (!j.is_object()) {
    const std::string msg = std::string(what) + " must be a JSON object";
    if (config) throw ConfigError(msg);
    throw ValidationError(msg);
  }
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (keys.count(k)) continue;
    const std::string msg = std::string("unknown key '") + k + "' in " + what;
    if (config) throw ConfigError(msg);
    throw ValidationError(msg);
  }
}

template <typename T>
T get_as(const Json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(what) + ": missing or mistyped '" + key + "'");
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out, const char* what) {
  if (j.contains(key)) out = get_as<T>(j, key, what);
}

Json dist_json(const Distribution& d) { return Json{{"mean", d.mean}, {"sd", d.sd}}; }

Distribution dist_from(const Json& j, Distribution base, const char* what) {
  reject_unknown(j, {"mean", "sd"}, what, true);
  read_opt(j, "mean", base.mean, what);
  read_opt(j, "sd", base.sd, what);
  return base;
}

constexpr std::array<const char*, kNumLabels> kOpKeys = {"na", "bc", "i", "t", "c"};

}  // namespace

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
}

Json timeline_to_json(const EventTimeline& tl) {
  Json j;
  j["chunk_ms"] = tl.chunk_ms;
  j["min_sil_ms"] = tl.min_sil_ms;
  j["num_chunks"] = tl.num_chunks;
  Json ipus = Json::array();
  for (const auto& per : tl.ipus)
    for (const auto& u : per) ipus.push_back(ipu_json(u));
  j["ipus"] = ipus;
  Json sil = Json::array();
  for (const auto& s : tl.silences)
    sil.push_back({{"kind", silence_kind_name(s.kind)}, {"start", s.span.start}, {"end", s.span.end}});
  j["silences"] = sil;
  Json turns = Json::array();
  for (const auto& t : tl.turns) {
    Json ti = Json::array();
    for (const auto& u : t.ipus) ti.push_back(span_json(u.span));
    turns.push_back({{"speaker", to_int(t.speaker)}, {"start", t.hull.start}, {"end", t.hull.end},
                     {"ipus", ti}});
  }
  j["turns"] = turns;
  Json ov = Json::array();
  for (const auto& s : tl.overlaps) ov.push_back(span_json(s));
  j["overlaps"] = ov;
  Json intr = Json::array();
  for (const auto& i : tl.interruptions) {
    intr.push_back({{"type", interruption_type_name(i.type)},
                    {"interrupter", to_int(i.interrupter)},
                    {"interrupter_ipu", span_json(i.interrupter_ipu.span)},
                    {"interrupted_ipu", span_json(i.interrupted_ipu.span)},
                    {"transfer_chunk", i.transfer_chunk ? Json(*i.transfer_chunk) : Json()}});
  }
  j["interruptions"] = intr;
  return j;
}

Json counts_to_json(const EventCounts& c) {
  return Json{{"total_ms", c.total_ms},
              {"ipus", c.ipus},
              {"pauses", c.pauses},
              {"gaps", c.gaps},
              {"overlaps", c.overlaps},
              {"turns", c.turns},
              {"interruptions", c.interruptions},
              {"floor_taking", c.floor_taking},
              {"single_speech_ms", c.single_speech_ms},
              {"overlap_ms", c.overlap_ms},
              {"pause_ms", c.pause_ms},
              {"gap_ms", c.gap_ms},
              {"edge_ms", c.edge_ms},
              {"words", c.words},
              {"backchannel_words", c.backchannel_words}};
}

Json stats_to_json(const CorpusStats& s) {
  const auto& r = s.rates;
  const auto& d = s.shares;
  return Json{{"rates_per_min",
               {{"ipu", r.ipu},
                {"ipu_per_speaker", r.ipu_per_speaker},
                {"pause", r.pause},
                {"gap", r.gap},
                {"overlap", r.overlap},
                {"turn", r.turn},
                {"interruption", r.interruption}}},
              {"duration_percent",
               {{"single_speech", d.single_speech},
                {"overlap", d.overlap},
                {"pause", d.pause},
                {"gap", d.gap},
                {"edge", d.edge}}},
              {"words_per_min",
               {{"speaking", s.speech.speaking}, {"backchannel", s.speech.backchannel}}}};
}

Json thresholds_to_json(const Thresholds& t) {
  return Json{{"speak_up", t.speak_up},
              {"backchannel", t.backchannel},
              {"interrupt", t.interrupt},
              {"yield", t.yield}};
}

Json operating_points_to_json(const ProbRow& op) {
  Json j;
  for (std::size_t k = 0; k < kNumLabels; ++k) j[kOpKeys[k]] = op[k];
  return j;
}

Thresholds thresholds_from_json(const Json& j, Thresholds base) {
  reject_unknown(j, {"speak_up", "backchannel", "interrupt", "yield"}, "thresholds", true);
  read_opt(j, "speak_up", base.speak_up, "thresholds");
  read_opt(j, "backchannel", base.backchannel, "thresholds");
  read_opt(j, "interrupt", base.interrupt, "thresholds");
  read_opt(j, "yield", base.yield, "thresholds");
  return base;
}

ProbRow operating_points_from_json(const Json& j, ProbRow base) {
  reject_unknown(j, {"na", "bc", "i", "t", "c"}, "operating_points", true);
  for (std::size_t k = 0; k < kNumLabels; ++k) read_opt(j, kOpKeys[k], base[k], "operating_points");
  return base;
}

Json model_to_json(const BaselineModel& m) {
  Json w = Json::array();
  for (const auto& row : m.weights) w.push_back(row);
  return Json{{"format", "turntake-baseline"},
              {"feature_version", m.feature_version},
              {"feature_dim", kFeatureDim},
              {"window_chunks", m.window_chunks},
              {"chunk_ms", m.chunk_ms},
              {"weights", w},
              {"bias", m.bias},
              {"feature_mean", m.feature_mean},
              {"feature_scale", m.feature_scale},
              {"training",
               {{"seed", m.options.seed},
                {"epochs", m.options.epochs},
                {"step_size", m.options.step_size},
                {"downsample", m.options.downsample},
                {"class_counts", m.class_counts},
                {"used_counts", m.used_counts},
                {"loss_history", m.loss_history}}}};
}

BaselineModel model_from_json(const Json& j) {
  try {
    if (j.at("format") != "turntake-baseline") throw ValidationError("not a baseline model file");
    BaselineModel m;
    m.feature_version = j.at("feature_version").get<int>();
    if (m.feature_version != kFeatureSpecVersion)
      throw ValidationError("model uses feature version " + std::to_string(m.feature_version) +
                            ", this build computes version " + std::to_string(kFeatureSpecVersion));
    if (j.at("feature_dim").get<std::size_t>() != kFeatureDim)
      throw ValidationError("model feature dimension mismatch");
    m.window_chunks = j.at("window_chunks").get<int>();
    m.chunk_ms = j.at("chunk_ms").get<int>();
    const auto& w = j.at("weights");
    if (!w.is_array() || w.size() != kNumLabels) throw ValidationError("weights must have 5 rows");
    for (std::size_t k = 0; k < kNumLabels; ++k) m.weights[k] = w[k].get<FeatureVector>();
    m.bias = j.at("bias").get<ProbRow>();
    m.feature_mean = j.at("feature_mean").get<FeatureVector>();
    m.feature_scale = j.at("feature_scale").get<FeatureVector>();
    const auto& t = j.at("training");
    m.options.seed = t.at("seed").get<std::uint64_t>();
    m.options.epochs = t.at("epochs").get<int>();
    m.options.step_size = t.at("step_size").get<double>();
    m.options.downsample = t.at("downsample").get<bool>();
    m.class_counts = t.at("class_counts").get<std::array<std::int64_t, kNumLabels>>();
    m.used_counts = t.at("used_counts").get<std::array<std::int64_t, kNumLabels>>();
    m.loss_history = t.at("loss_history").get<std::vector<double>>();
    for (double s : m.feature_scale)
      if (!(s > 0)) throw ValidationError("feature_scale entries must be positive");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

Json params_to_json(const SynthParams& p) {
  return Json{{"duration_ms", p.duration_ms},
              {"chunk_ms", p.chunk_ms},
              {"min_sil_ms", p.min_sil_ms},
              {"ipu_ms", Json::array({dist_json(p.ipu_ms[0]), dist_json(p.ipu_ms[1])})},
              {"pause_ms", dist_json(p.pause_ms)},
              {"gap_ms", dist_json(p.gap_ms)},
              {"turn_ipus", dist_json(p.turn_ipus)},
              {"overlap_ms", dist_json(p.overlap_ms)},
              {"gap_rate", p.gap_rate},
              {"interruption_rate", p.interruption_rate},
              {"floor_taking_prob", p.floor_taking_prob},
              {"backchannel_rate", p.backchannel_rate},
              {"backchannel_ms", p.backchannel_ms},
              {"backchannel_words", p.backchannel_words},
              {"seed", p.seed}};
}

SynthParams params_from_json(const Json& j) {
  constexpr const char* what = "synthesis params";
  reject_unknown(j,
                 {"duration_ms", "chunk_ms", "min_sil_ms", "ipu_ms", "pause_ms", "gap_ms",
                  "turn_ipus", "overlap_ms", "gap_rate", "interruption_rate", "floor_taking_prob",
                  "backchannel_rate", "backchannel_ms", "backchannel_words", "seed"},
                 what, true);
  SynthParams p;
  read_opt(j, "duration_ms", p.duration_ms, what);
  read_opt(j, "chunk_ms", p.chunk_ms, what);
  read_opt(j, "min_sil_ms", p.min_sil_ms, what);
  if (j.contains("ipu_ms")) {
    const auto& a = j["ipu_ms"];
    if (a.is_array() && a.size() == 2) {
      p.ipu_ms[0] = dist_from(a[0], p.ipu_ms[0], "ipu_ms");
      p.ipu_ms[1] = dist_from(a[1], p.ipu_ms[1], "ipu_ms");
    } else {
      p.ipu_ms[0] = p.ipu_ms[1] = dist_from(a, p.ipu_ms[0], "ipu_ms");
    }
  }
  if (j.contains("pause_ms")) p.pause_ms = dist_from(j["pause_ms"], p.pause_ms, "pause_ms");
  if (j.contains("gap_ms")) p.gap_ms = dist_from(j["gap_ms"], p.gap_ms, "gap_ms");
  if (j.contains("turn_ipus")) p.turn_ipus = dist_from(j["turn_ipus"], p.turn_ipus, "turn_ipus");
  if (j.contains("overlap_ms")) p.overlap_ms = dist_from(j["overlap_ms"], p.overlap_ms, "overlap_ms");
  read_opt(j, "gap_rate", p.gap_rate, what);
  read_opt(j, "interruption_rate", p.interruption_rate, what);
  read_opt(j, "floor_taking_prob", p.floor_taking_prob, what);
  read_opt(j, "backchannel_rate", p.backchannel_rate, what);
  read_opt(j, "backchannel_ms", p.backchannel_ms, what);
  read_opt(j, "backchannel_words", p.backchannel_words, what);
  read_opt(j, "seed", p.seed, what);
  return p;
}

}  // namespace turntake
