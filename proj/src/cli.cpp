#include "turntake/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "turntake/error.hpp"
#include "turntake/io.hpp"
#include "turntake/pipeline.hpp"
#include "turntake/synthgen.hpp"

namespace turntake {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  int chunk_ms = 0;
  int min_sil_ms = 0;
  std::string thresholds;
  std::string operating_points;
  std::string ai_speaker;
  std::string fillers;
  std::uint64_t seed = 0;
  std::string out;
  CLI::Option* chunk_opt = nullptr;
  CLI::Option* sil_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

std::vector<double> parse_list(const std::string& s, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": bad number '" + item + "'");
    }
  }
  if (out.size() != expected)
    throw ConfigError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated values");
  return out;
}

// Defaults, then the config file, then TURNTAKE_FILLERS, then flags.
RunConfig resolve(const Flags& f, bool* ai_explicit = nullptr) {
  RunConfig cfg;
  bool ai_set = false;
  if (!f.config.empty()) {
    const Json j = parse_json(read_text_file(f.config), f.config);
    apply_config_json(cfg, j, fs::path(f.config).parent_path());
    ai_set = j.is_object() && j.contains("ai_speaker");
  }
  if (const char* env = std::getenv("TURNTAKE_FILLERS"); env && *env) cfg.fillers_path = env;
  if (f.chunk_opt->count()) cfg.chunk_ms = f.chunk_ms;
  if (f.sil_opt->count()) cfg.min_sil_ms = f.min_sil_ms;
  if (!f.thresholds.empty()) {
    const auto t = parse_list(f.thresholds, 4, "--thresholds");
    cfg.thresholds.speak_up = t[0];
    cfg.thresholds.backchannel = t[1];
    cfg.thresholds.interrupt = t[2];
    cfg.thresholds.yield = t[3];
  }
  if (!f.operating_points.empty()) {
    const auto op = parse_list(f.operating_points, kNumLabels, "--operating-points");
    std::copy(op.begin(), op.end(), cfg.thresholds.operating_points.begin());
  }
  if (!f.ai_speaker.empty()) {
    cfg.ai = ai_side_from_name(f.ai_speaker);
    ai_set = true;
  }
  if (!f.fillers.empty()) cfg.fillers_path = f.fillers;
  if (f.seed_opt->count()) cfg.seed = f.seed;
  cfg.validate();
  if (ai_explicit) *ai_explicit = ai_set;
  return cfg;
}

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

LikelihoodStream stream_for(const Conversation& conv, const Analysis& a,
                            const std::optional<BaselineModel>& model, const RunConfig& cfg) {
  if (model) {
    if (model->chunk_ms != cfg.chunk_ms)
      throw ConfigError("model was trained on " + std::to_string(model->chunk_ms) +
                        " ms chunks, run uses " + std::to_string(cfg.chunk_ms));
    return predict_stream(*model, a.view());
  }
  if (!conv.stream)
    throw ValidationError(conv.id + ": no stream.csv in the conversation directory (or pass --model)");
  return *conv.stream;
}

std::optional<BaselineModel> load_model(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return model_from_json(parse_json(read_text_file(path), path));
}

Evaluation evaluate_corpus(const std::vector<std::string>& dirs, const RunConfig& cfg,
                           const std::optional<BaselineModel>& model) {
  const FillerSet fillers = load_fillers(cfg);
  Evaluation total;
  for (const auto& d : dirs) {
    const Conversation conv = load_conversation(d);
    const Analysis a = analyze(conv, cfg, fillers);
    total += evaluate(a, stream_for(conv, a, model, cfg), cfg);
  }
  return total;
}

std::string fmt_opt(const Json& v, int precision = 3) {
  if (v.is_null()) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v.get<double>();
  return os.str();
}

std::string summarize(const Json& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "conversations: " << r.at("conversations").size() << "\n";
  const auto& counts = r.at("counts");
  os << "duration_min: " << counts.at("total_ms").get<double>() / 60000.0 << "\n";
  const auto& rates = r.at("corpus_stats").at("rates_per_min");
  os << "rates_per_min:";
  for (const char* k : {"ipu", "pause", "gap", "overlap", "turn", "interruption"})
    os << " " << k << "=" << rates.at(k).get<double>();
  os << "\nduration_percent:";
  for (const auto& [k, v] : r.at("corpus_stats").at("duration_percent").items())
    os << " " << k << "=" << v.get<double>();
  os << "\n";
  if (r.contains("metrics")) {
    os << "metric branch   n        agreement ci_half   threshold_me\n";
    for (const auto& [id, m] : r.at("metrics").items()) {
      for (const char* b : {"positive", "negative"}) {
        const auto& br = m.at(b);
        os << std::left << std::setw(7) << id << std::setw(9) << b << std::setw(9)
           << br.at("n").get<std::int64_t>() << std::setw(10) << fmt_opt(br.at("agreement"))
           << std::setw(8) << fmt_opt(br.at("ci_half_width")) << fmt_opt(br.at("threshold_me"))
           << "\n";
      }
    }
  }
  if (r.contains("roc_auc")) {
    os << "roc_auc:";
    for (const auto& [k, v] : r.at("roc_auc").items()) os << " " << k << "=" << fmt_opt(v);
    os << "\n";
  }
  for (const auto& w : r.at("warnings")) os << "warning: " << w.get<std::string>() << "\n";
  return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Turn-taking event segmentation, labeling and judge-based evaluation", "turntake"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  f.chunk_opt = app.add_option("--chunk-ms", f.chunk_ms, "Chunk size in ms (default 40)");
  f.sil_opt = app.add_option("--min-sil-ms", f.min_sil_ms, "IPU silence threshold in ms (default 200)");
  app.add_option("--thresholds", f.thresholds, "Judge thresholds t1,t2,t3,t4");
  app.add_option("--operating-points", f.operating_points, "Operating points na,bc,i,t,c");
  app.add_option("--ai-speaker", f.ai_speaker, "Speaker evaluated as the AI: 1, 2 or both");
  app.add_option("--fillers", f.fillers, "Filler list, one phrase per line");
  f.seed_opt = app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--out", f.out, "Output file (directory for generate); stdout when omitted");

  std::vector<std::string> convs;
  std::string single;
  std::string model_path;
  std::string params_path;
  std::string report_path;
  int count = 1;
  int epochs = 200;
  double step = 0.1;
  bool no_downsample = false;

  auto* segment = app.add_subcommand("segment", "Write the event timeline of one conversation");
  segment->add_option("conversation", single)->required();
  auto* label = app.add_subcommand("label", "Write per-chunk labels and owners");
  label->add_option("conversation", single)->required();
  auto* stats = app.add_subcommand("stats", "Corpus statistics report");
  stats->add_option("conversations", convs)->required();
  auto* judge = app.add_subcommand("judge", "Judge agreement using each conversation's stream.csv");
  judge->add_option("conversations", convs)->required();
  auto* tune = app.add_subcommand("tune", "Tune judge thresholds on validation conversations");
  tune->add_option("conversations", convs)->required();
  auto* train_cmd = app.add_subcommand("train-baseline", "Train the feature-based baseline judge");
  train_cmd->add_option("conversations", convs)->required();
  train_cmd->add_option("--epochs", epochs, "Gradient descent epochs");
  train_cmd->add_option("--step-size", step, "Gradient descent step size");
  train_cmd->add_flag("--no-downsample", no_downsample, "Keep the natural class balance");
  auto* predict = app.add_subcommand("predict", "Write the baseline judge's likelihood stream");
  predict->add_option("conversation", single)->required();
  predict->add_option("--model", model_path)->required();
  auto* generate_cmd = app.add_subcommand("generate", "Generate synthetic conversations");
  generate_cmd->add_option("--params", params_path, "JSON generator parameters");
  generate_cmd->add_option("--count", count, "Number of conversations")->check(CLI::PositiveNumber);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Segment, label, judge and report");
  evaluate_cmd->add_option("conversations", convs)->required();
  evaluate_cmd->add_option("--model", model_path, "Baseline model; otherwise stream.csv is used");
  auto* report = app.add_subcommand("report", "Print a text summary of a report JSON");
  report->add_option("report", report_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*report) {
      emit(summarize(parse_json(read_text_file(report_path), report_path)), f.out, out);
      return kExitOk;
    }
    bool ai_explicit = false;
    RunConfig cfg = resolve(f, &ai_explicit);

    if (*segment || *label) {
      const Conversation conv = load_conversation(single);
      const Analysis a = analyze(conv, cfg, load_fillers(cfg));
      emit(*segment ? dump(timeline_to_json(a.timeline)) : format_labels_csv(a.labels), f.out, out);
    } else if (*stats) {
      const FillerSet fillers = load_fillers(cfg);
      Evaluation ev;
      for (const auto& d : convs) {
        const Analysis a = analyze(load_conversation(d), cfg, fillers);
        ev.ids.push_back(a.id);
        ev.counts += a.counts;
      }
      emit(dump(build_report(ev, cfg, false)), f.out, out);
    } else if (*judge || *evaluate_cmd) {
      const auto model = *evaluate_cmd ? load_model(model_path) : std::nullopt;
      emit(dump(build_report(evaluate_corpus(convs, cfg, model), cfg, true)), f.out, out);
    } else if (*tune) {
      // Human-human validation data: both speakers act as the AI by default.
      if (!ai_explicit) cfg.ai = AiSide::kBoth;
      const Evaluation ev = evaluate_corpus(convs, cfg, std::nullopt);
      const auto& s = ev.scored;
      const TuneResult res = tune_thresholds(s[0], s[1], s[2], s[4], cfg.thresholds);
      for (const auto& w : res.warnings) err << "warning: " << w << "\n";
      emit(dump(tune_report(res)), f.out, out);
    } else if (*train_cmd) {
      const FillerSet fillers = load_fillers(cfg);
      std::vector<LabeledExample> examples;
      for (const auto& d : convs) {
        const Analysis a = analyze(load_conversation(d), cfg, fillers);
        auto ex = training_examples(a.view(), a.labels, cfg.window_chunks());
        examples.insert(examples.end(), ex.begin(), ex.end());
      }
      TrainOptions opts;
      opts.seed = cfg.seed;
      opts.epochs = epochs;
      opts.step_size = step;
      opts.downsample = !no_downsample;
      BaselineModel model = train(examples, opts);
      model.window_chunks = cfg.window_chunks();
      model.chunk_ms = cfg.chunk_ms;
      emit(dump(model_to_json(model)), f.out, out);
    } else if (*predict) {
      const Conversation conv = load_conversation(single);
      const Analysis a = analyze(conv, cfg, load_fillers(cfg));
      emit(format_stream_csv(stream_for(conv, a, load_model(model_path), cfg)), f.out, out);
    } else if (*generate_cmd) {
      if (f.out.empty()) throw ConfigError("generate needs --out DIR");
      SynthParams params;
      if (!params_path.empty()) params = params_from_json(parse_json(read_text_file(params_path), params_path));
      if (f.seed_opt->count() || !f.config.empty()) params.seed = cfg.seed;
      params.chunk_ms = cfg.chunk_ms;
      params.min_sil_ms = cfg.min_sil_ms;
      const FillerSet fillers = load_fillers(cfg);
      for (const auto& w : params.backchannel_words)
        if (!fillers.count(w)) throw ConfigError("backchannel word '" + w + "' is not in the filler list");
      for (int k = 0; k < count; ++k) {
        SynthParams p = params;
        p.seed = params.seed + static_cast<std::uint64_t>(k);
        fs::path dir = f.out;
        if (count > 1) {
          char name[32];
          std::snprintf(name, sizeof(name), "conv_%03d", k);
          dir /= name;
        }
        const SynthConversation conv = turntake::generate(p);
        write_file_atomic(dir / "va.csv", format_va_csv(conv.intervals));
        write_file_atomic(dir / "transcript.csv", format_transcript_csv(conv.tokens));
        write_file_atomic(dir / "meta.json", dump(Json{{"duration_ms", conv.duration_ms}}));
        write_file_atomic(dir / "labels.csv", format_labels_csv(conv.labels));
        write_file_atomic(dir / "stream.csv", format_stream_csv(idealized_stream(conv.labels)));
        write_file_atomic(dir / "timeline.json", dump(timeline_to_json(conv.timeline)));
        write_file_atomic(dir / "params.json", dump(params_to_json(p)));
      }
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace turntake
