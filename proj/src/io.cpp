#include "turntake/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "turntake/error.hpp"

namespace turntake {

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back({number, line});
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

// Split on commas into at most `max_fields` fields; the last keeps the rest.
std::vector<std::string_view> split_fields(std::string_view s, std::size_t max_fields = 0) {
  std::vector<std::string_view> out;
  while (true) {
    if (max_fields != 0 && out.size() + 1 == max_fields) {
      out.push_back(trim(s));
      break;
    }
    const std::size_t comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

template <typename T>
T number_field(std::string_view s, const std::string& source, std::size_t line, const char* what) {
  T v{};
  if (!parse_number(s, v)) fail(source, line, std::string("bad ") + what + " '" + std::string(s) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) fail(source, line, std::string("non-finite ") + what);
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

void expect_header(const Line& line, std::string_view header, const std::string& source) {
  std::string compact;
  for (char ch : line.text)
    if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
  if (compact != header)
    fail(source, line.number, "expected header '" + std::string(header) + "'");
}

constexpr std::string_view kVaHeader = "speaker,start_ms,end_ms";
constexpr std::string_view kTranscriptHeader = "speaker,start_ms,end_ms,word";
constexpr std::string_view kLabelsHeader = "chunk,label,owner";
constexpr std::string_view kStreamHeader = "chunk,p_na,p_bc,p_i,p_t,p_c";

}  // namespace

std::vector<SpeechInterval> parse_va_csv(std::string_view text, const std::string& source) {
  std::vector<SpeechInterval> out;
  bool first = true;
  for (const Line& line : split_lines(text)) {
    if (blank(line.text)) continue;
    auto f = split_fields(line.text);
    if (first) {
      first = false;
      int probe = 0;
      if (!parse_number(f[0], probe)) {
        expect_header(line, kVaHeader, source);
        continue;
      }
    }
    if (f.size() != 3) fail(source, line.number, "expected 3 fields, got " + std::to_string(f.size()));
    SpeechInterval iv;
    iv.speaker = number_field<int>(f[0], source, line.number, "speaker");
    iv.start_ms = number_field<std::int64_t>(f[1], source, line.number, "start_ms");
    iv.end_ms = number_field<std::int64_t>(f[2], source, line.number, "end_ms");
    if (iv.speaker != 1 && iv.speaker != 2)
      fail(source, line.number, "speaker must be 1 or 2, got " + std::to_string(iv.speaker));
    if (iv.start_ms < 0 || iv.end_ms <= iv.start_ms)
      fail(source, line.number, "need 0 <= start_ms < end_ms");
    out.push_back(iv);
  }
  return out;
}

std::string format_va_csv(std::span<const SpeechInterval> intervals) {
  std::ostringstream os;
  os << kVaHeader << '\n';
  for (const auto& iv : intervals) os << iv.speaker << ',' << iv.start_ms << ',' << iv.end_ms << '\n';
  return os.str();
}

std::vector<SpeechInterval> parse_rttm(std::string_view text, const std::string& source) {
  std::vector<SpeechInterval> out;
  std::map<std::string, int> ids;
  int next_id = 1;
  for (const Line& line : split_lines(text)) {
    const std::string_view t = trim(line.text);
    if (t.empty() || t.starts_with(";;") || t.starts_with('#')) continue;
    std::istringstream is{std::string(t)};
    std::vector<std::string> f;
    for (std::string w; is >> w;) f.push_back(w);
    if (f[0] != "SPEAKER") continue;
    if (f.size() < 8) fail(source, line.number, "SPEAKER record needs at least 8 fields");
    const double onset = number_field<double>(f[3], source, line.number, "onset");
    const double dur = number_field<double>(f[4], source, line.number, "duration");
    const std::string& name = f[7];
    int id = 0;
    if (auto it = ids.find(name); it != ids.end()) {
      id = it->second;
    } else if (name == "1" || name == "2") {
      id = name == "1" ? 1 : 2;
      ids[name] = id;
    } else {
      while (std::any_of(ids.begin(), ids.end(), [&](const auto& kv) { return kv.second == next_id; }))
        ++next_id;
      if (next_id > 2) fail(source, line.number, "more than two speakers (extra: '" + name + "')");
      id = next_id;
      ids[name] = id;
    }
    if (ids.size() > 2) fail(source, line.number, "more than two speakers");
    SpeechInterval iv;
    iv.speaker = id;
    iv.start_ms = std::llround(onset * 1000.0);
    iv.end_ms = std::llround((onset + dur) * 1000.0);
    if (iv.start_ms < 0 || iv.end_ms <= iv.start_ms)
      fail(source, line.number, "record must have non-negative onset and positive duration");
    out.push_back(iv);
  }
  return out;
}

std::vector<TranscriptToken> parse_transcript_csv(std::string_view text, const std::string& source) {
  std::vector<TranscriptToken> out;
  bool first = true;
  for (const Line& line : split_lines(text)) {
    if (blank(line.text)) continue;
    auto f = split_fields(line.text, 4);
    if (first) {
      first = false;
      int probe = 0;
      if (!parse_number(f[0], probe)) {
        expect_header(line, kTranscriptHeader, source);
        continue;
      }
    }
    if (f.size() != 4) fail(source, line.number, "expected 4 fields");
    TranscriptToken tok;
    tok.speaker = number_field<int>(f[0], source, line.number, "speaker");
    tok.start_ms = number_field<std::int64_t>(f[1], source, line.number, "start_ms");
    tok.end_ms = number_field<std::int64_t>(f[2], source, line.number, "end_ms");
    tok.word = lowercase(f[3]);
    if (tok.speaker != 1 && tok.speaker != 2) fail(source, line.number, "speaker must be 1 or 2");
    if (tok.start_ms < 0 || tok.end_ms <= tok.start_ms)
      fail(source, line.number, "need 0 <= start_ms < end_ms");
    if (tok.word.empty()) fail(source, line.number, "empty word");
    out.push_back(std::move(tok));
  }
  return out;
}

std::string format_transcript_csv(std::span<const TranscriptToken> tokens) {
  std::ostringstream os;
  os << kTranscriptHeader << '\n';
  for (const auto& t : tokens) {
    if (t.word.find_first_of("\n\r") != std::string::npos)
      throw ValidationError("word contains a line break");
    os << t.speaker << ',' << t.start_ms << ',' << t.end_ms << ',' << t.word << '\n';
  }
  return os.str();
}

TurnLabelSequence parse_labels_csv(std::string_view text, const std::string& source) {
  TurnLabelSequence out;
  bool header = false;
  for (const Line& line : split_lines(text)) {
    if (blank(line.text)) continue;
    if (!header) {
      expect_header(line, kLabelsHeader, source);
      header = true;
      continue;
    }
    auto f = split_fields(line.text);
    if (f.size() != 3) fail(source, line.number, "expected 3 fields");
    const auto chunk = number_field<ChunkIndex>(f[0], source, line.number, "chunk");
    if (chunk != out.size())
      fail(source, line.number, "expected chunk " + std::to_string(out.size()));
    try {
      out.labels.push_back(label_from_name(f[1]));
      out.owner.push_back(owner_from_name(f[2]));
    } catch (const ValidationError& e) {
      fail(source, line.number, e.what());
    }
  }
  if (!header) fail(source, 1, "missing header");
  return out;
}

std::string format_labels_csv(const TurnLabelSequence& labels) {
  std::ostringstream os;
  os << kLabelsHeader << '\n';
  for (ChunkIndex i = 0; i < labels.size(); ++i)
    os << i << ',' << label_name(labels.at(i)) << ','
       << owner_name(labels.owner[static_cast<std::size_t>(i)]) << '\n';
  return os.str();
}

LikelihoodStream parse_stream_csv(std::string_view text, const std::string& source) {
  LikelihoodStream out;
  bool header = false;
  for (const Line& line : split_lines(text)) {
    if (blank(line.text)) continue;
    if (!header) {
      expect_header(line, kStreamHeader, source);
      header = true;
      continue;
    }
    auto f = split_fields(line.text);
    if (f.size() != 6) fail(source, line.number, "expected 6 fields, got " + std::to_string(f.size()));
    const auto chunk = number_field<ChunkIndex>(f[0], source, line.number, "chunk");
    if (out.rows.empty()) {
      if (chunk < 0) fail(source, line.number, "negative chunk index");
      out.first_chunk = chunk;
    } else if (chunk != out.end_chunk()) {
      fail(source, line.number, "expected chunk " + std::to_string(out.end_chunk()) +
                                    " (rows must be contiguous)");
    }
    ProbRow row;
    for (std::size_t k = 0; k < kNumLabels; ++k)
      row[k] = number_field<double>(f[k + 1], source, line.number, "probability");
    try {
      validate_row(row);
    } catch (const ValidationError& e) {
      fail(source, line.number, e.what());
    }
    out.rows.push_back(row);
  }
  if (!header) fail(source, 1, "missing header");
  return out;
}

std::string format_stream_csv(const LikelihoodStream& stream) {
  std::string out(kStreamHeader);
  out += '\n';
  for (std::size_t r = 0; r < stream.rows.size(); ++r) {
    out += std::to_string(stream.first_chunk + static_cast<ChunkIndex>(r));
    for (double v : stream.rows[r]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

FillerSet parse_fillers(std::string_view text) {
  FillerSet out;
  for (const Line& line : split_lines(text)) {
    const std::string_view t = trim(line.text);
    if (t.empty() || t.front() == '#') continue;
    out.insert(lowercase(t));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(tmp.string() + ": write failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SpeechInterval> read_intervals(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (lowercase(path.extension().string()) == ".rttm") return parse_rttm(text, path.string());
  return parse_va_csv(text, path.string());
}

}  // namespace turntake
