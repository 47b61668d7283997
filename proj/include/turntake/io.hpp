#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "turntake/judge.hpp"
#include "turntake/labeler.hpp"
#include "turntake/timeline.hpp"

namespace turntake {

// Text formats. Parsers take the file name for diagnostics and report
// "<source>:<line>: <problem>" through ValidationError. Formatters emit the
// normalized form: parse(format(x)) == x and format(parse(format(x))) is
// byte-identical to format(x).

/// `speaker,start_ms,end_ms`; the header line is optional on input.
std::vector<SpeechInterval> parse_va_csv(std::string_view text, const std::string& source);
std::string format_va_csv(std::span<const SpeechInterval> intervals);

/// RTTM SPEAKER records (onset and duration in seconds). Speaker names "1" and
/// "2" map to themselves; otherwise names map to 1 and 2 by first appearance.
std::vector<SpeechInterval> parse_rttm(std::string_view text, const std::string& source);

/// `speaker,start_ms,end_ms,word`; words are lowercased on input.
std::vector<TranscriptToken> parse_transcript_csv(std::string_view text, const std::string& source);
std::string format_transcript_csv(std::span<const TranscriptToken> tokens);

/// `chunk,label,owner`, one row per chunk from 0.
TurnLabelSequence parse_labels_csv(std::string_view text, const std::string& source);
std::string format_labels_csv(const TurnLabelSequence& labels);

/// `chunk,p_na,p_bc,p_i,p_t,p_c` over a contiguous chunk range. Values are
/// written in shortest round-trip form.
LikelihoodStream parse_stream_csv(std::string_view text, const std::string& source);
std::string format_stream_csv(const LikelihoodStream& stream);

/// One phrase per line; blank lines and lines starting with '#' are skipped.
FillerSet parse_fillers(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Intervals from a .rttm or CSV file, chosen by extension.
std::vector<SpeechInterval> read_intervals(const std::filesystem::path& path);

}  // namespace turntake
