#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace turntake {

/// Chunk index on the fixed conversation grid (0-based).
using ChunkIndex = std::int64_t;

/// Two-party conversations only; speakers are 1 and 2.
enum class Speaker : int { kOne = 1, kTwo = 2 };

inline constexpr int to_int(Speaker s) { return static_cast<int>(s); }
inline constexpr Speaker other(Speaker s) {
  return s == Speaker::kOne ? Speaker::kTwo : Speaker::kOne;
}
Speaker speaker_from_int(int id);  // throws ValidationError outside {1,2}

/// Per-chunk turn-taking label. Order matches the likelihood stream columns.
enum class Label : int { kNA = 0, kBC = 1, kI = 2, kT = 3, kC = 4 };

inline constexpr int kNumLabels = 5;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kNA, Label::kBC, Label::kI, Label::kT, Label::kC};

std::string_view label_name(Label l);
Label label_from_name(std::string_view name);  // throws ValidationError

/// Chunk ownership (who holds the floor at a chunk); nullopt before the first
/// turn.
using Owner = std::optional<Speaker>;

std::string owner_name(const Owner& o);  // "1", "2" or "none"
Owner owner_from_name(std::string_view name);

/// Closed chunk interval [start, end].
struct ChunkSpan {
  ChunkIndex start = 0;
  ChunkIndex end = 0;

  ChunkIndex length() const { return end - start + 1; }
  bool contains(ChunkIndex i) const { return start <= i && i <= end; }
  bool contains(const ChunkSpan& o) const {
    return start <= o.start && o.end <= end;
  }
  friend bool operator==(const ChunkSpan&, const ChunkSpan&) = default;
};

}  // namespace turntake
