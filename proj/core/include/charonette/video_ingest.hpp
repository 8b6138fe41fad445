#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "charonette/geometry.hpp"

namespace charonette {

enum class WordSource { speech, subtitle };
std::string_view to_string(WordSource source);

struct TranscriptWord {
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  WordSource source = WordSource::speech;
  // Subtitle word overlapping speech that was not similar enough to be
  // dropped as a duplicate; left for the human pass.
  bool overlap_flag = false;

  friend bool operator==(const TranscriptWord&, const TranscriptWord&) = default;
};

struct SubtitleLine {
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

enum class DraftStatus { automatic, human_edited, finalized };
std::string_view to_string(DraftStatus status);

struct SentenceDraft {
  std::int64_t id = 0;
  std::vector<TranscriptWord> words;
  DraftStatus status = DraftStatus::automatic;

  std::string text() const;  // words joined by single spaces
  std::int64_t start_ms() const { return words.empty() ? 0 : words.front().start_ms; }
  std::int64_t end_ms() const { return words.empty() ? 0 : words.back().end_ms; }

  friend bool operator==(const SentenceDraft&, const SentenceDraft&) = default;
};

// Non-empty, every word has 0 <= start < end, and words are ordered and
// non-overlapping.
bool draft_invariants_hold(const SentenceDraft& draft);

constexpr int kDefaultFps = 25;

// Time <-> frame conversion at a fixed rate. frame_to_time rounds up so
// that time_to_frame(frame_to_time(n)) == n for any fps <= 1000.
class FrameClock {
 public:
  explicit FrameClock(int fps = kDefaultFps);

  int fps() const { return fps_; }
  std::int64_t time_to_frame(std::int64_t time_ms) const;  // floor(ms * fps / 1000)
  std::int64_t frame_to_time(std::int64_t frame_index) const;

 private:
  int fps_;
};

std::int64_t time_to_frame(std::int64_t time_ms);
std::int64_t frame_to_time(std::int64_t frame_index);

enum class DetectionStatus { pending, accepted, rejected };
std::string_view to_string(DetectionStatus status);

struct Detection {
  std::int64_t id = 0;  // 1-based position after sorting
  std::int64_t frame_index = 0;
  Box box;
  std::string class_label;
  double confidence = 0.0;
  DetectionStatus status = DetectionStatus::pending;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Tab-separated "start_ms end_ms text" per line; '#' starts a comment line.
std::vector<TranscriptWord> parse_transcript(std::string_view text);
std::vector<SubtitleLine> parse_subtitles(std::string_view text);

// "frame_index class_label confidence xmin ymin xmax ymax", tab-separated,
// half-open pixel boxes. Result sorted by (frame, confidence desc).
std::vector<Detection> ingest_detections(std::string_view text, int video_width, int video_height);

struct MergeOptions {
  double duplicate_jaccard = 0.8;
};

// Jaccard similarity of lowercased, punctuation-stripped token sets.
double token_jaccard(std::string_view a, std::string_view b);

// Drops subtitle lines duplicating overlapped speech, splits the rest into
// words with durations proportional to character length, and merges both
// streams in time order. Speech words pass through unchanged.
std::vector<TranscriptWord> merge_streams(std::span<const TranscriptWord> speech,
                                          std::span<const SubtitleLine> subtitles, MergeOptions options = {});

// New draft whenever the silence between consecutive words exceeds the
// threshold, or when words overlap. Ids run 1..n.
std::vector<SentenceDraft> segment_sentences(std::span<const TranscriptWord> words,
                                             std::int64_t pause_threshold_ms = 700);

namespace draft_edit {
struct SplitAt {
  std::size_t word_index = 0;
};
struct MergeWithNext {};
struct Retime {
  std::size_t word_index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};
struct SetText {
  std::size_t word_index = 0;
  std::string text;
};
struct Finalize {};
}  // namespace draft_edit

using DraftEdit = std::variant<draft_edit::SplitAt, draft_edit::MergeWithNext, draft_edit::Retime,
                               draft_edit::SetText, draft_edit::Finalize>;

// Ordered collection of drafts for one video document.
class DraftBook {
 public:
  DraftBook() = default;
  explicit DraftBook(std::vector<SentenceDraft> drafts);

  const std::vector<SentenceDraft>& drafts() const { return drafts_; }
  const SentenceDraft* find(std::int64_t draft_id) const;
  std::int64_t next_id() const { return next_id_; }
  void set_next_id(std::int64_t next) { next_id_ = next; }

  // Applies an edit; returns the draft when the edit finalized it.
  // Throws Error: unknown_draft, invalid_index, order_violation, draft_finalized.
  std::optional<SentenceDraft> apply(std::int64_t draft_id, const DraftEdit& edit);

 private:
  std::size_t position(std::int64_t draft_id) const;

  std::vector<SentenceDraft> drafts_;
  std::int64_t next_id_ = 1;
};

}  // namespace charonette
