#include "charonette/video_ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "charonette/error.hpp"
#include "charonette/text.hpp"

namespace charonette {

namespace {

struct RecordLine {
  std::size_t line_no = 0;
  std::vector<std::string> fields;
};

// Splits into at most `max_fields` tab-separated fields; the last keeps any
// remaining tabs.
std::vector<RecordLine> records(std::string_view text, std::size_t max_fields) {
  std::vector<RecordLine> out;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    RecordLine rec{line_no, {}};
    std::size_t at = 0;
    while (rec.fields.size() + 1 < max_fields) {
      const auto tab = line.find('\t', at);
      if (tab == std::string::npos) break;
      rec.fields.push_back(line.substr(at, tab - at));
      at = tab + 1;
    }
    rec.fields.push_back(line.substr(at));
    out.push_back(std::move(rec));
  }
  return out;
}

[[noreturn]] void bad_record(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": " + what);
}

std::int64_t to_int(const std::string& field, std::size_t line_no, const char* what) {
  const std::string t = trim(field);
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) bad_record(line_no, std::string(what) + " is not an integer: '" + field + "'");
  return v;
}

double to_double(const std::string& field, std::size_t line_no, const char* what) {
  const std::string t = trim(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    bad_record(line_no, std::string(what) + " is not a number: '" + field + "'");
  }
  return v;
}

void check_times(std::int64_t start, std::int64_t end, std::size_t line_no) {
  if (start < 0 || end < 0) {
    throw Error(ErrorCode::negative_time, "line " + std::to_string(line_no) + ": negative timestamp");
  }
  if (start >= end) bad_record(line_no, "start_ms must be < end_ms");
}

std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> out;
  for (const auto& token : tokenize(text)) out.insert(to_lower(token.text));
  return out;
}

// Splits one subtitle line into words with durations proportional to their
// character counts.
std::vector<TranscriptWord> apportion(const SubtitleLine& line, bool flagged) {
  const std::vector<std::string> words = split_words(line.text);
  std::vector<TranscriptWord> out;
  if (words.empty()) return out;
  const std::int64_t duration = line.end_ms - line.start_ms;
  const auto n = static_cast<std::int64_t>(words.size());
  if (duration < n) {
    out.push_back(TranscriptWord{trim(line.text), line.start_ms, line.end_ms, WordSource::subtitle, flagged});
    return out;
  }
  std::vector<std::int64_t> cumulative{0};
  for (const auto& w : words) cumulative.push_back(cumulative.back() + static_cast<std::int64_t>(utf8_length(w)));
  const std::int64_t total = cumulative.back();

  std::vector<std::int64_t> bounds;
  for (std::int64_t k = 0; k <= n; ++k) bounds.push_back(line.start_ms + duration * cumulative[k] / total);
  bool degenerate = false;
  for (std::int64_t k = 0; k < n; ++k) degenerate |= bounds[k + 1] <= bounds[k];
  if (degenerate) {
    // Very short line: reserve 1 ms per word, spread the rest proportionally.
    for (std::int64_t k = 0; k <= n; ++k) bounds[k] = line.start_ms + k + (duration - n) * cumulative[k] / total;
  }
  for (std::int64_t k = 0; k < n; ++k) {
    out.push_back(TranscriptWord{words[k], bounds[k], bounds[k + 1], WordSource::subtitle, flagged});
  }
  return out;
}

}  // namespace

std::string_view to_string(WordSource source) { return source == WordSource::speech ? "speech" : "subtitle"; }

std::string_view to_string(DraftStatus status) {
  switch (status) {
    case DraftStatus::automatic: return "auto";
    case DraftStatus::human_edited: return "human_edited";
    case DraftStatus::finalized: return "finalized";
  }
  return "auto";
}

std::string_view to_string(DetectionStatus status) {
  switch (status) {
    case DetectionStatus::pending: return "pending";
    case DetectionStatus::accepted: return "accepted";
    case DetectionStatus::rejected: return "rejected";
  }
  return "pending";
}

std::string SentenceDraft::text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w.text;
  }
  return out;
}

bool draft_invariants_hold(const SentenceDraft& draft) {
  if (draft.words.empty()) return false;
  for (std::size_t i = 0; i < draft.words.size(); ++i) {
    const auto& w = draft.words[i];
    if (w.start_ms < 0 || w.start_ms >= w.end_ms) return false;
    if (i > 0 && w.start_ms < draft.words[i - 1].end_ms) return false;
  }
  return true;
}

FrameClock::FrameClock(int fps) : fps_(fps) {
  if (fps <= 0 || fps > 1000) throw Error(ErrorCode::invalid_argument, "fps must be in 1..1000");
}

std::int64_t FrameClock::time_to_frame(std::int64_t time_ms) const {
  if (time_ms < 0) throw Error(ErrorCode::negative_time, "negative time " + std::to_string(time_ms) + " ms");
  return time_ms * fps_ / 1000;
}

std::int64_t FrameClock::frame_to_time(std::int64_t frame_index) const {
  if (frame_index < 0) throw Error(ErrorCode::negative_time, "negative frame index " + std::to_string(frame_index));
  return (frame_index * 1000 + fps_ - 1) / fps_;
}

std::int64_t time_to_frame(std::int64_t time_ms) { return FrameClock{}.time_to_frame(time_ms); }
std::int64_t frame_to_time(std::int64_t frame_index) { return FrameClock{}.frame_to_time(frame_index); }

std::vector<TranscriptWord> parse_transcript(std::string_view text) {
  std::vector<TranscriptWord> out;
  for (const auto& rec : records(text, 3)) {
    if (rec.fields.size() != 3) bad_record(rec.line_no, "expected start_ms, end_ms, text");
    TranscriptWord w;
    w.start_ms = to_int(rec.fields[0], rec.line_no, "start_ms");
    w.end_ms = to_int(rec.fields[1], rec.line_no, "end_ms");
    check_times(w.start_ms, w.end_ms, rec.line_no);
    w.text = trim(rec.fields[2]);
    if (w.text.empty()) bad_record(rec.line_no, "empty word");
    w.source = WordSource::speech;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<SubtitleLine> parse_subtitles(std::string_view text) {
  std::vector<SubtitleLine> out;
  for (const auto& rec : records(text, 3)) {
    if (rec.fields.size() != 3) bad_record(rec.line_no, "expected start_ms, end_ms, line text");
    SubtitleLine line;
    line.start_ms = to_int(rec.fields[0], rec.line_no, "start_ms");
    line.end_ms = to_int(rec.fields[1], rec.line_no, "end_ms");
    check_times(line.start_ms, line.end_ms, rec.line_no);
    line.text = trim(rec.fields[2]);
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<Detection> ingest_detections(std::string_view text, int video_width, int video_height) {
  std::vector<Detection> out;
  for (const auto& rec : records(text, 7)) {
    if (rec.fields.size() != 7) {
      bad_record(rec.line_no, "expected frame_index, class_label, confidence, xmin, ymin, xmax, ymax");
    }
    Detection d;
    d.frame_index = to_int(rec.fields[0], rec.line_no, "frame_index");
    if (d.frame_index < 0) bad_record(rec.line_no, "negative frame index");
    d.class_label = trim(rec.fields[1]);
    if (d.class_label.empty()) bad_record(rec.line_no, "empty class label");
    d.confidence = to_double(rec.fields[2], rec.line_no, "confidence");
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw Error(ErrorCode::invalid_confidence,
                  "line " + std::to_string(rec.line_no) + ": confidence " + trim(rec.fields[2]) + " outside [0,1]");
    }
    d.box.xmin = static_cast<int>(to_int(rec.fields[3], rec.line_no, "xmin"));
    d.box.ymin = static_cast<int>(to_int(rec.fields[4], rec.line_no, "ymin"));
    d.box.xmax = static_cast<int>(to_int(rec.fields[5], rec.line_no, "xmax"));
    d.box.ymax = static_cast<int>(to_int(rec.fields[6], rec.line_no, "ymax"));
    if (!d.box.well_formed()) bad_record(rec.line_no, "box " + to_string(d.box) + " is empty or inverted");
    if (!d.box.fits(video_width, video_height)) {
      throw Error(ErrorCode::box_out_of_bounds, "line " + std::to_string(rec.line_no) + ": box " + to_string(d.box) +
                                                    " outside " + std::to_string(video_width) + "x" +
                                                    std::to_string(video_height));
    }
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
    return a.confidence > b.confidence;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<std::int64_t>(i + 1);
  return out;
}

double token_jaccard(std::string_view a, std::string_view b) {
  const auto sa = token_set(a);
  const auto sb = token_set(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t united = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(united);
}

std::vector<TranscriptWord> merge_streams(std::span<const TranscriptWord> speech,
                                          std::span<const SubtitleLine> subtitles, MergeOptions options) {
  for (std::size_t i = 0; i < speech.size(); ++i) {
    check_times(speech[i].start_ms, speech[i].end_ms, i + 1);
    if (i > 0 && speech[i].start_ms < speech[i - 1].start_ms) {
      throw Error(ErrorCode::unordered_stream, "speech word " + std::to_string(i + 1) + " starts before its predecessor");
    }
  }
  for (std::size_t i = 0; i < subtitles.size(); ++i) {
    check_times(subtitles[i].start_ms, subtitles[i].end_ms, i + 1);
    if (i > 0 && subtitles[i].start_ms < subtitles[i - 1].start_ms) {
      throw Error(ErrorCode::unordered_stream,
                  "subtitle line " + std::to_string(i + 1) + " starts before its predecessor");
    }
  }

  std::vector<TranscriptWord> from_subtitles;
  for (const auto& line : subtitles) {
    std::string overlapped;
    bool any = false;
    for (const auto& w : speech) {
      if (w.start_ms >= line.end_ms) break;
      if (w.end_ms > line.start_ms) {
        overlapped += w.text + " ";
        any = true;
      }
    }
    if (any && token_jaccard(line.text, overlapped) >= options.duplicate_jaccard) continue;
    auto words = apportion(line, any);
    from_subtitles.insert(from_subtitles.end(), words.begin(), words.end());
  }
  std::stable_sort(from_subtitles.begin(), from_subtitles.end(),
                   [](const TranscriptWord& a, const TranscriptWord& b) { return a.start_ms < b.start_ms; });

  std::vector<TranscriptWord> out;
  out.reserve(speech.size() + from_subtitles.size());
  std::size_t s = 0;
  std::size_t t = 0;
  while (s < speech.size() || t < from_subtitles.size()) {
    if (t == from_subtitles.size() || (s < speech.size() && speech[s].start_ms <= from_subtitles[t].start_ms)) {
      out.push_back(speech[s++]);
    } else {
      out.push_back(from_subtitles[t++]);
    }
  }
  return out;
}

std::vector<SentenceDraft> segment_sentences(std::span<const TranscriptWord> words, std::int64_t pause_threshold_ms) {
  std::vector<SentenceDraft> drafts;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool boundary = i == 0 || words[i].start_ms - words[i - 1].end_ms > pause_threshold_ms ||
                          words[i].start_ms < words[i - 1].end_ms;
    if (boundary) {
      SentenceDraft draft;
      draft.id = static_cast<std::int64_t>(drafts.size() + 1);
      draft.status = DraftStatus::automatic;
      drafts.push_back(std::move(draft));
    }
    drafts.back().words.push_back(words[i]);
  }
  return drafts;
}

DraftBook::DraftBook(std::vector<SentenceDraft> drafts) : drafts_(std::move(drafts)) {
  for (const auto& d : drafts_) next_id_ = std::max(next_id_, d.id + 1);
}

const SentenceDraft* DraftBook::find(std::int64_t draft_id) const {
  for (const auto& d : drafts_) {
    if (d.id == draft_id) return &d;
  }
  return nullptr;
}

std::size_t DraftBook::position(std::int64_t draft_id) const {
  for (std::size_t i = 0; i < drafts_.size(); ++i) {
    if (drafts_[i].id == draft_id) return i;
  }
  throw Error(ErrorCode::unknown_draft, "unknown draft " + std::to_string(draft_id));
}

std::optional<SentenceDraft> DraftBook::apply(std::int64_t draft_id, const DraftEdit& edit) {
  const std::size_t pos = position(draft_id);
  if (drafts_[pos].status == DraftStatus::finalized) {
    throw Error(ErrorCode::draft_finalized, "draft " + std::to_string(draft_id) + " is finalized");
  }
  auto bad_index = [&](std::size_t index) {
    throw Error(ErrorCode::invalid_index, "word index " + std::to_string(index) + " invalid for draft " +
                                              std::to_string(draft_id) + " of " +
                                              std::to_string(drafts_[pos].words.size()) + " words");
  };

  return std::visit(
      [&](const auto& op) -> std::optional<SentenceDraft> {
        using Op = std::decay_t<decltype(op)>;
        SentenceDraft& draft = drafts_[pos];
        if constexpr (std::is_same_v<Op, draft_edit::SplitAt>) {
          if (op.word_index == 0 || op.word_index >= draft.words.size()) bad_index(op.word_index);
          SentenceDraft tail;
          tail.id = next_id_++;
          tail.status = DraftStatus::human_edited;
          tail.words.assign(draft.words.begin() + static_cast<std::ptrdiff_t>(op.word_index), draft.words.end());
          draft.words.resize(op.word_index);
          draft.status = DraftStatus::human_edited;
          drafts_.insert(drafts_.begin() + static_cast<std::ptrdiff_t>(pos + 1), std::move(tail));
        } else if constexpr (std::is_same_v<Op, draft_edit::MergeWithNext>) {
          if (pos + 1 >= drafts_.size()) {
            throw Error(ErrorCode::invalid_index, "draft " + std::to_string(draft_id) + " has no following draft");
          }
          SentenceDraft& next = drafts_[pos + 1];
          if (next.status == DraftStatus::finalized) {
            throw Error(ErrorCode::draft_finalized, "draft " + std::to_string(next.id) + " is finalized");
          }
          if (next.words.front().start_ms < draft.words.back().end_ms) {
            throw Error(ErrorCode::order_violation, "draft " + std::to_string(next.id) + " overlaps draft " +
                                                        std::to_string(draft_id) + " in time");
          }
          draft.words.insert(draft.words.end(), next.words.begin(), next.words.end());
          draft.status = DraftStatus::human_edited;
          drafts_.erase(drafts_.begin() + static_cast<std::ptrdiff_t>(pos + 1));
        } else if constexpr (std::is_same_v<Op, draft_edit::Retime>) {
          if (op.word_index >= draft.words.size()) bad_index(op.word_index);
          const std::size_t i = op.word_index;
          const bool ordered = op.start_ms >= 0 && op.start_ms < op.end_ms &&
                               (i == 0 || op.start_ms >= draft.words[i - 1].end_ms) &&
                               (i + 1 == draft.words.size() || op.end_ms <= draft.words[i + 1].start_ms);
          if (!ordered) {
            throw Error(ErrorCode::order_violation, "retime of word " + std::to_string(i) + " to [" +
                                                        std::to_string(op.start_ms) + ", " +
                                                        std::to_string(op.end_ms) + ") breaks word order");
          }
          draft.words[i].start_ms = op.start_ms;
          draft.words[i].end_ms = op.end_ms;
          draft.status = DraftStatus::human_edited;
        } else if constexpr (std::is_same_v<Op, draft_edit::SetText>) {
          if (op.word_index >= draft.words.size()) bad_index(op.word_index);
          std::string text = trim(op.text);
          if (text.empty()) throw Error(ErrorCode::invalid_argument, "word text must not be empty");
          draft.words[op.word_index].text = std::move(text);
          draft.status = DraftStatus::human_edited;
        } else {
          draft.status = DraftStatus::finalized;
          return draft;
        }
        return std::nullopt;
      },
      edit);
}

}  // namespace charonette
