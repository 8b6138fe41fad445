#include <doctest.h>

#include <random>

#include "charonette/error.hpp"
#include "charonette/video_ingest.hpp"
#include "fixtures.hpp"

using namespace charonette;
using charonette::testing::read_fixture;

namespace {

TranscriptWord word(std::string text, std::int64_t start, std::int64_t end) {
  return TranscriptWord{std::move(text), start, end, WordSource::speech, false};
}

std::vector<TranscriptWord> flatten(const std::vector<SentenceDraft>& drafts) {
  std::vector<TranscriptWord> out;
  for (const auto& d : drafts) out.insert(out.end(), d.words.begin(), d.words.end());
  return out;
}

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::not_found;
}

}  // namespace

TEST_CASE("frame clock at 25 fps") {
  CHECK(time_to_frame(0) == 0);
  CHECK(time_to_frame(2000) == 50);
  CHECK(time_to_frame(1999) == 49);
  CHECK(frame_to_time(7) == 280);
  CHECK(time_to_frame(frame_to_time(7)) == 7);
  CHECK(frame_to_time(50) == 2000);
  CHECK_THROWS_AS(time_to_frame(-1), Error);
  CHECK_THROWS_AS(FrameClock(0), Error);
}

TEST_CASE("frame clock round trips at other rates") {
  std::mt19937_64 rng(3);
  for (int fps : {1, 24, 25, 30, 60, 999, 1000}) {
    const FrameClock clock(fps);
    for (int i = 0; i < 2000; ++i) {
      const std::int64_t n = static_cast<std::int64_t>(rng() % 10'000'000);
      CHECK(clock.time_to_frame(clock.frame_to_time(n)) == n);
      // frame_to_time(n) is the first millisecond of frame n.
      if (clock.frame_to_time(n) > 0) CHECK(clock.time_to_frame(clock.frame_to_time(n) - 1) == n - 1);
    }
  }
}

TEST_CASE("transcript and subtitle files") {
  const auto words = parse_transcript(read_fixture("sentence3.transcript.tsv"));
  REQUIRE(words.size() == 10);
  CHECK(words.front().text == "Bom");
  CHECK(words.front().start_ms == 12000);
  CHECK(words.back().text == "né?");
  CHECK(words.back().end_ms == 14900);
  const auto subtitles = parse_subtitles(read_fixture("sentence3.subtitles.tsv"));
  CHECK(subtitles.size() == 2);
  CHECK(error_of([] { parse_transcript("100\t50\tx\n"); }) == ErrorCode::malformed_record);
  CHECK(error_of([] { parse_transcript("-5\t50\tx\n"); }) == ErrorCode::negative_time);
  CHECK(error_of([] { parse_transcript("a\t50\tx\n"); }) == ErrorCode::malformed_record);
  CHECK(parse_transcript("# comment only\n\n").empty());
}

TEST_CASE("speech-only merge is the identity") {
  const std::vector<TranscriptWord> speech = {word("hello", 0, 400), word("world", 450, 900)};
  CHECK(merge_streams(speech, {}) == speech);
}

TEST_CASE("duplicate subtitle over matching speech is dropped") {
  const std::vector<TranscriptWord> speech = {word("hello", 0, 400), word("world", 450, 900)};
  const std::vector<SubtitleLine> subs = {{"Hello, world!", 0, 900}};
  // Token sets {hello, world} on both sides: Jaccard 2/2 = 1.
  CHECK(token_jaccard("Hello, world!", "hello world") == 1.0);
  CHECK(merge_streams(speech, subs) == speech);
}

TEST_CASE("subtitle in silence is apportioned by character length") {
  const std::vector<TranscriptWord> speech = {word("a", 0, 500), word("b", 3000, 3500)};
  const std::vector<SubtitleLine> subs = {{"hi there", 1000, 2000}};
  const auto merged = merge_streams(speech, subs);
  REQUIRE(merged.size() == 4);
  // 2 + 5 characters over 1000 ms: boundary at 1000 + 1000 * 2 / 7 = 1285.
  CHECK(merged[1] == TranscriptWord{"hi", 1000, 1285, WordSource::subtitle, false});
  CHECK(merged[2] == TranscriptWord{"there", 1285, 2000, WordSource::subtitle, false});
  CHECK(merged[3] == speech[1]);
}

TEST_CASE("partially similar overlapping subtitle is kept and flagged") {
  const std::vector<TranscriptWord> speech = {word("bom", 0, 300), word("dia", 300, 600)};
  const std::vector<SubtitleLine> subs = {{"bom tarde gente", 0, 600}};
  CHECK(token_jaccard("bom tarde gente", "bom dia") == doctest::Approx(0.25));
  const auto merged = merge_streams(speech, subs);
  CHECK(merged.size() == 5);
  for (const auto& w : merged) {
    if (w.source == WordSource::subtitle) CHECK(w.overlap_flag);
  }
}

TEST_CASE("fixture streams merge to the expected words") {
  const auto merged = merge_streams(parse_transcript(read_fixture("sentence3.transcript.tsv")),
                                    parse_subtitles(read_fixture("sentence3.subtitles.tsv")));
  REQUIRE(merged.size() == 12);
  CHECK(merged[10].text == "Saúde");
  CHECK(merged[10].source == WordSource::subtitle);
}

TEST_CASE("unordered streams are rejected") {
  const std::vector<TranscriptWord> speech = {word("b", 500, 600), word("a", 0, 100)};
  CHECK(error_of([&] { merge_streams(speech, {}); }) == ErrorCode::unordered_stream);
}

TEST_CASE("merge keeps speech and time order on random streams") {
  std::mt19937 rng(23);
  for (int round = 0; round < 300; ++round) {
    std::vector<TranscriptWord> speech;
    std::int64_t t = 0;
    for (int i = 0; i < 8; ++i) {
      t += rng() % 900;
      const std::int64_t len = 1 + rng() % 400;
      speech.push_back(word("w" + std::to_string(rng() % 5), t, t + len));
      t += len;
    }
    std::vector<SubtitleLine> subs;
    std::int64_t s = 0;
    for (int i = 0; i < 3; ++i) {
      s += rng() % 2000;
      const std::int64_t len = 1 + rng() % 1500;
      subs.push_back({"w" + std::to_string(rng() % 5) + " x" + std::to_string(rng() % 3), s, s + len});
    }
    const auto merged = merge_streams(speech, subs);
    std::vector<TranscriptWord> kept;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      if (i > 0) CHECK(merged[i - 1].start_ms <= merged[i].start_ms);
      if (merged[i].source == WordSource::speech) kept.push_back(merged[i]);
    }
    CHECK(kept == speech);
  }
}

TEST_CASE("segmentation by pause threshold") {
  CHECK(segment_sentences({}).empty());
  const std::vector<TranscriptWord> words = {word("a", 0, 100), word("b", 200, 300), word("c", 1200, 1300),
                                             word("d", 1400, 1500), word("e", 1600, 1700)};
  const auto drafts = segment_sentences(words);
  REQUIRE(drafts.size() == 2);
  CHECK(drafts[0].words.size() == 2);
  CHECK(drafts[1].words.size() == 3);
  CHECK(drafts[0].id == 1);
  CHECK(drafts[1].id == 2);
  CHECK(drafts[1].text() == "c d e");

  const std::vector<TranscriptWord> tight = {word("a", 0, 100), word("b", 800, 900), word("c", 1600, 1700)};
  CHECK(segment_sentences(tight).size() == 1);
}

TEST_CASE("segmentation partitions its input") {
  std::mt19937 rng(29);
  for (int round = 0; round < 300; ++round) {
    std::vector<TranscriptWord> words;
    std::int64_t t = 0;
    for (int i = 0; i < 20; ++i) {
      t += rng() % 1500;
      const std::int64_t len = 1 + rng() % 300;
      words.push_back(word("w", t, t + len));
      t += len;
    }
    const auto drafts = segment_sentences(words, 700);
    CHECK(flatten(drafts) == words);
    for (const auto& d : drafts) CHECK(draft_invariants_hold(d));
  }
}

TEST_CASE("draft edits") {
  DraftBook book(segment_sentences(std::vector<TranscriptWord>{
      word("a", 0, 100), word("b", 200, 300), word("c", 400, 500), word("d", 600, 700), word("e", 800, 900)}));
  REQUIRE(book.drafts().size() == 1);

  book.apply(1, draft_edit::SplitAt{2});
  REQUIRE(book.drafts().size() == 2);
  CHECK(book.drafts()[0].words.size() == 2);
  CHECK(book.drafts()[1].words.size() == 3);
  CHECK(book.drafts()[0].status == DraftStatus::human_edited);
  CHECK(book.drafts()[1].status == DraftStatus::human_edited);
  CHECK(book.drafts()[1].id == 2);

  // Word 1 of draft 2 ("d") may not start before word 0 ("c") ends.
  CHECK(error_of([&] { book.apply(2, draft_edit::Retime{1, 450, 700}); }) == ErrorCode::order_violation);
  book.apply(2, draft_edit::Retime{1, 550, 700});
  CHECK(book.find(2)->words[1].start_ms == 550);
  book.apply(2, draft_edit::SetText{0, "  C "});
  CHECK(book.find(2)->words[0].text == "C");
  CHECK(error_of([&] { book.apply(2, draft_edit::SetText{9, "x"}); }) == ErrorCode::invalid_index);
  CHECK(error_of([&] { book.apply(1, draft_edit::SplitAt{0}); }) == ErrorCode::invalid_index);
  CHECK(error_of([&] { book.apply(7, draft_edit::MergeWithNext{}); }) == ErrorCode::unknown_draft);

  const auto finalized = book.apply(1, draft_edit::Finalize{});
  REQUIRE(finalized.has_value());
  CHECK(finalized->text() == "a b");
  CHECK(error_of([&] { book.apply(1, draft_edit::SetText{0, "z"}); }) == ErrorCode::draft_finalized);

  book.apply(2, draft_edit::SplitAt{1});
  CHECK(book.drafts().size() == 3);
  book.apply(2, draft_edit::MergeWithNext{});
  CHECK(book.drafts().size() == 2);
  CHECK(book.find(3) == nullptr);
}

TEST_CASE("random edit sequences preserve draft invariants") {
  std::mt19937 rng(31);
  for (int round = 0; round < 200; ++round) {
    std::vector<TranscriptWord> words;
    std::int64_t t = 0;
    for (int i = 0; i < 12; ++i) {
      t += 50 + rng() % 1200;
      words.push_back(word("w" + std::to_string(i), t, t + 100));
      t += 100;
    }
    DraftBook book(segment_sentences(words));
    for (int step = 0; step < 40; ++step) {
      const auto& drafts = book.drafts();
      const auto& target = drafts[rng() % drafts.size()];
      const std::size_t n = target.words.size();
      const std::size_t index = rng() % (n + 1);
      DraftEdit edit;
      switch (rng() % 5) {
        case 0: edit = draft_edit::SplitAt{index}; break;
        case 1: edit = draft_edit::MergeWithNext{}; break;
        case 2: {
          const std::int64_t start = static_cast<std::int64_t>(rng() % 20000);
          edit = draft_edit::Retime{index, start, start + 1 + static_cast<std::int64_t>(rng() % 300)};
          break;
        }
        case 3: edit = draft_edit::SetText{index, "t" + std::to_string(step)}; break;
        default:
          if (rng() % 4 == 0) edit = draft_edit::Finalize{};
          else edit = draft_edit::SetText{index, "u"};
      }
      const auto before = book.drafts();
      try {
        book.apply(target.id, edit);
      } catch (const Error&) {
        CHECK(book.drafts() == before);
      }
      for (const auto& d : book.drafts()) CHECK(draft_invariants_hold(d));
      std::size_t total = 0;
      for (const auto& d : book.drafts()) total += d.words.size();
      CHECK(total == words.size());
    }
  }
}

TEST_CASE("detection file") {
  const auto detections = ingest_detections(read_fixture("sentence3.detections.tsv"), 640, 360);
  REQUIRE(detections.size() == 3);
  CHECK(detections[0].id == 1);
  CHECK(detections[0].frame_index == 300);
  CHECK(detections[0].confidence == doctest::Approx(0.97));
  CHECK(detections[0].box == Box{380, 50, 600, 350});
  CHECK(detections[1].confidence == doctest::Approx(0.91));
  CHECK(detections[2].class_label == "glass");
  CHECK(detections[2].frame_index == 325);
  for (const auto& d : detections) CHECK(d.status == DetectionStatus::pending);

  CHECK(ingest_detections("", 640, 360).empty());
  CHECK(error_of([] { ingest_detections("1\tcar\t1.2\t0\t0\t10\t10\n", 640, 360); }) == ErrorCode::invalid_confidence);
  CHECK(error_of([] { ingest_detections("1\tcar\t0.5\t0\t0\t700\t10\n", 640, 360); }) ==
        ErrorCode::box_out_of_bounds);
  CHECK(error_of([] { ingest_detections("1\tcar\t0.5\t0\t0\n", 640, 360); }) == ErrorCode::malformed_record);
}
