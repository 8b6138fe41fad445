#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "charonette/annotation.hpp"
#include "charonette/preannotation.hpp"
#include "charonette/static_ingest.hpp"
#include "charonette/tracking.hpp"
#include "charonette/video_ingest.hpp"

namespace charonette {

enum class DocumentKind { static_image, video };
std::string_view to_string(DocumentKind kind);

struct Sentence {
  std::int64_t id = 0;
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Everything annotators work on for one image-caption pair or one video.
struct Document {
  std::string corpus;
  std::string id;
  DocumentKind kind = DocumentKind::static_image;
  std::string media_ref;  // image file or video name
  int fps = kDefaultFps;

  std::vector<Sentence> sentences;
  std::vector<EntityChain> chains;  // static documents
  std::vector<TranscriptWord> words;  // video documents: merged transcript
  DraftBook drafts;
  std::vector<Detection> detections;
  TrackBook tracks;  // bounds double as the image / video size

  std::vector<TextAnnotationSet> text_sets;
  std::vector<ImageAnnotation> image_annotations;
  std::vector<Correlation> correlations;
  std::vector<TargetCandidate> candidates;

  std::int64_t next_sentence_id = 1;
  std::int64_t next_as_id = 1;
  std::int64_t next_image_annotation_id = 1;
  std::int64_t next_correlation_id = 1;

  int width() const { return tracks.bounds().width; }
  int height() const { return tracks.bounds().height; }

  const Sentence* sentence(std::int64_t sentence_id) const;
  const EntityChain* chain(std::int64_t entity_id) const;
  bool has_target(const TargetRef& target) const;
  Detection* detection(std::int64_t detection_id);

  const Sentence& add_sentence(std::string text, std::int64_t start_ms = 0, std::int64_t end_ms = 0);
};

// Picture-caption document: sentence 1 is the caption; one correlation per
// chain phrase is seeded automatically.
Document make_static_document(const CorpusDocument& source, std::string corpus);

struct VideoSource {
  std::string id;
  std::string media_ref;
  int fps = kDefaultFps;
  int width = 0;
  int height = 0;
  std::int64_t frame_count = 0;
  std::int64_t first_object_id = 1;
};

// Video document with merged transcript, automatic sentence drafts and
// pending detections.
Document make_video_document(const VideoSource& source, std::string corpus, std::vector<TranscriptWord> words,
                             std::vector<Detection> detections, std::int64_t pause_threshold_ms = 700);

}  // namespace charonette
