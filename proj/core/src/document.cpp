#include "charonette/document.hpp"

namespace charonette {

std::string_view to_string(DocumentKind kind) { return kind == DocumentKind::static_image ? "static" : "video"; }

const Sentence* Document::sentence(std::int64_t sentence_id) const {
  for (const auto& s : sentences) {
    if (s.id == sentence_id) return &s;
  }
  return nullptr;
}

const EntityChain* Document::chain(std::int64_t entity_id) const {
  for (const auto& c : chains) {
    if (c.entity_id == entity_id) return &c;
  }
  return nullptr;
}

bool Document::has_target(const TargetRef& target) const {
  if (target.kind == TargetKind::entity) return kind == DocumentKind::static_image && chain(target.id) != nullptr;
  return kind == DocumentKind::video && tracks.find(target.id) != nullptr;
}

Detection* Document::detection(std::int64_t detection_id) {
  for (auto& d : detections) {
    if (d.id == detection_id) return &d;
  }
  return nullptr;
}

const Sentence& Document::add_sentence(std::string text, std::int64_t start_ms, std::int64_t end_ms) {
  sentences.push_back(Sentence{next_sentence_id++, std::move(text), start_ms, end_ms});
  return sentences.back();
}

Document make_static_document(const CorpusDocument& source, std::string corpus) {
  Document doc;
  doc.corpus = std::move(corpus);
  doc.id = source.doc_id;
  doc.kind = DocumentKind::static_image;
  doc.media_ref = source.image_ref;
  doc.tracks = TrackBook(VideoBounds{source.image_width, source.image_height, 0});
  const Sentence& sentence = doc.add_sentence(source.sentence);
  doc.chains = source.chains;
  for (const auto& chain : doc.chains) {
    for (const auto& phrase : chain.phrase_spans) {
      doc.correlations.push_back(
          Correlation{doc.next_correlation_id++, TargetRef{TargetKind::entity, chain.entity_id}, sentence.id, phrase.span});
    }
  }
  return doc;
}

Document make_video_document(const VideoSource& source, std::string corpus, std::vector<TranscriptWord> words,
                             std::vector<Detection> detections, std::int64_t pause_threshold_ms) {
  Document doc;
  doc.corpus = std::move(corpus);
  doc.id = source.id;
  doc.kind = DocumentKind::video;
  doc.media_ref = source.media_ref;
  doc.fps = source.fps;
  doc.tracks = TrackBook(VideoBounds{source.width, source.height, source.frame_count}, source.first_object_id);
  doc.drafts = DraftBook(segment_sentences(words, pause_threshold_ms));
  doc.words = std::move(words);
  doc.detections = std::move(detections);
  return doc;
}

}  // namespace charonette
