#include "charonette/workspace.hpp"

#include <algorithm>
#include <set>

#include "charonette/error.hpp"
#include "charonette/repository.hpp"
#include "charonette/static_ingest.hpp"
#include "charonette/xml_export.hpp"

namespace charonette {

namespace fs = std::filesystem;

struct Workspace::CorpusHandle {
  std::unique_ptr<RecordStore> store;
  std::mutex docs_mutex;
  std::map<std::string, std::unique_ptr<std::mutex>> doc_mutexes;
};

namespace {

bool valid_corpus_name(const std::string& name) {
  if (name.empty() || name.size() > 128 || name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

}  // namespace

Workspace::Workspace(fs::path data_dir, std::shared_ptr<const Lexicon> lexicon)
    : data_dir_(std::move(data_dir)), lexicon_(std::move(lexicon)) {
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create data directory " + data_dir_.string() + ": " + ec.message());
}

Workspace::~Workspace() = default;

std::vector<std::string> Workspace::corpora() const {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(data_dir_, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && valid_corpus_name(name)) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

Workspace::CorpusHandle& Workspace::corpus(const std::string& name, bool create) {
  if (!valid_corpus_name(name)) {
    throw Error(ErrorCode::invalid_argument, "invalid corpus name '" + name + "'", "corpus");
  }
  std::lock_guard lock(mutex_);
  auto it = corpora_.find(name);
  if (it != corpora_.end()) return *it->second;
  const fs::path dir = data_dir_ / name;
  if (!create && !fs::is_directory(dir)) throw Error(ErrorCode::unknown_corpus, "unknown corpus " + name);
  auto handle = std::make_unique<CorpusHandle>();
  handle->store = RecordStore::open(dir);
  return *corpora_.emplace(name, std::move(handle)).first->second;
}

std::mutex& Workspace::document_mutex(CorpusHandle& handle, const std::string& doc_id) {
  std::lock_guard lock(handle.docs_mutex);
  auto& m = handle.doc_mutexes[doc_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

void Workspace::create_corpus(const std::string& name) { corpus(name, true); }

std::vector<std::string> Workspace::documents(const std::string& name) { return corpus(name, false).store->documents(); }

RecordStore& Workspace::store(const std::string& name) { return *corpus(name, false).store; }

Revisioned<Document> Workspace::document(const std::string& name, const std::string& doc_id) {
  auto stored = load_document(*corpus(name, false).store, doc_id);
  if (!stored) throw Error(ErrorCode::unknown_document, "unknown document " + doc_id + " in corpus " + name);
  return {std::move(stored->doc), stored->revision};
}

std::int64_t Workspace::create_document(CorpusHandle& handle, Document doc) {
  if (doc.id.empty()) throw Error(ErrorCode::invalid_argument, "document id must not be empty", "id");
  std::lock_guard lock(document_mutex(handle, doc.id));
  return save_document(*handle.store, doc, nullptr);
}

template <typename F>
auto Workspace::mutate(const std::string& name, const std::string& doc_id, ExpectedRevision expected, F&& f) {
  CorpusHandle& handle = corpus(name, false);
  std::lock_guard lock(document_mutex(handle, doc_id));
  auto stored = load_document(*handle.store, doc_id);
  if (!stored) throw Error(ErrorCode::unknown_document, "unknown document " + doc_id + " in corpus " + name);
  if (expected && *expected != stored->revision) {
    throw Error(ErrorCode::revision_conflict, "document " + doc_id + " is at revision " +
                                                  std::to_string(stored->revision) + ", not " +
                                                  std::to_string(*expected));
  }
  // Work on a copy so a failing operation leaves nothing behind.
  Document doc = stored->doc;
  auto value = f(doc);
  const std::int64_t revision = save_document(*handle.store, doc, &*stored);
  return Revisioned<decltype(value)>{std::move(value), revision};
}

StaticImportSummary Workspace::import_static(const std::string& name, std::string_view zip_bytes) {
  CorpusHandle& handle = corpus(name, true);
  const CorpusBundle bundle = open_bundle(zip_bytes, name);
  const LinkResult linked = link_entities(bundle);

  std::set<std::string> existing;
  for (const auto& id : handle.store->documents()) existing.insert(id);
  for (const auto& d : linked.documents) {
    if (existing.count(d.doc_id) != 0) {
      throw Error(ErrorCode::document_exists, "document " + d.doc_id + " already exists in corpus " + name);
    }
  }

  StaticImportSummary summary;
  summary.orphan_boxes = linked.orphan_boxes.size();
  for (const auto& d : linked.documents) {
    create_document(handle, make_static_document(d, name));
    summary.documents.push_back(d.doc_id);
    summary.chains += d.chains.size();
  }
  return summary;
}

Revisioned<std::string> Workspace::import_video(const std::string& name, const VideoImport& input) {
  if (input.source.id.empty()) throw Error(ErrorCode::invalid_argument, "video id must not be empty", "id");
  if (input.source.width <= 0 || input.source.height <= 0) {
    throw Error(ErrorCode::invalid_argument, "video width and height must be positive", "width");
  }
  FrameClock clock(input.source.fps);  // validates fps
  (void)clock;
  const auto speech = parse_transcript(input.transcript);
  const auto subtitles = parse_subtitles(input.subtitles);
  auto detections = ingest_detections(input.detections, input.source.width, input.source.height);
  auto words = merge_streams(speech, subtitles, input.merge);
  Document doc = make_video_document(input.source, name, std::move(words), std::move(detections),
                                     input.pause_threshold_ms);
  CorpusHandle& handle = corpus(name, true);
  const std::int64_t revision = create_document(handle, std::move(doc));
  return {input.source.id, revision};
}

Revisioned<PreannotateSummary> Workspace::preannotate(const std::string& name, const std::string& doc_id,
                                                      ExpectedRevision expected, const Disambiguator* disambiguator) {
  const RelationAdjacencyDisambiguator baseline;
  const Disambiguator& chooser = disambiguator != nullptr ? *disambiguator : baseline;
  return mutate(name, doc_id, expected, [&](Document& doc) {
    PreannotateSummary summary;
    for (const auto& sentence : doc.sentences) {
      auto chosen = chooser.disambiguate(identify_targets(sentence.text, *lexicon_, sentence.id), *lexicon_);
      summary.candidates.insert(summary.candidates.end(), chosen.begin(), chosen.end());
    }
    summary.ambiguous = static_cast<std::size_t>(std::count_if(
        summary.candidates.begin(), summary.candidates.end(),
        [](const TargetCandidate& c) { return c.candidate_frames.size() > 1; }));
    std::set<std::string> classes;
    for (const auto& chain : doc.chains) {
      for (const auto& box : chain.boxes) {
        if (!box.class_label.empty()) classes.insert(box.class_label);
      }
    }
    for (const auto& d : doc.detections) classes.insert(d.class_label);
    for (const auto& label : classes) summary.cv_mappings.push_back(map_cv_class_to_lu(label, *lexicon_));
    doc.candidates = summary.candidates;
    return summary;
  });
}

Revisioned<std::optional<Sentence>> Workspace::edit_draft(const std::string& name, const std::string& doc_id,
                                                          std::int64_t draft_id, const DraftEdit& edit,
                                                          ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) -> std::optional<Sentence> {
    auto finalized = doc.drafts.apply(draft_id, edit);
    if (!finalized) return std::nullopt;
    return doc.add_sentence(finalized->text(), finalized->start_ms(), finalized->end_ms());
  });
}

namespace {

Detection& require_detection(Document& doc, std::int64_t detection_id) {
  Detection* d = doc.detection(detection_id);
  if (d == nullptr) throw Error(ErrorCode::unknown_detection, "unknown detection " + std::to_string(detection_id));
  return *d;
}

}  // namespace

Revisioned<ObjectTrack> Workspace::accept_detection(const std::string& name, const std::string& doc_id,
                                                    std::int64_t detection_id, ExpectedRevision expected) {
  return mutate(name, doc_id, expected,
                [&](Document& doc) { return doc.tracks.accept_detection(require_detection(doc, detection_id)); });
}

Revisioned<Detection> Workspace::reject_detection(const std::string& name, const std::string& doc_id,
                                                  std::int64_t detection_id, ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    Detection& d = require_detection(doc, detection_id);
    if (d.status != DetectionStatus::pending) {
      throw Error(ErrorCode::detection_consumed,
                  "detection " + std::to_string(detection_id) + " is already " + std::string(to_string(d.status)));
    }
    d.status = DetectionStatus::rejected;
    return d;
  });
}

Revisioned<ObjectTrack> Workspace::create_object(const std::string& name, const std::string& doc_id,
                                                 std::int64_t frame_index, const Box& box, ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    if (doc.kind != DocumentKind::video) {
      throw Error(ErrorCode::invalid_argument, "objects can only be created in video documents");
    }
    return doc.tracks.create_object(frame_index, box);
  });
}

Revisioned<ObjectTrack> Workspace::edit_object(const std::string& name, const std::string& doc_id,
                                               std::int64_t object_id, const TrackEdit& edit,
                                               ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    return std::visit(
        [&](const auto& op) -> ObjectTrack {
          using Op = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<Op, track_edit::SetKeyframe>) {
            return doc.tracks.set_keyframe(object_id, op.frame_index, op.box);
          } else if constexpr (std::is_same_v<Op, track_edit::AutoTrack>) {
            return doc.tracks.auto_track(object_id, op.until_frame);
          } else if constexpr (std::is_same_v<Op, track_edit::Pause>) {
            return doc.tracks.pause(object_id);
          } else if constexpr (std::is_same_v<Op, track_edit::Resume>) {
            return doc.tracks.resume(object_id, op.frame_index, op.box);
          } else {
            return doc.tracks.end(object_id);
          }
        },
        edit);
  });
}

Revisioned<CascadeResult> Workspace::delete_target(const std::string& name, const std::string& doc_id,
                                                   TargetRef target, ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) { return remove_target(doc, target); });
}

Revisioned<TextAnnotationSet> Workspace::create_text_as(const std::string& name, const std::string& doc_id,
                                                        std::int64_t sentence_ref, Span target, FrameId frame,
                                                        ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    return charonette::create_text_as(doc, *lexicon_, sentence_ref, target, frame);
  });
}

Revisioned<TextAnnotationSet> Workspace::edit_text_as(const std::string& name, const std::string& doc_id,
                                                      std::int64_t as_id, const AsEdit& edit,
                                                      ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    return std::visit(
        [&](const auto& op) -> TextAnnotationSet {
          using Op = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<Op, as_edit::SetLabel>) {
            return set_layer_label(doc, *lexicon_, as_id, op.layer, op.span, op.label);
          } else if constexpr (std::is_same_v<Op, as_edit::RemoveLabel>) {
            return remove_layer_label(doc, as_id, op.layer, op.span);
          } else {
            return mark_ni(doc, *lexicon_, as_id, op.fe, op.ni_type);
          }
        },
        edit);
  });
}

Revisioned<ImageAnnotation> Workspace::annotate_target(const std::string& name, const std::string& doc_id,
                                                       TargetRef target, FrameId frame, FeId fe,
                                                       std::optional<LuId> cv_name, ExpectedRevision expected) {
  return mutate(name, doc_id, expected, [&](Document& doc) {
    return annotate_image_target(doc, *lexicon_, target, frame, fe, cv_name);
  });
}

Revisioned<Correlation> Workspace::correlate(const std::string& name, const std::string& doc_id, TargetRef target,
                                             std::int64_t sentence_ref, Span span, ExpectedRevision expected) {
  return mutate(name, doc_id, expected,
                [&](Document& doc) { return charonette::correlate(doc, target, sentence_ref, span); });
}

std::string Workspace::export_xml(const std::string& name, const std::string& doc_id) {
  return export_document(document(name, doc_id).value, *lexicon_);
}

Revisioned<std::string> Workspace::import_xml(const std::string& name, std::string_view xml) {
  Document doc = import_document(xml, *lexicon_);
  doc.corpus = name;
  const std::string id = doc.id;
  CorpusHandle& handle = corpus(name, true);
  return {id, create_document(handle, std::move(doc))};
}

std::vector<std::string> Workspace::validate(const std::string& name, const std::string& doc_id) {
  return validate_annotations(document(name, doc_id).value, *lexicon_);
}

void Workspace::compact(const std::string& name) { corpus(name, false).store->compact(); }

}  // namespace charonette
