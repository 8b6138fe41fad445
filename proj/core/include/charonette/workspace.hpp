#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "charonette/annotation.hpp"
#include "charonette/document.hpp"
#include "charonette/lexicon.hpp"
#include "charonette/preannotation.hpp"
#include "charonette/record_store.hpp"

namespace charonette {

template <typename T>
struct Revisioned {
  T value;
  std::int64_t revision = 0;
};

// Expected document revision; absent skips the check (CLI use).
using ExpectedRevision = std::optional<std::int64_t>;

struct StaticImportSummary {
  std::vector<std::string> documents;
  std::size_t chains = 0;
  std::size_t orphan_boxes = 0;
};

struct VideoImport {
  VideoSource source;
  std::string transcript;  // file contents, see parse_transcript
  std::string subtitles;  // optional
  std::string detections;  // optional
  std::int64_t pause_threshold_ms = 700;
  MergeOptions merge;
};

struct PreannotateSummary {
  std::vector<TargetCandidate> candidates;
  std::size_t ambiguous = 0;  // candidates with more than one frame
  std::vector<CvClassMapping> cv_mappings;  // one per distinct box/detection class
};

namespace track_edit {
struct SetKeyframe {
  std::int64_t frame_index = 0;
  Box box;
};
struct AutoTrack {
  std::int64_t until_frame = 0;
};
struct Pause {};
struct Resume {
  std::int64_t frame_index = 0;
  Box box;
};
struct End {};
}  // namespace track_edit

using TrackEdit = std::variant<track_edit::SetKeyframe, track_edit::AutoTrack, track_edit::Pause,
                               track_edit::Resume, track_edit::End>;

namespace as_edit {
struct SetLabel {
  Layer layer = Layer::fe;
  Span span;
  std::string label;
};
struct RemoveLabel {
  Layer layer = Layer::fe;
  Span span;
};
struct MarkNi {
  FeId fe{};
  std::string ni_type;
};
}  // namespace as_edit

using AsEdit = std::variant<as_edit::SetLabel, as_edit::RemoveLabel, as_edit::MarkNi>;

/// Corpus-level service over the record stores in a data directory. Both the
/// CLI and the HTTP API drive every operation through this class, so the two
/// paths produce identical stored state.
///
/// Each mutation loads the document, checks the expected revision, applies
/// the operation from the owning module and commits the changed records
/// atomically; the returned revision is the document's new revision.
/// Mutations on one document are serialized; reads run concurrently.
class Workspace {
 public:
  Workspace(std::filesystem::path data_dir, std::shared_ptr<const Lexicon> lexicon);
  ~Workspace();

  const Lexicon& lexicon() const { return *lexicon_; }
  const std::filesystem::path& data_dir() const { return data_dir_; }

  std::vector<std::string> corpora() const;
  // Idempotent. Names are [A-Za-z0-9_.-]+ and may not start with '.'.
  void create_corpus(const std::string& corpus);
  std::vector<std::string> documents(const std::string& corpus);
  Revisioned<Document> document(const std::string& corpus, const std::string& doc_id);

  StaticImportSummary import_static(const std::string& corpus, std::string_view zip_bytes);
  Revisioned<std::string> import_video(const std::string& corpus, const VideoImport& input);

  Revisioned<PreannotateSummary> preannotate(const std::string& corpus, const std::string& doc_id,
                                             ExpectedRevision expected, const Disambiguator* disambiguator = nullptr);

  // Finalizing a draft adds it to the document as a sentence, returned here.
  Revisioned<std::optional<Sentence>> edit_draft(const std::string& corpus, const std::string& doc_id,
                                                 std::int64_t draft_id, const DraftEdit& edit,
                                                 ExpectedRevision expected);

  Revisioned<ObjectTrack> accept_detection(const std::string& corpus, const std::string& doc_id,
                                           std::int64_t detection_id, ExpectedRevision expected);
  Revisioned<Detection> reject_detection(const std::string& corpus, const std::string& doc_id,
                                         std::int64_t detection_id, ExpectedRevision expected);
  Revisioned<ObjectTrack> create_object(const std::string& corpus, const std::string& doc_id,
                                        std::int64_t frame_index, const Box& box, ExpectedRevision expected);
  Revisioned<ObjectTrack> edit_object(const std::string& corpus, const std::string& doc_id, std::int64_t object_id,
                                      const TrackEdit& edit, ExpectedRevision expected);
  // Removes an object track or entity chain with its annotations and correlations.
  Revisioned<CascadeResult> delete_target(const std::string& corpus, const std::string& doc_id, TargetRef target,
                                          ExpectedRevision expected);

  Revisioned<TextAnnotationSet> create_text_as(const std::string& corpus, const std::string& doc_id,
                                               std::int64_t sentence_ref, Span target, FrameId frame,
                                               ExpectedRevision expected);
  Revisioned<TextAnnotationSet> edit_text_as(const std::string& corpus, const std::string& doc_id,
                                             std::int64_t as_id, const AsEdit& edit, ExpectedRevision expected);
  Revisioned<ImageAnnotation> annotate_target(const std::string& corpus, const std::string& doc_id,
                                              TargetRef target, FrameId frame, FeId fe, std::optional<LuId> cv_name,
                                              ExpectedRevision expected);
  Revisioned<Correlation> correlate(const std::string& corpus, const std::string& doc_id, TargetRef target,
                                    std::int64_t sentence_ref, Span span, ExpectedRevision expected);

  std::string export_xml(const std::string& corpus, const std::string& doc_id);
  // The corpus argument overrides the one recorded in the XML.
  Revisioned<std::string> import_xml(const std::string& corpus, std::string_view xml);

  std::vector<std::string> validate(const std::string& corpus, const std::string& doc_id);
  void compact(const std::string& corpus);

  // Underlying store, for inspection and fault-injection tests.
  RecordStore& store(const std::string& corpus);

 private:
  struct CorpusHandle;

  CorpusHandle& corpus(const std::string& name, bool create);
  std::mutex& document_mutex(CorpusHandle& handle, const std::string& doc_id);
  std::int64_t create_document(CorpusHandle& handle, Document doc);

  template <typename F>
  auto mutate(const std::string& corpus, const std::string& doc_id, ExpectedRevision expected, F&& f);

  std::filesystem::path data_dir_;
  std::shared_ptr<const Lexicon> lexicon_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<CorpusHandle>> corpora_;
};

}  // namespace charonette
