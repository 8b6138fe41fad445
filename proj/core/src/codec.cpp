#include "charonette/codec.hpp"

#include <algorithm>
#include <array>

#include "charonette/error.hpp"

namespace charonette {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object()) throw Error(ErrorCode::malformed_record, "expected an object", name);
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::malformed_record, std::string("missing field '") + name + "'", name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::malformed_record, std::string("invalid field '") + name + "'", name);
  }
}

const json& member(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::malformed_record, std::string("missing field '") + name + "'", name);
  }
  return j.at(name);
}

const json& array_member(const json& j, const char* name) {
  const json& a = member(j, name);
  if (!a.is_array()) throw Error(ErrorCode::malformed_record, std::string("field '") + name + "' is not a list", name);
  return a;
}

template <typename E, std::size_t N>
E parse_enum(const json& j, const char* name, const std::array<E, N>& values) {
  const auto text = field<std::string>(j, name);
  for (E v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::malformed_record, "unknown value '" + text + "' for '" + name + "'", name);
}

std::optional<std::int64_t> optional_int(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return field<std::int64_t>(j, name);
}

json optional_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

constexpr std::array kDraftStatuses{DraftStatus::automatic, DraftStatus::human_edited, DraftStatus::finalized};
constexpr std::array kDetectionStatuses{DetectionStatus::pending, DetectionStatus::accepted,
                                        DetectionStatus::rejected};
constexpr std::array kTrackStates{TrackState::tracking, TrackState::paused, TrackState::ended};
constexpr std::array kTrackOrigins{TrackOrigin::detector, TrackOrigin::human};
constexpr std::array kWordSources{WordSource::speech, WordSource::subtitle};
constexpr std::array kTargetKinds{TargetKind::entity, TargetKind::object};
constexpr std::array kAnnotationProvenances{AnnotationProvenance::automatic, AnnotationProvenance::human};
constexpr std::array kCandidateProvenances{CandidateProvenance::automatic, CandidateProvenance::human_override};
constexpr std::array kDocumentKinds{DocumentKind::static_image, DocumentKind::video};
constexpr std::array kLayers{Layer::fe, Layer::gf, Layer::pt};

std::string record_id(std::int64_t id) { return std::to_string(id); }

}  // namespace

json to_json(const Span& span) { return json{{"start", span.start}, {"end", span.end}}; }

Span span_from_json(const json& j) { return Span{field<std::size_t>(j, "start"), field<std::size_t>(j, "end")}; }

json to_json(const Box& box) {
  return json{{"xmin", box.xmin}, {"ymin", box.ymin}, {"xmax", box.xmax}, {"ymax", box.ymax}};
}

Box box_from_json(const json& j) {
  return Box{field<int>(j, "xmin"), field<int>(j, "ymin"), field<int>(j, "xmax"), field<int>(j, "ymax")};
}

json to_json(const TranscriptWord& word) {
  return json{{"text", word.text},
              {"start_ms", word.start_ms},
              {"end_ms", word.end_ms},
              {"source", to_string(word.source)},
              {"overlap_flag", word.overlap_flag}};
}

TranscriptWord word_from_json(const json& j) {
  TranscriptWord w;
  w.text = field<std::string>(j, "text");
  w.start_ms = field<std::int64_t>(j, "start_ms");
  w.end_ms = field<std::int64_t>(j, "end_ms");
  w.source = parse_enum(j, "source", kWordSources);
  w.overlap_flag = j.value("overlap_flag", false);
  return w;
}

json to_json(const SentenceDraft& draft) {
  json words = json::array();
  for (const auto& w : draft.words) words.push_back(to_json(w));
  return json{{"id", draft.id},
              {"status", to_string(draft.status)},
              {"text", draft.text()},
              {"start_ms", draft.start_ms()},
              {"end_ms", draft.end_ms()},
              {"words", std::move(words)}};
}

SentenceDraft draft_from_json(const json& j) {
  SentenceDraft d;
  d.id = field<std::int64_t>(j, "id");
  d.status = parse_enum(j, "status", kDraftStatuses);
  for (const auto& w : array_member(j, "words")) d.words.push_back(word_from_json(w));
  return d;
}

json to_json(const Detection& detection) {
  return json{{"id", detection.id},
              {"frame_index", detection.frame_index},
              {"box", to_json(detection.box)},
              {"class_label", detection.class_label},
              {"confidence", detection.confidence},
              {"status", to_string(detection.status)}};
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.id = field<std::int64_t>(j, "id");
  d.frame_index = field<std::int64_t>(j, "frame_index");
  d.box = box_from_json(member(j, "box"));
  d.class_label = field<std::string>(j, "class_label");
  d.confidence = field<double>(j, "confidence");
  d.status = parse_enum(j, "status", kDetectionStatuses);
  return d;
}

json to_json(const ObjectTrack& track) {
  json segments = json::array();
  for (const auto& s : track.segments) {
    json keyframes = json::array();
    for (const auto& [frame, box] : s.keyframes) {
      json k = to_json(box);
      k["frame"] = frame;
      keyframes.push_back(std::move(k));
    }
    segments.push_back(json{{"start_frame", s.start_frame}, {"end_frame", s.end_frame}, {"keyframes", keyframes}});
  }
  return json{{"object_id", track.object_id},
              {"state", to_string(track.state)},
              {"origin", to_string(track.origin)},
              {"detection_ref", optional_json(track.detection_ref)},
              {"segments", std::move(segments)}};
}

ObjectTrack track_from_json(const json& j) {
  ObjectTrack t;
  t.object_id = field<std::int64_t>(j, "object_id");
  t.state = parse_enum(j, "state", kTrackStates);
  t.origin = parse_enum(j, "origin", kTrackOrigins);
  t.detection_ref = optional_int(j, "detection_ref");
  for (const auto& s : array_member(j, "segments")) {
    TrackSegment seg;
    seg.start_frame = field<std::int64_t>(s, "start_frame");
    seg.end_frame = field<std::int64_t>(s, "end_frame");
    for (const auto& k : array_member(s, "keyframes")) seg.keyframes[field<std::int64_t>(k, "frame")] = box_from_json(k);
    t.segments.push_back(std::move(seg));
  }
  return t;
}

json to_json(const EntityChain& chain) {
  json phrases = json::array();
  for (const auto& p : chain.phrase_spans) {
    json pj = to_json(p.span);
    pj["sentence_index"] = p.sentence_index;
    phrases.push_back(std::move(pj));
  }
  json boxes = json::array();
  for (const auto& b : chain.boxes) {
    json bj = to_json(b.box);
    bj["image_ref"] = b.image_ref;
    bj["class_label"] = b.class_label;
    boxes.push_back(std::move(bj));
  }
  return json{{"entity_id", chain.entity_id},
              {"entity_type", chain.entity_type},
              {"linkage", to_string(chain.linkage())},
              {"phrase_spans", std::move(phrases)},
              {"boxes", std::move(boxes)}};
}

EntityChain chain_from_json(const json& j) {
  EntityChain c;
  c.entity_id = field<std::int64_t>(j, "entity_id");
  c.entity_type = field<std::string>(j, "entity_type");
  for (const auto& p : array_member(j, "phrase_spans")) {
    c.phrase_spans.push_back(PhraseSpan{field<std::size_t>(p, "sentence_index"), span_from_json(p)});
  }
  for (const auto& b : array_member(j, "boxes")) {
    c.boxes.push_back(
        BoundingBox{box_from_json(b), field<std::string>(b, "image_ref"), c.entity_id, field<std::string>(b, "class_label")});
  }
  return c;
}

json to_json(const Sentence& sentence) {
  return json{{"id", sentence.id}, {"text", sentence.text}, {"start_ms", sentence.start_ms}, {"end_ms", sentence.end_ms}};
}

Sentence sentence_from_json(const json& j) {
  return Sentence{field<std::int64_t>(j, "id"), field<std::string>(j, "text"), field<std::int64_t>(j, "start_ms"),
                  field<std::int64_t>(j, "end_ms")};
}

json to_json(const TextAnnotationSet& set) {
  json layers = json::object();
  for (Layer l : kLayers) {
    json labels = json::array();
    for (const auto& label : set.layer(l)) {
      json lj = to_json(label.span);
      lj["label"] = label.label;
      labels.push_back(std::move(lj));
    }
    layers[std::string(to_string(l))] = std::move(labels);
  }
  json ni = json::array();
  for (const auto& n : set.ni_entries) ni.push_back(json{{"fe_id", raw(n.fe)}, {"ni_type", n.type}});
  return json{{"id", set.id},          {"sentence_ref", set.sentence_ref}, {"target", to_json(set.target)},
              {"frame_id", raw(set.frame)}, {"layers", std::move(layers)},     {"ni_entries", std::move(ni)}};
}

TextAnnotationSet text_set_from_json(const json& j) {
  TextAnnotationSet set;
  set.id = field<std::int64_t>(j, "id");
  set.sentence_ref = field<std::int64_t>(j, "sentence_ref");
  set.target = span_from_json(member(j, "target"));
  set.frame = FrameId{field<std::int64_t>(j, "frame_id")};
  const json& layers = member(j, "layers");
  for (Layer l : kLayers) {
    const std::string name(to_string(l));
    if (!layers.contains(name)) continue;
    for (const auto& label : layers.at(name)) {
      set.layer(l).push_back(LayerLabel{span_from_json(label), field<std::string>(label, "label")});
    }
  }
  for (const auto& n : array_member(j, "ni_entries")) {
    set.ni_entries.push_back(NiEntry{FeId{field<std::int64_t>(n, "fe_id")}, field<std::string>(n, "ni_type")});
  }
  return set;
}

json to_json(const TargetRef& target) { return json{{"kind", to_string(target.kind)}, {"id", target.id}}; }

TargetRef target_from_json(const json& j) {
  return TargetRef{parse_enum(j, "kind", kTargetKinds), field<std::int64_t>(j, "id")};
}

json to_json(const ImageAnnotation& a) {
  return json{{"id", a.id},
              {"target", to_json(a.target)},
              {"frame_id", raw(a.frame)},
              {"fe_id", raw(a.fe)},
              {"cv_name", a.cv_name ? json(raw(*a.cv_name)) : json(nullptr)},
              {"provenance", to_string(a.provenance)}};
}

ImageAnnotation image_annotation_from_json(const json& j) {
  ImageAnnotation a;
  a.id = field<std::int64_t>(j, "id");
  a.target = target_from_json(member(j, "target"));
  a.frame = FrameId{field<std::int64_t>(j, "frame_id")};
  a.fe = FeId{field<std::int64_t>(j, "fe_id")};
  if (auto lu = optional_int(j, "cv_name")) a.cv_name = LuId{*lu};
  a.provenance = parse_enum(j, "provenance", kAnnotationProvenances);
  return a;
}

json to_json(const Correlation& c) {
  return json{{"id", c.id}, {"target", to_json(c.target)}, {"sentence_ref", c.sentence_ref}, {"span", to_json(c.span)}};
}

Correlation correlation_from_json(const json& j) {
  return Correlation{field<std::int64_t>(j, "id"), target_from_json(member(j, "target")),
                     field<std::int64_t>(j, "sentence_ref"), span_from_json(member(j, "span"))};
}

json to_json(const TargetCandidate& c) {
  json frames = json::array();
  for (FrameId f : c.candidate_frames) frames.push_back(raw(f));
  return json{{"sentence_ref", c.sentence_ref},
              {"span", to_json(c.span)},
              {"lemma", c.lemma},
              {"pos", to_string(c.pos)},
              {"candidate_frames", std::move(frames)},
              {"chosen_frame", c.chosen_frame ? json(raw(*c.chosen_frame)) : json(nullptr)},
              {"score", c.score},
              {"provenance", to_string(c.provenance)}};
}

TargetCandidate candidate_from_json(const json& j) {
  TargetCandidate c;
  c.sentence_ref = field<std::int64_t>(j, "sentence_ref");
  c.span = span_from_json(member(j, "span"));
  c.lemma = field<std::string>(j, "lemma");
  const auto pos = parse_pos(field<std::string>(j, "pos"));
  if (!pos) throw Error(ErrorCode::malformed_record, "unknown part of speech", "pos");
  c.pos = *pos;
  for (const auto& f : array_member(j, "candidate_frames")) c.candidate_frames.push_back(FrameId{f.get<std::int64_t>()});
  if (auto chosen = optional_int(j, "chosen_frame")) c.chosen_frame = FrameId{*chosen};
  c.score = field<double>(j, "score");
  c.provenance = parse_enum(j, "provenance", kCandidateProvenances);
  return c;
}

json to_json(const Document& doc) {
  auto list = [](const auto& items) {
    json out = json::array();
    for (const auto& item : items) out.push_back(to_json(item));
    return out;
  };
  return json{{"corpus", doc.corpus},
              {"id", doc.id},
              {"kind", to_string(doc.kind)},
              {"media_ref", doc.media_ref},
              {"fps", doc.fps},
              {"width", doc.width()},
              {"height", doc.height()},
              {"frame_count", doc.tracks.bounds().frame_count},
              {"sentences", list(doc.sentences)},
              {"chains", list(doc.chains)},
              {"words", list(doc.words)},
              {"drafts", list(doc.drafts.drafts())},
              {"detections", list(doc.detections)},
              {"objects", list(doc.tracks.tracks())},
              {"annotation_sets", list(doc.text_sets)},
              {"image_annotations", list(doc.image_annotations)},
              {"correlations", list(doc.correlations)},
              {"candidates", list(doc.candidates)}};
}

json to_json(const FrameElement& fe) {
  return json{{"id", raw(fe.id)}, {"name", fe.name}, {"frame_id", raw(fe.frame_id)}, {"coreness", to_string(fe.coreness)}};
}

json to_json(const Lexicon& lex, const Frame& frame) {
  json fes = json::array();
  for (const FrameElement* fe : lex.fes_of_frame(frame.id)) fes.push_back(to_json(*fe));
  json core = json::array();
  for (FeId id : frame.core_fes) {
    if (const FrameElement* fe = lex.fe(id)) core.push_back(fe->name);
  }
  json lus = json::array();
  for (const auto& lu : lex.lus()) {
    if (lu.frame_id == frame.id) lus.push_back(to_json(lex, lu));
  }
  return json{{"id", raw(frame.id)},
              {"name", frame.name},
              {"definition", frame.definition},
              {"core_fes", std::move(core)},
              {"fes", std::move(fes)},
              {"lus", std::move(lus)}};
}

json to_json(const Lexicon& lex, const LexicalUnit& lu) {
  const Frame* frame = lex.frame(lu.frame_id);
  return json{{"id", raw(lu.id)},
              {"name", lu.display_name()},
              {"lemma", lu.lemma},
              {"pos", to_string(lu.pos)},
              {"frame_id", raw(lu.frame_id)},
              {"frame", frame != nullptr ? frame->name : std::string()},
              {"language", lu.language}};
}

RecordMap document_to_records(const Document& doc) {
  RecordMap records;
  records[{kHeaderKind, "0"}] = json{{"corpus", doc.corpus},
                                     {"id", doc.id},
                                     {"kind", to_string(doc.kind)},
                                     {"media_ref", doc.media_ref},
                                     {"fps", doc.fps},
                                     {"width", doc.width()},
                                     {"height", doc.height()},
                                     {"frame_count", doc.tracks.bounds().frame_count},
                                     {"next_sentence_id", doc.next_sentence_id},
                                     {"next_as_id", doc.next_as_id},
                                     {"next_image_annotation_id", doc.next_image_annotation_id},
                                     {"next_correlation_id", doc.next_correlation_id},
                                     {"next_object_id", doc.tracks.next_object_id()},
                                     {"next_draft_id", doc.drafts.next_id()}};
  if (!doc.words.empty()) {
    json words = json::array();
    for (const auto& w : doc.words) words.push_back(to_json(w));
    records[{"transcript", "0"}] = json{{"words", std::move(words)}};
  }
  for (const auto& s : doc.sentences) records[{"sentence", record_id(s.id)}] = to_json(s);
  for (const auto& c : doc.chains) records[{"chain", record_id(c.entity_id)}] = to_json(c);
  const auto& drafts = doc.drafts.drafts();
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    json d = to_json(drafts[i]);
    d["position"] = i;
    records[{"draft", record_id(drafts[i].id)}] = std::move(d);
  }
  for (const auto& d : doc.detections) records[{"detection", record_id(d.id)}] = to_json(d);
  for (const auto& t : doc.tracks.tracks()) records[{"track", record_id(t.object_id)}] = to_json(t);
  for (const auto& s : doc.text_sets) records[{"text_as", record_id(s.id)}] = to_json(s);
  for (const auto& a : doc.image_annotations) records[{"image_annotation", record_id(a.id)}] = to_json(a);
  for (const auto& c : doc.correlations) records[{"correlation", record_id(c.id)}] = to_json(c);
  for (std::size_t i = 0; i < doc.candidates.size(); ++i) {
    json c = to_json(doc.candidates[i]);
    c["position"] = i;
    records[{"candidate", record_id(static_cast<std::int64_t>(i))}] = std::move(c);
  }
  return records;
}

Document document_from_records(const RecordMap& records) {
  auto header_it = records.find({kHeaderKind, "0"});
  if (header_it == records.end()) throw Error(ErrorCode::malformed_record, "document header missing", "header");
  const json& h = header_it->second;

  Document doc;
  doc.corpus = field<std::string>(h, "corpus");
  doc.id = field<std::string>(h, "id");
  doc.kind = parse_enum(h, "kind", kDocumentKinds);
  doc.media_ref = field<std::string>(h, "media_ref");
  doc.fps = field<int>(h, "fps");
  doc.next_sentence_id = field<std::int64_t>(h, "next_sentence_id");
  doc.next_as_id = field<std::int64_t>(h, "next_as_id");
  doc.next_image_annotation_id = field<std::int64_t>(h, "next_image_annotation_id");
  doc.next_correlation_id = field<std::int64_t>(h, "next_correlation_id");
  doc.tracks = TrackBook(VideoBounds{field<int>(h, "width"), field<int>(h, "height"), field<std::int64_t>(h, "frame_count")});

  std::vector<std::pair<std::size_t, SentenceDraft>> drafts;
  std::vector<std::pair<std::size_t, TargetCandidate>> candidates;
  for (const auto& [key, payload] : records) {
    const auto& kind = key.first;
    if (kind == kHeaderKind) continue;
    if (kind == "transcript") {
      for (const auto& w : array_member(payload, "words")) doc.words.push_back(word_from_json(w));
    } else if (kind == "sentence") {
      doc.sentences.push_back(sentence_from_json(payload));
    } else if (kind == "chain") {
      doc.chains.push_back(chain_from_json(payload));
    } else if (kind == "draft") {
      drafts.emplace_back(field<std::size_t>(payload, "position"), draft_from_json(payload));
    } else if (kind == "detection") {
      doc.detections.push_back(detection_from_json(payload));
    } else if (kind == "track") {
      doc.tracks.adopt(track_from_json(payload));
    } else if (kind == "text_as") {
      doc.text_sets.push_back(text_set_from_json(payload));
    } else if (kind == "image_annotation") {
      doc.image_annotations.push_back(image_annotation_from_json(payload));
    } else if (kind == "correlation") {
      doc.correlations.push_back(correlation_from_json(payload));
    } else if (kind == "candidate") {
      candidates.emplace_back(field<std::size_t>(payload, "position"), candidate_from_json(payload));
    } else {
      throw Error(ErrorCode::malformed_record, "unknown record kind '" + kind + "'", kind);
    }
  }
  // Keys sort as strings; restore numeric and positional order.
  std::sort(doc.sentences.begin(), doc.sentences.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.chains.begin(), doc.chains.end(), [](const auto& a, const auto& b) { return a.entity_id < b.entity_id; });
  std::sort(doc.detections.begin(), doc.detections.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.text_sets.begin(), doc.text_sets.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.image_annotations.begin(), doc.image_annotations.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.correlations.begin(), doc.correlations.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(drafts.begin(), drafts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<SentenceDraft> ordered;
  for (auto& [pos, d] : drafts) ordered.push_back(std::move(d));
  doc.drafts = DraftBook(std::move(ordered));
  doc.drafts.set_next_id(field<std::int64_t>(h, "next_draft_id"));
  for (auto& [pos, c] : candidates) doc.candidates.push_back(std::move(c));
  doc.tracks.set_next_object_id(field<std::int64_t>(h, "next_object_id"));
  return doc;
}

}  // namespace charonette
