#include "charonette/xml_export.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <sstream>
#include <tuple>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "charonette/error.hpp"
#include "charonette/xml_util.hpp"

namespace charonette {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kRoot = "charonCorpusDoc";
constexpr const char* kVersion = "1";

class Tag {
 public:
  Tag(std::string& out, int depth, std::string_view name) : out_(out) {
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
    out_ += '<';
    out_ += name;
  }
  Tag& attr(std::string_view name, std::string_view value) {
    out_ += ' ';
    out_ += name;
    out_ += "=\"";
    out_ += xml_escape(value);
    out_ += '"';
    return *this;
  }
  Tag& attr(std::string_view name, std::int64_t value) { return attr(name, std::to_string(value)); }
  void close() { out_ += "/>\n"; }
  void open() { out_ += ">\n"; }

 private:
  std::string& out_;
};

void end_tag(std::string& out, int depth, std::string_view name) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</";
  out += name;
  out += ">\n";
}

Tag& box_attrs(Tag& t, const Box& b) {
  return t.attr("xmin", b.xmin).attr("ymin", b.ymin).attr("xmax", b.xmax).attr("ymax", b.ymax);
}

std::string frame_name(const Lexicon& lex, FrameId id) {
  const Frame* f = lex.frame(id);
  if (f == nullptr) throw Error(ErrorCode::unknown_frame, "unknown frame id " + std::to_string(raw(id)));
  return f->name;
}

std::string fe_name(const Lexicon& lex, FeId id) {
  const FrameElement* fe = lex.fe(id);
  if (fe == nullptr) throw Error(ErrorCode::unknown_fe, "unknown frame element id " + std::to_string(raw(id)));
  return fe->name;
}

// --- import ---------------------------------------------------------------

struct Element {
  const pt::ptree& node;
  std::string path;

  std::optional<std::string> optional_attr(const char* name) const {
    auto attrs = node.get_child_optional("<xmlattr>");
    if (!attrs) return std::nullopt;
    auto value = attrs->get_optional<std::string>(name);
    if (!value) return std::nullopt;
    return *value;
  }

  std::string attr(const char* name) const {
    auto value = optional_attr(name);
    if (!value) throw Error(ErrorCode::schema_violation, path + ": missing attribute '" + name + "'", path);
    return *value;
  }

  std::int64_t int_attr(const char* name) const {
    const std::string text = attr(name);
    std::int64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw Error(ErrorCode::schema_violation, path + ": attribute '" + name + "' is not an integer", path);
    }
    return value;
  }

  std::size_t offset_attr(const char* name) const {
    const std::int64_t v = int_attr(name);
    if (v < 0) throw Error(ErrorCode::schema_violation, path + ": attribute '" + name + "' is negative", path);
    return static_cast<std::size_t>(v);
  }

  // Children in document order, rejecting names outside `allowed`.
  std::vector<std::pair<std::string, const pt::ptree*>> children(std::initializer_list<std::string_view> allowed) const {
    std::vector<std::pair<std::string, const pt::ptree*>> out;
    for (const auto& [name, child] : node) {
      if (name == "<xmlattr>") continue;
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw Error(ErrorCode::schema_violation, path + ": unexpected element <" + name + ">", path + "/" + name);
      }
      out.emplace_back(name, &child);
    }
    return out;
  }
};

template <typename F>
void validated(const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema_violation || e.code() == ErrorCode::validation_failed) throw;
    throw Error(ErrorCode::validation_failed, path + ": " + e.what(), path);
  }
}

const Frame& frame_by_name(const Lexicon& lex, const std::string& name, const std::string& path) {
  const Frame* f = lex.frame_by_name(name);
  if (f == nullptr) throw Error(ErrorCode::validation_failed, path + ": unknown frame '" + name + "'", path);
  return *f;
}

const FrameElement& fe_by_name(const Lexicon& lex, const Frame& frame, const std::string& name,
                               const std::string& path) {
  const FrameElement* fe = lex.fe_by_name(frame.id, name);
  if (fe == nullptr) {
    throw Error(ErrorCode::validation_failed,
                path + ": frame element '" + name + "' is not in frame " + frame.name, path);
  }
  return *fe;
}

template <typename E, std::size_t N>
E enum_attr(const Element& el, const char* name, const std::array<E, N>& values) {
  const std::string text = el.attr(name);
  for (E v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::schema_violation, el.path + ": invalid " + name + " '" + text + "'", el.path);
}

void check_unique(std::set<std::int64_t>& seen, std::int64_t id, const std::string& path) {
  if (!seen.insert(id).second) throw Error(ErrorCode::validation_failed, path + ": duplicate id", path);
}

}  // namespace

std::string export_document(const Document& doc, const Lexicon& lex) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  Tag root(out, 0, kRoot);
  root.attr("version", kVersion)
      .attr("id", doc.id)
      .attr("corpus", doc.corpus)
      .attr("kind", to_string(doc.kind))
      .attr("media", doc.media_ref)
      .attr("width", doc.width())
      .attr("height", doc.height())
      .attr("fps", doc.fps)
      .attr("frameCount", doc.tracks.bounds().frame_count);

  const bool empty = doc.sentences.empty() && doc.chains.empty() && doc.tracks.tracks().empty() &&
                     doc.text_sets.empty() && doc.image_annotations.empty() && doc.correlations.empty();
  if (empty) {
    root.close();
    return out;
  }
  root.open();

  std::vector<const Sentence*> sentences;
  for (const auto& s : doc.sentences) sentences.push_back(&s);
  std::sort(sentences.begin(), sentences.end(), [](const Sentence* a, const Sentence* b) {
    return std::tie(a->start_ms, a->id) < std::tie(b->start_ms, b->id);
  });
  for (const Sentence* s : sentences) {
    Tag(out, 1, "sentence").attr("id", s->id).attr("startMs", s->start_ms).attr("endMs", s->end_ms).attr("text", s->text).close();
  }

  auto by_id = [](auto items, auto key) {
    std::sort(items.begin(), items.end(), [&](const auto* a, const auto* b) { return key(*a) < key(*b); });
    return items;
  };

  std::vector<const EntityChain*> chains;
  for (const auto& c : doc.chains) chains.push_back(&c);
  for (const EntityChain* c : by_id(chains, [](const EntityChain& x) { return x.entity_id; })) {
    Tag tag(out, 1, "entity");
    tag.attr("id", c->entity_id).attr("type", c->entity_type);
    if (c->phrase_spans.empty() && c->boxes.empty()) {
      tag.close();
      continue;
    }
    tag.open();
    for (const auto& p : c->phrase_spans) {
      Tag(out, 2, "phrase")
          .attr("sentenceIndex", static_cast<std::int64_t>(p.sentence_index))
          .attr("start", static_cast<std::int64_t>(p.span.start))
          .attr("end", static_cast<std::int64_t>(p.span.end))
          .close();
    }
    for (const auto& b : c->boxes) {
      Tag t(out, 2, "box");
      box_attrs(t, b.box).attr("class", b.class_label).close();
    }
    end_tag(out, 1, "entity");
  }

  for (const auto& track : doc.tracks.tracks()) {  // kept ordered by id
    Tag tag(out, 1, "object");
    tag.attr("id", track.object_id).attr("origin", to_string(track.origin)).attr("state", to_string(track.state));
    if (track.detection_ref) tag.attr("detectionRef", *track.detection_ref);
    tag.open();
    for (const auto& seg : track.segments) {
      Tag(out, 2, "segment").attr("start", seg.start_frame).attr("end", seg.end_frame).open();
      for (const auto& [frame, box] : seg.keyframes) {
        Tag k(out, 3, "keyframe");
        k.attr("frame", frame);
        box_attrs(k, box).close();
      }
      end_tag(out, 2, "segment");
    }
    end_tag(out, 1, "object");
  }

  std::vector<const TextAnnotationSet*> sets;
  for (const auto& s : doc.text_sets) sets.push_back(&s);
  for (const TextAnnotationSet* s : by_id(sets, [](const TextAnnotationSet& x) { return x.id; })) {
    Tag(out, 1, "annotationSet")
        .attr("id", s->id)
        .attr("sentenceRef", s->sentence_ref)
        .attr("targetStart", static_cast<std::int64_t>(s->target.start))
        .attr("targetEnd", static_cast<std::int64_t>(s->target.end))
        .attr("frame", frame_name(lex, s->frame))
        .open();
    for (Layer layer : {Layer::fe, Layer::gf, Layer::pt}) {
      Tag l(out, 2, "layer");
      l.attr("name", to_string(layer));
      const auto& labels = s->layer(layer);
      if (labels.empty()) {
        l.close();
        continue;
      }
      l.open();
      for (const auto& label : labels) {
        Tag(out, 3, "label")
            .attr("start", static_cast<std::int64_t>(label.span.start))
            .attr("end", static_cast<std::int64_t>(label.span.end))
            .attr("name", label.label)
            .close();
      }
      end_tag(out, 2, "layer");
    }
    for (const auto& ni : s->ni_entries) Tag(out, 2, "ni").attr("fe", fe_name(lex, ni.fe)).attr("type", ni.type).close();
    end_tag(out, 1, "annotationSet");
  }

  std::vector<const ImageAnnotation*> annotations;
  for (const auto& a : doc.image_annotations) annotations.push_back(&a);
  for (const ImageAnnotation* a : by_id(annotations, [](const ImageAnnotation& x) { return x.id; })) {
    Tag t(out, 1, "objectAnnotation");
    t.attr("id", a->id).attr("objectRef", a->target.id).attr("frame", frame_name(lex, a->frame)).attr("fe", fe_name(lex, a->fe));
    if (a->cv_name) t.attr("cvLU", raw(*a->cv_name));
    t.attr("provenance", to_string(a->provenance)).close();
  }

  std::vector<const Correlation*> correlations;
  for (const auto& c : doc.correlations) correlations.push_back(&c);
  for (const Correlation* c : by_id(correlations, [](const Correlation& x) { return x.id; })) {
    Tag(out, 1, "correlation")
        .attr("id", c->id)
        .attr("objectRef", c->target.id)
        .attr("sentenceRef", c->sentence_ref)
        .attr("start", static_cast<std::int64_t>(c->span.start))
        .attr("end", static_cast<std::int64_t>(c->span.end))
        .close();
  }

  end_tag(out, 0, kRoot);
  return out;
}

Document import_document(std::string_view xml, const Lexicon& lex) {
  if (xml.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::parse_error, "malformed XML: empty input");
  }
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed XML: ") + e.what());
  }

  const Element top{tree, ""};
  auto roots = top.children({kRoot});
  if (roots.size() != 1) throw Error(ErrorCode::schema_violation, "expected one <charonCorpusDoc> root", kRoot);
  const Element root{*roots.front().second, kRoot};
  if (root.attr("version") != kVersion) {
    throw Error(ErrorCode::schema_violation, "unsupported version '" + root.attr("version") + "'", kRoot);
  }

  Document doc;
  doc.id = root.attr("id");
  doc.corpus = root.attr("corpus");
  if (doc.id.empty()) throw Error(ErrorCode::schema_violation, "empty document id", kRoot);
  doc.kind = enum_attr(root, "kind", std::array{DocumentKind::static_image, DocumentKind::video});
  doc.media_ref = root.attr("media");
  doc.fps = static_cast<int>(root.int_attr("fps"));
  const VideoBounds bounds{static_cast<int>(root.int_attr("width")), static_cast<int>(root.int_attr("height")),
                           root.int_attr("frameCount")};
  if (doc.fps < 1 || doc.fps > 1000 || bounds.width < 0 || bounds.height < 0 || bounds.frame_count < 0) {
    throw Error(ErrorCode::schema_violation, "invalid media dimensions", kRoot);
  }
  doc.tracks = TrackBook(bounds);

  const TargetKind target_kind = doc.kind == DocumentKind::static_image ? TargetKind::entity : TargetKind::object;
  std::set<std::int64_t> sentence_ids, entity_ids, object_ids, as_ids, annotation_ids, correlation_ids;
  std::int64_t max_sentence = 0, max_as = 0, max_annotation = 0, max_correlation = 0;

  for (const auto& [name, node] :
       root.children({"sentence", "entity", "object", "annotationSet", "objectAnnotation", "correlation"})) {
    const Element probe{*node, std::string(kRoot) + "/" + name};
    const std::string id_text = probe.optional_attr("id").value_or("?");
    const Element el{*node, probe.path + "[id=" + id_text + "]"};
    const std::int64_t id = el.int_attr("id");

    if (name == "sentence") {
      el.children({});
      check_unique(sentence_ids, id, el.path);
      const std::int64_t start = el.int_attr("startMs"), end = el.int_attr("endMs");
      if (start < 0 || end < start) throw Error(ErrorCode::validation_failed, el.path + ": invalid time span", el.path);
      validated(el.path, [&] { (void)utf8_length(el.attr("text")); });
      doc.sentences.push_back(Sentence{id, el.attr("text"), start, end});
      max_sentence = std::max(max_sentence, id);
    } else if (name == "entity") {
      if (doc.kind != DocumentKind::static_image) {
        throw Error(ErrorCode::validation_failed, el.path + ": entities belong to static documents", el.path);
      }
      check_unique(entity_ids, id, el.path);
      EntityChain chain;
      chain.entity_id = id;
      chain.entity_type = el.attr("type");
      std::size_t index = 0;
      for (const auto& [child_name, child] : el.children({"phrase", "box"})) {
        const Element c{*child, el.path + "/" + child_name + "[" + std::to_string(++index) + "]"};
        if (child_name == "phrase") {
          const Span span{c.offset_attr("start"), c.offset_attr("end")};
          const std::size_t sentence_index = c.offset_attr("sentenceIndex");
          if (sentence_index >= doc.sentences.size() || !span.within(utf8_length(doc.sentences[sentence_index].text))) {
            throw Error(ErrorCode::validation_failed, c.path + ": phrase span outside its sentence", c.path);
          }
          chain.phrase_spans.push_back(PhraseSpan{sentence_index, span});
        } else {
          const Box box{static_cast<int>(c.int_attr("xmin")), static_cast<int>(c.int_attr("ymin")),
                        static_cast<int>(c.int_attr("xmax")), static_cast<int>(c.int_attr("ymax"))};
          if (!box.fits(bounds.width, bounds.height)) {
            throw Error(ErrorCode::validation_failed, c.path + ": box " + to_string(box) + " outside the image", c.path);
          }
          chain.boxes.push_back(BoundingBox{box, doc.media_ref, id, c.attr("class")});
        }
      }
      doc.chains.push_back(std::move(chain));
    } else if (name == "object") {
      if (doc.kind != DocumentKind::video) {
        throw Error(ErrorCode::validation_failed, el.path + ": objects belong to video documents", el.path);
      }
      check_unique(object_ids, id, el.path);
      ObjectTrack track;
      track.object_id = id;
      track.origin = enum_attr(el, "origin", std::array{TrackOrigin::detector, TrackOrigin::human});
      track.state = enum_attr(el, "state", std::array{TrackState::tracking, TrackState::paused, TrackState::ended});
      if (el.optional_attr("detectionRef")) track.detection_ref = el.int_attr("detectionRef");
      std::size_t seg_index = 0;
      for (const auto& [seg_name, seg_node] : el.children({"segment"})) {
        const Element s{*seg_node, el.path + "/segment[" + std::to_string(++seg_index) + "]"};
        TrackSegment seg;
        seg.start_frame = s.int_attr("start");
        seg.end_frame = s.int_attr("end");
        std::size_t key_index = 0;
        for (const auto& [key_name, key_node] : s.children({"keyframe"})) {
          const Element k{*key_node, s.path + "/keyframe[" + std::to_string(++key_index) + "]"};
          const Box box{static_cast<int>(k.int_attr("xmin")), static_cast<int>(k.int_attr("ymin")),
                        static_cast<int>(k.int_attr("xmax")), static_cast<int>(k.int_attr("ymax"))};
          if (!box.fits(bounds.width, bounds.height)) {
            throw Error(ErrorCode::validation_failed, k.path + ": box " + to_string(box) + " outside the video", k.path);
          }
          if (!seg.keyframes.emplace(k.int_attr("frame"), box).second) {
            throw Error(ErrorCode::validation_failed, k.path + ": duplicate keyframe", k.path);
          }
        }
        track.segments.push_back(std::move(seg));
      }
      if (!track_invariants_hold(track)) {
        throw Error(ErrorCode::validation_failed, el.path + ": segments or keyframes are inconsistent", el.path);
      }
      doc.tracks.adopt(std::move(track));
    } else if (name == "annotationSet") {
      check_unique(as_ids, id, el.path);
      const Frame& frame = frame_by_name(lex, el.attr("frame"), el.path);
      const Span target{el.offset_attr("targetStart"), el.offset_attr("targetEnd")};
      const std::int64_t sentence_ref = el.int_attr("sentenceRef");
      doc.next_as_id = id;
      validated(el.path, [&] { create_text_as(doc, lex, sentence_ref, target, frame.id); });
      max_as = std::max(max_as, id);
      std::size_t child_index = 0;
      std::set<std::string> layers_seen;
      for (const auto& [child_name, child] : el.children({"layer", "ni"})) {
        const Element c{*child, el.path + "/" + child_name + "[" + std::to_string(++child_index) + "]"};
        if (child_name == "layer") {
          const std::string layer_name = c.attr("name");
          const auto layer = parse_layer(layer_name);
          if (!layer || !layers_seen.insert(layer_name).second) {
            throw Error(ErrorCode::schema_violation, c.path + ": invalid layer '" + layer_name + "'", c.path);
          }
          std::size_t label_index = 0;
          for (const auto& [label_name, label_node] : c.children({"label"})) {
            const Element l{*label_node, c.path + "/label[" + std::to_string(++label_index) + "]"};
            const Span span{l.offset_attr("start"), l.offset_attr("end")};
            const std::string label = l.attr("name");
            validated(l.path, [&] { set_layer_label(doc, lex, id, *layer, span, label); });
          }
        } else {
          c.children({});
          const FrameElement& fe = fe_by_name(lex, frame, c.attr("fe"), c.path);
          const std::string type = c.attr("type");
          validated(c.path, [&] { mark_ni(doc, lex, id, fe.id, type); });
        }
      }
    } else if (name == "objectAnnotation") {
      el.children({});
      check_unique(annotation_ids, id, el.path);
      const Frame& frame = frame_by_name(lex, el.attr("frame"), el.path);
      const FrameElement& fe = fe_by_name(lex, frame, el.attr("fe"), el.path);
      std::optional<LuId> cv;
      if (el.optional_attr("cvLU")) cv = LuId{el.int_attr("cvLU")};
      const auto provenance =
          enum_attr(el, "provenance", std::array{AnnotationProvenance::automatic, AnnotationProvenance::human});
      doc.next_image_annotation_id = id;
      validated(el.path, [&] {
        annotate_image_target(doc, lex, TargetRef{target_kind, el.int_attr("objectRef")}, frame.id, fe.id, cv, provenance);
      });
      max_annotation = std::max(max_annotation, id);
    } else {
      el.children({});
      check_unique(correlation_ids, id, el.path);
      const Span span{el.offset_attr("start"), el.offset_attr("end")};
      doc.next_correlation_id = id;
      validated(el.path, [&] {
        correlate(doc, TargetRef{target_kind, el.int_attr("objectRef")}, el.int_attr("sentenceRef"), span);
      });
      max_correlation = std::max(max_correlation, id);
    }
  }

  std::sort(doc.sentences.begin(), doc.sentences.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.chains.begin(), doc.chains.end(), [](const auto& a, const auto& b) { return a.entity_id < b.entity_id; });
  std::sort(doc.text_sets.begin(), doc.text_sets.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.image_annotations.begin(), doc.image_annotations.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(doc.correlations.begin(), doc.correlations.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  doc.next_sentence_id = max_sentence + 1;
  doc.next_as_id = max_as + 1;
  doc.next_image_annotation_id = max_annotation + 1;
  doc.next_correlation_id = max_correlation + 1;
  return doc;
}

}  // namespace charonette
