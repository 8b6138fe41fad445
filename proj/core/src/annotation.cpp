#include "charonette/annotation.hpp"

#include <algorithm>

#include "charonette/document.hpp"
#include "charonette/error.hpp"

namespace charonette {

namespace {

std::string span_text(Span s) { return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")"; }

std::string target_text(const TargetRef& t) { return std::string(to_string(t.kind)) + " " + std::to_string(t.id); }

TextAnnotationSet& find_set(Document& doc, std::int64_t as_id) {
  for (auto& set : doc.text_sets) {
    if (set.id == as_id) return set;
  }
  throw Error(ErrorCode::unknown_annotation, "unknown annotation set " + std::to_string(as_id));
}

const Sentence& require_sentence(const Document& doc, std::int64_t sentence_ref) {
  const Sentence* s = doc.sentence(sentence_ref);
  if (s == nullptr) throw Error(ErrorCode::unknown_sentence, "unknown sentence " + std::to_string(sentence_ref));
  return *s;
}

void require_span(const Sentence& sentence, Span span) {
  const std::size_t length = utf8_length(sentence.text);
  if (!span.within(length)) {
    throw Error(ErrorCode::bad_span, "span " + span_text(span) + " is not inside sentence " +
                                         std::to_string(sentence.id) + " of length " + std::to_string(length));
  }
}

const Frame& require_frame(const Lexicon& lex, FrameId frame) {
  const Frame* f = lex.frame(frame);
  if (f == nullptr) throw Error(ErrorCode::unknown_frame, "unknown frame id " + std::to_string(raw(frame)));
  return *f;
}

bool fe_labeled(const TextAnnotationSet& set, const Lexicon& lex, FeId fe) {
  const FrameElement* element = lex.fe(fe);
  if (element == nullptr) return false;
  return std::any_of(set.layer(Layer::fe).begin(), set.layer(Layer::fe).end(),
                     [&](const LayerLabel& l) { return l.label == element->name; });
}

bool fe_is_ni(const TextAnnotationSet& set, FeId fe) {
  return std::any_of(set.ni_entries.begin(), set.ni_entries.end(), [&](const NiEntry& n) { return n.fe == fe; });
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::fe: return "FE";
    case Layer::gf: return "GF";
    case Layer::pt: return "PT";
  }
  return "FE";
}

std::optional<Layer> parse_layer(std::string_view name) {
  if (name == "FE") return Layer::fe;
  if (name == "GF") return Layer::gf;
  if (name == "PT") return Layer::pt;
  return std::nullopt;
}

std::string_view to_string(TargetKind kind) { return kind == TargetKind::entity ? "entity" : "object"; }

std::string_view to_string(AnnotationProvenance p) { return p == AnnotationProvenance::automatic ? "auto" : "human"; }

const TextAnnotationSet& create_text_as(Document& doc, const Lexicon& lex, std::int64_t sentence_ref, Span target,
                                        FrameId frame) {
  require_span(require_sentence(doc, sentence_ref), target);
  require_frame(lex, frame);
  TextAnnotationSet set;
  set.id = doc.next_as_id++;
  set.sentence_ref = sentence_ref;
  set.target = target;
  set.frame = frame;
  doc.text_sets.push_back(std::move(set));
  return doc.text_sets.back();
}

const TextAnnotationSet& set_layer_label(Document& doc, const Lexicon& lex, std::int64_t as_id, Layer layer,
                                         Span span, std::string_view label) {
  TextAnnotationSet& set = find_set(doc, as_id);
  require_span(require_sentence(doc, set.sentence_ref), span);
  const Frame& frame = require_frame(lex, set.frame);

  switch (layer) {
    case Layer::fe: {
      const FrameElement* fe = lex.fe_by_name(set.frame, label);
      if (fe == nullptr) {
        throw Error(ErrorCode::invalid_label,
                    "'" + std::string(label) + "' is not a frame element of " + frame.name, "FE");
      }
      if (fe_is_ni(set, fe->id)) {
        throw Error(ErrorCode::fe_already_labeled,
                    "frame element " + fe->name + " is marked as null instantiation in annotation set " +
                        std::to_string(as_id));
      }
      break;
    }
    case Layer::gf:
      if (!lex.is_gf(label)) throw Error(ErrorCode::invalid_label, "'" + std::string(label) + "' is not a GF label", "GF");
      break;
    case Layer::pt:
      if (!lex.is_pt(label)) throw Error(ErrorCode::invalid_label, "'" + std::string(label) + "' is not a PT label", "PT");
      break;
  }

  auto& labels = set.layer(layer);
  for (const auto& existing : labels) {
    if (existing.span.overlaps(span)) {
      throw Error(ErrorCode::span_overlap, "span " + span_text(span) + " overlaps " + existing.label + " at " +
                                               span_text(existing.span) + " in layer " +
                                               std::string(to_string(layer)));
    }
  }
  auto at = std::lower_bound(labels.begin(), labels.end(), span,
                             [](const LayerLabel& l, const Span& s) { return l.span < s; });
  labels.insert(at, LayerLabel{span, std::string(label)});
  return set;
}

const TextAnnotationSet& remove_layer_label(Document& doc, std::int64_t as_id, Layer layer, Span span) {
  TextAnnotationSet& set = find_set(doc, as_id);
  auto& labels = set.layer(layer);
  const auto before = labels.size();
  std::erase_if(labels, [&](const LayerLabel& l) { return l.span == span; });
  if (labels.size() == before) {
    throw Error(ErrorCode::not_found, "no " + std::string(to_string(layer)) + " label at " + span_text(span));
  }
  return set;
}

const TextAnnotationSet& mark_ni(Document& doc, const Lexicon& lex, std::int64_t as_id, FeId fe,
                                 std::string_view ni_type) {
  TextAnnotationSet& set = find_set(doc, as_id);
  const Frame& frame = require_frame(lex, set.frame);
  const FrameElement* element = lex.fe(fe);
  if (element == nullptr || element->frame_id != set.frame) {
    throw Error(ErrorCode::fe_not_in_frame,
                "frame element " + std::to_string(raw(fe)) + " does not belong to frame " + frame.name);
  }
  if (element->coreness != Coreness::core) {
    throw Error(ErrorCode::fe_not_core, "frame element " + element->name + " is not core in " + frame.name);
  }
  if (fe_labeled(set, lex, fe)) {
    throw Error(ErrorCode::fe_already_labeled, "frame element " + element->name +
                                                   " is already labeled in the FE layer of annotation set " +
                                                   std::to_string(as_id));
  }
  if (!lex.is_ni_type(ni_type)) {
    throw Error(ErrorCode::unknown_ni_type, "'" + std::string(ni_type) + "' is not a null-instantiation type");
  }
  for (auto& entry : set.ni_entries) {
    if (entry.fe == fe) {
      entry.type = std::string(ni_type);
      return set;
    }
  }
  set.ni_entries.push_back(NiEntry{fe, std::string(ni_type)});
  return set;
}

const ImageAnnotation& annotate_image_target(Document& doc, const Lexicon& lex, TargetRef target, FrameId frame,
                                             FeId fe, std::optional<LuId> cv_name,
                                             AnnotationProvenance provenance) {
  if (!doc.has_target(target)) throw Error(ErrorCode::unknown_target, "unknown " + target_text(target));
  const Frame& f = require_frame(lex, frame);
  const FrameElement* element = lex.fe(fe);
  if (element == nullptr || element->frame_id != frame) {
    const std::string name = element == nullptr ? std::to_string(raw(fe)) : element->name;
    throw Error(ErrorCode::fe_not_in_frame, "frame element " + name + " does not belong to frame " + f.name, "fe");
  }
  if (cv_name) {
    const LexicalUnit* lu = lex.lu(*cv_name);
    if (lu == nullptr) throw Error(ErrorCode::unknown_lu, "unknown lexical unit " + std::to_string(raw(*cv_name)));
    if (lu->pos != PartOfSpeech::n) {
      throw Error(ErrorCode::cv_name_not_noun, "CV Name " + lu->display_name() + " is not a noun", "cv_name");
    }
  }
  doc.image_annotations.push_back(
      ImageAnnotation{doc.next_image_annotation_id++, target, frame, fe, cv_name, provenance});
  return doc.image_annotations.back();
}

const Correlation& correlate(Document& doc, TargetRef target, std::int64_t sentence_ref, Span span) {
  if (!doc.has_target(target)) throw Error(ErrorCode::unknown_target, "unknown " + target_text(target));
  require_span(require_sentence(doc, sentence_ref), span);
  doc.correlations.push_back(Correlation{doc.next_correlation_id++, target, sentence_ref, span});
  return doc.correlations.back();
}

CascadeResult remove_target(Document& doc, TargetRef target) {
  if (!doc.has_target(target)) throw Error(ErrorCode::unknown_target, "unknown " + target_text(target));
  if (target.kind == TargetKind::entity) {
    std::erase_if(doc.chains, [&](const EntityChain& c) { return c.entity_id == target.id; });
  } else {
    doc.tracks.remove(target.id);
  }
  CascadeResult removed;
  for (const auto& a : doc.image_annotations) {
    if (a.target == target) removed.image_annotations.push_back(a.id);
  }
  for (const auto& c : doc.correlations) {
    if (c.target == target) removed.correlations.push_back(c.id);
  }
  std::erase_if(doc.image_annotations, [&](const ImageAnnotation& a) { return a.target == target; });
  std::erase_if(doc.correlations, [&](const Correlation& c) { return c.target == target; });
  return removed;
}

std::vector<std::string> validate_annotations(const Document& doc, const Lexicon& lex) {
  std::vector<std::string> problems;
  auto check_span = [&](const std::string& where, std::int64_t sentence_ref, Span span) {
    const Sentence* s = doc.sentence(sentence_ref);
    if (s == nullptr) {
      problems.push_back(where + ": unknown sentence " + std::to_string(sentence_ref));
    } else if (!span.within(utf8_length(s->text))) {
      problems.push_back(where + ": span " + span_text(span) + " outside sentence " + std::to_string(sentence_ref));
    }
  };

  for (const auto& set : doc.text_sets) {
    const std::string where = "annotationSet " + std::to_string(set.id);
    check_span(where, set.sentence_ref, set.target);
    const Frame* frame = lex.frame(set.frame);
    if (frame == nullptr) {
      problems.push_back(where + ": unknown frame " + std::to_string(raw(set.frame)));
      continue;
    }
    for (Layer layer : {Layer::fe, Layer::gf, Layer::pt}) {
      const auto& labels = set.layer(layer);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& l = labels[i];
        check_span(where, set.sentence_ref, l.span);
        const bool valid = layer == Layer::fe   ? lex.fe_by_name(set.frame, l.label) != nullptr
                           : layer == Layer::gf ? lex.is_gf(l.label)
                                                : lex.is_pt(l.label);
        if (!valid) problems.push_back(where + ": invalid " + std::string(to_string(layer)) + " label " + l.label);
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
          if (l.span.overlaps(labels[j].span)) {
            problems.push_back(where + ": overlapping " + std::string(to_string(layer)) + " labels");
          }
        }
      }
    }
    for (const auto& ni : set.ni_entries) {
      const FrameElement* fe = lex.fe(ni.fe);
      if (fe == nullptr || fe->frame_id != set.frame || fe->coreness != Coreness::core) {
        problems.push_back(where + ": NI entry " + std::to_string(raw(ni.fe)) + " is not a core FE of " + frame->name);
      } else if (fe_labeled(set, lex, ni.fe)) {
        problems.push_back(where + ": " + fe->name + " is both labeled and null-instantiated");
      }
      if (!lex.is_ni_type(ni.type)) problems.push_back(where + ": unknown NI type " + ni.type);
    }
  }

  for (const auto& a : doc.image_annotations) {
    const std::string where = "objectAnnotation " + std::to_string(a.id);
    if (!doc.has_target(a.target)) problems.push_back(where + ": dangling " + target_text(a.target));
    const FrameElement* fe = lex.fe(a.fe);
    if (lex.frame(a.frame) == nullptr || fe == nullptr || fe->frame_id != a.frame) {
      problems.push_back(where + ": FE " + std::to_string(raw(a.fe)) + " not in frame " + std::to_string(raw(a.frame)));
    }
    if (a.cv_name) {
      const LexicalUnit* lu = lex.lu(*a.cv_name);
      if (lu == nullptr || lu->pos != PartOfSpeech::n) problems.push_back(where + ": CV Name is not a noun LU");
    }
  }

  for (const auto& c : doc.correlations) {
    const std::string where = "correlation " + std::to_string(c.id);
    if (!doc.has_target(c.target)) problems.push_back(where + ": dangling " + target_text(c.target));
    check_span(where, c.sentence_ref, c.span);
  }
  return problems;
}

}  // namespace charonette
