#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "charonette/lexicon.hpp"
#include "charonette/text.hpp"

namespace charonette {

struct Document;

enum class Layer { fe, gf, pt };
std::string_view to_string(Layer layer);
std::optional<Layer> parse_layer(std::string_view name);  // "FE", "GF", "PT"

struct LayerLabel {
  Span span;
  std::string label;

  friend bool operator==(const LayerLabel&, const LayerLabel&) = default;
};

struct NiEntry {
  FeId fe{};
  std::string type;

  friend bool operator==(const NiEntry&, const NiEntry&) = default;
};

// Full-text annotation of one target word: FE, GF and PT layers plus the
// null-instantiation column. Labels within a layer are kept sorted by span.
struct TextAnnotationSet {
  std::int64_t id = 0;
  std::int64_t sentence_ref = 0;
  Span target;
  FrameId frame{};
  std::array<std::vector<LayerLabel>, 3> layers;
  std::vector<NiEntry> ni_entries;

  const std::vector<LayerLabel>& layer(Layer l) const { return layers[static_cast<std::size_t>(l)]; }
  std::vector<LayerLabel>& layer(Layer l) { return layers[static_cast<std::size_t>(l)]; }

  friend bool operator==(const TextAnnotationSet&, const TextAnnotationSet&) = default;
};

// Entity chains (picture-caption documents) and object tracks (video
// documents) are the two kinds of visual target.
enum class TargetKind { entity, object };
std::string_view to_string(TargetKind kind);

struct TargetRef {
  TargetKind kind = TargetKind::entity;
  std::int64_t id = 0;

  friend bool operator==(const TargetRef&, const TargetRef&) = default;
  friend auto operator<=>(const TargetRef&, const TargetRef&) = default;
};

enum class AnnotationProvenance { automatic, human };
std::string_view to_string(AnnotationProvenance p);

// Frame + FE assignment for a visual target, optionally with a CV Name: the
// noun LU naming what a vision model would recognise.
struct ImageAnnotation {
  std::int64_t id = 0;
  TargetRef target;
  FrameId frame{};
  FeId fe{};
  std::optional<LuId> cv_name;
  AnnotationProvenance provenance = AnnotationProvenance::human;

  friend bool operator==(const ImageAnnotation&, const ImageAnnotation&) = default;
};

struct Correlation {
  std::int64_t id = 0;
  TargetRef target;
  std::int64_t sentence_ref = 0;
  Span span;

  friend bool operator==(const Correlation&, const Correlation&) = default;
};

// Mutations validate against the lexicon and the document and either apply
// fully or throw Error leaving the document untouched.

const TextAnnotationSet& create_text_as(Document& doc, const Lexicon& lex, std::int64_t sentence_ref, Span target,
                                        FrameId frame);

// FE labels name an FE of the set's frame; GF and PT labels come from the
// lexicon vocabularies. Throws span_overlap, invalid_label, bad_span,
// fe_already_labeled (FE marked NI), unknown_annotation.
const TextAnnotationSet& set_layer_label(Document& doc, const Lexicon& lex, std::int64_t as_id, Layer layer,
                                         Span span, std::string_view label);
const TextAnnotationSet& remove_layer_label(Document& doc, std::int64_t as_id, Layer layer, Span span);

// Throws fe_not_core, fe_already_labeled, unknown_ni_type, fe_not_in_frame.
const TextAnnotationSet& mark_ni(Document& doc, const Lexicon& lex, std::int64_t as_id, FeId fe,
                                 std::string_view ni_type);

// Throws unknown_target, unknown_frame, fe_not_in_frame, unknown_lu, cv_name_not_noun.
const ImageAnnotation& annotate_image_target(Document& doc, const Lexicon& lex, TargetRef target, FrameId frame,
                                             FeId fe, std::optional<LuId> cv_name,
                                             AnnotationProvenance provenance = AnnotationProvenance::human);

// Throws unknown_target, unknown_sentence, bad_span.
const Correlation& correlate(Document& doc, TargetRef target, std::int64_t sentence_ref, Span span);

// Removes a chain or track together with its annotations and correlations.
// Returns the ids of the removed image annotations and correlations.
struct CascadeResult {
  std::vector<std::int64_t> image_annotations;
  std::vector<std::int64_t> correlations;
};
CascadeResult remove_target(Document& doc, TargetRef target);

// Sweep over every stored annotation; returns one message per violation.
std::vector<std::string> validate_annotations(const Document& doc, const Lexicon& lex);

}  // namespace charonette
