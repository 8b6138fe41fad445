#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "charonette/geometry.hpp"
#include "charonette/text.hpp"

namespace charonette {

struct ImageEntry {
  std::string file_name;  // relative to images/, e.g. "girl.jpg"
  int width = 0;
  int height = 0;
  std::string bytes;  // untouched JPEG payload

  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct CaptionLine {
  std::string image_ref;
  int index = 0;  // caption number within its image
  std::string raw;  // with chain markup

  friend bool operator==(const CaptionLine&, const CaptionLine&) = default;
};

struct BoundingBox {
  Box box;
  std::string image_ref;
  std::int64_t entity_id = 0;
  std::string class_label;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Picture-caption corpus as shipped in a ZIP bundle:
//   images/*.jpg
//   sentences.txt  one caption per line: "<image>#<n>\t<caption>"
//   boxes.xml      <boxes><annotation><filename/><object><name/>...<bndbox/></object></annotation></boxes>
// Images are sorted by file name, boxes are grouped by image in that order.
struct CorpusBundle {
  std::string name;
  std::vector<ImageEntry> images;
  std::vector<CaptionLine> sentences_raw;
  std::vector<BoundingBox> boxes_raw;

  const ImageEntry* image(std::string_view file_name) const;

  friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

// Throws Error: missing_bundle_part ("sentences file not found", ...),
// unreadable_image, malformed_box, dangling_reference, parse_error.
CorpusBundle open_bundle(std::string_view zip_bytes, std::string name = {});

// Inverse of open_bundle for canonical bundles. Box coordinates are written
// back in the inclusive convention of the source XML.
std::string write_bundle(const CorpusBundle& bundle);

struct EntityMention {
  std::int64_t entity_id = 0;
  std::string entity_type;
  Span span;  // over the plain sentence
  std::string phrase;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

struct ParsedCaption {
  std::string sentence;
  std::vector<EntityMention> mentions;
};

// Strips "[/EN#<id>/<type> <phrase>]" chain markup. Markup may not nest.
// Throws Error: unbalanced_markup, nested_markup, invalid_entity_id.
ParsedCaption parse_caption_chains(std::string_view raw_caption);

enum class ChainLinkage { linked, phrase_only, box_only };
std::string_view to_string(ChainLinkage linkage);

struct PhraseSpan {
  std::size_t sentence_index = 0;
  Span span;

  friend bool operator==(const PhraseSpan&, const PhraseSpan&) = default;
};

struct EntityChain {
  std::int64_t entity_id = 0;
  std::string entity_type;
  std::vector<PhraseSpan> phrase_spans;
  std::vector<BoundingBox> boxes;

  ChainLinkage linkage() const;

  friend bool operator==(const EntityChain&, const EntityChain&) = default;
};

struct CorpusDocument {
  std::string doc_id;
  std::string image_ref;
  int image_width = 0;
  int image_height = 0;
  std::string sentence;
  std::vector<EntityChain> chains;  // ordered by entity id
  std::string source_corpus;
};

struct LinkResult {
  std::vector<CorpusDocument> documents;
  // Boxes on images that have no caption, so no document can hold them.
  std::vector<BoundingBox> orphan_boxes;
};

// One document per (image, caption). Chains join caption mentions and image
// boxes by entity id; partial chains are kept and reported via linkage().
LinkResult link_entities(const CorpusBundle& bundle);

}  // namespace charonette
