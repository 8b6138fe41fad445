#include "charonette/static_ingest.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <set>
#include <sstream>

#include "charonette/error.hpp"
#include "charonette/image_header.hpp"
#include "charonette/xml_util.hpp"
#include "charonette/zip.hpp"

namespace charonette {

namespace {

namespace bpt = boost::property_tree;

constexpr std::string_view kChainOpen = "[/EN#";

bool has_jpeg_extension(std::string_view name) {
  const std::string lower = to_lower(name);
  return lower.ends_with(".jpg") || lower.ends_with(".jpeg");
}

// Bundles zipped from a folder usually carry that folder as a common prefix.
std::string bundle_prefix(const std::vector<ZipEntry>& entries) {
  for (const auto& e : entries) {
    if (e.name == "sentences.txt" || e.name == "boxes.xml" || e.name.starts_with("images/")) return "";
  }
  std::string prefix;
  for (const auto& e : entries) {
    const auto slash = e.name.find('/');
    if (slash == std::string::npos) return "";
    const std::string first = e.name.substr(0, slash + 1);
    if (prefix.empty()) {
      prefix = first;
    } else if (prefix != first) {
      return "";
    }
  }
  return prefix;
}

int parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) {
    throw Error(ErrorCode::malformed_box, what + " is not an integer: '" + text + "'");
  }
  return value;
}

std::string stem_of(std::string_view file_name) {
  std::string stem(file_name.substr(0, file_name.rfind('.')));
  for (char& c : stem) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return stem;
}

std::vector<BoundingBox> parse_boxes(std::string_view xml, const CorpusBundle& bundle) {
  bpt::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    bpt::read_xml(in, tree, bpt::xml_parser::trim_whitespace);
  } catch (const bpt::xml_parser_error& e) {
    throw Error(ErrorCode::parse_error, "boxes.xml line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::vector<const bpt::ptree*> annotations;
  if (auto root = tree.get_child_optional("boxes")) {
    for (const auto& [tag, child] : *root) {
      if (tag == "annotation") annotations.push_back(&child);
    }
  } else if (auto single = tree.get_child_optional("annotation")) {
    annotations.push_back(&*single);
  } else {
    throw Error(ErrorCode::malformed_box, "boxes.xml must have a <boxes> or <annotation> root");
  }

  std::vector<BoundingBox> boxes;
  for (const bpt::ptree* annotation : annotations) {
    const auto file = annotation->get_optional<std::string>("filename");
    if (!file) throw Error(ErrorCode::malformed_box, "<annotation> without <filename>");
    const std::string image_ref = trim(*file);
    const ImageEntry* image = bundle.image(image_ref);
    if (image == nullptr) {
      throw Error(ErrorCode::malformed_box, "box record references image '" + image_ref + "' not in bundle");
    }
    for (const auto& [tag, object] : *annotation) {
      if (tag != "object") continue;
      const auto bndbox = object.get_child_optional("bndbox");
      if (!bndbox) continue;  // scene / non-visual entities carry no box
      const std::string ctx = image_ref + " box";
      const int xmin = parse_int(bndbox->get<std::string>("xmin", ""), ctx + " xmin");
      const int ymin = parse_int(bndbox->get<std::string>("ymin", ""), ctx + " ymin");
      const int xmax = parse_int(bndbox->get<std::string>("xmax", ""), ctx + " xmax");
      const int ymax = parse_int(bndbox->get<std::string>("ymax", ""), ctx + " ymax");
      if (xmax <= xmin || ymax <= ymin) {
        throw Error(ErrorCode::malformed_box, ctx + " has xmax <= xmin or ymax <= ymin");
      }
      // Inclusive pixel indices in the source; stored half-open.
      const Box box{xmin, ymin, xmax + 1, ymax + 1};
      if (!box.fits(image->width, image->height)) {
        throw Error(ErrorCode::malformed_box, ctx + " " + to_string(box) + " exceeds image bounds " +
                                                  std::to_string(image->width) + "x" + std::to_string(image->height));
      }
      const std::string class_label = trim(object.get<std::string>("class", ""));
      bool any_name = false;
      for (const auto& [field, value] : object) {
        if (field != "name") continue;
        any_name = true;
        const std::string id_text = trim(value.data());
        std::int64_t id = 0;
        std::size_t used = 0;
        try {
          id = std::stoll(id_text, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != id_text.size()) {
          throw Error(ErrorCode::malformed_box, ctx + " has non-integer entity id '" + id_text + "'");
        }
        boxes.push_back(BoundingBox{box, image_ref, id, class_label});
      }
      if (!any_name) throw Error(ErrorCode::malformed_box, ctx + " has no <name> entity id");
    }
  }
  return boxes;
}

}  // namespace

const ImageEntry* CorpusBundle::image(std::string_view file_name) const {
  auto it = std::lower_bound(images.begin(), images.end(), file_name,
                             [](const ImageEntry& e, std::string_view n) { return e.file_name < n; });
  if (it != images.end() && it->file_name == file_name) return &*it;
  return nullptr;
}

CorpusBundle open_bundle(std::string_view zip_bytes, std::string name) {
  const std::vector<ZipEntry> entries = read_zip(zip_bytes);
  const std::string prefix = bundle_prefix(entries);

  CorpusBundle bundle;
  bundle.name = std::move(name);
  const ZipEntry* sentences = nullptr;
  const ZipEntry* boxes = nullptr;
  for (const auto& e : entries) {
    if (!e.name.starts_with(prefix)) continue;
    const std::string_view rel = std::string_view(e.name).substr(prefix.size());
    if (rel == "sentences.txt") {
      sentences = &e;
    } else if (rel == "boxes.xml") {
      boxes = &e;
    } else if (rel.starts_with("images/") && has_jpeg_extension(rel)) {
      std::string file_name(rel.substr(7));
      ImageSize size;
      try {
        size = jpeg_dimensions(e.data);
      } catch (const Error& err) {
        throw Error(ErrorCode::unreadable_image, "image '" + file_name + "': " + err.what());
      }
      bundle.images.push_back(ImageEntry{std::move(file_name), size.width, size.height, e.data});
    }
  }
  if (bundle.images.empty()) throw Error(ErrorCode::missing_bundle_part, "images folder not found");
  if (sentences == nullptr) throw Error(ErrorCode::missing_bundle_part, "sentences file not found");
  if (boxes == nullptr) throw Error(ErrorCode::missing_bundle_part, "boxes file not found");

  std::sort(bundle.images.begin(), bundle.images.end(),
            [](const ImageEntry& a, const ImageEntry& b) { return a.file_name < b.file_name; });

  std::map<std::string, int> per_image;
  std::set<std::pair<std::string, int>> seen;
  std::size_t line_no = 0;
  std::size_t positional = 0;
  std::istringstream lines(sentences->data);
  for (std::string line; std::getline(lines, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    CaptionLine caption;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      // No image reference: pair captions with images by position.
      if (positional >= bundle.images.size()) {
        throw Error(ErrorCode::dangling_reference,
                    "sentences.txt line " + std::to_string(line_no) + " has no image to pair with");
      }
      caption.image_ref = bundle.images[positional++].file_name;
      caption.index = per_image[caption.image_ref];
      caption.raw = line;
    } else {
      const std::string ref = line.substr(0, tab);
      caption.raw = line.substr(tab + 1);
      const auto hash = ref.rfind('#');
      caption.image_ref = hash == std::string::npos ? ref : ref.substr(0, hash);
      if (hash == std::string::npos) {
        caption.index = per_image[caption.image_ref];
      } else {
        try {
          caption.index = std::stoi(ref.substr(hash + 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::parse_error, "sentences.txt line " + std::to_string(line_no) +
                                                  ": caption number is not an integer in '" + ref + "'");
        }
      }
      if (bundle.image(caption.image_ref) == nullptr) {
        throw Error(ErrorCode::dangling_reference, "sentences.txt line " + std::to_string(line_no) +
                                                       " references image '" + caption.image_ref + "' not in bundle");
      }
    }
    if (!seen.emplace(caption.image_ref, caption.index).second) {
      throw Error(ErrorCode::parse_error, "sentences.txt line " + std::to_string(line_no) + ": duplicate caption " +
                                              caption.image_ref + "#" + std::to_string(caption.index));
    }
    per_image[caption.image_ref] = std::max(per_image[caption.image_ref], caption.index + 1);
    try {
      parse_caption_chains(caption.raw);
    } catch (const Error& err) {
      throw Error(err.code(), "sentences.txt line " + std::to_string(line_no) + ": " + err.what());
    }
    bundle.sentences_raw.push_back(std::move(caption));
  }

  bundle.boxes_raw = parse_boxes(boxes->data, bundle);
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < bundle.images.size(); ++i) order[bundle.images[i].file_name] = i;
  std::stable_sort(bundle.boxes_raw.begin(), bundle.boxes_raw.end(),
                   [&](const BoundingBox& a, const BoundingBox& b) { return order[a.image_ref] < order[b.image_ref]; });
  return bundle;
}

std::string write_bundle(const CorpusBundle& bundle) {
  std::vector<ZipEntry> entries;
  for (const auto& image : bundle.images) entries.push_back({"images/" + image.file_name, image.bytes});

  std::string sentences;
  for (const auto& caption : bundle.sentences_raw) {
    sentences += caption.image_ref + "#" + std::to_string(caption.index) + "\t" + caption.raw + "\n";
  }
  entries.push_back({"sentences.txt", std::move(sentences)});

  std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<boxes>\n";
  for (const auto& image : bundle.images) {
    xml += "  <annotation>\n    <filename>" + xml_escape(image.file_name) + "</filename>\n";
    xml += "    <size><width>" + std::to_string(image.width) + "</width><height>" + std::to_string(image.height) +
           "</height><depth>3</depth></size>\n";
    for (const auto& b : bundle.boxes_raw) {
      if (b.image_ref != image.file_name) continue;
      xml += "    <object>\n      <name>" + std::to_string(b.entity_id) + "</name>\n";
      if (!b.class_label.empty()) xml += "      <class>" + xml_escape(b.class_label) + "</class>\n";
      xml += "      <bndbox><xmin>" + std::to_string(b.box.xmin) + "</xmin><ymin>" + std::to_string(b.box.ymin) +
             "</ymin><xmax>" + std::to_string(b.box.xmax - 1) + "</xmax><ymax>" + std::to_string(b.box.ymax - 1) +
             "</ymax></bndbox>\n    </object>\n";
    }
    xml += "  </annotation>\n";
  }
  xml += "</boxes>\n";
  entries.push_back({"boxes.xml", std::move(xml)});
  return write_zip(entries);
}

ParsedCaption parse_caption_chains(std::string_view raw) {
  ParsedCaption out;
  std::size_t plain_length = 0;
  std::size_t i = 0;
  auto append = [&](std::string_view piece) {
    out.sentence += piece;
    plain_length += utf8_length(piece);
  };
  while (i < raw.size()) {
    if (raw.compare(i, kChainOpen.size(), kChainOpen) != 0) {
      const auto next = raw.find(kChainOpen, i);
      const auto stop = next == std::string_view::npos ? raw.size() : next;
      append(raw.substr(i, stop - i));
      i = stop;
      continue;
    }
    const std::size_t open_at = i;
    std::size_t j = i + kChainOpen.size();
    const auto slash = raw.find('/', j);
    const auto close = raw.find(']', j);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::unbalanced_markup, "chain opened at offset " + std::to_string(open_at) + " is never closed");
    }
    if (slash == std::string_view::npos || slash > close) {
      throw Error(ErrorCode::unbalanced_markup, "chain at offset " + std::to_string(open_at) + " has no entity type");
    }
    const std::string_view id_text = raw.substr(j, slash - j);
    if (id_text.empty() || !std::all_of(id_text.begin(), id_text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorCode::invalid_entity_id, "entity id '" + std::string(id_text) + "' is not an integer");
    }
    const auto space = raw.find(' ', slash);
    if (space == std::string_view::npos || space > close) {
      throw Error(ErrorCode::unbalanced_markup, "chain at offset " + std::to_string(open_at) + " has no phrase");
    }
    const auto nested = raw.find(kChainOpen, space);
    if (nested != std::string_view::npos && nested < close) {
      throw Error(ErrorCode::nested_markup, "chain markup nested at offset " + std::to_string(nested));
    }
    EntityMention mention;
    mention.entity_id = std::stoll(std::string(id_text));
    mention.entity_type = std::string(raw.substr(slash + 1, space - slash - 1));
    mention.phrase = std::string(raw.substr(space + 1, close - space - 1));
    mention.span.start = plain_length;
    append(mention.phrase);
    mention.span.end = plain_length;
    out.mentions.push_back(std::move(mention));
    i = close + 1;
  }
  return out;
}

std::string_view to_string(ChainLinkage linkage) {
  switch (linkage) {
    case ChainLinkage::linked: return "linked";
    case ChainLinkage::phrase_only: return "phrase_only";
    case ChainLinkage::box_only: return "box_only";
  }
  return "linked";
}

ChainLinkage EntityChain::linkage() const {
  if (boxes.empty()) return ChainLinkage::phrase_only;
  if (phrase_spans.empty()) return ChainLinkage::box_only;
  return ChainLinkage::linked;
}

LinkResult link_entities(const CorpusBundle& bundle) {
  LinkResult result;
  std::map<std::string, std::vector<const BoundingBox*>> boxes_by_image;
  for (const auto& b : bundle.boxes_raw) boxes_by_image[b.image_ref].push_back(&b);

  std::set<std::string> captioned;
  for (const auto& caption : bundle.sentences_raw) {
    captioned.insert(caption.image_ref);
    const ParsedCaption parsed = parse_caption_chains(caption.raw);
    const ImageEntry* image = bundle.image(caption.image_ref);

    CorpusDocument doc;
    doc.doc_id = stem_of(caption.image_ref) + "_" + std::to_string(caption.index);
    doc.image_ref = caption.image_ref;
    doc.image_width = image->width;
    doc.image_height = image->height;
    doc.sentence = parsed.sentence;
    doc.source_corpus = bundle.name;

    std::map<std::int64_t, EntityChain> chains;
    for (const auto& m : parsed.mentions) {
      EntityChain& chain = chains[m.entity_id];
      chain.entity_id = m.entity_id;
      if (chain.entity_type.empty()) chain.entity_type = m.entity_type;
      chain.phrase_spans.push_back(PhraseSpan{0, m.span});
    }
    for (const BoundingBox* b : boxes_by_image[caption.image_ref]) {
      EntityChain& chain = chains[b->entity_id];
      chain.entity_id = b->entity_id;
      if (chain.entity_type.empty()) chain.entity_type = b->class_label;
      chain.boxes.push_back(*b);
    }
    for (auto& [id, chain] : chains) doc.chains.push_back(std::move(chain));
    result.documents.push_back(std::move(doc));
  }
  for (const auto& b : bundle.boxes_raw) {
    if (!captioned.contains(b.image_ref)) result.orphan_boxes.push_back(b);
  }
  return result;
}

}  // namespace charonette
