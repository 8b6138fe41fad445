#include "charonette/lexicon.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "charonette/error.hpp"
#include "charonette/text.hpp"

namespace charonette {

namespace {

const std::vector<std::string> kDefaultGf = {"Ext", "Obj", "Dep"};
const std::vector<std::string> kDefaultPt = {"NP", "PP", "VPfin", "VPto", "AJP", "AVP", "Sfin"};
const std::vector<std::string> kDefaultNi = {"DNI", "CNI", "INI"};

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return "";
  return "line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ": ";
}

[[noreturn]] void parse_fail(const YAML::Node& node, const std::string& what) {
  throw Error(ErrorCode::parse_error, where(node) + what);
}

const YAML::Node require(const YAML::Node& parent, const char* key) {
  YAML::Node child = parent[key];
  if (!child) parse_fail(parent, std::string("missing required key '") + key + "'");
  return child;
}

std::string scalar(const YAML::Node& node, const char* what) {
  if (!node.IsScalar()) parse_fail(node, std::string(what) + " must be a scalar");
  return node.Scalar();
}

std::int64_t integer(const YAML::Node& node, const char* what) {
  const std::string text = scalar(node, what);
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) parse_fail(node, std::string(what) + " must be an integer, got '" + text + "'");
  return value;
}

std::vector<std::string> string_list(const YAML::Node& node, const char* what) {
  if (!node.IsSequence()) parse_fail(node, std::string(what) + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar(item, what));
  return out;
}

PartOfSpeech pos_of(const YAML::Node& node) {
  const std::string text = scalar(node, "pos");
  auto pos = parse_pos(text);
  if (!pos) parse_fail(node, "unknown part of speech '" + text + "'");
  return *pos;
}

bool contains(const std::vector<std::string>& values, std::string_view label) {
  return std::find(values.begin(), values.end(), label) != values.end();
}

}  // namespace

std::string_view to_string(Coreness c) { return c == Coreness::core ? "core" : "noncore"; }

std::string_view to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::v: return "v";
    case PartOfSpeech::n: return "n";
    case PartOfSpeech::a: return "a";
    case PartOfSpeech::adv: return "adv";
    case PartOfSpeech::prep: return "prep";
    case PartOfSpeech::other: return "other";
  }
  return "other";
}

std::string_view to_string(RelationType type) {
  switch (type) {
    case RelationType::inheritance: return "inheritance";
    case RelationType::precedence: return "precedence";
    case RelationType::using_frame: return "using";
    case RelationType::subframe: return "subframe";
    case RelationType::perspective_on: return "perspective_on";
    case RelationType::causative_of: return "causative_of";
    case RelationType::inchoative_of: return "inchoative_of";
  }
  return "inheritance";
}

std::optional<PartOfSpeech> parse_pos(std::string_view text) {
  for (auto pos : {PartOfSpeech::v, PartOfSpeech::n, PartOfSpeech::a, PartOfSpeech::adv, PartOfSpeech::prep,
                   PartOfSpeech::other}) {
    if (to_string(pos) == text) return pos;
  }
  return std::nullopt;
}

std::optional<RelationType> parse_relation_type(std::string_view text) {
  for (auto type : {RelationType::inheritance, RelationType::precedence, RelationType::using_frame,
                    RelationType::subframe, RelationType::perspective_on, RelationType::causative_of,
                    RelationType::inchoative_of}) {
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

std::string LexicalUnit::display_name() const { return lemma + "." + std::string(to_string(pos)); }

Lexicon Lexicon::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open lexicon file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load(buffer.str());
}

Lexicon Lexicon::load(std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(source));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(e.mark.line + 1) + ", column " + std::to_string(e.mark.column + 1) + ": " +
                    e.msg);
  }

  Lexicon lex;
  lex.gf_values_ = kDefaultGf;
  lex.pt_values_ = kDefaultPt;
  lex.ni_types_ = kDefaultNi;

  if (root.IsNull()) {
    lex.build_indexes();
    return lex;
  }
  if (!root.IsMap()) parse_fail(root, "lexicon document must be a mapping");

  static const std::set<std::string> kSections = {"version", "frames", "lus", "relations", "wordforms",
                                                  "label_vocabularies"};
  for (const auto& entry : root) {
    const std::string key = entry.first.Scalar();
    if (!kSections.contains(key)) parse_fail(entry.first, "unknown top-level section '" + key + "'");
  }

  std::set<std::int64_t> fe_ids;
  if (const auto frames = root["frames"]; frames && !frames.IsNull()) {
    if (!frames.IsSequence()) parse_fail(frames, "'frames' must be a list");
    for (const auto& node : frames) {
      if (!node.IsMap()) parse_fail(node, "frame entry must be a mapping");
      Frame frame;
      frame.id = FrameId{integer(require(node, "id"), "frame id")};
      frame.name = scalar(require(node, "name"), "frame name");
      if (frame.name.empty()) parse_fail(node, "frame name must not be empty");
      if (const auto def = node["definition"]) frame.definition = scalar(def, "definition");
      if (const auto fes = node["fes"]; fes && !fes.IsNull()) {
        if (!fes.IsSequence()) parse_fail(fes, "'fes' must be a list");
        for (const auto& fe_node : fes) {
          FrameElement fe;
          fe.id = FeId{integer(require(fe_node, "id"), "fe id")};
          fe.name = scalar(require(fe_node, "name"), "fe name");
          fe.frame_id = frame.id;
          const std::string coreness = fe_node["coreness"] ? scalar(fe_node["coreness"], "coreness") : "core";
          if (coreness == "core") {
            fe.coreness = Coreness::core;
            frame.core_fes.push_back(fe.id);
          } else if (coreness == "noncore") {
            fe.coreness = Coreness::noncore;
            frame.noncore_fes.push_back(fe.id);
          } else {
            parse_fail(fe_node, "coreness must be 'core' or 'noncore'");
          }
          if (!fe_ids.insert(raw(fe.id)).second) {
            throw Error(ErrorCode::invalid_lexicon, where(fe_node) + "duplicate frame element id " +
                                                        std::to_string(raw(fe.id)));
          }
          lex.fes_.push_back(std::move(fe));
        }
      }
      lex.frames_.push_back(std::move(frame));
    }
  }

  if (const auto lus = root["lus"]; lus && !lus.IsNull()) {
    if (!lus.IsSequence()) parse_fail(lus, "'lus' must be a list");
    for (const auto& node : lus) {
      LexicalUnit lu;
      lu.id = LuId{integer(require(node, "id"), "lu id")};
      lu.lemma = scalar(require(node, "lemma"), "lemma");
      lu.pos = pos_of(require(node, "pos"));
      lu.frame_id = FrameId{integer(require(node, "frame"), "lu frame")};
      lu.language = node["language"] ? scalar(node["language"], "language") : "und";
      if (lu.lemma.empty() || lu.lemma != to_lower(lu.lemma)) {
        throw Error(ErrorCode::invalid_lexicon, where(node) + "lemma '" + lu.lemma + "' must be non-empty lowercase");
      }
      lex.lus_.push_back(std::move(lu));
    }
  }

  if (const auto rels = root["relations"]; rels && !rels.IsNull()) {
    if (!rels.IsSequence()) parse_fail(rels, "'relations' must be a list");
    for (const auto& node : rels) {
      FrameRelation rel;
      const std::string type = scalar(require(node, "type"), "relation type");
      auto parsed = parse_relation_type(type);
      if (!parsed) parse_fail(node, "unknown relation type '" + type + "'");
      rel.type = *parsed;
      rel.parent = FrameId{integer(require(node, "parent"), "relation parent")};
      rel.child = FrameId{integer(require(node, "child"), "relation child")};
      if (rel.parent == rel.child) {
        throw Error(ErrorCode::invalid_lexicon,
                    where(node) + "relation parent and child are both frame " + std::to_string(raw(rel.parent)));
      }
      lex.relations_.push_back(rel);
    }
  }

  if (const auto forms = root["wordforms"]; forms && !forms.IsNull()) {
    if (!forms.IsMap()) parse_fail(forms, "'wordforms' must be a mapping");
    for (const auto& entry : forms) {
      const std::string surface = entry.first.Scalar();
      std::vector<WordformAnalysis> analyses;
      const YAML::Node list = entry.second;
      if (!list.IsSequence()) parse_fail(list, "wordform '" + surface + "' must map to a list of analyses");
      for (const auto& node : list) {
        WordformAnalysis a;
        a.lemma = scalar(require(node, "lemma"), "lemma");
        a.pos = pos_of(require(node, "pos"));
        if (const auto ev = node["evoking"]) a.evoking = ev.as<bool>();
        analyses.push_back(std::move(a));
      }
      lex.wordforms_[surface] = std::move(analyses);
    }
  }

  if (const auto vocab = root["label_vocabularies"]; vocab && !vocab.IsNull()) {
    if (!vocab.IsMap()) parse_fail(vocab, "'label_vocabularies' must be a mapping");
    if (vocab["gf"]) lex.gf_values_ = string_list(vocab["gf"], "gf");
    if (vocab["pt"]) lex.pt_values_ = string_list(vocab["pt"], "pt");
    if (vocab["ni"]) lex.ni_types_ = string_list(vocab["ni"], "ni");
  }

  lex.build_indexes();
  lex.validate();
  return lex;
}

void Lexicon::build_indexes() {
  frame_index_.clear();
  frame_by_name_.clear();
  fe_index_.clear();
  lu_index_.clear();
  lu_by_lemma_.clear();
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (!frame_index_.emplace(raw(frames_[i].id), i).second) {
      throw Error(ErrorCode::invalid_lexicon, "duplicate frame id " + std::to_string(raw(frames_[i].id)));
    }
    if (!frame_by_name_.emplace(frames_[i].name, i).second) {
      throw Error(ErrorCode::invalid_lexicon, "duplicate frame name '" + frames_[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < fes_.size(); ++i) fe_index_.emplace(raw(fes_[i].id), i);
  for (std::size_t i = 0; i < lus_.size(); ++i) {
    if (!lu_index_.emplace(raw(lus_[i].id), i).second) {
      throw Error(ErrorCode::invalid_lexicon, "duplicate lexical unit id " + std::to_string(raw(lus_[i].id)));
    }
    lu_by_lemma_.emplace(lus_[i].lemma, i);
  }
}

void Lexicon::validate() const {
  for (const auto& frame : frames_) {
    std::set<std::string> names;
    for (const auto* list : {&frame.core_fes, &frame.noncore_fes}) {
      for (FeId id : *list) {
        const FrameElement* element = fe(id);
        if (element == nullptr) {
          throw Error(ErrorCode::dangling_reference, "frame '" + frame.name + "' lists unknown frame element id " +
                                                         std::to_string(raw(id)));
        }
        if (!names.insert(element->name).second) {
          throw Error(ErrorCode::invalid_lexicon,
                      "frame '" + frame.name + "' declares frame element '" + element->name + "' twice");
        }
      }
    }
  }
  for (const auto& lu : lus_) {
    if (frame(lu.frame_id) == nullptr) {
      throw Error(ErrorCode::dangling_reference, "lexical unit " + std::to_string(raw(lu.id)) + " (" +
                                                     lu.display_name() + ") references unknown frame id " +
                                                     std::to_string(raw(lu.frame_id)));
    }
  }
  for (const auto& rel : relations_) {
    for (FrameId id : {rel.parent, rel.child}) {
      if (frame(id) == nullptr) {
        throw Error(ErrorCode::dangling_reference, std::string(to_string(rel.type)) +
                                                       " relation references unknown frame id " +
                                                       std::to_string(raw(id)));
      }
    }
  }
  for (const auto& [surface, analyses] : wordforms_) {
    for (const auto& a : analyses) {
      if (!a.evoking) continue;
      const bool known = std::any_of(lus_.begin(), lus_.end(),
                                     [&](const LexicalUnit& lu) { return lu.lemma == a.lemma && lu.pos == a.pos; });
      if (!known) {
        throw Error(ErrorCode::dangling_reference, "wordform '" + surface + "' resolves to " + a.lemma + "." +
                                                       std::string(to_string(a.pos)) +
                                                       ", which has no lexical unit and is not flagged evoking: false");
      }
    }
  }

  // Inheritance must be acyclic. Iterative DFS, reporting the first back edge.
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> children;
  for (const auto& rel : relations_) {
    if (rel.type == RelationType::inheritance) children[raw(rel.parent)].push_back(raw(rel.child));
  }
  enum class Mark { white, grey, black };
  std::unordered_map<std::int64_t, Mark> mark;
  for (const auto& f : frames_) mark[raw(f.id)] = Mark::white;
  for (const auto& start : frames_) {
    if (mark[raw(start.id)] != Mark::white) continue;
    std::vector<std::pair<std::int64_t, std::size_t>> stack{{raw(start.id), 0}};
    mark[raw(start.id)] = Mark::grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& kids = children[node];
      if (next == kids.size()) {
        mark[node] = Mark::black;
        stack.pop_back();
        continue;
      }
      const std::int64_t child = kids[next++];
      if (mark[child] == Mark::grey) {
        std::string path;
        bool on = false;
        for (const auto& [n, unused] : stack) {
          if (n == child) on = true;
          if (on) path += frame(FrameId{n})->name + " -> ";
        }
        path += frame(FrameId{child})->name;
        throw Error(ErrorCode::inheritance_cycle, "inheritance cycle: " + path);
      }
      if (mark[child] == Mark::white) {
        mark[child] = Mark::grey;
        stack.emplace_back(child, 0);
      }
    }
  }
}

const Frame* Lexicon::frame_by_name(std::string_view name) const {
  auto it = frame_by_name_.find(std::string(name));
  return it == frame_by_name_.end() ? nullptr : &frames_[it->second];
}

const Frame* Lexicon::frame(FrameId id) const {
  auto it = frame_index_.find(raw(id));
  return it == frame_index_.end() ? nullptr : &frames_[it->second];
}

const FrameElement* Lexicon::fe(FeId id) const {
  auto it = fe_index_.find(raw(id));
  return it == fe_index_.end() ? nullptr : &fes_[it->second];
}

const FrameElement* Lexicon::fe_by_name(FrameId frame_id, std::string_view name) const {
  const Frame* f = frame(frame_id);
  if (f == nullptr) return nullptr;
  for (const auto* list : {&f->core_fes, &f->noncore_fes}) {
    for (FeId id : *list) {
      const FrameElement* element = fe(id);
      if (element->name == name) return element;
    }
  }
  return nullptr;
}

const LexicalUnit* Lexicon::lu(LuId id) const {
  auto it = lu_index_.find(raw(id));
  return it == lu_index_.end() ? nullptr : &lus_[it->second];
}

std::vector<const FrameElement*> Lexicon::fes_of_frame(FrameId frame_id) const {
  const Frame* f = frame(frame_id);
  if (f == nullptr) throw Error(ErrorCode::unknown_frame, "unknown frame id " + std::to_string(raw(frame_id)));
  std::vector<const FrameElement*> out;
  out.reserve(f->core_fes.size() + f->noncore_fes.size());
  for (FeId id : f->core_fes) out.push_back(fe(id));
  for (FeId id : f->noncore_fes) out.push_back(fe(id));
  return out;
}

std::vector<const LexicalUnit*> Lexicon::lus_by_lemma(std::string_view lemma, std::optional<PartOfSpeech> pos) const {
  std::vector<const LexicalUnit*> out;
  auto [first, last] = lu_by_lemma_.equal_range(std::string(lemma));
  for (auto it = first; it != last; ++it) {
    const LexicalUnit& lu = lus_[it->second];
    if (!pos || lu.pos == *pos) out.push_back(&lu);
  }
  std::sort(out.begin(), out.end(), [this](const LexicalUnit* a, const LexicalUnit* b) {
    const auto& fa = frame(a->frame_id)->name;
    const auto& fb = frame(b->frame_id)->name;
    if (fa != fb) return fa < fb;
    if (a->pos != b->pos) return to_string(a->pos) < to_string(b->pos);
    return raw(a->id) < raw(b->id);
  });
  return out;
}

std::vector<const Frame*> Lexicon::related_frames(FrameId frame_id, RelationType type,
                                                  RelationDirection direction) const {
  if (frame(frame_id) == nullptr) {
    throw Error(ErrorCode::unknown_frame, "unknown frame id " + std::to_string(raw(frame_id)));
  }
  std::vector<const Frame*> out;
  for (const auto& rel : relations_) {
    if (rel.type != type) continue;
    if (direction == RelationDirection::as_parent && rel.parent == frame_id) out.push_back(frame(rel.child));
    if (direction == RelationDirection::as_child && rel.child == frame_id) out.push_back(frame(rel.parent));
  }
  std::sort(out.begin(), out.end(), [](const Frame* a, const Frame* b) { return a->name < b->name; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t Lexicon::link_count(FrameId a, FrameId b) const {
  std::size_t n = 0;
  for (const auto& rel : relations_) {
    if ((rel.parent == a && rel.child == b) || (rel.parent == b && rel.child == a)) ++n;
  }
  return n;
}

std::span<const WordformAnalysis> Lexicon::analyses(std::string_view surface) const {
  if (auto it = wordforms_.find(std::string(surface)); it != wordforms_.end()) return it->second;
  if (auto it = wordforms_.find(to_lower(surface)); it != wordforms_.end()) return it->second;
  return {};
}

bool Lexicon::is_gf(std::string_view label) const { return contains(gf_values_, label); }
bool Lexicon::is_pt(std::string_view label) const { return contains(pt_values_, label); }
bool Lexicon::is_ni_type(std::string_view label) const { return contains(ni_types_, label); }

}  // namespace charonette
