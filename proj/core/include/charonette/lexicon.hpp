#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace charonette {

enum class FrameId : std::int64_t {};
enum class FeId : std::int64_t {};
enum class LuId : std::int64_t {};

constexpr std::int64_t raw(FrameId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t raw(FeId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t raw(LuId id) { return static_cast<std::int64_t>(id); }

enum class Coreness { core, noncore };
enum class PartOfSpeech { v, n, a, adv, prep, other };
enum class RelationType {
  inheritance,
  precedence,
  using_frame,
  subframe,
  perspective_on,
  causative_of,
  inchoative_of,
};
// as_parent: the queried frame is the parent, results are its children.
enum class RelationDirection { as_parent, as_child };

std::string_view to_string(Coreness c);
std::string_view to_string(PartOfSpeech pos);
std::string_view to_string(RelationType type);
std::optional<PartOfSpeech> parse_pos(std::string_view text);
std::optional<RelationType> parse_relation_type(std::string_view text);

struct FrameElement {
  FeId id{};
  std::string name;
  FrameId frame_id{};
  Coreness coreness = Coreness::core;
};

struct Frame {
  FrameId id{};
  std::string name;
  std::string definition;
  std::vector<FeId> core_fes;
  std::vector<FeId> noncore_fes;
};

struct LexicalUnit {
  LuId id{};
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::other;
  FrameId frame_id{};
  std::string language;

  // "arrive.v"
  std::string display_name() const;
};

struct FrameRelation {
  RelationType type = RelationType::inheritance;
  FrameId parent{};
  FrameId child{};
};

struct WordformAnalysis {
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::other;
  bool evoking = true;
};

/// Immutable frame-semantic lexicon: frames, frame elements, lexical units,
/// typed frame relations, a surface-form table and the label vocabularies
/// for the GF, PT and NI annotation layers.
///
/// Instances are only produced by load(), which validates referential
/// integrity, name uniqueness and acyclicity of the inheritance graph.
/// Pointers returned by the query methods stay valid for the lifetime of
/// the Lexicon object.
class Lexicon {
 public:
  /// Parses a YAML lexicon document. Throws Error with parse_error
  /// (line/column in the message), dangling_reference, invalid_lexicon or
  /// inheritance_cycle.
  static Lexicon load(std::string_view source);
  static Lexicon load_file(const std::filesystem::path& path);

  const Frame* frame_by_name(std::string_view name) const;
  const Frame* frame(FrameId id) const;
  const FrameElement* fe(FeId id) const;
  const FrameElement* fe_by_name(FrameId frame, std::string_view name) const;
  const LexicalUnit* lu(LuId id) const;

  /// Core FEs in declaration order, then non-core. Throws unknown_frame.
  std::vector<const FrameElement*> fes_of_frame(FrameId frame) const;

  /// Sorted by (frame name, pos, id).
  std::vector<const LexicalUnit*> lus_by_lemma(std::string_view lemma,
                                               std::optional<PartOfSpeech> pos = std::nullopt) const;

  /// One-edge neighbours, sorted by name. Throws unknown_frame.
  std::vector<const Frame*> related_frames(FrameId frame, RelationType type, RelationDirection direction) const;

  /// Number of relation edges of any type joining a and b in either direction.
  std::size_t link_count(FrameId a, FrameId b) const;

  /// Analyses for a surface form; exact match first, then lowercase.
  std::span<const WordformAnalysis> analyses(std::string_view surface) const;

  const std::vector<Frame>& frames() const { return frames_; }
  const std::vector<FrameElement>& fes() const { return fes_; }
  const std::vector<LexicalUnit>& lus() const { return lus_; }
  const std::vector<FrameRelation>& relations() const { return relations_; }
  const std::map<std::string, std::vector<WordformAnalysis>>& wordforms() const { return wordforms_; }
  const std::vector<std::string>& gf_values() const { return gf_values_; }
  const std::vector<std::string>& pt_values() const { return pt_values_; }
  const std::vector<std::string>& ni_types() const { return ni_types_; }

  bool is_gf(std::string_view label) const;
  bool is_pt(std::string_view label) const;
  bool is_ni_type(std::string_view label) const;

 private:
  Lexicon() = default;
  void build_indexes();
  void validate() const;

  std::vector<Frame> frames_;
  std::vector<FrameElement> fes_;
  std::vector<LexicalUnit> lus_;
  std::vector<FrameRelation> relations_;
  std::map<std::string, std::vector<WordformAnalysis>> wordforms_;
  std::vector<std::string> gf_values_;
  std::vector<std::string> pt_values_;
  std::vector<std::string> ni_types_;

  std::unordered_map<std::int64_t, std::size_t> frame_index_;
  std::unordered_map<std::string, std::size_t> frame_by_name_;
  std::unordered_map<std::int64_t, std::size_t> fe_index_;
  std::unordered_map<std::int64_t, std::size_t> lu_index_;
  std::multimap<std::string, std::size_t> lu_by_lemma_;
};

}  // namespace charonette
