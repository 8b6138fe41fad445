#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "charonette/lexicon.hpp"
#include "charonette/text.hpp"

namespace charonette {

enum class CandidateProvenance { automatic, human_override };
std::string_view to_string(CandidateProvenance p);

struct TargetCandidate {
  std::int64_t sentence_ref = 0;
  Span span;
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::other;
  std::vector<FrameId> candidate_frames;  // sorted by frame name, never empty
  std::optional<FrameId> chosen_frame;
  double score = 0.0;
  CandidateProvenance provenance = CandidateProvenance::automatic;

  friend bool operator==(const TargetCandidate&, const TargetCandidate&) = default;
};

// One candidate per token whose surface form resolves (via the lexicon's
// wordform table) to a lemma with at least one LU. Unknown forms are skipped.
std::vector<TargetCandidate> identify_targets(std::string_view sentence, const Lexicon& lex,
                                              std::int64_t sentence_ref = 0);

// Pluggable frame chooser; fills chosen_frame and score on every candidate.
class Disambiguator {
 public:
  virtual ~Disambiguator() = default;
  virtual std::vector<TargetCandidate> disambiguate(std::vector<TargetCandidate> candidates,
                                                    const Lexicon& lex) const = 0;
};

// Baseline: a sole candidate scores 1. Otherwise each candidate frame scores
// the number of one-edge relation links it has to candidate frames of the
// other targets, normalised by the best count; ties go to the
// lexicographically smallest frame name.
class RelationAdjacencyDisambiguator final : public Disambiguator {
 public:
  std::vector<TargetCandidate> disambiguate(std::vector<TargetCandidate> candidates,
                                            const Lexicon& lex) const override;
};

std::vector<TargetCandidate> disambiguate(std::vector<TargetCandidate> candidates, const Lexicon& lex);

struct FrameChoice {
  FrameId frame{};
  double score = 0.0;
};

// Picks the frame with the highest raw count (ties: smallest name) and
// normalises by that count. `raw_counts` must be non-empty.
FrameChoice select_frame(std::span<const std::pair<FrameId, double>> raw_counts, const Lexicon& lex);

struct CvClassMapping {
  std::string class_label;
  std::optional<LuId> lu_ref;

  bool mapped() const { return lu_ref.has_value(); }
};

// Lowercases and singularises a detector class label and looks it up among
// noun LUs. Exactly one match maps; zero or several stay unmapped.
CvClassMapping map_cv_class_to_lu(std::string_view class_label, const Lexicon& lex,
                                  std::optional<std::string_view> language = std::nullopt);

// "glasses" -> "glass", "berries" -> "berry", "cars" -> "car".
std::string singularize(std::string_view noun);

}  // namespace charonette
