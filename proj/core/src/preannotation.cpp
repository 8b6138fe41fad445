#include "charonette/preannotation.hpp"

#include <algorithm>
#include <set>

namespace charonette {

std::string_view to_string(CandidateProvenance p) {
  return p == CandidateProvenance::automatic ? "auto" : "human_override";
}

std::vector<TargetCandidate> identify_targets(std::string_view sentence, const Lexicon& lex,
                                              std::int64_t sentence_ref) {
  std::vector<TargetCandidate> out;
  for (const Token& token : tokenize(sentence)) {
    TargetCandidate candidate;
    std::set<FrameId> frames;
    bool found = false;
    for (const WordformAnalysis& analysis : lex.analyses(token.text)) {
      if (!analysis.evoking) continue;
      const auto lus = lex.lus_by_lemma(analysis.lemma, analysis.pos);
      if (lus.empty()) continue;
      if (!found) {
        candidate.lemma = analysis.lemma;
        candidate.pos = analysis.pos;
        found = true;
      }
      for (const LexicalUnit* lu : lus) frames.insert(lu->frame_id);
    }
    if (!found) continue;
    candidate.sentence_ref = sentence_ref;
    candidate.span = token.span;
    candidate.candidate_frames.assign(frames.begin(), frames.end());
    std::sort(candidate.candidate_frames.begin(), candidate.candidate_frames.end(),
              [&](FrameId a, FrameId b) { return lex.frame(a)->name < lex.frame(b)->name; });
    out.push_back(std::move(candidate));
  }
  return out;
}

FrameChoice select_frame(std::span<const std::pair<FrameId, double>> raw_counts, const Lexicon& lex) {
  FrameChoice best{raw_counts.front().first, 0.0};
  double best_count = raw_counts.front().second;
  for (const auto& [frame, count] : raw_counts.subspan(1)) {
    if (count > best_count || (count == best_count && lex.frame(frame)->name < lex.frame(best.frame)->name)) {
      best.frame = frame;
      best_count = count;
    }
  }
  best.score = best_count > 0.0 ? 1.0 : 0.0;
  return best;
}

std::vector<TargetCandidate> RelationAdjacencyDisambiguator::disambiguate(std::vector<TargetCandidate> candidates,
                                                                          const Lexicon& lex) const {
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    TargetCandidate& target = candidates[t];
    if (target.candidate_frames.size() == 1) {
      target.chosen_frame = target.candidate_frames.front();
      target.score = 1.0;
      continue;
    }
    std::vector<std::pair<FrameId, double>> counts;
    for (FrameId frame : target.candidate_frames) {
      std::size_t links = 0;
      for (std::size_t other = 0; other < candidates.size(); ++other) {
        if (other == t) continue;
        for (FrameId neighbour : candidates[other].candidate_frames) links += lex.link_count(frame, neighbour);
      }
      counts.emplace_back(frame, static_cast<double>(links));
    }
    const FrameChoice choice = select_frame(counts, lex);
    target.chosen_frame = choice.frame;
    target.score = choice.score;
  }
  return candidates;
}

std::vector<TargetCandidate> disambiguate(std::vector<TargetCandidate> candidates, const Lexicon& lex) {
  return RelationAdjacencyDisambiguator{}.disambiguate(std::move(candidates), lex);
}

std::string singularize(std::string_view noun) {
  std::string s(noun);
  auto ends = [&](std::string_view suffix) { return s.size() > suffix.size() && s.ends_with(suffix); };
  if (ends("ies")) return s.substr(0, s.size() - 3) + "y";
  if (ends("sses") || ends("shes") || ends("ches") || ends("xes") || ends("zes")) return s.substr(0, s.size() - 2);
  if (ends("ss") || ends("us") || ends("is")) return s;
  if (ends("s")) return s.substr(0, s.size() - 1);
  return s;
}

CvClassMapping map_cv_class_to_lu(std::string_view class_label, const Lexicon& lex,
                                  std::optional<std::string_view> language) {
  CvClassMapping mapping{std::string(class_label), std::nullopt};
  std::string label = to_lower(trim(class_label));
  std::replace(label.begin(), label.end(), ' ', '_');

  std::vector<std::string> lemmas = {label, singularize(label)};
  for (const auto& analysis : lex.analyses(label)) {
    if (analysis.pos == PartOfSpeech::n) lemmas.push_back(analysis.lemma);
  }
  std::set<LuId> matches;
  for (const auto& lemma : lemmas) {
    for (const LexicalUnit* lu : lex.lus_by_lemma(lemma, PartOfSpeech::n)) {
      if (language && lu->language != *language) continue;
      matches.insert(lu->id);
    }
  }
  if (matches.size() == 1) mapping.lu_ref = *matches.begin();
  return mapping;
}

}  // namespace charonette
