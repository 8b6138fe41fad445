#pragma once

#include <map>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "charonette/document.hpp"
#include "charonette/lexicon.hpp"

namespace charonette {

// JSON shapes shared by the record store and the HTTP API. Field names follow
// the domain types (snake_case); enums are written as their to_string names.
nlohmann::json to_json(const Span& span);
nlohmann::json to_json(const Box& box);
nlohmann::json to_json(const TranscriptWord& word);
nlohmann::json to_json(const SentenceDraft& draft);
nlohmann::json to_json(const Detection& detection);
nlohmann::json to_json(const ObjectTrack& track);
nlohmann::json to_json(const EntityChain& chain);
nlohmann::json to_json(const Sentence& sentence);
nlohmann::json to_json(const TextAnnotationSet& set);
nlohmann::json to_json(const TargetRef& target);
nlohmann::json to_json(const ImageAnnotation& annotation);
nlohmann::json to_json(const Correlation& correlation);
nlohmann::json to_json(const TargetCandidate& candidate);
nlohmann::json to_json(const Document& doc);

// Lexicon views for the API.
nlohmann::json to_json(const Lexicon& lex, const Frame& frame);
nlohmann::json to_json(const Lexicon& lex, const LexicalUnit& lu);
nlohmann::json to_json(const FrameElement& fe);

// Decoders throw Error(malformed_record) naming the offending field.
Span span_from_json(const nlohmann::json& j);
Box box_from_json(const nlohmann::json& j);
TranscriptWord word_from_json(const nlohmann::json& j);
SentenceDraft draft_from_json(const nlohmann::json& j);
Detection detection_from_json(const nlohmann::json& j);
ObjectTrack track_from_json(const nlohmann::json& j);
EntityChain chain_from_json(const nlohmann::json& j);
Sentence sentence_from_json(const nlohmann::json& j);
TextAnnotationSet text_set_from_json(const nlohmann::json& j);
TargetRef target_from_json(const nlohmann::json& j);
ImageAnnotation image_annotation_from_json(const nlohmann::json& j);
Correlation correlation_from_json(const nlohmann::json& j);
TargetCandidate candidate_from_json(const nlohmann::json& j);

// A document is stored as one record per sentence, chain, draft, detection,
// track, annotation set, image annotation, correlation and candidate, plus a
// header and the transcript. Keys are (kind, id).
using RecordMap = std::map<std::pair<std::string, std::string>, nlohmann::json>;

inline constexpr const char* kHeaderKind = "header";

RecordMap document_to_records(const Document& doc);
Document document_from_records(const RecordMap& records);

}  // namespace charonette
