#include "charonette/error.hpp"

namespace charonette {

std::string_view code_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::dangling_reference: return "dangling_reference";
    case ErrorCode::inheritance_cycle: return "inheritance_cycle";
    case ErrorCode::invalid_lexicon: return "invalid_lexicon";
    case ErrorCode::unknown_frame: return "unknown_frame";
    case ErrorCode::unknown_fe: return "unknown_fe";
    case ErrorCode::unknown_lu: return "unknown_lu";
    case ErrorCode::missing_bundle_part: return "missing_bundle_part";
    case ErrorCode::unreadable_image: return "unreadable_image";
    case ErrorCode::malformed_box: return "malformed_box";
    case ErrorCode::unbalanced_markup: return "unbalanced_markup";
    case ErrorCode::nested_markup: return "nested_markup";
    case ErrorCode::invalid_entity_id: return "invalid_entity_id";
    case ErrorCode::negative_time: return "negative_time";
    case ErrorCode::unordered_stream: return "unordered_stream";
    case ErrorCode::malformed_record: return "malformed_record";
    case ErrorCode::invalid_index: return "invalid_index";
    case ErrorCode::order_violation: return "order_violation";
    case ErrorCode::draft_finalized: return "draft_finalized";
    case ErrorCode::unknown_draft: return "unknown_draft";
    case ErrorCode::box_out_of_bounds: return "box_out_of_bounds";
    case ErrorCode::invalid_confidence: return "invalid_confidence";
    case ErrorCode::detection_consumed: return "detection_consumed";
    case ErrorCode::unknown_detection: return "unknown_detection";
    case ErrorCode::illegal_transition: return "illegal_transition";
    case ErrorCode::frame_before_segment: return "frame_before_segment";
    case ErrorCode::unknown_object: return "unknown_object";
    case ErrorCode::bad_span: return "bad_span";
    case ErrorCode::span_overlap: return "span_overlap";
    case ErrorCode::invalid_label: return "invalid_label";
    case ErrorCode::unknown_layer: return "unknown_layer";
    case ErrorCode::fe_not_core: return "fe_not_core";
    case ErrorCode::fe_already_labeled: return "fe_already_labeled";
    case ErrorCode::unknown_ni_type: return "unknown_ni_type";
    case ErrorCode::fe_not_in_frame: return "fe_not_in_frame";
    case ErrorCode::cv_name_not_noun: return "cv_name_not_noun";
    case ErrorCode::unknown_sentence: return "unknown_sentence";
    case ErrorCode::unknown_annotation: return "unknown_annotation";
    case ErrorCode::unknown_target: return "unknown_target";
    case ErrorCode::revision_conflict: return "revision_conflict";
    case ErrorCode::revision_required: return "revision_required";
    case ErrorCode::unknown_corpus: return "unknown_corpus";
    case ErrorCode::unknown_document: return "unknown_document";
    case ErrorCode::document_exists: return "document_exists";
    case ErrorCode::schema_violation: return "schema_violation";
    case ErrorCode::validation_failed: return "validation_failed";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::not_found: return "not_found";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(message), code_(code), field_(std::move(field)) {}

}  // namespace charonette
