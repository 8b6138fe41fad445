#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace charonette {

// Every failure raised by the library carries exactly one of these codes.
// The HTTP layer maps each code onto a status and a stable string.
enum class ErrorCode {
  parse_error,
  dangling_reference,
  inheritance_cycle,
  invalid_lexicon,
  unknown_frame,
  unknown_fe,
  unknown_lu,
  missing_bundle_part,
  unreadable_image,
  malformed_box,
  unbalanced_markup,
  nested_markup,
  invalid_entity_id,
  negative_time,
  unordered_stream,
  malformed_record,
  invalid_index,
  order_violation,
  draft_finalized,
  unknown_draft,
  box_out_of_bounds,
  invalid_confidence,
  detection_consumed,
  unknown_detection,
  illegal_transition,
  frame_before_segment,
  unknown_object,
  bad_span,
  span_overlap,
  invalid_label,
  unknown_layer,
  fe_not_core,
  fe_already_labeled,
  unknown_ni_type,
  fe_not_in_frame,
  cv_name_not_noun,
  unknown_sentence,
  unknown_annotation,
  unknown_target,
  revision_conflict,
  revision_required,
  unknown_corpus,
  unknown_document,
  document_exists,
  schema_violation,
  validation_failed,
  io_error,
  invalid_argument,
  unauthorized,
  not_found,
};

std::string_view code_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {});

  ErrorCode code() const noexcept { return code_; }
  // Optional path to the offending field or element (e.g. "annotationSet[id=3]/layer").
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace charonette
