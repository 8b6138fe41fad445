#pragma once

#include <string>
#include <string_view>

#include "charonette/document.hpp"
#include "charonette/lexicon.hpp"

namespace charonette {

/// Canonical XML for one document. Output depends only on the document's
/// content: UTF-8, LF line endings, two-space indentation, fixed attribute
/// order, sentences by (start, id) and everything else by id.
///
///   <charonCorpusDoc version="1" id corpus kind media width height fps frameCount>
///     <sentence id startMs endMs text/>
///     <entity id type> <phrase sentenceIndex start end/> <box xmin ymin xmax ymax class/> </entity>
///     <object id origin state [detectionRef]>
///       <segment start end> <keyframe frame xmin ymin xmax ymax/> </segment>
///     </object>
///     <annotationSet id sentenceRef targetStart targetEnd frame>
///       <layer name="FE|GF|PT"> <label start end name/> </layer>
///       <ni fe type/>
///     </annotationSet>
///     <objectAnnotation id objectRef frame fe [cvLU] provenance/>
///     <correlation id objectRef sentenceRef start end/>
///   </charonCorpusDoc>
///
/// Frames and FEs are written by name, CV Names by LU id. Boxes are
/// half-open pixel rectangles. Sentence drafts, pending detections and
/// pre-annotation candidates are working state and are not exported.
std::string export_document(const Document& doc, const Lexicon& lex);

/// Rebuilds a document from export_document output, replaying every
/// annotation through the validating operations. Throws parse_error for
/// malformed XML, schema_violation or validation_failed with the element
/// path in Error::field().
Document import_document(std::string_view xml, const Lexicon& lex);

}  // namespace charonette
