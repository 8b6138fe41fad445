#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "charonette/codec.hpp"
#include "charonette/document.hpp"
#include "charonette/record_store.hpp"

namespace charonette {

// A document as read from the store, with enough bookkeeping to write back
// only what changed.
struct StoredDocument {
  Document doc;
  std::int64_t revision = 0;  // revision of the header record
  RecordMap payloads;
  std::map<std::pair<std::string, std::string>, std::int64_t> revisions;
};

std::optional<StoredDocument> load_document(const RecordStore& store, const std::string& doc_id);

// Writes the records that differ from `previous` (all of them when absent),
// tombstones the ones that disappeared and always bumps the header, in a
// single atomic commit. Returns the new document revision.
// Throws revision_conflict when the store moved since `previous` was read,
// and document_exists when creating over a live document.
std::int64_t save_document(RecordStore& store, const Document& doc, const StoredDocument* previous);

}  // namespace charonette
