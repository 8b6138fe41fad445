#include "charonette/repository.hpp"

#include "charonette/error.hpp"

namespace charonette {

std::optional<StoredDocument> load_document(const RecordStore& store, const std::string& doc_id) {
  auto records = store.list(doc_id);
  if (records.empty()) return std::nullopt;
  StoredDocument stored;
  for (auto& rec : records) {
    std::pair<std::string, std::string> key{rec.key.kind, rec.key.id};
    stored.revisions[key] = rec.revision;
    if (rec.key.kind == kHeaderKind) stored.revision = rec.revision;
    stored.payloads[key] = std::move(rec.payload);
  }
  if (stored.revision == 0) return std::nullopt;
  stored.doc = document_from_records(stored.payloads);
  return stored;
}

std::int64_t save_document(RecordStore& store, const Document& doc, const StoredDocument* previous) {
  const RecordMap next = document_to_records(doc);
  const std::pair<std::string, std::string> header_key{kHeaderKind, "0"};

  if (previous == nullptr) {
    auto existing = store.get(RecordKey{doc.id, kHeaderKind, "0"});
    if (existing && !existing->deleted) {
      throw Error(ErrorCode::document_exists, "document " + doc.id + " already exists");
    }
  }

  auto expected_for = [&](const std::pair<std::string, std::string>& key) -> std::int64_t {
    if (previous != nullptr) {
      auto it = previous->revisions.find(key);
      if (it != previous->revisions.end()) return it->second;
    }
    // New record: continue after a tombstone if one exists.
    return store.revision(RecordKey{doc.id, key.first, key.second});
  };

  std::vector<WriteOp> ops;
  std::int64_t header_revision = 0;
  for (const auto& [key, payload] : next) {
    if (key != header_key && previous != nullptr) {
      auto it = previous->payloads.find(key);
      if (it != previous->payloads.end() && it->second == payload) continue;
    }
    const std::int64_t expected = expected_for(key);
    if (key == header_key) header_revision = expected + 1;
    ops.push_back(WriteOp{RecordKey{doc.id, key.first, key.second}, expected, std::optional<nlohmann::json>(payload)});
  }
  if (previous != nullptr) {
    for (const auto& [key, payload] : previous->payloads) {
      if (next.count(key) == 0) {
        ops.push_back(WriteOp{RecordKey{doc.id, key.first, key.second}, previous->revisions.at(key), std::nullopt});
      }
    }
  }
  store.commit(ops);
  return header_revision;
}

}  // namespace charonette
