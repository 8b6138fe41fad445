#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace charonette {

struct RecordKey {
  std::string document;
  std::string kind;
  std::string id;

  friend bool operator==(const RecordKey&, const RecordKey&) = default;
  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

std::string to_string(const RecordKey& key);

struct StoredRecord {
  RecordKey key;
  std::int64_t revision = 0;
  nlohmann::json payload;
  bool deleted = false;
};

// One write inside an atomic commit. `payload` absent means delete, which
// leaves a tombstone at revision expected + 1.
struct WriteOp {
  RecordKey key;
  std::int64_t expected = 0;
  std::optional<nlohmann::json> payload;
};

// Called before each log append with the encoded line size; returns how many
// bytes actually reach the file. Returning less than the size simulates a
// crash mid-write and makes the commit fail.
using FaultInjector = std::function<std::size_t(std::size_t line_bytes)>;

/// Durable record store of one corpus: an append-only log
/// (`<dir>/log.jsonl`, one CRC-prefixed JSON line per commit) plus a
/// compacting snapshot (`<dir>/snapshots/snapshot.json`).
///
/// Every record carries a revision that grows by exactly one per successful
/// write; writes name the revision they expect (0 to create). A commit
/// applies all its writes or none. A torn trailing line, left by a crash
/// during append, is discarded when the store is reopened.
///
/// Thread-safe; each call holds an internal lock.
class RecordStore {
 public:
  // Creates the directory if needed and replays snapshot + log.
  static std::unique_ptr<RecordStore> open(const std::filesystem::path& dir);

  std::optional<StoredRecord> get(const RecordKey& key) const;
  // Current revision (tombstones included); 0 when never written.
  std::int64_t revision(const RecordKey& key) const;
  // Live records of a document, ordered by key.
  std::vector<StoredRecord> list(const std::string& document) const;
  std::vector<std::string> documents() const;

  // Throws revision_conflict (store unchanged) or io_error.
  std::int64_t put(const RecordKey& key, std::int64_t expected, nlohmann::json payload);
  std::int64_t remove(const RecordKey& key, std::int64_t expected);
  // Returns the new revision of each op, in order.
  std::vector<std::int64_t> commit(const std::vector<WriteOp>& ops);

  // Writes a snapshot of the current state and truncates the log.
  void compact();

  void set_fault_injector(FaultInjector injector);

  std::uint64_t sequence() const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  explicit RecordStore(std::filesystem::path dir);
  void replay();
  void append_line(const std::string& line);
  void apply(const std::vector<WriteOp>& ops);

  std::filesystem::path dir_;
  std::filesystem::path log_path_;
  std::filesystem::path snapshot_path_;
  mutable std::mutex mutex_;
  std::map<RecordKey, StoredRecord> records_;
  std::uint64_t seq_ = 0;
  FaultInjector injector_;
};

}  // namespace charonette
