#include "charonette/record_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <zlib.h>

#include "charonette/error.hpp"

namespace charonette {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint32_t checksum(const std::string& text) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size())));
}

std::string hex8(std::uint32_t value) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", value);
  return buf;
}

[[noreturn]] void io_failure(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::io_error, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t size, const fs::path& path) {
  while (size > 0) {
    const ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("cannot write", path);
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

json key_json(const RecordKey& key) { return json{{"doc", key.document}, {"kind", key.kind}, {"id", key.id}}; }

RecordKey key_from(const json& j) {
  return RecordKey{j.at("doc").get<std::string>(), j.at("kind").get<std::string>(), j.at("id").get<std::string>()};
}

// Decodes "<crc hex8> <json>" or returns nullopt when the line is damaged.
std::optional<json> decode_line(const std::string& line) {
  if (line.size() < 10 || line[8] != ' ') return std::nullopt;
  const std::string body = line.substr(9);
  std::uint32_t expected = 0;
  try {
    expected = static_cast<std::uint32_t>(std::stoul(line.substr(0, 8), nullptr, 16));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (checksum(body) != expected) return std::nullopt;
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace

std::string to_string(const RecordKey& key) { return key.document + "/" + key.kind + "/" + key.id; }

RecordStore::RecordStore(fs::path dir)
    : dir_(std::move(dir)), log_path_(dir_ / "log.jsonl"), snapshot_path_(dir_ / "snapshots" / "snapshot.json") {}

std::unique_ptr<RecordStore> RecordStore::open(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "snapshots", ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  std::unique_ptr<RecordStore> store(new RecordStore(dir));
  store->replay();
  return store;
}

void RecordStore::replay() {
  if (fs::exists(snapshot_path_)) {
    std::ifstream in(snapshot_path_, std::ios::binary);
    json snap = json::parse(in, nullptr, false);
    if (snap.is_discarded() || !snap.is_object()) {
      throw Error(ErrorCode::io_error, "corrupt snapshot " + snapshot_path_.string());
    }
    seq_ = snap.at("seq").get<std::uint64_t>();
    for (const auto& r : snap.at("records")) {
      StoredRecord rec;
      rec.key = key_from(r);
      rec.revision = r.at("rev").get<std::int64_t>();
      rec.deleted = r.value("deleted", false);
      if (!rec.deleted) rec.payload = r.at("payload");
      records_[rec.key] = std::move(rec);
    }
  }

  if (!fs::exists(log_path_)) return;
  std::ifstream in(log_path_, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  std::size_t offset = 0;
  while (offset < content.size()) {
    const std::size_t newline = content.find('\n', offset);
    std::optional<json> entry;
    if (newline != std::string::npos) entry = decode_line(content.substr(offset, newline - offset));
    if (!entry) {
      const bool last = newline == std::string::npos || newline + 1 == content.size();
      if (!last) throw Error(ErrorCode::io_error, "corrupt record in " + log_path_.string() + " at byte " + std::to_string(offset));
      // Torn final append: drop it.
      fs::resize_file(log_path_, offset);
      break;
    }
    const auto seq = entry->at("seq").get<std::uint64_t>();
    if (seq > seq_) {
      for (const auto& op : entry->at("ops")) {
        StoredRecord rec;
        rec.key = key_from(op);
        rec.revision = op.at("rev").get<std::int64_t>();
        rec.deleted = !op.contains("payload");
        if (!rec.deleted) rec.payload = op.at("payload");
        records_[rec.key] = std::move(rec);
      }
      seq_ = seq;
    }
    offset = newline + 1;
  }
}

std::optional<StoredRecord> RecordStore::get(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::int64_t RecordStore::revision(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(key);
  return it == records_.end() ? 0 : it->second.revision;
}

std::vector<StoredRecord> RecordStore::list(const std::string& document) const {
  std::lock_guard lock(mutex_);
  std::vector<StoredRecord> out;
  for (auto it = records_.lower_bound(RecordKey{document, {}, {}});
       it != records_.end() && it->first.document == document; ++it) {
    if (!it->second.deleted) out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> RecordStore::documents() const {
  std::lock_guard lock(mutex_);
  std::set<std::string> docs;
  for (const auto& [key, rec] : records_) {
    if (!rec.deleted) docs.insert(key.document);
  }
  return {docs.begin(), docs.end()};
}

std::int64_t RecordStore::put(const RecordKey& key, std::int64_t expected, json payload) {
  return commit({WriteOp{key, expected, std::move(payload)}}).front();
}

std::int64_t RecordStore::remove(const RecordKey& key, std::int64_t expected) {
  return commit({WriteOp{key, expected, std::nullopt}}).front();
}

std::vector<std::int64_t> RecordStore::commit(const std::vector<WriteOp>& ops) {
  std::lock_guard lock(mutex_);
  std::set<RecordKey> seen;
  json entry_ops = json::array();
  std::vector<std::int64_t> revisions;
  for (const auto& op : ops) {
    if (!seen.insert(op.key).second) {
      throw Error(ErrorCode::invalid_argument, "record " + to_string(op.key) + " written twice in one commit");
    }
    auto it = records_.find(op.key);
    const std::int64_t current = it == records_.end() ? 0 : it->second.revision;
    if (op.expected != current) {
      throw Error(ErrorCode::revision_conflict, "record " + to_string(op.key) + " is at revision " +
                                                    std::to_string(current) + ", not " +
                                                    std::to_string(op.expected));
    }
    if (!op.payload && (it == records_.end() || it->second.deleted)) {
      throw Error(ErrorCode::not_found, "record " + to_string(op.key) + " does not exist");
    }
    json j = key_json(op.key);
    j["rev"] = current + 1;
    if (op.payload) j["payload"] = *op.payload;
    entry_ops.push_back(std::move(j));
    revisions.push_back(current + 1);
  }
  if (ops.empty()) return revisions;

  const json entry{{"seq", seq_ + 1}, {"ops", std::move(entry_ops)}};
  const std::string body = entry.dump();
  append_line(hex8(checksum(body)) + " " + body + "\n");

  ++seq_;
  apply(ops);
  return revisions;
}

void RecordStore::apply(const std::vector<WriteOp>& ops) {
  for (const auto& op : ops) {
    StoredRecord& rec = records_[op.key];
    rec.key = op.key;
    rec.revision = op.expected + 1;
    rec.deleted = !op.payload;
    rec.payload = op.payload ? *op.payload : json();
  }
}

void RecordStore::append_line(const std::string& line) {
  const int fd = ::open(log_path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) io_failure("cannot open", log_path_);
  // A previous in-process failure may have left a torn tail; cut it first.
  const off_t good_size = ::lseek(fd, 0, SEEK_END);
  if (good_size > 0) {
    char last = '\n';
    if (::pread(fd, &last, 1, good_size - 1) == 1 && last != '\n') {
      std::ifstream in(log_path_, std::ios::binary);
      std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const std::size_t keep = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
      if (::ftruncate(fd, static_cast<off_t>(keep)) != 0) {
        ::close(fd);
        io_failure("cannot truncate", log_path_);
      }
    }
  }

  std::size_t to_write = line.size();
  if (injector_) to_write = std::min(injector_(line.size()), line.size());
  try {
    write_all(fd, line.data(), to_write, log_path_);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (to_write < line.size()) {
    ::close(fd);
    throw Error(ErrorCode::io_error, "write to " + log_path_.string() + " interrupted after " +
                                         std::to_string(to_write) + " of " + std::to_string(line.size()) + " bytes");
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_failure("cannot sync", log_path_);
  }
  ::close(fd);
}

void RecordStore::compact() {
  std::lock_guard lock(mutex_);
  json records = json::array();
  for (const auto& [key, rec] : records_) {
    json r = key_json(key);
    r["rev"] = rec.revision;
    if (rec.deleted) {
      r["deleted"] = true;
    } else {
      r["payload"] = rec.payload;
    }
    records.push_back(std::move(r));
  }
  const std::string text = json{{"seq", seq_}, {"records", std::move(records)}}.dump() + "\n";

  const fs::path tmp = snapshot_path_.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_failure("cannot open", tmp);
  try {
    write_all(fd, text.data(), text.size(), tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_failure("cannot sync", tmp);
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, snapshot_path_, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot install snapshot: " + ec.message());
  fsync_dir(snapshot_path_.parent_path());
  // Entries up to seq_ are covered by the snapshot; replay skips them even
  // if the truncation below never happens.
  fs::resize_file(log_path_, 0, ec);
}

void RecordStore::set_fault_injector(FaultInjector injector) {
  std::lock_guard lock(mutex_);
  injector_ = std::move(injector);
}

std::uint64_t RecordStore::sequence() const {
  std::lock_guard lock(mutex_);
  return seq_;
}

}  // namespace charonette
