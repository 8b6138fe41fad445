#include <doctest.h>

#include <fstream>
#include <map>
#include <random>

#include "charonette/error.hpp"
#include "charonette/record_store.hpp"
#include "fixtures.hpp"

using namespace charonette;
using charonette::testing::TempDir;
using nlohmann::json;

namespace {

RecordKey key(const std::string& id, const std::string& doc = "d1") { return RecordKey{doc, "sentence", id}; }

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::not_found;
}

std::map<RecordKey, std::pair<std::int64_t, json>> dump(const RecordStore& store) {
  std::map<RecordKey, std::pair<std::int64_t, json>> out;
  for (const auto& doc : store.documents()) {
    for (const auto& r : store.list(doc)) out[r.key] = {r.revision, r.payload};
  }
  return out;
}

}  // namespace

TEST_CASE("create, update and stale writes") {
  TempDir dir;
  auto store = RecordStore::open(dir.path());
  CHECK(store->revision(key("1")) == 0);
  CHECK(store->put(key("1"), 0, json{{"text", "a"}}) == 1);
  CHECK(store->put(key("1"), 1, json{{"text", "b"}}) == 2);
  CHECK(error_of([&] { store->put(key("1"), 1, json{{"text", "c"}}); }) == ErrorCode::revision_conflict);
  CHECK(error_of([&] { store->put(key("2"), 3, json{}); }) == ErrorCode::revision_conflict);
  CHECK(store->get(key("1"))->payload == json{{"text", "b"}});
  CHECK(store->get(key("1"))->revision == 2);
  CHECK_FALSE(store->get(key("2")).has_value());
}

TEST_CASE("tombstones") {
  TempDir dir;
  auto store = RecordStore::open(dir.path());
  store->put(key("1"), 0, json{{"v", 1}});
  CHECK(store->remove(key("1"), 1) == 2);
  CHECK(store->get(key("1"))->deleted);
  CHECK(store->list("d1").empty());
  CHECK(error_of([&] { store->put(key("1"), 0, json{{"v", 2}}); }) == ErrorCode::revision_conflict);
  CHECK(error_of([&] { store->put(key("1"), 1, json{{"v", 2}}); }) == ErrorCode::revision_conflict);
  CHECK(store->put(key("1"), 2, json{{"v", 2}}) == 3);
  CHECK(error_of([&] { store->remove(key("9"), 0); }) == ErrorCode::not_found);
}

TEST_CASE("commits are atomic") {
  TempDir dir;
  auto store = RecordStore::open(dir.path());
  store->put(key("1"), 0, json{{"v", 1}});
  const auto seq = store->sequence();
  CHECK(error_of([&] {
          store->commit({WriteOp{key("2"), 0, json{{"v", 2}}}, WriteOp{key("1"), 0, json{{"v", 3}}}});
        }) == ErrorCode::revision_conflict);
  CHECK_FALSE(store->get(key("2")).has_value());
  CHECK(store->sequence() == seq);
  CHECK(error_of([&] {
          store->commit({WriteOp{key("2"), 0, json{{"v", 2}}}, WriteOp{key("2"), 0, json{{"v", 3}}}});
        }) == ErrorCode::invalid_argument);
  const auto revs = store->commit({WriteOp{key("2"), 0, json{{"v", 2}}}, WriteOp{key("1"), 1, std::nullopt}});
  CHECK(revs == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("state survives reopening") {
  TempDir dir;
  {
    auto store = RecordStore::open(dir.path());
    store->put(key("1"), 0, json{{"v", "é"}});
    store->put(key("2", "d2"), 0, json::array({1, 2}));
    store->remove(key("1"), 1);
    store->put(key("1"), 2, json{{"v", "again"}});
  }
  auto store = RecordStore::open(dir.path());
  CHECK(store->documents() == std::vector<std::string>{"d1", "d2"});
  CHECK(store->get(key("1"))->revision == 3);
  CHECK(store->get(key("1"))->payload == json{{"v", "again"}});
  CHECK(store->get(key("2", "d2"))->payload == json::array({1, 2}));
}

TEST_CASE("a torn write applies nothing and is discarded on reopen") {
  TempDir dir;
  auto store = RecordStore::open(dir.path());
  store->put(key("1"), 0, json{{"v", 1}});
  const auto before = dump(*store);
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, std::size_t{10}, std::size_t{30}}) {
    store->set_fault_injector([cut](std::size_t bytes) { return std::min(cut, bytes - 1); });
    CHECK(error_of([&] {
            store->commit({WriteOp{key("2"), 0, json{{"v", 2}}}, WriteOp{key("1"), 1, json{{"v", 3}}}});
          }) == ErrorCode::io_error);
    CHECK(dump(*store) == before);
    auto reopened = RecordStore::open(dir.path());
    CHECK(dump(*reopened) == before);
  }
  store->set_fault_injector(nullptr);
  CHECK(store->put(key("2"), 0, json{{"v", 2}}) == 1);
  auto reopened = RecordStore::open(dir.path());
  CHECK(reopened->get(key("2"))->revision == 1);
  CHECK(reopened->get(key("1"))->revision == 1);
}

TEST_CASE("random fault injection at record granularity") {
  TempDir dir;
  std::mt19937 rng(61);
  auto store = RecordStore::open(dir.path());
  std::map<RecordKey, std::int64_t> model;
  for (int step = 0; step < 300; ++step) {
    const RecordKey k = key(std::to_string(rng() % 6));
    const std::int64_t expected = model.count(k) ? model[k] : 0;
    const bool crash = rng() % 4 == 0;
    if (crash) {
      store->set_fault_injector([&rng](std::size_t bytes) { return rng() % bytes; });
    } else {
      store->set_fault_injector(nullptr);
    }
    try {
      const auto rev = store->put(k, expected, json{{"step", step}});
      CHECK_FALSE(crash);
      CHECK(rev == expected + 1);
      model[k] = rev;
    } catch (const Error& e) {
      CHECK(crash);
      CHECK(e.code() == ErrorCode::io_error);
    }
    if (step % 50 == 49) {
      store->set_fault_injector(nullptr);
      store = RecordStore::open(dir.path());
    }
    for (const auto& [mk, rev] : model) CHECK(store->revision(mk) == rev);
  }
}

TEST_CASE("damage before the last line is an error") {
  TempDir dir;
  {
    auto store = RecordStore::open(dir.path());
    store->put(key("1"), 0, json{{"v", 1}});
    store->put(key("2"), 0, json{{"v", 2}});
  }
  std::fstream log(dir.path() / "log.jsonl", std::ios::in | std::ios::out | std::ios::binary);
  log.seekp(2);
  log.put('z');
  log.close();
  CHECK(error_of([&] { RecordStore::open(dir.path()); }) == ErrorCode::io_error);
}

TEST_CASE("compaction keeps state and revisions") {
  TempDir dir;
  auto store = RecordStore::open(dir.path());
  for (int i = 0; i < 20; ++i) store->put(key("1"), i, json{{"v", i}});
  store->put(key("2"), 0, json{{"v", "x"}});
  store->remove(key("2"), 1);
  const auto before = dump(*store);
  store->compact();
  CHECK(dump(*store) == before);
  CHECK(std::filesystem::file_size(dir.path() / "log.jsonl") == 0);
  CHECK(std::filesystem::exists(dir.path() / "snapshots" / "snapshot.json"));
  auto reopened = RecordStore::open(dir.path());
  CHECK(dump(*reopened) == before);
  CHECK(reopened->revision(key("2")) == 2);
  CHECK(reopened->put(key("1"), 20, json{{"v", 20}}) == 21);
}

TEST_CASE("revisions never repeat or decrease") {
  TempDir dir;
  std::mt19937 rng(67);
  auto store = RecordStore::open(dir.path());
  std::map<RecordKey, std::int64_t> last;
  std::uint64_t last_seq = store->sequence();
  for (int step = 0; step < 400; ++step) {
    const RecordKey k = key(std::to_string(rng() % 5));
    const std::int64_t current = store->revision(k);
    const std::int64_t expected = rng() % 5 == 0 ? current + 1 : current;
    try {
      std::int64_t rev = 0;
      const auto live = store->get(k);
      if (live && !live->deleted && rng() % 3 == 0) {
        rev = store->remove(k, expected);
      } else {
        rev = store->put(k, expected, json{{"s", step}});
      }
      CHECK(rev > last[k]);
      last[k] = rev;
      CHECK(store->sequence() > last_seq);
      last_seq = store->sequence();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::revision_conflict);
    }
    if (step % 100 == 99) store->compact();
  }
}
