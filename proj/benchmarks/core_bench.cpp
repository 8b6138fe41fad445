#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "charonette/annotation.hpp"
#include "charonette/document.hpp"
#include "charonette/lexicon.hpp"
#include "charonette/preannotation.hpp"
#include "charonette/record_store.hpp"
#include "charonette/static_ingest.hpp"
#include "charonette/tracking.hpp"
#include "charonette/xml_export.hpp"

using namespace charonette;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(CHARONETTE_FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const Lexicon& lexicon() {
  static const Lexicon lex = Lexicon::load(read_fixture("lexicon.yaml"));
  return lex;
}

void BM_Interpolate(benchmark::State& state) {
  const Box a{10, 20, 200, 180};
  const Box b{300, 120, 520, 340};
  std::int64_t f = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate(a, 0, b, 1000, f));
    f = (f + 7) % 1000;
  }
}
BENCHMARK(BM_Interpolate);

void BM_BoxAtFrame(benchmark::State& state) {
  TrackBook book(VideoBounds{1920, 1080, 0});
  const std::int64_t id = book.create_object(0, Box{0, 0, 100, 100}).object_id;
  std::mt19937 rng(7);
  for (std::int64_t f = 10; f <= 10 * state.range(0); f += 10) {
    const int x = static_cast<int>(rng() % 1700);
    book.set_keyframe(id, f, Box{x, 100, x + 200, 300});
  }
  const ObjectTrack& track = *book.find(id);
  std::int64_t f = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(box_at_frame(track, f));
    f = (f + 13) % (10 * state.range(0));
  }
}
BENCHMARK(BM_BoxAtFrame)->Arg(10)->Arg(1000);

void BM_Preannotate(benchmark::State& state) {
  const Lexicon& lex = lexicon();
  const std::string sentence = "Bom que aqui a gente bebe e vai esquentando, né?";
  for (auto _ : state) {
    benchmark::DoNotOptimize(disambiguate(identify_targets(sentence, lex, 1), lex));
  }
}
BENCHMARK(BM_Preannotate);

void BM_StoreCommit(benchmark::State& state) {
  const auto dir = std::filesystem::temp_directory_path() / "charonette-bench-store";
  std::filesystem::remove_all(dir);
  auto store = RecordStore::open(dir);
  std::int64_t rev = 0;
  const RecordKey key{"d1", "sentence", "1"};
  for (auto _ : state) rev = store->put(key, rev, nlohmann::json{{"text", "Saúde amigos"}, {"rev", rev}});
  store.reset();
  std::filesystem::remove_all(dir);
}
BENCHMARK(BM_StoreCommit)->Unit(benchmark::kMicrosecond);

void BM_ExportImport(benchmark::State& state) {
  const Lexicon& lex = lexicon();
  const auto linked = link_entities(open_bundle(read_fixture("static_bundle.zip"), "fixture"));
  Document doc = make_static_document(linked.documents[0], "fixture");
  for (auto _ : state) {
    const std::string xml = export_document(doc, lex);
    benchmark::DoNotOptimize(import_document(xml, lex));
  }
}
BENCHMARK(BM_ExportImport)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
