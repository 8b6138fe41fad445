#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "charonette/lexicon.hpp"

namespace charonette::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(CHARONETTE_FIXTURE_DIR) / name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string read_test_data(const std::string& name) {
  std::ifstream in(std::filesystem::path(CHARONETTE_TEST_DATA_DIR) / name, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline const Lexicon& fixture_lexicon() {
  static const Lexicon lex = Lexicon::load_file(fixture_path("lexicon.yaml"));
  return lex;
}

inline std::shared_ptr<const Lexicon> shared_fixture_lexicon() {
  static const auto lex = std::make_shared<const Lexicon>(Lexicon::load_file(fixture_path("lexicon.yaml")));
  return lex;
}

inline FrameId frame_id(const std::string& name) {
  const Frame* f = fixture_lexicon().frame_by_name(name);
  if (f == nullptr) throw std::runtime_error("no frame " + name);
  return f->id;
}

inline FeId fe_id(const std::string& frame, const std::string& fe) {
  const FrameElement* e = fixture_lexicon().fe_by_name(frame_id(frame), fe);
  if (e == nullptr) throw std::runtime_error("no fe " + frame + "." + fe);
  return e->id;
}

inline LuId lu_id(const std::string& lemma, PartOfSpeech pos) {
  const auto lus = fixture_lexicon().lus_by_lemma(lemma, pos);
  if (lus.size() != 1) throw std::runtime_error("lu " + lemma + " not unique");
  return lus.front()->id;
}

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("charonette-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace charonette::testing
