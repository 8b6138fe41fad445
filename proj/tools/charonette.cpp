// Command-line front end: serve the HTTP API, import corpora, run
// pre-annotation, export/import documents and validate lexicon files.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "charonette/api.hpp"
#include "charonette/error.hpp"
#include "charonette/lexicon.hpp"
#include "charonette/workspace.hpp"

namespace {

using namespace charonette;

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value != nullptr && *value != '\0' ? std::string(value) : fallback;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorCode::io_error, "cannot write " + path);
  }
}

struct Common {
  std::string data_dir = env_or("CHARONETTE_DATA_DIR", "./charonette-data");
  std::string lexicon = env_or("CHARONETTE_LEXICON", CHARONETTE_DEFAULT_LEXICON);

  Workspace workspace() const {
    return Workspace(data_dir, std::make_shared<const Lexicon>(Lexicon::load_file(lexicon)));
  }
};

void print_error(const Error& e) {
  std::cerr << "error [" << code_string(e.code()) << "]: " << e.what();
  if (!e.field().empty()) std::cerr << " (at " << e.field() << ")";
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-semantic multimodal annotation backend"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--data-dir", common.data_dir, "Data directory (CHARONETTE_DATA_DIR)");
  app.add_option("--lexicon", common.lexicon, "Lexicon YAML file (CHARONETTE_LEXICON)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = std::atoi(env_or("CHARONETTE_PORT", "8080").c_str());
  std::string host = "0.0.0.0";
  std::string static_dir;
  serve->add_option("--port", port, "Port (CHARONETTE_PORT)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--static-dir", static_dir, "UI assets served at /");

  // import-static
  auto* import_static = app.add_subcommand("import-static", "Import a picture-caption ZIP bundle");
  std::string corpus;
  std::string input;
  import_static->add_option("--corpus", corpus)->required();
  import_static->add_option("-i,--input", input, "Bundle .zip")->required()->check(CLI::ExistingFile);

  // import-video
  auto* import_video = app.add_subcommand("import-video", "Import a video's transcript, subtitles and detections");
  VideoImport video;
  std::string transcript_path, subtitles_path, detections_path;
  import_video->add_option("--corpus", corpus)->required();
  import_video->add_option("--id", video.source.id, "Document id")->required();
  import_video->add_option("--media", video.source.media_ref, "Video file name (defaults to the id)");
  import_video->add_option("--transcript", transcript_path)->required()->check(CLI::ExistingFile);
  import_video->add_option("--subtitles", subtitles_path)->check(CLI::ExistingFile);
  import_video->add_option("--detections", detections_path)->check(CLI::ExistingFile);
  import_video->add_option("--fps", video.source.fps)->capture_default_str();
  import_video->add_option("--width", video.source.width)->required();
  import_video->add_option("--height", video.source.height)->required();
  import_video->add_option("--frames", video.source.frame_count, "Frame count (0 = unknown)");
  import_video->add_option("--first-object-id", video.source.first_object_id)->capture_default_str();
  import_video->add_option("--pause-ms", video.pause_threshold_ms, "Sentence break threshold")->capture_default_str();

  // preannotate
  auto* preannotate = app.add_subcommand("preannotate", "Identify targets and assign frames");
  std::string doc_id;
  preannotate->add_option("--corpus", corpus)->required();
  preannotate->add_option("--doc", doc_id, "Single document (default: all)");

  // export / import
  auto* export_cmd = app.add_subcommand("export", "Export a document as XML");
  std::string output;
  export_cmd->add_option("--corpus", corpus)->required();
  export_cmd->add_option("--doc", doc_id)->required();
  export_cmd->add_option("-o,--output", output, "Output file (default: stdout)");

  auto* import_cmd = app.add_subcommand("import", "Import an exported XML document");
  import_cmd->add_option("-i,--input", input)->required()->check(CLI::ExistingFile);
  import_cmd->add_option("--corpus", corpus)->required();

  // lexicon validate
  auto* lexicon_cmd = app.add_subcommand("lexicon", "Lexicon tools");
  lexicon_cmd->require_subcommand(1);
  auto* validate = lexicon_cmd->add_subcommand("validate", "Load and validate a lexicon file");
  std::string lexicon_path;
  validate->add_option("path", lexicon_path, "Lexicon YAML (default: --lexicon)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const std::string path = lexicon_path.empty() ? common.lexicon : lexicon_path;
      const Lexicon lex = Lexicon::load_file(path);
      std::cout << path << ": ok (" << lex.frames().size() << " frames, " << lex.fes().size() << " frame elements, "
                << lex.lus().size() << " lexical units, " << lex.relations().size() << " relations)\n";
      return 0;
    }

    Workspace ws = common.workspace();

    if (*serve) {
      ApiServer server(ws, ApiConfig{env_or("CHARONETTE_TOKEN", ""), static_dir});
      std::cerr << "listening on " << host << ":" << port << " (data " << common.data_dir << ")\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }

    if (*import_static) {
      const auto summary = ws.import_static(corpus, read_file(input));
      std::cout << "imported " << summary.documents.size() << " documents, " << summary.chains << " entity chains";
      if (summary.orphan_boxes > 0) std::cout << ", " << summary.orphan_boxes << " boxes on captionless images";
      std::cout << "\n";
      for (const auto& id : summary.documents) std::cout << "  " << id << "\n";
      return 0;
    }

    if (*import_video) {
      if (video.source.media_ref.empty()) video.source.media_ref = video.source.id;
      video.transcript = read_file(transcript_path);
      if (!subtitles_path.empty()) video.subtitles = read_file(subtitles_path);
      if (!detections_path.empty()) video.detections = read_file(detections_path);
      const auto result = ws.import_video(corpus, video);
      const auto doc = ws.document(corpus, result.value).value;
      std::cout << "imported " << result.value << ": " << doc.words.size() << " words, "
                << doc.drafts.drafts().size() << " sentence drafts, " << doc.detections.size()
                << " detections (revision " << result.revision << ")\n";
      return 0;
    }

    if (*preannotate) {
      std::vector<std::string> docs = doc_id.empty() ? ws.documents(corpus) : std::vector<std::string>{doc_id};
      std::size_t total = 0, ambiguous = 0;
      std::cout << std::left << std::setw(32) << "document" << std::right << std::setw(10) << "targets"
                << std::setw(12) << "ambiguous" << "\n";
      for (const auto& id : docs) {
        const auto result = ws.preannotate(corpus, id, std::nullopt);
        total += result.value.candidates.size();
        ambiguous += result.value.ambiguous;
        std::cout << std::left << std::setw(32) << id << std::right << std::setw(10) << result.value.candidates.size()
                  << std::setw(12) << result.value.ambiguous << "\n";
      }
      std::cout << std::left << std::setw(32) << "total" << std::right << std::setw(10) << total << std::setw(12)
                << ambiguous << "\n";
      return 0;
    }

    if (*export_cmd) {
      const std::string xml = ws.export_xml(corpus, doc_id);
      if (output.empty()) {
        std::cout << xml;
      } else {
        write_file(output, xml);
      }
      return 0;
    }

    if (*import_cmd) {
      const auto result = ws.import_xml(corpus, read_file(input));
      std::cout << "imported " << result.value << " into " << corpus << " (revision " << result.revision << ")\n";
      return 0;
    }
  } catch (const Error& e) {
    print_error(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
