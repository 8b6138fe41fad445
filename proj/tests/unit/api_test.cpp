#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "charonette/api.hpp"
#include "charonette/record_store.hpp"
#include "fixtures.hpp"

using namespace charonette;
using charonette::testing::fe_id;
using charonette::testing::frame_id;
using charonette::testing::lu_id;
using charonette::testing::read_fixture;
using charonette::testing::shared_fixture_lexicon;
using charonette::testing::TempDir;
using nlohmann::json;

namespace {

// Workspace plus a server on an ephemeral port, torn down in order.
class Harness {
 public:
  explicit Harness(ApiConfig config = {})
      : ws_(dir_.path(), shared_fixture_lexicon()), server_(ws_, std::move(config)) {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Harness() {
    server_.stop();
    thread_.join();
  }

  Workspace& workspace() { return ws_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    c.set_read_timeout(10);
    return c;
  }

 private:
  TempDir dir_;
  Workspace ws_;
  ApiServer server_;
  int port_ = 0;
  std::thread thread_;
};

json body_of(const httplib::Result& res) {
  REQUIRE(res);
  return json::parse(res->body);
}

std::string revision_header(std::int64_t revision) { return "\"" + std::to_string(revision) + "\""; }

httplib::Result send(httplib::Client& c, const std::string& method, const std::string& path, const json& body,
                     std::optional<std::int64_t> revision = std::nullopt) {
  httplib::Headers headers;
  if (revision) headers.emplace("If-Match", revision_header(*revision));
  const std::string payload = body.dump();
  if (method == "POST") return c.Post(path, headers, payload, "application/json");
  if (method == "PATCH") return c.Patch(path, headers, payload, "application/json");
  if (method == "DELETE") return c.Delete(path, headers, payload, "application/json");
  return c.Get(path, headers);
}

VideoImport sentence3_import() {
  VideoImport input;
  input.source = VideoSource{"sentence3", "sentence3.mp4", 25, 640, 360, 0, 323};
  input.transcript = read_fixture("sentence3.transcript.tsv");
  input.subtitles = read_fixture("sentence3.subtitles.tsv");
  input.detections = read_fixture("sentence3.detections.tsv");
  return input;
}

json sentence3_body() {
  const VideoImport in = sentence3_import();
  return json{{"id", in.source.id},     {"media_ref", in.source.media_ref}, {"width", 640},
              {"height", 360},          {"first_object_id", 323},          {"transcript", in.transcript},
              {"subtitles", in.subtitles}, {"detections", in.detections}};
}

json store_dump(RecordStore& store) {
  json out = json::array();
  for (const auto& doc : store.documents()) {
    for (const auto& r : store.list(doc)) {
      out.push_back(json{{"key", to_string(r.key)}, {"rev", r.revision}, {"payload", r.payload}});
    }
  }
  return out;
}

const std::string kDoc = "/api/v1/corpora/videos/docs/sentence3";

}  // namespace

TEST_CASE("lexicon routes") {
  Harness h;
  auto c = h.client();
  CHECK(body_of(c.Get("/api/v1/health"))["status"] == "ok");

  const json ingestion = body_of(c.Get("/api/v1/frames?name=Ingestion"));
  CHECK(ingestion["name"] == "Ingestion");
  CHECK(ingestion["core_fes"] == json::array({"Ingestor", "Ingestibles"}));
  CHECK(ingestion["fes"][0]["name"] == "Ingestor");
  CHECK(ingestion["fes"][1]["name"] == "Ingestibles");

  const auto missing = c.Get("/api/v1/frames?name=Nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(body_of(c.Get("/api/v1/frames")).size() == 12);
  CHECK(body_of(c.Get("/api/v1/frames/People/fes")).size() == 4);
  const json lus = body_of(c.Get("/api/v1/lus?lemma=person&pos=n"));
  REQUIRE(lus.size() == 1);
  CHECK(lus[0]["name"] == "person.n");
  CHECK(lus[0]["frame"] == "People");
}

TEST_CASE("corpus and static import routes") {
  Harness h;
  auto c = h.client();
  const auto created = c.Post("/api/v1/corpora", json{{"name", "flickr"}}.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto bad = c.Post("/api/v1/corpora", json{{"name", "../x"}}.dump(), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  const auto imported =
      c.Post("/api/v1/corpora/flickr/import-static", read_fixture("static_bundle.zip"), "application/zip");
  REQUIRE(imported);
  CHECK(imported->status == 201);
  CHECK(body_of(imported)["chains"] == 7);
  CHECK(body_of(c.Get("/api/v1/corpora/flickr/docs")) == json::array({"drink_0", "girl_0"}));

  const auto doc = c.Get("/api/v1/corpora/flickr/docs/girl_0");
  REQUIRE(doc);
  CHECK(doc->get_header_value("ETag") == "\"1\"");
  const json girl = json::parse(doc->body);
  CHECK(girl["revision"] == 1);
  CHECK(girl["chains"].size() == 5);

  const auto again = c.Post("/api/v1/corpora/flickr/import-static", read_fixture("static_bundle.zip"),
                            "application/zip");
  REQUIRE(again);
  CHECK(again->status == 409);
  CHECK(body_of(again)["code"] == "document_exists");
  const auto unknown = c.Get("/api/v1/corpora/flickr/docs/zzz");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
}

TEST_CASE("annotation errors map to statuses") {
  Harness h;
  auto c = h.client();
  h.workspace().import_static("flickr", read_fixture("static_bundle.zip"));
  const std::string path = "/api/v1/corpora/flickr/docs/drink_0/annotations";
  const json mismatch{{"type", "image"}, {"target", {{"kind", "entity"}, {"id", 7}}}, {"frame", "People"},
                      {"fe", "Ingestor"}};

  const auto no_revision = send(c, "POST", path, mismatch);
  REQUIRE(no_revision);
  CHECK(no_revision->status == 428);
  CHECK(body_of(no_revision)["code"] == "revision_required");

  const auto wrong_fe = send(c, "POST", path, mismatch, 1);
  REQUIRE(wrong_fe);
  CHECK(wrong_fe->status == 422);
  const json error = body_of(wrong_fe);
  CHECK(error["code"] == "fe_not_in_frame");
  CHECK(error["field"] == "fe");

  json ok = mismatch;
  ok["frame"] = "Ingestion";
  ok["cv_name"] = "person.n";
  const auto created = send(c, "POST", path, ok, 1);
  REQUIRE(created);
  CHECK(created->status == 201);
  const json annotation = body_of(created);
  CHECK(annotation["revision"] == 2);
  CHECK(annotation["image_annotation"]["cv_name"] == raw(lu_id("person", PartOfSpeech::n)));
  CHECK(created->get_header_value("ETag") == "\"2\"");

  // Replaying the revision a response was based on is a conflict.
  const auto stale = send(c, "POST", path, ok, 1);
  REQUIRE(stale);
  CHECK(stale->status == 409);
  CHECK(body_of(stale)["code"] == "revision_conflict");

  json with_body_revision = ok;
  with_body_revision["revision"] = 2;
  with_body_revision["target"]["id"] = 8;
  with_body_revision["fe"] = "Ingestibles";
  with_body_revision["cv_name"] = raw(lu_id("glass", PartOfSpeech::n));
  const auto second = send(c, "POST", path, with_body_revision);
  REQUIRE(second);
  CHECK(second->status == 201);

  const auto garbage = c.Post(path, "{not json", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
}

TEST_CASE("video workflow over HTTP") {
  Harness h;
  auto c = h.client();
  const auto imported = send(c, "POST", "/api/v1/corpora/videos/import-video", sentence3_body());
  REQUIRE(imported);
  CHECK(imported->status == 201);
  std::int64_t rev = body_of(imported)["revision"];

  const json drafts = body_of(c.Get(kDoc + "/drafts"));
  CHECK(drafts["drafts"].size() == 2);

  const json finalized = body_of(send(c, "POST", kDoc + "/drafts/1/finalize", json::object(), rev));
  CHECK(finalized["sentence"]["text"] == "Bom que aqui a gente bebe e vai esquentando, né?");
  rev = finalized["revision"];

  const json pre = body_of(send(c, "POST", kDoc + "/preannotate", json::object(), rev));
  CHECK(pre["count"] == 4);
  CHECK(pre["candidates"].size() == 4);
  rev = pre["revision"];

  std::vector<std::int64_t> ids;
  for (int d = 1; d <= 3; ++d) {
    const json accepted = body_of(send(c, "POST", kDoc + "/detections/" + std::to_string(d) + "/accept",
                                       json::object(), rev));
    ids.push_back(accepted["object"]["object_id"]);
    rev = accepted["revision"];
  }
  CHECK(ids == std::vector<std::int64_t>{323, 324, 325});

  const json keyframe = body_of(send(c, "PATCH", kDoc + "/objects/325",
                                     json{{"op", "set_keyframe"},
                                          {"frame_index", 335},
                                          {"box", {{"xmin", 260}, {"ymin", 200}, {"xmax", 310}, {"ymax", 280}}}},
                                     rev));
  rev = keyframe["revision"];
  const json box = body_of(c.Get(kDoc + "/objects/325/box?frame=330"));
  CHECK(box["box"]["xmin"] == 255);
  CHECK(body_of(c.Get(kDoc + "/objects/325/box?frame=400"))["box"].is_null());

  const auto illegal = send(c, "PATCH", kDoc + "/objects/325", json{{"op", "resume"}, {"frame_index", 500},
                                                                     {"box", {{"xmin", 0}, {"ymin", 0}, {"xmax", 5}, {"ymax", 5}}}},
                            rev);
  REQUIRE(illegal);
  CHECK(illegal->status == 409);
  CHECK(body_of(illegal)["code"] == "illegal_transition");

  const json as = body_of(send(c, "POST", kDoc + "/annotations",
                               json{{"type", "text"}, {"sentence_ref", 1}, {"target", {{"start", 21}, {"end", 25}}},
                                    {"frame", "Ingestion"}},
                               rev));
  rev = as["revision"];
  const std::string as_path = kDoc + "/annotations/" + std::to_string(as["annotation_set"]["id"].get<int>());
  rev = body_of(send(c, "PATCH", as_path,
                     json{{"op", "set_label"}, {"layer", "FE"}, {"span", {{"start", 13}, {"end", 20}}},
                          {"label", "Ingestor"}},
                     rev))["revision"];
  const auto rejected = send(c, "PATCH", as_path, json{{"op", "mark_ni"}, {"fe", "Ingestor"}, {"ni_type", "DNI"}}, rev);
  REQUIRE(rejected);
  CHECK(rejected->status == 422);
  CHECK(body_of(rejected)["code"] == "fe_already_labeled");
  const json ni = body_of(send(c, "PATCH", as_path, json{{"op", "mark_ni"}, {"fe", "Ingestibles"}, {"ni_type", "DNI"}}, rev));
  CHECK(ni["annotation_set"]["ni_entries"].size() == 1);
  rev = ni["revision"];

  const auto exported = c.Get(kDoc + "/export");
  REQUIRE(exported);
  CHECK(exported->status == 200);
  CHECK(exported->body == h.workspace().export_xml("videos", "sentence3"));
  CHECK(body_of(c.Get(kDoc + "/validate"))["problems"].empty());

  const json removed = body_of(send(c, "DELETE", kDoc + "/objects/325", json::object(), rev));
  CHECK(removed["revision"] == rev + 1);
}

TEST_CASE("HTTP and direct workspace calls leave identical stores") {
  Harness h;
  auto c = h.client();
  TempDir other;
  Workspace direct(other.path(), shared_fixture_lexicon());

  send(c, "POST", "/api/v1/corpora/videos/import-video", sentence3_body());
  direct.import_video("videos", sentence3_import());

  std::int64_t rev = 1;
  auto step = [&](const std::string& method, const std::string& path, const json& body) {
    const json out = body_of(send(c, method, path, body, rev));
    REQUIRE(out.contains("revision"));
    rev = out["revision"];
  };
  step("PATCH", kDoc + "/drafts/1", json{{"op", "split_at"}, {"word_index", 6}});
  direct.edit_draft("videos", "sentence3", 1, draft_edit::SplitAt{6}, std::nullopt);
  step("PATCH", kDoc + "/drafts/1", json{{"op", "finalize"}});
  direct.edit_draft("videos", "sentence3", 1, draft_edit::Finalize{}, std::nullopt);
  step("POST", kDoc + "/preannotate", json::object());
  direct.preannotate("videos", "sentence3", std::nullopt);
  step("POST", kDoc + "/detections/1/accept", json::object());
  direct.accept_detection("videos", "sentence3", 1, std::nullopt);
  step("POST", kDoc + "/detections/2/reject", json::object());
  direct.reject_detection("videos", "sentence3", 2, std::nullopt);
  step("POST", kDoc + "/objects",
       json{{"frame_index", 330}, {"box", {{"xmin", 250}, {"ymin", 200}, {"xmax", 300}, {"ymax", 280}}}});
  direct.create_object("videos", "sentence3", 330, Box{250, 200, 300, 280}, std::nullopt);
  step("PATCH", kDoc + "/objects/323", json{{"op", "auto_track"}, {"until_frame", 340}});
  direct.edit_object("videos", "sentence3", 323, track_edit::AutoTrack{340}, std::nullopt);
  step("POST", kDoc + "/annotations",
       json{{"type", "image"}, {"target", {{"kind", "object"}, {"id", 324}}}, {"frame", "Ingestion"},
            {"fe", "Ingestibles"}, {"cv_name", "glass.n"}});
  direct.annotate_target("videos", "sentence3", TargetRef{TargetKind::object, 324}, frame_id("Ingestion"),
                         fe_id("Ingestion", "Ingestibles"), lu_id("glass", PartOfSpeech::n), std::nullopt);
  step("POST", kDoc + "/correlations",
       json{{"target", {{"kind", "object"}, {"id", 323}}}, {"sentence_ref", 1}, {"span", {{"start", 13}, {"end", 20}}}});
  direct.correlate("videos", "sentence3", TargetRef{TargetKind::object, 323}, 1, Span{13, 20}, std::nullopt);
  step("POST", kDoc + "/annotations",
       json{{"type", "text"}, {"sentence_ref", 1}, {"target", {{"start", 21}, {"end", 25}}}, {"frame", raw(frame_id("Ingestion"))}});
  direct.create_text_as("videos", "sentence3", 1, Span{21, 25}, frame_id("Ingestion"), std::nullopt);
  step("PATCH", kDoc + "/annotations/1", json{{"op", "mark_ni"}, {"fe", raw(fe_id("Ingestion", "Ingestibles"))}, {"ni_type", "INI"}});
  direct.edit_text_as("videos", "sentence3", 1, as_edit::MarkNi{fe_id("Ingestion", "Ingestibles"), "INI"}, std::nullopt);
  step("DELETE", kDoc + "/objects/324", json::object());
  direct.delete_target("videos", "sentence3", TargetRef{TargetKind::object, 324}, std::nullopt);

  CHECK(store_dump(h.workspace().store("videos")) == store_dump(direct.store("videos")));
  CHECK(h.workspace().export_xml("videos", "sentence3") == direct.export_xml("videos", "sentence3"));
}

TEST_CASE("bearer token") {
  Harness h(ApiConfig{"s3cret", {}});
  auto c = h.client();
  CHECK(c.Get("/api/v1/health")->status == 200);
  CHECK(c.Get("/api/v1/frames")->status == 401);
  c.set_bearer_token_auth("s3cret");
  CHECK(c.Get("/api/v1/frames")->status == 200);
}
