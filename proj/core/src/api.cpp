#include "charonette/api.hpp"

#include <httplib.h>

#include <charconv>

#include "charonette/codec.hpp"
#include "charonette/tracking.hpp"

namespace charonette {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::malformed_record:
    case ErrorCode::schema_violation:
    case ErrorCode::invalid_argument:
    case ErrorCode::unknown_layer:
    case ErrorCode::negative_time:
    case ErrorCode::unordered_stream:
    case ErrorCode::missing_bundle_part:
    case ErrorCode::unreadable_image:
    case ErrorCode::malformed_box:
    case ErrorCode::unbalanced_markup:
    case ErrorCode::nested_markup:
    case ErrorCode::invalid_entity_id:
    case ErrorCode::invalid_confidence:
      return 400;
    case ErrorCode::unauthorized:
      return 401;
    case ErrorCode::unknown_corpus:
    case ErrorCode::unknown_document:
    case ErrorCode::unknown_draft:
    case ErrorCode::unknown_detection:
    case ErrorCode::unknown_object:
    case ErrorCode::unknown_annotation:
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::revision_conflict:
    case ErrorCode::document_exists:
    case ErrorCode::detection_consumed:
    case ErrorCode::illegal_transition:
    case ErrorCode::draft_finalized:
      return 409;
    case ErrorCode::revision_required:
      return 428;
    case ErrorCode::io_error:
      return 500;
    case ErrorCode::dangling_reference:
    case ErrorCode::inheritance_cycle:
    case ErrorCode::invalid_lexicon:
    case ErrorCode::unknown_frame:
    case ErrorCode::unknown_fe:
    case ErrorCode::unknown_lu:
    case ErrorCode::invalid_index:
    case ErrorCode::order_violation:
    case ErrorCode::box_out_of_bounds:
    case ErrorCode::frame_before_segment:
    case ErrorCode::bad_span:
    case ErrorCode::span_overlap:
    case ErrorCode::invalid_label:
    case ErrorCode::fe_not_core:
    case ErrorCode::fe_already_labeled:
    case ErrorCode::unknown_ni_type:
    case ErrorCode::fe_not_in_frame:
    case ErrorCode::cv_name_not_noun:
    case ErrorCode::unknown_sentence:
    case ErrorCode::unknown_target:
    case ErrorCode::validation_failed:
      return 422;
  }
  return 500;
}

json error_body(const Error& error) {
  return json{{"status", http_status(error.code())},
              {"code", code_string(error.code())},
              {"message", error.what()},
              {"field", error.field().empty() ? json(nullptr) : json(error.field())}};
}

namespace {

using httplib::Request;
using httplib::Response;

void send_json(Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_revisioned(Response& res, json body, std::int64_t revision, int status = 200) {
  body["revision"] = revision;
  res.set_header("ETag", "\"" + std::to_string(revision) + "\"");
  send_json(res, body, status);
}

void send_error(Response& res, const Error& error) { send_json(res, error_body(error), http_status(error.code())); }

json parse_body(const Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::parse_error, "request body is not a JSON object");
  return j;
}

std::int64_t parse_int(std::string_view text, const char* field) {
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_argument, std::string("'") + field + "' must be an integer", field);
  }
  return value;
}

std::int64_t path_int(const Request& req, const char* name) { return parse_int(req.path_params.at(name), name); }

template <typename T>
T body_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw Error(ErrorCode::invalid_argument, std::string("missing field '") + name + "'", name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid field '") + name + "'", name);
  }
}

// If-Match takes precedence over a "revision" body field.
std::int64_t required_revision(const Request& req, const json& body) {
  if (req.has_header("If-Match")) {
    std::string tag = req.get_header_value("If-Match");
    if (tag.rfind("W/", 0) == 0) tag = tag.substr(2);
    if (tag.size() >= 2 && tag.front() == '"' && tag.back() == '"') tag = tag.substr(1, tag.size() - 2);
    return parse_int(tag, "If-Match");
  }
  if (body.contains("revision")) return body_field<std::int64_t>(body, "revision");
  throw Error(ErrorCode::revision_required, "mutations require the document revision (If-Match or \"revision\")",
              "revision");
}

Span body_span(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw Error(ErrorCode::invalid_argument, std::string("missing field '") + name + "'", name);
  try {
    return span_from_json(*it);
  } catch (const Error&) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid span '") + name + "'", name);
  }
}

Box body_box(const json& body) {
  auto it = body.find("box");
  if (it == body.end()) throw Error(ErrorCode::invalid_argument, "missing field 'box'", "box");
  try {
    return box_from_json(*it);
  } catch (const Error&) {
    throw Error(ErrorCode::invalid_argument, "invalid box", "box");
  }
}

const Frame& resolve_frame(const Lexicon& lex, const json& value) {
  const Frame* f = nullptr;
  if (value.is_string()) f = lex.frame_by_name(value.get<std::string>());
  if (value.is_number_integer()) f = lex.frame(FrameId{value.get<std::int64_t>()});
  if (f == nullptr) throw Error(ErrorCode::unknown_frame, "unknown frame " + value.dump(), "frame");
  return *f;
}

FeId resolve_fe(const Lexicon& lex, const Frame& frame, const json& value) {
  if (value.is_number_integer()) return FeId{value.get<std::int64_t>()};
  if (value.is_string()) {
    const std::string name = value.get<std::string>();
    if (const FrameElement* fe = lex.fe_by_name(frame.id, name)) return fe->id;
    for (const auto& fe : lex.fes()) {
      if (fe.name == name) {
        throw Error(ErrorCode::fe_not_in_frame, "frame element " + name + " does not belong to frame " + frame.name,
                    "fe");
      }
    }
  }
  throw Error(ErrorCode::unknown_fe, "unknown frame element " + value.dump(), "fe");
}

// LU id, or "lemma.pos" naming exactly one LU.
std::optional<LuId> resolve_lu(const Lexicon& lex, const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return LuId{it->get<std::int64_t>()};
  if (it->is_string()) {
    const std::string text = it->get<std::string>();
    const auto dot = text.rfind('.');
    if (dot != std::string::npos) {
      if (auto pos = parse_pos(text.substr(dot + 1))) {
        auto lus = lex.lus_by_lemma(text.substr(0, dot), *pos);
        if (lus.size() == 1) return lus.front()->id;
        if (lus.size() > 1) throw Error(ErrorCode::invalid_argument, "ambiguous lexical unit " + text, name);
      }
    }
  }
  throw Error(ErrorCode::unknown_lu, "unknown lexical unit " + it->dump(), name);
}

TargetRef body_target(const json& body) {
  auto it = body.find("target");
  if (it == body.end()) throw Error(ErrorCode::invalid_argument, "missing field 'target'", "target");
  try {
    return target_from_json(*it);
  } catch (const Error&) {
    throw Error(ErrorCode::invalid_argument, "target must be {\"kind\": \"entity\"|\"object\", \"id\": n}", "target");
  }
}

std::optional<Layer> body_layer(const json& body) {
  const auto name = body_field<std::string>(body, "layer");
  auto layer = parse_layer(name);
  if (!layer) throw Error(ErrorCode::unknown_layer, "unknown layer '" + name + "'", "layer");
  return layer;
}

template <typename T>
json json_list(const std::vector<T>& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

}  // namespace

struct ApiServer::Impl {
  Workspace& ws;
  ApiConfig config;
  httplib::Server server;

  Impl(Workspace& w, ApiConfig c) : ws(w), config(std::move(c)) { routes(); }

  template <typename F>
  httplib::Server::Handler wrap(F fn) {
    return [this, fn](const Request& req, Response& res) {
      try {
        authorize(req);
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const json::exception& e) {
        send_error(res, Error(ErrorCode::invalid_argument, e.what()));
      } catch (const std::exception& e) {
        send_error(res, Error(ErrorCode::io_error, e.what()));
      }
    };
  }

  void authorize(const Request& req) const {
    if (config.token.empty()) return;
    if (req.get_header_value("Authorization") != "Bearer " + config.token) {
      throw Error(ErrorCode::unauthorized, "missing or invalid bearer token");
    }
  }

  static std::string corpus(const Request& req) { return req.path_params.at("c"); }
  static std::string doc(const Request& req) { return req.path_params.at("d"); }

  void routes() {
    const std::string api = "/api/v1";
    const std::string docp = api + "/corpora/:c/docs/:d";
    const Lexicon& lex = ws.lexicon();

    server.Get(api + "/health", [](const Request&, Response& res) { send_json(res, json{{"status", "ok"}}); });

    server.Get(api + "/frames", wrap([&lex](const Request& req, Response& res) {
      if (req.has_param("name")) {
        const std::string name = req.get_param_value("name");
        const Frame* f = lex.frame_by_name(name);
        if (f == nullptr) throw Error(ErrorCode::not_found, "unknown frame " + name, "name");
        send_json(res, to_json(lex, *f));
        return;
      }
      json frames = json::array();
      for (const auto& f : lex.frames()) frames.push_back(json{{"id", raw(f.id)}, {"name", f.name}});
      send_json(res, frames);
    }));

    server.Get(api + "/frames/:name/fes", wrap([&lex](const Request& req, Response& res) {
      const std::string name = req.path_params.at("name");
      const Frame* f = lex.frame_by_name(name);
      if (f == nullptr) throw Error(ErrorCode::not_found, "unknown frame " + name, "name");
      json fes = json::array();
      for (const FrameElement* fe : lex.fes_of_frame(f->id)) fes.push_back(to_json(*fe));
      send_json(res, fes);
    }));

    server.Get(api + "/lus", wrap([&lex](const Request& req, Response& res) {
      std::optional<PartOfSpeech> pos;
      if (req.has_param("pos")) {
        pos = parse_pos(req.get_param_value("pos"));
        if (!pos) throw Error(ErrorCode::invalid_argument, "unknown part of speech", "pos");
      }
      json lus = json::array();
      if (req.has_param("lemma")) {
        for (const LexicalUnit* lu : lex.lus_by_lemma(req.get_param_value("lemma"), pos)) lus.push_back(to_json(lex, *lu));
      } else {
        for (const auto& lu : lex.lus()) {
          if (!pos || lu.pos == *pos) lus.push_back(to_json(lex, lu));
        }
      }
      send_json(res, lus);
    }));

    server.Get(api + "/corpora", wrap([this](const Request&, Response& res) { send_json(res, ws.corpora()); }));

    server.Post(api + "/corpora", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto name = body_field<std::string>(body, "name");
      ws.create_corpus(name);
      send_json(res, json{{"name", name}}, 201);
    }));

    server.Get(api + "/corpora/:c/docs", wrap([this](const Request& req, Response& res) {
      send_json(res, ws.documents(corpus(req)));
    }));

    server.Post(api + "/corpora/:c/import-static", wrap([this](const Request& req, Response& res) {
      const auto summary = ws.import_static(corpus(req), req.body);
      send_json(res,
                json{{"documents", summary.documents}, {"chains", summary.chains}, {"orphan_boxes", summary.orphan_boxes}},
                201);
    }));

    server.Post(api + "/corpora/:c/import-video", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      VideoImport input;
      input.source.id = body_field<std::string>(body, "id");
      input.source.media_ref = body.value("media_ref", input.source.id);
      input.source.fps = body.value("fps", kDefaultFps);
      input.source.width = body_field<int>(body, "width");
      input.source.height = body_field<int>(body, "height");
      input.source.frame_count = body.value("frame_count", std::int64_t{0});
      input.source.first_object_id = body.value("first_object_id", std::int64_t{1});
      input.transcript = body_field<std::string>(body, "transcript");
      input.subtitles = body.value("subtitles", std::string());
      input.detections = body.value("detections", std::string());
      input.pause_threshold_ms = body.value("pause_threshold_ms", std::int64_t{700});
      input.merge.duplicate_jaccard = body.value("duplicate_jaccard", 0.8);
      const auto result = ws.import_video(corpus(req), input);
      send_revisioned(res, json{{"id", result.value}}, result.revision, 201);
    }));

    server.Post(api + "/corpora/:c/import", wrap([this](const Request& req, Response& res) {
      const auto result = ws.import_xml(corpus(req), req.body);
      send_revisioned(res, json{{"id", result.value}}, result.revision, 201);
    }));

    server.Get(docp, wrap([this](const Request& req, Response& res) {
      const auto d = ws.document(corpus(req), doc(req));
      send_revisioned(res, to_json(d.value), d.revision);
    }));

    server.Get(docp + "/export", wrap([this](const Request& req, Response& res) {
      res.set_content(ws.export_xml(corpus(req), doc(req)), "application/xml");
    }));

    server.Get(docp + "/validate", wrap([this](const Request& req, Response& res) {
      send_json(res, json{{"problems", ws.validate(corpus(req), doc(req))}});
    }));

    server.Post(docp + "/preannotate", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto result = ws.preannotate(corpus(req), doc(req), required_revision(req, body));
      json mappings = json::array();
      for (const auto& m : result.value.cv_mappings) {
        mappings.push_back(json{{"class_label", m.class_label},
                                {"lu_ref", m.lu_ref ? json(raw(*m.lu_ref)) : json(nullptr)},
                                {"status", m.mapped() ? "mapped" : "unmapped"}});
      }
      send_revisioned(res,
                      json{{"count", result.value.candidates.size()},
                           {"ambiguous", result.value.ambiguous},
                           {"candidates", json_list(result.value.candidates)},
                           {"cv_mappings", std::move(mappings)}},
                      result.revision);
    }));

    // Drafts
    server.Get(docp + "/drafts", wrap([this](const Request& req, Response& res) {
      const auto d = ws.document(corpus(req), doc(req));
      send_revisioned(res, json{{"drafts", json_list(d.value.drafts.drafts())}}, d.revision);
    }));

    auto apply_draft_edit = [this](const Request& req, Response& res, const json& body, const DraftEdit& edit) {
      const auto result = ws.edit_draft(corpus(req), doc(req), path_int(req, "id"), edit, required_revision(req, body));
      json out{{"sentence", result.value ? to_json(*result.value) : json(nullptr)}};
      const auto d = ws.document(corpus(req), doc(req));
      out["drafts"] = json_list(d.value.drafts.drafts());
      send_revisioned(res, std::move(out), result.revision);
    };

    server.Patch(docp + "/drafts/:id", wrap([apply_draft_edit](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto op = body_field<std::string>(body, "op");
      DraftEdit edit;
      if (op == "split_at") {
        edit = draft_edit::SplitAt{body_field<std::size_t>(body, "word_index")};
      } else if (op == "merge_with_next") {
        edit = draft_edit::MergeWithNext{};
      } else if (op == "retime") {
        edit = draft_edit::Retime{body_field<std::size_t>(body, "word_index"), body_field<std::int64_t>(body, "start_ms"),
                                  body_field<std::int64_t>(body, "end_ms")};
      } else if (op == "set_text") {
        edit = draft_edit::SetText{body_field<std::size_t>(body, "word_index"), body_field<std::string>(body, "text")};
      } else if (op == "finalize") {
        edit = draft_edit::Finalize{};
      } else {
        throw Error(ErrorCode::invalid_argument, "unknown draft edit '" + op + "'", "op");
      }
      apply_draft_edit(req, res, body, edit);
    }));

    server.Post(docp + "/drafts/:id/finalize", wrap([apply_draft_edit](const Request& req, Response& res) {
      apply_draft_edit(req, res, parse_body(req), draft_edit::Finalize{});
    }));

    // Detections
    server.Get(docp + "/detections", wrap([this](const Request& req, Response& res) {
      const auto d = ws.document(corpus(req), doc(req));
      send_revisioned(res, json{{"detections", json_list(d.value.detections)}}, d.revision);
    }));

    server.Post(docp + "/detections/:id/accept", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto result =
          ws.accept_detection(corpus(req), doc(req), path_int(req, "id"), required_revision(req, body));
      send_revisioned(res, json{{"object", to_json(result.value)}}, result.revision, 201);
    }));

    server.Post(docp + "/detections/:id/reject", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto result =
          ws.reject_detection(corpus(req), doc(req), path_int(req, "id"), required_revision(req, body));
      send_revisioned(res, json{{"detection", to_json(result.value)}}, result.revision);
    }));

    // Objects
    server.Get(docp + "/objects", wrap([this](const Request& req, Response& res) {
      const auto d = ws.document(corpus(req), doc(req));
      send_revisioned(res, json{{"objects", json_list(d.value.tracks.tracks())}}, d.revision);
    }));

    server.Get(docp + "/objects/:id/box", wrap([this](const Request& req, Response& res) {
      if (!req.has_param("frame")) throw Error(ErrorCode::invalid_argument, "missing query parameter 'frame'", "frame");
      const std::int64_t frame = parse_int(req.get_param_value("frame"), "frame");
      const auto d = ws.document(corpus(req), doc(req));
      const auto box = box_at_frame(d.value.tracks.get(path_int(req, "id")), frame);
      send_json(res, json{{"frame", frame}, {"box", box ? to_json(*box) : json(nullptr)}});
    }));

    server.Post(docp + "/objects", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto result = ws.create_object(corpus(req), doc(req), body_field<std::int64_t>(body, "frame_index"),
                                           body_box(body), required_revision(req, body));
      send_revisioned(res, json{{"object", to_json(result.value)}}, result.revision, 201);
    }));

    server.Patch(docp + "/objects/:id", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto op = body_field<std::string>(body, "op");
      TrackEdit edit;
      if (op == "set_keyframe") {
        edit = track_edit::SetKeyframe{body_field<std::int64_t>(body, "frame_index"), body_box(body)};
      } else if (op == "auto_track") {
        edit = track_edit::AutoTrack{body_field<std::int64_t>(body, "until_frame")};
      } else if (op == "pause") {
        edit = track_edit::Pause{};
      } else if (op == "resume") {
        edit = track_edit::Resume{body_field<std::int64_t>(body, "frame_index"), body_box(body)};
      } else if (op == "end") {
        edit = track_edit::End{};
      } else {
        throw Error(ErrorCode::invalid_argument, "unknown object edit '" + op + "'", "op");
      }
      const auto result =
          ws.edit_object(corpus(req), doc(req), path_int(req, "id"), edit, required_revision(req, body));
      send_revisioned(res, json{{"object", to_json(result.value)}}, result.revision);
    }));

    auto delete_target = [this](TargetKind kind) {
      return wrap([this, kind](const Request& req, Response& res) {
        const json body = parse_body(req);
        const auto result = ws.delete_target(corpus(req), doc(req), TargetRef{kind, path_int(req, "id")},
                                             required_revision(req, body));
        send_revisioned(res,
                        json{{"removed_image_annotations", result.value.image_annotations},
                             {"removed_correlations", result.value.correlations}},
                        result.revision);
      });
    };
    server.Delete(docp + "/objects/:id", delete_target(TargetKind::object));
    server.Delete(docp + "/entities/:id", delete_target(TargetKind::entity));

    // Annotations
    server.Post(docp + "/annotations", wrap([this, &lex](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto type = body_field<std::string>(body, "type");
      const auto revision = required_revision(req, body);
      const Frame& frame = resolve_frame(lex, body.contains("frame") ? body.at("frame") : json(nullptr));
      if (type == "text") {
        const auto result = ws.create_text_as(corpus(req), doc(req), body_field<std::int64_t>(body, "sentence_ref"),
                                              body_span(body, "target"), frame.id, revision);
        send_revisioned(res, json{{"annotation_set", to_json(result.value)}}, result.revision, 201);
      } else if (type == "image") {
        const FeId fe = resolve_fe(lex, frame, body.contains("fe") ? body.at("fe") : json(nullptr));
        const auto result = ws.annotate_target(corpus(req), doc(req), body_target(body), frame.id, fe,
                                               resolve_lu(lex, body, "cv_name"), revision);
        send_revisioned(res, json{{"image_annotation", to_json(result.value)}}, result.revision, 201);
      } else {
        throw Error(ErrorCode::invalid_argument, "annotation type must be 'text' or 'image'", "type");
      }
    }));

    server.Patch(docp + "/annotations/:id", wrap([this, &lex](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto op = body_field<std::string>(body, "op");
      const std::int64_t as_id = path_int(req, "id");
      AsEdit edit;
      if (op == "set_label") {
        edit = as_edit::SetLabel{*body_layer(body), body_span(body, "span"), body_field<std::string>(body, "label")};
      } else if (op == "remove_label") {
        edit = as_edit::RemoveLabel{*body_layer(body), body_span(body, "span")};
      } else if (op == "mark_ni") {
        const auto current = ws.document(corpus(req), doc(req)).value;
        FeId fe{};
        const json fe_value = body.contains("fe") ? body.at("fe") : json(nullptr);
        if (fe_value.is_string()) {
          const TextAnnotationSet* set = nullptr;
          for (const auto& s : current.text_sets) {
            if (s.id == as_id) set = &s;
          }
          if (set == nullptr) throw Error(ErrorCode::unknown_annotation, "unknown annotation set " + std::to_string(as_id));
          const Frame* frame = lex.frame(set->frame);
          if (frame == nullptr) throw Error(ErrorCode::unknown_frame, "unknown frame", "frame");
          fe = resolve_fe(lex, *frame, fe_value);
        } else {
          fe = FeId{body_field<std::int64_t>(body, "fe")};
        }
        edit = as_edit::MarkNi{fe, body_field<std::string>(body, "ni_type")};
      } else {
        throw Error(ErrorCode::invalid_argument, "unknown annotation edit '" + op + "'", "op");
      }
      const auto result = ws.edit_text_as(corpus(req), doc(req), as_id, edit, required_revision(req, body));
      send_revisioned(res, json{{"annotation_set", to_json(result.value)}}, result.revision);
    }));

    server.Post(docp + "/correlations", wrap([this](const Request& req, Response& res) {
      const json body = parse_body(req);
      const auto result = ws.correlate(corpus(req), doc(req), body_target(body),
                                       body_field<std::int64_t>(body, "sentence_ref"), body_span(body, "span"),
                                       required_revision(req, body));
      send_revisioned(res, json{{"correlation", to_json(result.value)}}, result.revision, 201);
    }));

    if (!config.static_dir.empty()) server.set_mount_point("/", config.static_dir.string());
  }
};

ApiServer::ApiServer(Workspace& workspace, ApiConfig config)
    : impl_(std::make_unique<Impl>(workspace, std::move(config))) {}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int ApiServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace charonette
