#include "frames/annotation_server.hpp"

#include <httplib.h>

#include <set>

namespace frames {
namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, Json{{"error", code}, {"message", message}});
}

std::optional<std::string> query_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

AnnotationServer::AnnotationServer(const ItemCatalog& catalog, std::vector<AnnotationBatch> batches,
                                   AnnotationStore& store, std::shared_ptr<Clock> clock,
                                   ServerOptions options)
    : catalog_(catalog),
      batches_(std::move(batches)),
      store_(store),
      clock_(std::move(clock)),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // silently share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw BindFailure("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationServer::listen() { server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_) server_->stop();
}

void AnnotationServer::install_routes() {
  auto done_items = [this](const std::optional<std::string>& annotator) {
    std::set<std::string> done;
    for (const auto& a : *store_.snapshot()) {
      if (!annotator || a.annotator_id == *annotator) done.insert(a.item_id);
    }
    return done;
  };

  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const FramesError& e) {
      send_error(res, 500, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  });

  server_->Get("/api/batches", [this, done_items](const httplib::Request& req, httplib::Response& res) {
    const auto done = done_items(query_param(req, "annotator_id"));
    Json out = Json::array();
    for (const auto& b : batches_) {
      const auto n_done = std::count_if(b.item_ids.begin(), b.item_ids.end(),
                                        [&](const std::string& id) { return done.count(id) != 0; });
      out.push_back({{"batch_id", b.batch_id},
                     {"program", b.program},
                     {"total", b.item_ids.size()},
                     {"done", n_done}});
    }
    send_json(res, 200, out);
  });

  server_->Get(R"(/api/batches/([^/]+))", [this, done_items](const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    auto it = std::find_if(batches_.begin(), batches_.end(),
                           [&](const AnnotationBatch& b) { return b.batch_id == id; });
    if (it == batches_.end()) return send_error(res, 404, "UnknownBatch", "unknown batch '" + id + "'");
    const auto done = done_items(query_param(req, "annotator_id"));
    Json items = Json::array();
    for (const auto& item_id : it->item_ids) {
      items.push_back({{"item_id", item_id}, {"done", done.count(item_id) != 0}});
    }
    send_json(res, 200, {{"batch_id", it->batch_id}, {"program", it->program}, {"items", items}});
  });

  server_->Get(R"(/api/items/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const auto view = catalog_.find(id);
    if (!view) return send_error(res, 404, "UnknownItem", "unknown item '" + id + "'");
    std::map<Frame, std::string> defs;
    for (const auto& d : options_.definitions) defs[d.frame] = d.definition_text;
    Json frames = Json::array();
    for (Frame f : options_.frame_order) {
      frames.push_back({{"id", frame_id(f)}, {"label", frame_label(f)}, {"definition", defs[f]}});
    }
    Json questions = Json::array();
    for (auto q : annotation_questions()) questions.push_back(q);
    send_json(res, 200,
              {{"item_id", view->item->item_id},
               {"program", view->item->program},
               {"text", view->text},
               {"text_shown", to_string(view->variant)},
               {"language", view->language},
               {"word_count", word_count(view->text)},
               {"frames", frames},
               {"questions", questions}});
  });

  server_->Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return send_error(res, 400, "MalformedJson", e.what());
    }
    Annotation a;
    try {
      a = annotation_from_json(body);
    } catch (const UnknownFrameLabel& e) {
      return send_error(res, 422, e.code(), e.what());
    } catch (const AnnotationError& e) {
      return send_error(res, 400, e.code(), e.what());
    }
    if (a.annotator_id.empty()) {
      a.annotator_id = req.has_header("X-Annotator-Id") ? req.get_header_value("X-Annotator-Id")
                                                        : options_.default_annotator;
    }
    try {
      const auto stored = record_annotation(std::move(a), catalog_, store_, *clock_);
      send_json(res, 201, to_json(stored));
    } catch (const AnnotationError& e) {
      send_error(res, 422, e.code(), e.what());
    } catch (const IoError& e) {
      send_error(res, 500, e.code(), e.what());
    }
  });

  server_->Get("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
    const auto item = query_param(req, "item_id");
    const auto annotator = query_param(req, "annotator_id");
    Json out = Json::array();
    for (const auto& a : store_.query(item ? std::optional<std::string_view>(*item) : std::nullopt,
                                      annotator ? std::optional<std::string_view>(*annotator) : std::nullopt)) {
      out.push_back(to_json(a));
    }
    send_json(res, 200, out);
  });

  server_->Get("/api/progress", [this, done_items](const httplib::Request& req, httplib::Response& res) {
    const auto done = done_items(query_param(req, "annotator_id"));
    std::size_t total = 0, n_done = 0;
    Json per_batch = Json::array();
    for (const auto& b : batches_) {
      std::size_t d = 0;
      for (const auto& id : b.item_ids) d += done.count(id);
      total += b.item_ids.size();
      n_done += d;
      per_batch.push_back({{"batch_id", b.batch_id}, {"done", d}, {"total", b.item_ids.size()}});
    }
    send_json(res, 200, {{"total", total}, {"done", n_done}, {"batches", per_batch}});
  });

  if (!options_.static_dir.empty()) server_->set_mount_point("/", options_.static_dir.string());
}

}  // namespace frames
