#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "frames/annotation.hpp"
#include "frames/prompt.hpp"

namespace httplib {
class Server;
}

namespace frames {

class BindFailure : public FramesError {
 public:
  explicit BindFailure(const std::string& message) : FramesError("BindFailure", message) {}
};

struct ServerOptions {
  std::filesystem::path static_dir;  // served at "/" when set
  std::vector<FrameDefinition> definitions = default_frame_definitions();
  FrameOrder frame_order = kDefaultFrameOrder;
  std::string default_annotator = "annotator";
};

// HTTP+JSON annotation API:
//   GET  /api/batches                 batch summaries with completion counts
//   GET  /api/batches/{id}            item ids with per-item done flags
//   GET  /api/items/{id}              text shown, program, frame definitions, questions
//   POST /api/annotations             201 with the stored annotation; 400/422 on bad input
//   GET  /api/annotations?item_id=&annotator_id=
//   GET  /api/progress
// Errors carry {"error": code, "message": text}.
class AnnotationServer {
 public:
  AnnotationServer(const ItemCatalog& catalog, std::vector<AnnotationBatch> batches,
                   AnnotationStore& store, std::shared_ptr<Clock> clock, ServerOptions options = {});
  ~AnnotationServer();

  // Binds; port 0 picks a free port. Returns the bound port or throws BindFailure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  void install_routes();

  const ItemCatalog& catalog_;
  std::vector<AnnotationBatch> batches_;
  AnnotationStore& store_;
  std::shared_ptr<Clock> clock_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace frames
