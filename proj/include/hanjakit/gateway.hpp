#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "hanjakit/error.hpp"
#include "hanjakit/persistence.hpp"
#include "hanjakit/pipeline.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace hanjakit {

// Error body sent by every endpoint: {"error": {"code", "message"}}.
struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;

  nlohmann::json to_json() const;
};

ApiError api_error(Errc code, std::string message);

// HTTP front end for the pipeline, glossary, auth, history and export.
//
//   POST  /api/auth/register            {email, password, display_name?}
//   POST  /api/auth/login               {email, password} -> {token}
//   POST  /api/auth/logout
//   POST  /api/punctuate                {text, mode?, backend?, save?}
//   POST  /api/ner                      {text, backend?, save?}
//   POST  /api/ner/spans                {length, spans, add? | remove_at?}
//   POST  /api/translate                {text, target, backend?, save?}
//                                       -> NDJSON {delta, done}
//   GET   /api/glossary?text=
//   POST  /api/annotations              {task, input_text, model_output, params?}
//   GET   /api/annotations
//   GET   /api/annotations/export?format=json|csv[&bom=1]
//   GET   /api/annotations/{id}
//   PATCH /api/annotations/{id}         {edited_output}
//   GET   /api/health
class Gateway {
 public:
  Gateway(std::shared_ptr<const Services> services,
          std::shared_ptr<Store> store);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds the socket; port 0 picks a free port. Returns the bound port.
  // Throws Error(kInvalidConfig) when the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves until stop(); requires bind().
  void run();
  // bind() + run() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::shared_ptr<const Services> services_;
  std::shared_ptr<Store> store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace hanjakit
