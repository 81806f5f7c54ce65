#include "hanjakit/gateway.hpp"

#include <httplib.h>

#include <atomic>

#include "hanjakit/text.hpp"

namespace hanjakit {

using json = nlohmann::json;

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";
constexpr const char* kNdjson = "application/x-ndjson; charset=utf-8";

int status_for(Errc code) {
  switch (code) {
    case Errc::kInputTooLarge: return 413;
    case Errc::kUnauthenticated:
    case Errc::kInvalidCredentials: return 401;
    case Errc::kForbidden: return 403;
    case Errc::kNotFound: return 404;
    case Errc::kEmailTaken: return 409;
    case Errc::kBackendUnavailable:
    case Errc::kInvalidBackendResponse:
    case Errc::kStreamTruncated:
    case Errc::kDeltaAfterDone: return 502;
    case Errc::kCancelled: return 503;
    case Errc::kStorageFailure:
    case Errc::kInvalidConfig:
    case Errc::kInvalidState:
    case Errc::kInvalidWindowPlan:
    case Errc::kInvalidRegistry: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, e.http_status, e.to_json());
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, api_error(e.code(), e.what()));
  } catch (const json::exception& e) {
    send_error(res, {"InvalidRequest", e.what(), 400});
  } catch (const std::exception& e) {
    send_error(res, {"Internal", e.what(), 500});
  }
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(Errc::kInvalidRequest, "request body must be a JSON object");
  }
  return body;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(Errc::kInvalidRequest,
                std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_string()) {
    throw Error(Errc::kInvalidRequest,
                std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

std::optional<std::string_view> as_view(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::string_view(*s);
}

RenderMode request_mode(const json& body) {
  const auto name = optional_string(body, "mode").value_or("Comprehensive");
  try {
    return parse_render_mode(name);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidRequest, e.what());
  }
}

std::int64_t path_id(const httplib::Request& req) {
  try {
    return std::stoll(req.matches[1].str());
  } catch (const std::exception&) {
    throw Error(Errc::kNotFound, "no such record");
  }
}

}  // namespace

json ApiError::to_json() const {
  return {{"error", {{"code", code}, {"message", message}}}};
}

ApiError api_error(Errc code, std::string message) {
  return {std::string(to_string(code)), std::move(message), status_for(code)};
}

Gateway::Gateway(std::shared_ptr<const Services> services,
                 std::shared_ptr<Store> store)
    : services_(std::move(services)),
      store_(std::move(store)),
      server_(std::make_unique<httplib::Server>()) {
  const auto workers = std::max<std::size_t>(services_->config.worker_threads, 1);
  server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  // SO_REUSEADDR only: the library default (SO_REUSEPORT) would let a second
  // server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server_->set_payload_max_length(services_->config.input_limit * 16 + (1 << 20));
  install_routes();
}

Gateway::~Gateway() { stop(); }

int Gateway::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(Errc::kInvalidConfig,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void Gateway::run() { server_->listen_after_bind(); }

int Gateway::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
  return bound;
}

void Gateway::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void Gateway::install_routes() {
  auto& srv = *server_;
  const auto services = services_;
  const auto store = store_;

  auto authed = [store](const httplib::Request& req) -> std::int64_t {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (header.rfind(kBearer, 0) == 0) {
      if (auto user = store->authenticate(header.substr(kBearer.size()))) {
        return *user;
      }
    }
    throw Error(Errc::kUnauthenticated, "missing or invalid bearer token");
  };

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    switch (res.status) {
      case 404: send_error(res, {"NotFound", "no such endpoint", 404}); break;
      case 413: send_error(res, api_error(Errc::kInputTooLarge, "request body too large")); break;
      default:
        send_error(res, {"InvalidRequest", httplib::status_message(res.status),
                         res.status});
    }
  });

  srv.Get("/api/health", [services](const httplib::Request&,
                                    httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"},
               {"backends", services->backends.names()},
               {"default_backend", services->backends.default_name()}});
  });

  srv.Post("/api/auth/register", [store](const httplib::Request& req,
                                         httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const auto user = store->register_user(
          required_string(body, "email"), required_string(body, "password"),
          optional_string(body, "display_name").value_or(""));
      send_json(res, 201,
                {{"id", user.id},
                 {"email", user.email},
                 {"display_name", user.display_name},
                 {"created_at", format_rfc3339(user.created_at)}});
    });
  });

  srv.Post("/api/auth/login", [store](const httplib::Request& req,
                                      httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const auto session = store->login(required_string(body, "email"),
                                        required_string(body, "password"));
      send_json(res, 200,
                {{"token", session.token},
                 {"user_id", session.user_id},
                 {"expires_at", format_rfc3339(session.expires_at)}});
    });
  });

  srv.Post("/api/auth/logout", [store, authed](const httplib::Request& req,
                                               httplib::Response& res) {
    guarded(res, [&] {
      authed(req);
      store->logout(req.get_header_value("Authorization").substr(7));
      send_json(res, 200, {{"ok", true}});
    });
  });

  srv.Post("/api/punctuate", [services, store, authed](
                                 const httplib::Request& req,
                                 httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto body = parse_body(req);
      const auto text = required_string(body, "text");
      const auto mode = request_mode(body);
      const auto backend = optional_string(body, "backend");
      const auto result = punctuate(*services, text, mode, as_view(backend));
      auto out = to_json(result);
      if (body.value("save", false)) {
        out["record_id"] =
            store->create_record(user, Task::kPunctuate, result.text,
                                 result.labels, {{"mode", to_string(mode)}})
                .id;
      }
      send_json(res, 200, out);
    });
  });

  srv.Post("/api/ner", [services, store, authed](const httplib::Request& req,
                                                 httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto body = parse_body(req);
      const auto text = required_string(body, "text");
      const auto backend = optional_string(body, "backend");
      const auto result = recognize_entities(*services, text, as_view(backend));
      auto out = to_json(result);
      if (body.value("save", false)) {
        out["record_id"] = store->create_record(user, Task::kNer, result.text,
                                                tag_strings(result.tags),
                                                json::object())
                               .id;
      }
      send_json(res, 200, out);
    });
  });

  srv.Post("/api/ner/spans", [authed](const httplib::Request& req,
                                      httplib::Response& res) {
    guarded(res, [&] {
      authed(req);
      const auto body = parse_body(req);
      std::size_t length = 0;
      if (body.contains("text")) {
        length = char_count(required_string(body, "text"));
      } else {
        length = body.at("length").get<std::size_t>();
      }
      std::vector<EntitySpan> spans;
      for (const auto& s : body.value("spans", json::array())) {
        spans.push_back(span_from_json(s));
      }
      std::sort(spans.begin(), spans.end(),
                [](const auto& a, const auto& b) { return a.start < b.start; });
      if (!is_valid_span_store(spans, length)) {
        throw Error(Errc::kOverlappingSpans,
                    "spans must be non-empty, disjoint and within the text");
      }
      if (body.contains("add")) {
        spans = add_span(spans, span_from_json(body["add"]), length);
      }
      if (body.contains("remove_at")) {
        spans = remove_span_at(spans, body["remove_at"].get<std::size_t>());
      }
      json out = json::array();
      for (const auto& s : spans) out.push_back(to_json(s));
      send_json(res, 200,
                {{"spans", out},
                 {"tags", tag_strings(encode_iob2(spans, length))}});
    });
  });

  srv.Post("/api/translate", [services, store, authed](
                                 const httplib::Request& req,
                                 httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto body = parse_body(req);
      const auto text = required_string(body, "text");
      const auto target = parse_language(required_string(body, "target"));
      const auto backend = optional_string(body, "backend");
      const bool save = body.value("save", false);
      if (!services->backends.get(as_view(backend))
               .descriptor()
               .supports(Capability::kTranslate)) {
        throw Error(Errc::kBackendUnavailable,
                    "backend cannot translate");
      }
      auto job = std::make_shared<TranslationJob>(
          make_translation_job(*services, text, target, as_view(backend)));

      res.set_chunked_content_provider(
          kNdjson,
          [services, store, job, backend, user, save](
              std::size_t, httplib::DataSink& sink) {
            std::stop_source cancel;
            auto write_line = [&](const json& j) {
              const auto line = j.dump() + "\n";
              if (!sink.is_writable() || !sink.write(line.data(), line.size())) {
                cancel.request_stop();
              }
            };
            try {
              const auto translation = translate(
                  *services, *job,
                  [&](const StreamDelta& d) {
                    if (!d.done) write_line(to_json(d));
                  },
                  as_view(backend), cancel.get_token());
              json last = to_json(StreamDelta{"", true});
              if (save) {
                last["record_id"] =
                    store->create_record(user, Task::kTranslate,
                                         job->source_text(), translation,
                                         {{"target", to_string(job->target())}})
                        .id;
              }
              write_line(last);
            } catch (const Error& e) {
              if (e.code() == Errc::kCancelled) return false;
              auto err = api_error(e.code(), e.what()).to_json();
              err["done"] = true;
              write_line(err);
            } catch (const std::exception& e) {
              write_line({{"error", {{"code", "Internal"}, {"message", e.what()}}},
                          {"done", true}});
            }
            if (cancel.stop_requested()) return false;
            sink.done();
            return true;
          });
    });
  });

  srv.Get("/api/glossary", [services](const httplib::Request& req,
                                      httplib::Response& res) {
    guarded(res, [&] {
      const auto text = req.get_param_value("text");
      json out = json::array();
      if (!text.empty()) {
        services->check_input(text);
        for (const auto& e : services->glossary->annotate(text)) {
          out.push_back(to_json(e));
        }
      }
      send_json(res, 200, out);
    });
  });

  srv.Post("/api/annotations", [store, authed](const httplib::Request& req,
                                               httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto body = parse_body(req);
      if (!body.contains("model_output")) {
        throw Error(Errc::kInvalidRequest, "field 'model_output' is required");
      }
      const auto record = store->create_record(
          user, parse_task(required_string(body, "task")),
          required_string(body, "input_text"), body["model_output"],
          body.value("params", json::object()));
      send_json(res, 201, to_json(record));
    });
  });

  srv.Get("/api/annotations", [store, authed](const httplib::Request& req,
                                              httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      json out = json::array();
      for (const auto& r : store->list_records(user)) out.push_back(to_json(r));
      send_json(res, 200, out);
    });
  });

  srv.Get("/api/annotations/export", [store, authed](
                                         const httplib::Request& req,
                                         httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto format = parse_export_format(
          req.has_param("format") ? req.get_param_value("format") : "json");
      const bool bom = req.get_param_value("bom") == "1";
      res.status = 200;
      const bool is_json = format == ExportFormat::kJson;
      res.set_header("Content-Disposition",
                     is_json ? "attachment; filename=\"annotations.json\""
                             : "attachment; filename=\"annotations.csv\"");
      res.set_content(store->export_records(user, format, bom),
                      is_json ? kJson : "text/csv; charset=utf-8");
    });
  });

  srv.Get(R"(/api/annotations/(\d+))", [store, authed](
                                           const httplib::Request& req,
                                           httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      send_json(res, 200, to_json(store->get_record(path_id(req), user)));
    });
  });

  srv.Patch(R"(/api/annotations/(\d+))", [store, authed](
                                             const httplib::Request& req,
                                             httplib::Response& res) {
    guarded(res, [&] {
      const auto user = authed(req);
      const auto body = parse_body(req);
      if (!body.contains("edited_output")) {
        throw Error(Errc::kInvalidRequest, "field 'edited_output' is required");
      }
      send_json(res, 200,
                to_json(store->update_edit(path_id(req), user,
                                           body["edited_output"])));
    });
  });
}

}  // namespace hanjakit
