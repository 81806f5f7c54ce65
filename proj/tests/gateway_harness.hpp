#pragma once

#include <httplib.h>

#include <chrono>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hanjakit/gateway.hpp"
#include "hanjakit/persistence.hpp"
#include "hanjakit/pipeline.hpp"
#include "support.hpp"

namespace hanjakit::testing {

struct HarnessOptions {
  std::size_t input_limit = 20000;
  std::size_t worker_threads = 64;
  std::chrono::milliseconds fragment_delay{0};
  std::filesystem::path database = ":memory:";
};

// A gateway on an ephemeral port backed by the shipped reference config.
class GatewayHarness {
 public:
  explicit GatewayHarness(HarnessOptions o = {}) {
    auto config = Config::load(data_dir() / "config.json");
    config.input_limit = o.input_limit;
    config.worker_threads = o.worker_threads;
    for (auto& b : config.backends) b.fragment_delay = o.fragment_delay;
    services = Services::load(config);
    StoreOptions store_options;
    store_options.password_cost = PasswordCost::minimum();
    store = std::make_shared<Store>(o.database, store_options);
    gateway = std::make_unique<Gateway>(services, store);
    port = gateway->start("127.0.0.1", 0);
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(std::chrono::seconds(30));
    return c;
  }

  // Registers `email` and returns a bearer token.
  std::string login(const std::string& email) const {
    auto c = client();
    const nlohmann::json creds = {{"email", email}, {"password", "pw-" + email}};
    c.Post("/api/auth/register", creds.dump(), "application/json");
    auto res = c.Post("/api/auth/login", creds.dump(), "application/json");
    if (!res || res->status != 200) return {};
    return nlohmann::json::parse(res->body).at("token").get<std::string>();
  }

  static httplib::Headers bearer(const std::string& token) {
    return {{"Authorization", "Bearer " + token}};
  }

  std::shared_ptr<const Services> services;
  std::shared_ptr<Store> store;
  std::unique_ptr<Gateway> gateway;
  int port = 0;
};

struct StreamResult {
  int status = 0;
  std::vector<nlohmann::json> events;
  std::chrono::steady_clock::duration first_event{};
  bool transport_ok = false;
};

// POSTs to /api/translate and collects NDJSON events. `stop_after` > 0 hangs
// up after that many events.
inline StreamResult post_translate(const GatewayHarness& h, const std::string& token,
                                   const nlohmann::json& body, std::size_t stop_after = 0) {
  auto c = h.client();
  StreamResult out;
  httplib::Request req;
  req.method = "POST";
  req.path = "/api/translate";
  req.headers = GatewayHarness::bearer(token);
  req.set_header("Content-Type", "application/json");
  req.body = body.dump();
  std::string pending;
  std::string error_body;
  const auto t0 = std::chrono::steady_clock::now();
  req.response_handler = [&](const httplib::Response& r) {
    out.status = r.status;
    return true;
  };
  req.content_receiver = [&](const char* data, std::size_t n, uint64_t, uint64_t) {
    if (out.status != 200) {
      error_body.append(data, n);
      return true;
    }
    pending.append(data, n);
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n')) {
      if (out.events.empty()) out.first_event = std::chrono::steady_clock::now() - t0;
      out.events.push_back(nlohmann::json::parse(pending.substr(0, nl)));
      pending.erase(0, nl + 1);
      if (stop_after > 0 && out.events.size() >= stop_after) return false;
    }
    return true;
  };
  auto res = c.send(req);
  out.transport_ok = static_cast<bool>(res);
  if (out.status != 200 && !error_body.empty()) {
    out.events.push_back(nlohmann::json::parse(error_body, nullptr, false));
  }
  return out;
}

inline std::string joined_deltas(const StreamResult& r) {
  std::string s;
  for (const auto& e : r.events) s += e.value("delta", "");
  return s;
}

}  // namespace hanjakit::testing
