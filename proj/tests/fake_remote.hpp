#pragma once

#include <httplib.h>

#include <atomic>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>

#include "hanjakit/text.hpp"

namespace hanjakit::testing {

// Stand-in for a remote inference server under /v1.
class FakeRemote {
 public:
  enum class Mode { kOk, kShortLabels, kOrgTags, kUnknownLabel, kTruncated, kDropped, kHttpError };

  FakeRemote() {
    using nlohmann::json;
    server_.Post("/v1/label", [this](const httplib::Request& req, httplib::Response& res) {
      ++label_calls;
      if (mode == Mode::kHttpError) {
        res.status = 500;
        return;
      }
      const auto body = json::parse(req.body);
      const auto chars = split_graphemes(body.at("text").get<std::string>());
      json labels = json::array();
      const bool ner = body.at("task") == "ner";
      for (const auto& c : chars) {
        if (ner) {
          if (mode == Mode::kOrgTags) labels.push_back("B-ORG");
          else labels.push_back(c == "李" ? "B-PER" : c == "舜" || c == "臣" ? "I-PER" : "O");
        } else {
          if (mode == Mode::kUnknownLabel) labels.push_back("Bogus");
          else labels.push_back(c == "也" ? "Period" : "None");
        }
      }
      if (mode == Mode::kShortLabels && !labels.empty()) labels.erase(labels.size() - 1);
      res.set_content(json{{"v", 1}, {"labels", labels}}.dump(), "application/json");
    });
    server_.Post("/v1/translate", [this](const httplib::Request& req, httplib::Response& res) {
      last_prompt = json::parse(req.body).at("prompt").get<std::string>();
      if (mode == Mode::kHttpError) {
        res.status = 503;
        return;
      }
      const auto m = mode.load();
      res.set_chunked_content_provider(
          "application/x-ndjson", [m](std::size_t, httplib::DataSink& sink) {
            auto line = [&](const json& j) {
              const auto s = j.dump() + "\n";
              sink.write(s.data(), s.size());
            };
            line({{"delta", "remote "}, {"done", false}});
            line({{"delta", "text"}, {"done", false}});
            if (m == Mode::kDropped) return false;
            if (m != Mode::kTruncated) line({{"delta", ""}, {"done", true}});
            sink.done();
            return true;
          });
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeRemote() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<Mode> mode{Mode::kOk};
  std::atomic<int> label_calls{0};
  std::string last_prompt;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace hanjakit::testing
