// hanjakit: batch processing, single-task runs, and the HTTP gateway.
#include <httplib.h>

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "hanjakit/batch.hpp"
#include "hanjakit/gateway.hpp"
#include "hanjakit/persistence.hpp"
#include "hanjakit/pipeline.hpp"
#include "hanjakit/text.hpp"

namespace {

using json = nlohmann::json;
using namespace hanjakit;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config_path;
  std::string backend;
};

struct TaskArgs {
  std::string text;
  std::string file;
  std::string mode = "Comprehensive";
  std::string target = "Korean";
  std::string server;
  std::string token;
};

Config load_config(const Common& common) {
  std::string path = common.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("HANJAKIT_CONFIG")) path = env;
  }
  if (path.empty()) path = HANJAKIT_DEFAULT_CONFIG;
  auto config = Config::load(path);
  config.apply_env();
  return config;
}

std::optional<std::string_view> backend_of(const Common& common) {
  if (common.backend.empty()) return std::nullopt;
  return std::string_view(common.backend);
}

std::string input_text(const TaskArgs& args) {
  if (!args.file.empty()) {
    std::ifstream in(args.file, std::ios::binary);
    if (!in) throw Error(Errc::kNotFound, "cannot read " + args.file);
    std::stringstream buf;
    buf << in.rdbuf();
    return trim(buf.str());
  }
  return args.text;
}

// Bad flag values are configuration errors (exit 2).
template <typename Fn>
auto flag_value(const char* flag, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(Errc::kInvalidConfig, std::string(flag) + ": " + e.what());
  }
}

template <typename Parse>
auto parse_list(const char* flag, const std::string& list, Parse&& parse) {
  std::vector<decltype(parse(std::string_view()))> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(flag_value(flag, [&] { return parse(item); }));
  }
  return out;
}

std::vector<Language> parse_targets(const std::string& list) {
  return parse_list("--target", list, [](std::string_view s) { return parse_language(s); });
}

std::vector<Task> parse_tasks(const std::string& list) {
  return parse_list("--tasks", list, [](std::string_view s) { return parse_task(s); });
}

RenderMode parse_mode(const std::string& name) {
  return flag_value("--mode", [&] { return parse_render_mode(name); });
}

// Client mode: forward one request to a running gateway.
int remote_call(const TaskArgs& args, const std::string& method,
                const std::string& path, const json& body) {
  httplib::Client client(args.server);
  client.set_read_timeout(std::chrono::seconds(120));
  std::string token = args.token;
  if (token.empty()) {
    if (const char* env = std::getenv("HANJAKIT_TOKEN")) token = env;
  }
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  if (path == "/api/translate") {
    std::string pending;
    bool failed = false;
    httplib::Request req;
    req.method = "POST";
    req.path = path;
    req.headers = headers;
    req.set_header("Content-Type", "application/json");
    req.body = body.dump();
    int status = 0;
    req.response_handler = [&](const httplib::Response& r) {
      status = r.status;
      return true;
    };
    std::string error_body;
    req.content_receiver = [&](const char* data, std::size_t n, uint64_t,
                               uint64_t) {
      if (status != 200) {
        error_body.append(data, n);
        return true;
      }
      pending.append(data, n);
      for (auto nl = pending.find('\n'); nl != std::string::npos;
           nl = pending.find('\n')) {
        const auto msg = json::parse(pending.substr(0, nl), nullptr, false);
        pending.erase(0, nl + 1);
        if (msg.is_discarded()) continue;
        if (msg.contains("error")) {
          std::cerr << msg["error"].dump() << "\n";
          failed = true;
        } else {
          std::cout << msg.value("delta", "") << std::flush;
        }
      }
      return true;
    };
    auto res = client.send(req);
    if (!res) {
      std::cerr << "gateway unreachable: " << httplib::to_string(res.error())
                << "\n";
      return kExitFailure;
    }
    if (status != 200) {
      std::cerr << error_body << "\n";
      return kExitFailure;
    }
    std::cout << "\n";
    return failed ? kExitFailure : kExitOk;
  }

  auto res = method == "GET"
                 ? client.Get(path, headers)
                 : client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    std::cerr << "gateway unreachable: " << httplib::to_string(res.error())
              << "\n";
    return kExitFailure;
  }
  const auto reply = json::parse(res->body, nullptr, false);
  (res->status == 200 ? std::cout : std::cerr)
      << (reply.is_discarded() ? res->body : reply.dump(2)) << "\n";
  return res->status == 200 ? kExitOk : kExitFailure;
}

int run_task(const std::string& task, const Common& common,
             const TaskArgs& args) {
  const auto text = input_text(args);
  if (!args.server.empty()) {
    json body = {{"text", text}};
    if (!common.backend.empty()) body["backend"] = common.backend;
    if (task == "punctuate") {
      body["mode"] = args.mode;
      return remote_call(args, "POST", "/api/punctuate", body);
    }
    if (task == "ner") return remote_call(args, "POST", "/api/ner", body);
    if (task == "translate") {
      body["target"] = args.target;
      return remote_call(args, "POST", "/api/translate", body);
    }
    return remote_call(args, "GET",
                       "/api/glossary?text=" + percent_encode(text), {});
  }

  const auto services = Services::load(load_config(common));
  if (task == "punctuate") {
    const auto r = punctuate(*services, text, parse_mode(args.mode),
                             backend_of(common));
    std::cout << to_json(r).dump(2) << "\n";
  } else if (task == "ner") {
    std::cout << to_json(recognize_entities(*services, text, backend_of(common)))
                     .dump(2)
              << "\n";
  } else if (task == "translate") {
    for (const auto target : parse_targets(args.target)) {
      auto job = make_translation_job(*services, text, target,
                                      backend_of(common));
      translate(*services, job,
                [](const StreamDelta& d) { std::cout << d.text << std::flush; },
                backend_of(common));
      std::cout << "\n";
    }
  } else {
    json out = json::array();
    if (!text.empty()) {
      services->check_input(text);
      for (const auto& e : services->glossary->annotate(text)) {
        out.push_back(to_json(e));
      }
    }
    std::cout << out.dump(2) << "\n";
  }
  return kExitOk;
}

int run_serve(const Common& common) {
  const auto config = load_config(common);
  const auto services = Services::load(config);
  StoreOptions store_options;
  store_options.session_lifetime = config.session_lifetime;
  store_options.registry = services->registry;
  auto store = std::make_shared<Store>(config.database, store_options);
  Gateway gateway(services, store);
  const int port = gateway.bind(config.bind_address, config.port);

  // Shut down cleanly on SIGINT/SIGTERM.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::jthread waiter([&gateway, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    gateway.stop();
  });

  std::cout << "listening on http://" << config.bind_address << ":" << port
            << std::endl;
  gateway.run();
  // Wake the waiter if the server stopped for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return kExitOk;
}

int run_batch_command(const Common& common,
                      const std::vector<std::string>& inputs,
                      const std::string& tasks, const std::string& mode,
                      const std::string& targets, const std::string& out,
                      std::size_t jobs) {
  BatchManifest manifest;
  for (const auto& in : inputs) manifest.inputs.emplace_back(in);
  manifest.tasks = parse_tasks(tasks);
  manifest.mode = parse_mode(mode);
  manifest.targets = parse_targets(targets);
  manifest.output_dir = out;
  manifest.jobs = jobs;
  if (!common.backend.empty()) manifest.backend = common.backend;
  const auto services = Services::load(load_config(common));
  const auto summary = run_batch(*services, manifest);
  std::cout << summary.to_json().dump(2) << "\n";
  return summary.failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hanja document processing: punctuation, entities, translation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "Configuration file (JSON)");
  app.add_option("--backend", common.backend, "Backend name from the config");

  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");

  auto* batch = app.add_subcommand("batch", "Process files or directories");
  std::vector<std::string> batch_inputs;
  std::string batch_tasks = "punctuate,ner,translate";
  std::string batch_mode = "Comprehensive";
  std::string batch_targets = "Korean";
  std::string batch_out;
  std::size_t batch_jobs = 0;
  batch->add_option("inputs", batch_inputs, "Input files or directories")
      ->required();
  batch->add_option("--tasks", batch_tasks,
                    "Comma-separated tasks: punctuate,ner,translate");
  batch->add_option("--mode", batch_mode,
                    "Comprehensive, Simple or SimpleWithSpace");
  batch->add_option("--target", batch_targets, "Korean, English or both");
  batch->add_option("--out", batch_out, "Output directory")->required();
  batch->add_option("--jobs", batch_jobs, "Worker threads (0: all cores)");

  TaskArgs task_args;
  std::vector<std::pair<std::string, CLI::App*>> tasks;
  for (const auto* name : {"punctuate", "ner", "translate", "glossary"}) {
    auto* sub = app.add_subcommand(name, std::string("Run ") + name +
                                             " on one text");
    auto* text = sub->add_option("--text", task_args.text, "Input text");
    auto* file = sub->add_option("--file", task_args.file, "Input file");
    text->excludes(file);
    sub->add_option("--mode", task_args.mode, "Render mode (punctuate)");
    sub->add_option("--target", task_args.target, "Target language(s)");
    sub->add_option("--server", task_args.server,
                    "Send the request to a running gateway instead");
    sub->add_option("--token", task_args.token,
                    "Bearer token for --server (or HANJAKIT_TOKEN)");
    tasks.emplace_back(name, sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(common);
    if (*batch) {
      return run_batch_command(common, batch_inputs, batch_tasks, batch_mode,
                               batch_targets, batch_out, batch_jobs);
    }
    for (const auto& [name, sub] : tasks) {
      if (*sub) return run_task(name, common, task_args);
    }
  } catch (const Error& e) {
    std::cerr << "hanjakit: " << to_string(e.code()) << ": " << e.what()
              << "\n";
    const bool config = e.code() == Errc::kInvalidConfig ||
                        e.code() == Errc::kInvalidRegistry ||
                        e.code() == Errc::kUnknownBackend;
    return config ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "hanjakit: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
