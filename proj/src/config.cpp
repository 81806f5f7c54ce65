#include "hanjakit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "hanjakit/error.hpp"

namespace hanjakit {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(Errc::kInvalidConfig, what);
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::size_t parse_count(const std::string& s, const char* name) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    config_error(std::string(name) + " must be a non-negative integer");
  }
}

BackendConfig parse_backend(const json& j, const std::filesystem::path& base) {
  BackendConfig b;
  auto& d = b.descriptor;
  d.name = j.at("name").get<std::string>();
  const auto kind = j.value("kind", std::string("reference"));
  if (kind == "reference") {
    d.kind = BackendDescriptor::Kind::kReference;
  } else if (kind == "remote") {
    d.kind = BackendDescriptor::Kind::kRemote;
  } else {
    config_error("backend '" + d.name + "' has unknown kind '" + kind + "'");
  }
  if (j.contains("capabilities")) {
    for (const auto& c : j.at("capabilities")) {
      d.capabilities.insert(parse_capability(c.get<std::string>()));
    }
  } else {
    d.capabilities = {Capability::kPunctuate, Capability::kNer,
                      Capability::kTranslate};
  }
  if (j.contains("endpoint")) d.endpoint = j.at("endpoint").get<std::string>();
  b.punct_rules = resolve(base, j.value("punct_rules", std::string()));
  b.gazetteer = resolve(base, j.value("gazetteer", std::string()));
  b.fragment_chars = j.value("fragment_chars", std::size_t{4});
  b.fragment_delay = std::chrono::milliseconds(j.value("fragment_delay_ms", 0));
  b.remote.max_in_flight = j.value("max_in_flight", std::size_t{32});
  b.remote.connect_timeout =
      std::chrono::seconds(j.value("connect_timeout_s", 5));
  b.remote.read_timeout = std::chrono::seconds(j.value("read_timeout_s", 60));
  d.validate();
  return b;
}

}  // namespace

Config Config::parse(std::string_view json_text,
                     const std::filesystem::path& base_dir) {
  const auto j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    config_error("configuration is not a JSON object");
  }
  Config c;
  try {
    c.bind_address = j.value("bind", c.bind_address);
    c.port = j.value("port", c.port);
    c.input_limit = j.value("input_limit", c.input_limit);
    c.worker_threads = j.value("worker_threads", c.worker_threads);
    c.database = resolve(base_dir, j.value("database", c.database.string()));
    c.registry = resolve(base_dir, j.value("registry", std::string()));
    c.readings = resolve(base_dir, j.value("readings", std::string()));
    c.cedict = resolve(base_dir, j.value("cedict", std::string()));
    c.link_template = j.value("link_template", c.link_template);
    c.session_lifetime = std::chrono::hours(
        24 * j.value("session_lifetime_days", 30));
    if (j.contains("window")) {
      c.window_size = j["window"].value("size", c.window_size);
      c.window_stride = j["window"].value("stride", c.window_stride);
    }
    c.translate_chunk_chars =
        j.value("translate_chunk_chars", c.translate_chunk_chars);
    c.default_backend = j.value("default_backend", c.default_backend);
    if (j.contains("backends")) {
      for (const auto& b : j.at("backends")) {
        c.backends.push_back(parse_backend(b, base_dir));
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("bad configuration value: ") + e.what());
  }
  if (c.backends.empty()) {
    BackendConfig ref;
    ref.descriptor.name = "reference";
    ref.descriptor.capabilities = {Capability::kPunctuate, Capability::kNer,
                                   Capability::kTranslate};
    c.backends.push_back(ref);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse(buf.str(), base);
}

void Config::apply_env(const EnvLookup& lookup) {
  if (auto v = lookup("HANJAKIT_BIND")) bind_address = *v;
  if (auto v = lookup("HANJAKIT_PORT")) {
    port = static_cast<int>(parse_count(*v, "HANJAKIT_PORT"));
  }
  if (auto v = lookup("HANJAKIT_INPUT_LIMIT")) {
    input_limit = parse_count(*v, "HANJAKIT_INPUT_LIMIT");
  }
  if (auto v = lookup("HANJAKIT_DATABASE")) database = *v;
  if (auto v = lookup("HANJAKIT_REGISTRY")) registry = *v;
  if (auto v = lookup("HANJAKIT_READINGS")) readings = *v;
  if (auto v = lookup("HANJAKIT_CEDICT")) cedict = *v;
  if (auto v = lookup("HANJAKIT_LINK_TEMPLATE")) link_template = *v;
  if (auto v = lookup("HANJAKIT_SESSION_DAYS")) {
    session_lifetime =
        std::chrono::hours(24 * parse_count(*v, "HANJAKIT_SESSION_DAYS"));
  }
  if (auto v = lookup("HANJAKIT_DEFAULT_BACKEND")) default_backend = *v;
}

void Config::apply_env() {
  apply_env([](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name)) return std::string(v);
    return std::nullopt;
  });
}

}  // namespace hanjakit
