#include <doctest.h>

#include <map>

#include "hanjakit/config.hpp"
#include "hanjakit/error.hpp"
#include "hanjakit/pipeline.hpp"
#include "support.hpp"

using namespace hanjakit;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kInvalidState;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto c = Config::parse("{}", "/srv");
  CHECK(c.bind_address == "127.0.0.1");
  CHECK(c.input_limit == 20000);
  CHECK(c.database == "/srv/hanjakit.db");
  CHECK(c.registry.empty());
  REQUIRE(c.backends.size() == 1);
  CHECK(c.backends[0].descriptor.name == "reference");
  CHECK(c.backends[0].descriptor.supports(Capability::kTranslate));
}

TEST_CASE("full file") {
  const auto c = Config::parse(R"({
    "bind": "0.0.0.0", "port": 9000, "input_limit": 500, "worker_threads": 8,
    "database": "db/app.db", "registry": "/etc/labels.tsv",
    "readings": "readings.tsv", "cedict": "cedict.u8",
    "link_template": "https://dict.example/{q}", "session_lifetime_days": 7,
    "window": {"size": 128, "stride": 64}, "translate_chunk_chars": 100,
    "default_backend": "model",
    "backends": [
      {"name": "ref", "kind": "reference", "capabilities": ["punctuate"],
       "fragment_chars": 2, "fragment_delay_ms": 5},
      {"name": "model", "kind": "remote", "endpoint": "http://gpu:8000/v1",
       "max_in_flight": 4, "read_timeout_s": 30}
    ]})",
                               "/opt/conf");
  CHECK(c.bind_address == "0.0.0.0");
  CHECK(c.port == 9000);
  CHECK(c.database == "/opt/conf/db/app.db");
  CHECK(c.registry == "/etc/labels.tsv");
  CHECK(c.readings == "/opt/conf/readings.tsv");
  CHECK(c.session_lifetime == std::chrono::hours(24 * 7));
  CHECK(c.window_size == 128);
  CHECK(c.window_stride == 64);
  CHECK(c.translate_chunk_chars == 100);
  REQUIRE(c.backends.size() == 2);
  CHECK(c.backends[0].descriptor.capabilities == std::set{Capability::kPunctuate});
  CHECK(c.backends[0].fragment_delay == std::chrono::milliseconds(5));
  CHECK(c.backends[1].descriptor.kind == BackendDescriptor::Kind::kRemote);
  CHECK(c.backends[1].descriptor.endpoint == "http://gpu:8000/v1");
  CHECK(c.backends[1].remote.max_in_flight == 4);
  CHECK(c.backends[1].remote.read_timeout == std::chrono::seconds(30));
}

TEST_CASE("invalid files") {
  for (const auto* bad : {
           "not json", "[]", R"({"port": "eighty"})",
           R"({"backends": [{"name": "x", "kind": "magic"}]})",
           R"({"backends": [{"name": "x", "kind": "remote"}]})",
           R"({"backends": [{"name": "x", "capabilities": ["dance"]}]})",
           R"({"backends": [{"kind": "reference"}]})",
       }) {
    CAPTURE(bad);
    CHECK(error_of([&] { Config::parse(bad, "."); }) == Errc::kInvalidConfig);
  }
  CHECK(error_of([] { Config::load("/no/such/config.json"); }) == Errc::kInvalidConfig);
}

TEST_CASE("environment overrides") {
  auto c = Config::parse("{}", ".");
  const std::map<std::string, std::string> env = {
      {"HANJAKIT_BIND", "0.0.0.0"}, {"HANJAKIT_PORT", "1234"},
      {"HANJAKIT_INPUT_LIMIT", "99"}, {"HANJAKIT_DATABASE", "/tmp/x.db"},
      {"HANJAKIT_SESSION_DAYS", "2"}, {"HANJAKIT_DEFAULT_BACKEND", "other"},
      {"HANJAKIT_LINK_TEMPLATE", "https://x/{q}"}};
  c.apply_env([&](const char* name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  CHECK(c.bind_address == "0.0.0.0");
  CHECK(c.port == 1234);
  CHECK(c.input_limit == 99);
  CHECK(c.database == "/tmp/x.db");
  CHECK(c.session_lifetime == std::chrono::hours(48));
  CHECK(c.default_backend == "other");
  CHECK(c.link_template == "https://x/{q}");

  CHECK(error_of([&] {
          c.apply_env([](const char* name) -> std::optional<std::string> {
            if (std::string_view(name) == "HANJAKIT_PORT") return "12ab";
            return std::nullopt;
          });
        }) == Errc::kInvalidConfig);
}

TEST_CASE("shipped config loads") {
  const auto c = Config::load(testing::data_dir() / "config.json");
  const auto services = Services::load(c);
  CHECK(services->backends.default_name() == "reference");
  CHECK(services->glossary->readings.size() > 100);
  CHECK(services->glossary->cedict.char_count() > 50);
}

TEST_CASE("service startup errors") {
  auto c = Config::parse("{}", ".");
  c.default_backend = "missing";
  CHECK(error_of([&] { Services::load(c); }) == Errc::kInvalidConfig);
  c = Config::parse("{}", ".");
  c.window_stride = c.window_size + 1;
  CHECK(error_of([&] { Services::load(c); }) == Errc::kInvalidConfig);
  c = Config::parse("{}", ".");
  c.readings = "/no/such/readings.tsv";
  CHECK(error_of([&] { Services::load(c); }) == Errc::kInvalidConfig);
  c = Config::parse("{}", ".");
  c.link_template = "https://no-placeholder/";
  CHECK(error_of([&] { Services::load(c); }) == Errc::kInvalidConfig);

  testing::TempDir dir;
  const auto bad_registry = dir / "labels.tsv";
  testing::write_file(bad_registry, "Comma\t，\tComma\nPeriod\t，\tPeriod\n");
  c = Config::parse("{}", ".");
  c.registry = bad_registry;
  CHECK(error_of([&] { Services::load(c); }) == Errc::kInvalidRegistry);
}

}  // TEST_SUITE
