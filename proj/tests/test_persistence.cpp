#include <doctest.h>

#include <random>

#include "hanjakit/error.hpp"
#include "hanjakit/persistence.hpp"
#include "records.hpp"
#include "support.hpp"

using namespace hanjakit;
using json = nlohmann::json;

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

// Manually advanced clock for session and timestamp tests.
struct FakeClock {
  std::shared_ptr<Timestamp> now =
      std::make_shared<Timestamp>(parse_rfc3339("2026-01-01T00:00:00Z"));
  std::function<Timestamp()> fn() const {
    return [now = now] { return *now; };
  }
  void advance(std::chrono::microseconds d) { *now += d; }
};

StoreOptions fast_options() {
  StoreOptions o;
  o.password_cost = PasswordCost::minimum();
  return o;
}

// Minimal RFC 4180 reader for checking the exporter.
std::vector<std::vector<std::string>> parse_csv(std::string_view s) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') {
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
      ++i;
    } else {
      field += c;
    }
    any = true;
  }
  if (any && rows.back().empty()) rows.pop_back();
  return rows;
}

}  // namespace

TEST_SUITE("persistence") {

TEST_CASE("timestamps") {
  const auto t = parse_rfc3339("2026-10-16T08:30:00.123456Z");
  CHECK(format_rfc3339(t) == "2026-10-16T08:30:00.123456Z");
  CHECK(parse_rfc3339("2026-10-16T10:30:00.123456+02:00") == t);
  CHECK(format_rfc3339(parse_rfc3339("1970-01-01T00:00:00Z")) ==
        "1970-01-01T00:00:00.000000Z");
  for (const auto* bad : {"2026-10-16", "2026-10-16T08:30:00", "yesterday",
                          "2026-13-01T00:00:00Z", "2026-10-16T08:30:00.5X"}) {
    CAPTURE(bad);
    CHECK(error_of([&] { parse_rfc3339(bad); }) == Errc::kShapeMismatch);
  }
  std::mt19937_64 rng(51);
  for (int i = 0; i < 1000; ++i) {
    const Timestamp x(std::chrono::microseconds(static_cast<long long>(rng() % 250'000'000'000'000'000ULL)));
    REQUIRE(parse_rfc3339(format_rfc3339(x)) == x);
  }
}

TEST_CASE("payload validation") {
  const auto& reg = PunctLabelRegistry::builtin();
  CHECK_NOTHROW(validate_payload(Task::kPunctuate, "天地", json{"None", "Period"}, reg));
  CHECK(error_of([&] { validate_payload(Task::kPunctuate, "天地", json{"None"}, reg); }) ==
        Errc::kShapeMismatch);
  CHECK(error_of([&] { validate_payload(Task::kPunctuate, "天地", json{"None", "Bad"}, reg); }) ==
        Errc::kShapeMismatch);
  CHECK_NOTHROW(validate_payload(Task::kNer, "天地", json{"B-LOC", "I-LOC"}, reg));
  CHECK(error_of([&] { validate_payload(Task::kNer, "天地", json{"B-LOC", "X"}, reg); }) ==
        Errc::kShapeMismatch);
  CHECK(error_of([&] { validate_payload(Task::kTranslate, "天地", json{1}, reg); }) ==
        Errc::kShapeMismatch);
  CHECK_NOTHROW(validate_payload(Task::kTranslate, "天地", "heaven and earth", reg));
}

TEST_CASE("JSON export round trip") {
  std::mt19937_64 rng(52);
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < 100; ++i) records.push_back(testing::random_record(rng, i + 1));
  const auto bytes = export_json(records);
  CHECK(import_json(bytes) == records);
  CHECK(export_json(import_json(bytes)) == bytes);
  // Field order is fixed.
  const auto first = bytes.find("\"id\"");
  CHECK(first < bytes.find("\"user_id\""));
  CHECK(bytes.find("\"updated_at\"") > bytes.find("\"created_at\""));
  CHECK(error_of([] { import_json("{\"not\": \"an array\"}"); }) == Errc::kShapeMismatch);
  CHECK(error_of([] { import_json("[{\"id\": 1}]"); }) == Errc::kShapeMismatch);
}

TEST_CASE("CSV export") {
  std::mt19937_64 rng(53);
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < 30; ++i) records.push_back(testing::random_record(rng, i + 1));
  const auto csv = export_csv(records);
  const auto rows = parse_csv(csv);
  REQUIRE(rows.size() == records.size() + 1);
  CHECK(rows[0] == std::vector<std::string>{"id", "user_id", "task", "input_text",
                                            "model_output", "edited_output", "params",
                                            "created_at", "updated_at"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& row = rows[i + 1];
    REQUIRE(row.size() == 9);
    CHECK(std::stoll(row[0]) == records[i].id);
    CHECK(row[3] == records[i].input_text);
    CHECK(json::parse(row[4]) == records[i].model_output);
    CHECK(json::parse(row[5]) == records[i].edited_output);
    CHECK(json::parse(row[6]) == records[i].params);
    CHECK(parse_rfc3339(row[7]) == records[i].created_at);
  }
  CHECK(export_csv(records, true).rfind("\xEF\xBB\xBFid,", 0) == 0);
}

TEST_CASE("password hashing") {
  const auto h = hash_password("correct horse", PasswordCost::minimum());
  CHECK(h.rfind("$argon2id$", 0) == 0);
  CHECK(verify_password(h, "correct horse"));
  CHECK_FALSE(verify_password(h, "wrong horse"));
  CHECK_FALSE(verify_password("garbage", "x"));
}

TEST_CASE("users and sessions") {
  FakeClock clock;
  auto options = fast_options();
  options.clock = clock.fn();
  options.session_lifetime = std::chrono::hours(1);
  Store store(":memory:", options);

  const auto alice = store.register_user("alice@example.org", "pw-alice", "Alice");
  CHECK(alice.id > 0);
  CHECK(error_of([&] { store.register_user("alice@example.org", "x", ""); }) ==
        Errc::kEmailTaken);
  CHECK(store.find_user(alice.id)->display_name == "Alice");
  CHECK(error_of([&] { store.login("alice@example.org", "nope"); }) ==
        Errc::kInvalidCredentials);
  CHECK(error_of([&] { store.login("bob@example.org", "pw"); }) == Errc::kInvalidCredentials);

  const auto session = store.login("alice@example.org", "pw-alice");
  CHECK(session.token.size() == 64);
  CHECK(store.authenticate(session.token) == alice.id);
  CHECK_FALSE(store.authenticate("deadbeef"));

  // Each use renews the session.
  clock.advance(std::chrono::minutes(50));
  CHECK(store.authenticate(session.token) == alice.id);
  clock.advance(std::chrono::minutes(50));
  CHECK(store.authenticate(session.token) == alice.id);
  clock.advance(std::chrono::minutes(61));
  CHECK_FALSE(store.authenticate(session.token));

  const auto again = store.login("alice@example.org", "pw-alice");
  store.logout(again.token);
  CHECK_FALSE(store.authenticate(again.token));
}

TEST_CASE("records are private and ordered") {
  FakeClock clock;
  auto options = fast_options();
  options.clock = clock.fn();
  Store store(":memory:", options);
  const auto a = store.register_user("a@example.org", "pw", "");
  const auto b = store.register_user("b@example.org", "pw", "");

  const auto r1 = store.create_record(a.id, Task::kPunctuate, "天地", json{"None", "Period"},
                                      {{"mode", "Simple"}});
  // Same clock reading: timestamps still strictly increase.
  const auto r2 = store.create_record(a.id, Task::kTranslate, "天", "heaven", json::object());
  CHECK(r2.created_at > r1.created_at);
  CHECK(r1.edited_output == r1.model_output);
  CHECK(error_of([&] {
          store.create_record(a.id, Task::kNer, "天地", json{"O"}, json::object());
        }) == Errc::kShapeMismatch);
  CHECK(error_of([&] {
          store.create_record(999, Task::kTranslate, "天", "x", json::object());
        }) == Errc::kNotFound);

  CHECK(error_of([&] { store.get_record(r1.id, b.id); }) == Errc::kForbidden);
  CHECK(error_of([&] { store.update_edit(r1.id, b.id, json{"None", "None"}); }) ==
        Errc::kForbidden);
  CHECK(error_of([&] { store.get_record(12345, a.id); }) == Errc::kNotFound);
  CHECK(store.list_records(b.id).empty());

  const auto edited = store.update_edit(r1.id, a.id, json{"Comma", "Period"});
  CHECK(edited.edited_output == json{"Comma", "Period"});
  CHECK(edited.model_output == r1.model_output);
  CHECK(edited.updated_at > r1.updated_at);
  CHECK(edited.created_at == r1.created_at);
  CHECK(error_of([&] { store.update_edit(r1.id, a.id, json{"Comma"}); }) ==
        Errc::kShapeMismatch);

  const auto listed = store.list_records(a.id);
  REQUIRE(listed.size() == 2);
  CHECK(listed[0] == edited);
  CHECK(listed[1] == r2);
  CHECK(import_json(store.export_records(a.id, ExportFormat::kJson)) == listed);
  CHECK(import_json(store.export_records(b.id, ExportFormat::kJson)).empty());
}

TEST_CASE("records survive reopening the database") {
  testing::TempDir dir;
  const auto path = dir / "store.db";
  std::vector<AnnotationRecord> before;
  std::string token;
  {
    Store store(path, fast_options());
    const auto u = store.register_user("c@example.org", "pw", "C");
    token = store.login("c@example.org", "pw").token;
    before.push_back(store.create_record(u.id, Task::kNer, "李舜臣",
                                         json{"B-PER", "I-PER", "I-PER"}, json::object()));
    before.push_back(store.update_edit(before[0].id, u.id, json{"O", "O", "O"}));
    before.erase(before.begin());
  }
  Store reopened(path, fast_options());
  const auto user = reopened.authenticate(token);
  REQUIRE(user);
  CHECK(reopened.list_records(*user) == before);
  CHECK(error_of([&] { reopened.register_user("c@example.org", "pw", ""); }) ==
        Errc::kEmailTaken);
}

TEST_CASE("unopenable database") {
  CHECK(error_of([] { Store("/nonexistent-dir/x/y.db", fast_options()); }) ==
        Errc::kStorageFailure);
}

}  // TEST_SUITE
