#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hanjakit/punctuation.hpp"

struct sqlite3;

namespace hanjakit {

using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

// "2026-10-16T08:30:00.123456Z"; always UTC with microseconds.
std::string format_rfc3339(Timestamp t);
// Accepts the form above, with or without fractional seconds, and numeric
// offsets. Throws Error(kShapeMismatch) on anything else.
Timestamp parse_rfc3339(std::string_view s);

enum class Task { kPunctuate, kNer, kTranslate };
std::string_view to_string(Task t);
Task parse_task(std::string_view s);  // throws kShapeMismatch

struct User {
  std::int64_t id = 0;
  std::string email;
  std::string password_hash;
  std::string display_name;
  Timestamp created_at;
};

struct Session {
  std::string token;  // handed to the client once; only a digest is stored
  std::int64_t user_id = 0;
  Timestamp expires_at;
};

struct AnnotationRecord {
  std::int64_t id = 0;
  std::int64_t user_id = 0;
  Task task = Task::kPunctuate;
  std::string input_text;
  nlohmann::json model_output;
  nlohmann::json edited_output;
  nlohmann::json params = nlohmann::json::object();
  Timestamp created_at;
  Timestamp updated_at;

  friend bool operator==(const AnnotationRecord&,
                         const AnnotationRecord&) = default;
};

// Payload shapes: punctuate -> array of registered label ids, ner -> array
// of IOB2 tag strings, both one per input character; translate -> string.
// Throws kShapeMismatch.
void validate_payload(Task task, std::string_view input_text,
                      const nlohmann::json& payload,
                      const PunctLabelRegistry& registry);

nlohmann::json to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const nlohmann::json& j);

enum class ExportFormat { kJson, kCsv };
ExportFormat parse_export_format(std::string_view s);  // throws kShapeMismatch

// Array of records in the order given, fixed field names, UTF-8.
std::string export_json(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> import_json(std::string_view bytes);
// RFC 4180 with CRLF line ends; payloads are JSON text inside cells.
std::string export_csv(std::span<const AnnotationRecord> records,
                       bool with_bom = false);

// Argon2id via libsodium. Costs are tunable so tests can use the minimum.
struct PasswordCost {
  unsigned long long ops;
  std::size_t mem;
  static PasswordCost interactive();
  static PasswordCost minimum();
};
std::string hash_password(std::string_view password,
                          PasswordCost cost = PasswordCost::interactive());
bool verify_password(std::string_view hash, std::string_view password);

struct StoreOptions {
  std::chrono::seconds session_lifetime = std::chrono::hours(24 * 30);
  PasswordCost password_cost = PasswordCost::interactive();
  std::function<Timestamp()> clock;  // defaults to the system clock
  std::shared_ptr<const PunctLabelRegistry> registry;  // defaults to builtin
};

// SQLite-backed store for users, sessions and annotation records. All
// methods are safe to call from multiple threads.
class Store {
 public:
  // `path` may be ":memory:". Creates the schema if needed.
  // Throws kStorageFailure.
  explicit Store(const std::filesystem::path& path, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  User register_user(std::string_view email, std::string_view password,
                     std::string_view display_name);  // kEmailTaken
  std::optional<User> find_user(std::int64_t id) const;
  Session login(std::string_view email,
                std::string_view password);  // kInvalidCredentials
  // User id for a live session; renews the expiry on success.
  std::optional<std::int64_t> authenticate(std::string_view token);
  void logout(std::string_view token);

  AnnotationRecord create_record(std::int64_t user_id, Task task,
                                 std::string_view input_text,
                                 const nlohmann::json& model_output,
                                 const nlohmann::json& params);
  AnnotationRecord update_edit(std::int64_t record_id, std::int64_t user_id,
                               const nlohmann::json& edited_output);
  // kNotFound, kForbidden.
  AnnotationRecord get_record(std::int64_t record_id,
                              std::int64_t user_id) const;
  // Sorted by created_at, then id.
  std::vector<AnnotationRecord> list_records(std::int64_t user_id) const;
  std::string export_records(std::int64_t user_id, ExportFormat format,
                             bool with_bom = false) const;

 private:
  Timestamp now() const;
  Timestamp next_timestamp(Timestamp floor);

  struct Closer {
    void operator()(sqlite3* db) const;
  };
  std::unique_ptr<sqlite3, Closer> db_;
  StoreOptions options_;
  mutable std::mutex mu_;
  Timestamp last_issued_{};
};

}  // namespace hanjakit
