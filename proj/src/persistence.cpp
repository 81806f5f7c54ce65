#include "hanjakit/persistence.hpp"

#include <sodium.h>
#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>

#include "hanjakit/entities.hpp"
#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

using json = nlohmann::json;

namespace {

[[noreturn]] void shape_error(const std::string& what) {
  throw Error(Errc::kShapeMismatch, what);
}

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error(Errc::kStorageFailure, "libsodium failed to initialize");
}

std::string to_hex(const unsigned char* data, std::size_t len) {
  std::string out(len * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, len);
  out.pop_back();
  return out;
}

std::string token_digest(std::string_view token) {
  unsigned char digest[crypto_generichash_BYTES];
  crypto_generichash(digest, sizeof digest,
                     reinterpret_cast<const unsigned char*>(token.data()),
                     token.size(), nullptr, 0);
  return to_hex(digest, sizeof digest);
}

std::int64_t micros(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_micros(std::int64_t us) {
  return Timestamp(std::chrono::microseconds(us));
}

// Thin RAII wrapper over a prepared statement.
class Statement {
 public:
  Statement(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()),
                           &stmt_, nullptr) != SQLITE_OK) {
      throw Error(Errc::kStorageFailure, sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int idx, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, idx, v));
    return *this;
  }
  Statement& bind(int idx, std::string_view v) {
    check(sqlite3_bind_text(stmt_, idx, v.data(), static_cast<int>(v.size()),
                            SQLITE_TRANSIENT));
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) {
      throw Error(Errc::kStorageFailure,
                  std::string("constraint: ") + sqlite3_errmsg(db_));
    }
    throw Error(Errc::kStorageFailure, sqlite3_errmsg(db_));
  }

  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    const int n = sqlite3_column_bytes(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p),
                           static_cast<std::size_t>(n))
             : std::string();
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw Error(Errc::kStorageFailure, sqlite3_errmsg(db_));
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "sqlite error";
    sqlite3_free(err);
    throw Error(Errc::kStorageFailure, msg);
  }
}

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!committed_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    committed_ = true;
  }

 private:
  sqlite3* db_;
  bool committed_ = false;
};

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS users (
  id            INTEGER PRIMARY KEY AUTOINCREMENT,
  email         TEXT NOT NULL UNIQUE,
  password_hash TEXT NOT NULL,
  display_name  TEXT NOT NULL,
  created_at    INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
  token_digest TEXT PRIMARY KEY,
  user_id      INTEGER NOT NULL REFERENCES users(id) ON DELETE CASCADE,
  expires_at   INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS records (
  id            INTEGER PRIMARY KEY AUTOINCREMENT,
  user_id       INTEGER NOT NULL REFERENCES users(id) ON DELETE CASCADE,
  task          TEXT NOT NULL,
  input_text    TEXT NOT NULL,
  model_output  TEXT NOT NULL,
  edited_output TEXT NOT NULL,
  params        TEXT NOT NULL,
  created_at    INTEGER NOT NULL,
  updated_at    INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS records_by_user
  ON records(user_id, created_at, id);
)sql";

constexpr const char* kRecordColumns =
    "id, user_id, task, input_text, model_output, edited_output, params, "
    "created_at, updated_at";

AnnotationRecord read_record(const Statement& st) {
  AnnotationRecord r;
  r.id = st.int64(0);
  r.user_id = st.int64(1);
  r.task = parse_task(st.text(2));
  r.input_text = st.text(3);
  r.model_output = json::parse(st.text(4));
  r.edited_output = json::parse(st.text(5));
  r.params = json::parse(st.text(6));
  r.created_at = from_micros(st.int64(7));
  r.updated_at = from_micros(st.int64(8));
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) shape_error("truncated timestamp");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      shape_error("bad timestamp '" + std::string(s) + "'");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
  const auto us = micros(t);
  auto secs = us / 1'000'000;
  auto frac = us % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  const auto tt = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
  return buf;
}

Timestamp parse_rfc3339(std::string_view s) {
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != 't') || s[13] != ':' || s[16] != ':') {
    shape_error("bad timestamp '" + std::string(s) + "'");
  }
  std::tm tm{};
  tm.tm_year = parse_digits(s, 0, 4) - 1900;
  tm.tm_mon = parse_digits(s, 5, 2) - 1;
  tm.tm_mday = parse_digits(s, 8, 2);
  tm.tm_hour = parse_digits(s, 11, 2);
  tm.tm_min = parse_digits(s, 14, 2);
  tm.tm_sec = parse_digits(s, 17, 2);
  const std::chrono::year_month_day date{std::chrono::year(tm.tm_year + 1900),
                                        std::chrono::month(tm.tm_mon + 1),
                                        std::chrono::day(tm.tm_mday)};
  if (!date.ok() || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) {
    shape_error("timestamp out of range '" + std::string(s) + "'");
  }
  std::size_t pos = 19;
  std::int64_t frac_us = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 6) frac_us = frac_us * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) shape_error("bad timestamp fraction");
    for (int d = digits; d < 6; ++d) frac_us *= 10;
  }
  std::int64_t offset_s = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos + 6 == s.size() && (s[pos] == '+' || s[pos] == '-') &&
             s[pos + 3] == ':') {
    const int sign = s[pos] == '+' ? 1 : -1;
    offset_s = sign * (parse_digits(s, pos + 1, 2) * 3600 +
                       parse_digits(s, pos + 4, 2) * 60);
    pos += 6;
  } else {
    shape_error("timestamp without zone '" + std::string(s) + "'");
  }
  if (pos != s.size()) shape_error("trailing timestamp text");
  const std::int64_t secs = timegm(&tm) - offset_s;
  return from_micros(secs * 1'000'000 + frac_us);
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kPunctuate: return "punctuate";
    case Task::kNer: return "ner";
    case Task::kTranslate: return "translate";
  }
  return "punctuate";
}

Task parse_task(std::string_view s) {
  for (auto t : {Task::kPunctuate, Task::kNer, Task::kTranslate}) {
    if (s == to_string(t)) return t;
  }
  shape_error("unknown task '" + std::string(s) + "'");
}

void validate_payload(Task task, std::string_view input_text,
                      const json& payload, const PunctLabelRegistry& registry) {
  if (task == Task::kTranslate) {
    if (!payload.is_string()) shape_error("translate payload must be a string");
    return;
  }
  if (!payload.is_array()) {
    shape_error(std::string(to_string(task)) + " payload must be an array");
  }
  const auto n = char_count(input_text);
  if (payload.size() != n) {
    shape_error("payload has " + std::to_string(payload.size()) +
                " entries for " + std::to_string(n) + " characters");
  }
  for (const auto& item : payload) {
    if (!item.is_string()) shape_error("payload entries must be strings");
    const auto& s = item.get_ref<const std::string&>();
    if (task == Task::kPunctuate) {
      if (registry.find(s) == nullptr) {
        shape_error("'" + s + "' is not a punctuation label");
      }
    } else {
      try {
        parse_tag(s);
      } catch (const Error&) {
        shape_error("'" + s + "' is not an IOB2 tag");
      }
    }
  }
}

json to_json(const AnnotationRecord& r) {
  // Key order is fixed by the export schema.
  json j = json::object();
  j["id"] = r.id;
  j["user_id"] = r.user_id;
  j["task"] = to_string(r.task);
  j["input_text"] = r.input_text;
  j["model_output"] = r.model_output;
  j["edited_output"] = r.edited_output;
  j["params"] = r.params;
  j["created_at"] = format_rfc3339(r.created_at);
  j["updated_at"] = format_rfc3339(r.updated_at);
  return j;
}

AnnotationRecord record_from_json(const json& j) {
  try {
    AnnotationRecord r;
    r.id = j.at("id").get<std::int64_t>();
    r.user_id = j.at("user_id").get<std::int64_t>();
    r.task = parse_task(j.at("task").get<std::string>());
    r.input_text = j.at("input_text").get<std::string>();
    r.model_output = j.at("model_output");
    r.edited_output = j.at("edited_output");
    r.params = j.at("params");
    r.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
    r.updated_at = parse_rfc3339(j.at("updated_at").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    shape_error(std::string("bad record: ") + e.what());
  }
}

ExportFormat parse_export_format(std::string_view s) {
  if (s == "json") return ExportFormat::kJson;
  if (s == "csv") return ExportFormat::kCsv;
  shape_error("unknown export format '" + std::string(s) + "'");
}

std::string export_json(std::span<const AnnotationRecord> records) {
  // nlohmann::json sorts object keys; write objects by hand to keep the
  // schema order.
  std::string out = "[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0) out += ",";
    out += "{\"id\":" + json(r.id).dump();
    out += ",\"user_id\":" + json(r.user_id).dump();
    out += ",\"task\":" + json(to_string(r.task)).dump();
    out += ",\"input_text\":" + json(r.input_text).dump();
    out += ",\"model_output\":" + r.model_output.dump();
    out += ",\"edited_output\":" + r.edited_output.dump();
    out += ",\"params\":" + r.params.dump();
    out += ",\"created_at\":" + json(format_rfc3339(r.created_at)).dump();
    out += ",\"updated_at\":" + json(format_rfc3339(r.updated_at)).dump();
    out += "}";
  }
  out += "]";
  return out;
}

std::vector<AnnotationRecord> import_json(std::string_view bytes) {
  const auto doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    shape_error("export document must be a JSON array");
  }
  std::vector<AnnotationRecord> out;
  out.reserve(doc.size());
  for (const auto& j : doc) out.push_back(record_from_json(j));
  return out;
}

std::string export_csv(std::span<const AnnotationRecord> records,
                       bool with_bom) {
  std::string out = with_bom ? "\xEF\xBB\xBF" : "";
  out +=
      "id,user_id,task,input_text,model_output,edited_output,params,"
      "created_at,updated_at\r\n";
  for (const auto& r : records) {
    out += std::to_string(r.id) + ',' + std::to_string(r.user_id) + ',' +
           std::string(to_string(r.task)) + ',' + csv_field(r.input_text) +
           ',' + csv_field(r.model_output.dump()) + ',' +
           csv_field(r.edited_output.dump()) + ',' +
           csv_field(r.params.dump()) + ',' + format_rfc3339(r.created_at) +
           ',' + format_rfc3339(r.updated_at) + "\r\n";
  }
  return out;
}

PasswordCost PasswordCost::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

PasswordCost PasswordCost::minimum() {
  return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
}

std::string hash_password(std::string_view password, PasswordCost cost) {
  ensure_sodium();
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, password.data(), password.size(), cost.ops,
                        cost.mem) != 0) {
    throw Error(Errc::kStorageFailure, "password hashing ran out of memory");
  }
  return out;
}

bool verify_password(std::string_view hash, std::string_view password) {
  ensure_sodium();
  const std::string h(hash);
  return crypto_pwhash_str_verify(h.c_str(), password.data(),
                                  password.size()) == 0;
}

void Store::Closer::operator()(sqlite3* db) const { sqlite3_close_v2(db); }

Store::Store(const std::filesystem::path& path, StoreOptions options)
    : options_(std::move(options)) {
  ensure_sodium();
  if (!options_.clock) {
    options_.clock = [] {
      return std::chrono::time_point_cast<std::chrono::microseconds>(
          std::chrono::system_clock::now());
    };
  }
  if (!options_.registry) {
    options_.registry = std::shared_ptr<const PunctLabelRegistry>(
        &PunctLabelRegistry::builtin(), [](const PunctLabelRegistry*) {});
  }
  sqlite3* raw = nullptr;
  const int flags =
      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.string().c_str(), &raw, flags, nullptr) !=
      SQLITE_OK) {
    std::string msg = raw ? sqlite3_errmsg(raw) : "cannot open database";
    sqlite3_close_v2(raw);
    throw Error(Errc::kStorageFailure, msg + ": " + path.string());
  }
  db_.reset(raw);
  sqlite3_busy_timeout(db_.get(), 5000);
  exec(db_.get(), "PRAGMA foreign_keys = ON");
  if (path != ":memory:") exec(db_.get(), "PRAGMA journal_mode = WAL");
  exec(db_.get(), kSchema);

  Statement st(db_.get(), "SELECT COALESCE(MAX(created_at), 0) FROM records");
  if (st.step()) last_issued_ = from_micros(st.int64(0));
}

Store::~Store() = default;

Timestamp Store::now() const { return options_.clock(); }

Timestamp Store::next_timestamp(Timestamp floor) {
  last_issued_ = std::max({now(), floor, last_issued_ + std::chrono::microseconds(1)});
  return last_issued_;
}

User Store::register_user(std::string_view email, std::string_view password,
                          std::string_view display_name) {
  if (email.empty() || password.empty()) {
    throw Error(Errc::kInvalidCredentials, "email and password are required");
  }
  // Hash outside the lock; it is deliberately slow.
  const auto hash = hash_password(password, options_.password_cost);
  std::lock_guard lock(mu_);
  User u{0, std::string(email), hash, std::string(display_name), now()};
  Statement exists(db_.get(), "SELECT 1 FROM users WHERE email = ?");
  exists.bind(1, email);
  if (exists.step()) {
    throw Error(Errc::kEmailTaken, "email already registered");
  }
  Statement st(db_.get(),
               "INSERT INTO users (email, password_hash, display_name, "
               "created_at) VALUES (?, ?, ?, ?)");
  st.bind(1, u.email).bind(2, u.password_hash).bind(3, u.display_name);
  st.bind(4, micros(u.created_at));
  st.step();
  u.id = sqlite3_last_insert_rowid(db_.get());
  return u;
}

std::optional<User> Store::find_user(std::int64_t id) const {
  std::lock_guard lock(mu_);
  Statement st(db_.get(),
               "SELECT id, email, password_hash, display_name, created_at "
               "FROM users WHERE id = ?");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return User{st.int64(0), st.text(1), st.text(2), st.text(3),
              from_micros(st.int64(4))};
}

Session Store::login(std::string_view email, std::string_view password) {
  std::int64_t user_id = 0;
  std::string hash;
  {
    std::lock_guard lock(mu_);
    Statement st(db_.get(),
                 "SELECT id, password_hash FROM users WHERE email = ?");
    st.bind(1, email);
    if (st.step()) {
      user_id = st.int64(0);
      hash = st.text(1);
    }
  }
  if (hash.empty() || !verify_password(hash, password)) {
    throw Error(Errc::kInvalidCredentials, "wrong email or password");
  }
  unsigned char bytes[32];
  randombytes_buf(bytes, sizeof bytes);
  Session s{to_hex(bytes, sizeof bytes), user_id,
            now() + options_.session_lifetime};
  std::lock_guard lock(mu_);
  Statement st(db_.get(),
               "INSERT INTO sessions (token_digest, user_id, expires_at) "
               "VALUES (?, ?, ?)");
  st.bind(1, token_digest(s.token)).bind(2, user_id);
  st.bind(3, micros(s.expires_at));
  st.step();
  return s;
}

std::optional<std::int64_t> Store::authenticate(std::string_view token) {
  if (token.empty()) return std::nullopt;
  const auto digest = token_digest(token);
  const auto t = now();
  std::lock_guard lock(mu_);
  Statement st(db_.get(),
               "SELECT user_id, expires_at FROM sessions WHERE token_digest = ?");
  st.bind(1, digest);
  if (!st.step()) return std::nullopt;
  const auto user_id = st.int64(0);
  if (from_micros(st.int64(1)) <= t) {
    Statement del(db_.get(), "DELETE FROM sessions WHERE token_digest = ?");
    del.bind(1, digest);
    del.step();
    return std::nullopt;
  }
  Statement renew(db_.get(),
                  "UPDATE sessions SET expires_at = ? WHERE token_digest = ?");
  renew.bind(1, micros(t + options_.session_lifetime)).bind(2, digest);
  renew.step();
  return user_id;
}

void Store::logout(std::string_view token) {
  std::lock_guard lock(mu_);
  Statement st(db_.get(), "DELETE FROM sessions WHERE token_digest = ?");
  st.bind(1, token_digest(token));
  st.step();
}

AnnotationRecord Store::create_record(std::int64_t user_id, Task task,
                                      std::string_view input_text,
                                      const json& model_output,
                                      const json& params) {
  validate_payload(task, input_text, model_output, *options_.registry);
  if (!params.is_object()) shape_error("params must be an object");

  std::lock_guard lock(mu_);
  Transaction tx(db_.get());
  Statement user(db_.get(), "SELECT 1 FROM users WHERE id = ?");
  user.bind(1, user_id);
  if (!user.step()) throw Error(Errc::kNotFound, "no such user");

  AnnotationRecord r;
  r.user_id = user_id;
  r.task = task;
  r.input_text = input_text;
  r.model_output = model_output;
  r.edited_output = model_output;
  r.params = params;
  r.created_at = next_timestamp({});
  r.updated_at = r.created_at;
  Statement st(db_.get(),
               "INSERT INTO records (user_id, task, input_text, model_output, "
               "edited_output, params, created_at, updated_at) "
               "VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
  const auto payload = model_output.dump();
  st.bind(1, user_id).bind(2, to_string(task)).bind(3, input_text);
  st.bind(4, payload).bind(5, payload).bind(6, params.dump());
  st.bind(7, micros(r.created_at)).bind(8, micros(r.updated_at));
  st.step();
  r.id = sqlite3_last_insert_rowid(db_.get());
  tx.commit();
  return r;
}

AnnotationRecord Store::update_edit(std::int64_t record_id,
                                    std::int64_t user_id,
                                    const json& edited_output) {
  std::lock_guard lock(mu_);
  Transaction tx(db_.get());
  Statement sel(db_.get(), std::string("SELECT ") + kRecordColumns +
                               " FROM records WHERE id = ?");
  sel.bind(1, record_id);
  if (!sel.step()) throw Error(Errc::kNotFound, "no such record");
  auto r = read_record(sel);
  if (r.user_id != user_id) {
    throw Error(Errc::kForbidden, "record belongs to another user");
  }
  validate_payload(r.task, r.input_text, edited_output, *options_.registry);
  r.edited_output = edited_output;
  r.updated_at = std::max(now(), r.updated_at + std::chrono::microseconds(1));
  Statement up(db_.get(),
               "UPDATE records SET edited_output = ?, updated_at = ? "
               "WHERE id = ?");
  up.bind(1, edited_output.dump()).bind(2, micros(r.updated_at));
  up.bind(3, record_id);
  up.step();
  tx.commit();
  return r;
}

AnnotationRecord Store::get_record(std::int64_t record_id,
                                   std::int64_t user_id) const {
  std::lock_guard lock(mu_);
  Statement st(db_.get(), std::string("SELECT ") + kRecordColumns +
                              " FROM records WHERE id = ?");
  st.bind(1, record_id);
  if (!st.step()) throw Error(Errc::kNotFound, "no such record");
  auto r = read_record(st);
  if (r.user_id != user_id) {
    throw Error(Errc::kForbidden, "record belongs to another user");
  }
  return r;
}

std::vector<AnnotationRecord> Store::list_records(std::int64_t user_id) const {
  std::lock_guard lock(mu_);
  Statement st(db_.get(), std::string("SELECT ") + kRecordColumns +
                              " FROM records WHERE user_id = ? "
                              "ORDER BY created_at, id");
  st.bind(1, user_id);
  std::vector<AnnotationRecord> out;
  while (st.step()) out.push_back(read_record(st));
  return out;
}

std::string Store::export_records(std::int64_t user_id, ExportFormat format,
                                  bool with_bom) const {
  const auto records = list_records(user_id);
  return format == ExportFormat::kJson ? export_json(records)
                                       : export_csv(records, with_bom);
}

}  // namespace hanjakit
