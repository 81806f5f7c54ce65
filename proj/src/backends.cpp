#include "hanjakit/backends.hpp"

#include <httplib.h>

#include <algorithm>
#include <istream>
#include <nlohmann/json.hpp>
#include <thread>

namespace hanjakit {

using json = nlohmann::json;

namespace {

constexpr std::string_view kMissingGloss = "…";

void require(const Backend& backend, Capability c) {
  if (!backend.descriptor().supports(c)) {
    throw Error(Errc::kBackendUnavailable,
                "backend '" + backend.descriptor().name + "' does not support " +
                    std::string(to_string(c)));
  }
}

bool is_space(std::string_view g) {
  return g == " " || g == "\t" || g == "\n" || g == "\r" || g == "\r\n" ||
         g == "　";
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) {
    s_.acquire();
  }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::kPunctuate: return "punctuate";
    case Capability::kNer: return "ner";
    case Capability::kTranslate: return "translate";
  }
  return "punctuate";
}

Capability parse_capability(std::string_view name) {
  for (auto c : {Capability::kPunctuate, Capability::kNer,
                 Capability::kTranslate}) {
    if (name == to_string(c)) return c;
  }
  throw Error(Errc::kInvalidConfig,
              "unknown capability '" + std::string(name) + "'");
}

void BackendDescriptor::validate() const {
  if (name.empty()) throw Error(Errc::kInvalidConfig, "backend without name");
  if (capabilities.empty()) {
    throw Error(Errc::kInvalidConfig,
                "backend '" + name + "' declares no capabilities");
  }
  if (kind == Kind::kRemote && (!endpoint || endpoint->empty())) {
    throw Error(Errc::kInvalidConfig,
                "remote backend '" + name + "' has no endpoint");
  }
}

WindowPlan::WindowPlan(std::size_t window_size, std::size_t stride)
    : window_size_(window_size), stride_(stride) {
  if (stride_ == 0 || stride_ > window_size_) {
    throw Error(Errc::kInvalidWindowPlan,
                "window plan needs 0 < stride <= window (got window " +
                    std::to_string(window_size) + ", stride " +
                    std::to_string(stride) + ")");
  }
}

std::vector<WindowPlan::Window> WindowPlan::windows(std::size_t length) const {
  std::vector<Window> out;
  for (std::size_t start = 0; start < length; start += stride_) {
    const auto end = std::min(length, start + window_size_);
    out.push_back({start, end});
    if (end == length) break;
  }
  return out;
}

PunctLabelSeq label_punctuation(const Backend& backend, std::string_view text,
                                const WindowPlan& plan) {
  if (text.empty()) throw Error(Errc::kEmptyText, "nothing to punctuate");
  require(backend, Capability::kPunctuate);
  return run_windowed<std::string>(
      text, plan, [&](std::string_view w) { return backend.label_window(w); });
}

TagSeq tag_entities(const Backend& backend, std::string_view text,
                    const WindowPlan& plan) {
  if (text.empty()) throw Error(Errc::kEmptyText, "nothing to tag");
  require(backend, Capability::kNer);
  auto tags = run_windowed<Tag>(
      text, plan, [&](std::string_view w) { return backend.tag_window(w); });
  // Merged windows can splice runs; normalize to well-formed IOB2.
  return encode_iob2(decode_iob2(tags), tags.size());
}

void translate_stream(const Backend& backend, TranslationJob& job,
                      const DeltaSink& sink, std::stop_token stop) {
  require(backend, Capability::kTranslate);
  job.start();
  try {
    const auto& chunks = job.chunks();
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      if (stop.stop_requested()) {
        throw Error(Errc::kCancelled, "translation cancelled");
      }
      if (i > 0) sink({"\n", false});
      const TranslationRequest request{chunks[i], job.target(), job.prompt(i)};
      StreamAssembler part;
      backend.translate(
          request,
          [&](const StreamDelta& d) {
            part.push(d);
            if (!d.text.empty()) sink({d.text, false});
          },
          stop);
      part.finish();
    }
    job.complete();
  } catch (const std::exception& e) {
    job.fail(e.what());
    throw;
  }
  sink({"", true});
}

std::unordered_map<std::string, std::string>
ReferenceRules::default_punct_rules() {
  return {{"曰", "ColonOpenQuote"},
          {"也", "Period"},
          {"矣", "Period"},
          {"者", "Comma"},
          {"乎", "Question"},
          {"焉", "Period"}};
}

std::unordered_map<std::string, std::string> ReferenceRules::load_punct_rules(
    std::istream& in, const PunctLabelRegistry& registry) {
  std::unordered_map<std::string, std::string> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || char_count(line.substr(0, tab)) != 1) {
      throw Error(Errc::kInvalidConfig,
                  "punctuation rules line " + std::to_string(line_no) +
                      ": expected char<TAB>label");
    }
    const auto label = line.substr(tab + 1);
    if (registry.find(label) == nullptr) {
      throw Error(Errc::kInvalidConfig,
                  "punctuation rules line " + std::to_string(line_no) +
                      ": unknown label '" + label + "'");
    }
    rules[line.substr(0, tab)] = label;
  }
  return rules;
}

std::unordered_map<std::string, EntityType> ReferenceRules::load_gazetteer(
    std::istream& in) {
  std::unordered_map<std::string, EntityType> gazetteer;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == 0 || tab == std::string::npos) {
      throw Error(Errc::kInvalidConfig, "gazetteer line " +
                                            std::to_string(line_no) +
                                            ": expected surface<TAB>TYPE");
    }
    try {
      gazetteer[line.substr(0, tab)] = parse_entity_type(line.substr(tab + 1));
    } catch (const Error& e) {
      throw Error(Errc::kInvalidConfig,
                  "gazetteer line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return gazetteer;
}

ReferenceBackend::ReferenceBackend(
    BackendDescriptor descriptor,
    std::shared_ptr<const PunctLabelRegistry> registry,
    std::shared_ptr<const Glossary> glossary, ReferenceRules rules)
    : descriptor_(std::move(descriptor)),
      registry_(std::move(registry)),
      glossary_(std::move(glossary)),
      rules_(std::move(rules)) {
  descriptor_.validate();
  if (!registry_ || !glossary_) {
    throw Error(Errc::kInvalidConfig, "reference backend needs a registry "
                                      "and a glossary");
  }
  for (const auto& [ch, label] : rules_.punct_after) registry_->at(label);
  for (const auto& [surface, type] : rules_.gazetteer) {
    longest_entry_ = std::max(longest_entry_, char_count(surface));
  }
  if (rules_.fragment_chars == 0) rules_.fragment_chars = 1;
}

PunctLabelSeq ReferenceBackend::label_window(std::string_view text) const {
  PunctLabelSeq labels;
  for (const auto& ch : split_graphemes(text)) {
    const auto it = rules_.punct_after.find(ch);
    labels.emplace_back(it == rules_.punct_after.end() ? std::string(kNoneLabel)
                                                       : it->second);
  }
  return labels;
}

TagSeq ReferenceBackend::tag_window(std::string_view text) const {
  const auto chars = split_graphemes(text);
  TagSeq tags(chars.size(), Tag::outside());
  std::size_t i = 0;
  while (i < chars.size()) {
    std::size_t matched = 0;
    EntityType type{};
    const auto max_len = std::min(longest_entry_, chars.size() - i);
    std::string candidate;
    // Grow the candidate and remember the longest hit.
    for (std::size_t len = 1; len <= max_len; ++len) {
      candidate += chars[i + len - 1];
      if (const auto it = rules_.gazetteer.find(candidate);
          it != rules_.gazetteer.end()) {
        matched = len;
        type = it->second;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    tags[i] = Tag::begin(type);
    for (std::size_t k = 1; k < matched; ++k) tags[i + k] = Tag::inside(type);
    i += matched;
  }
  return tags;
}

std::string ReferenceBackend::translate_text(std::string_view text,
                                             Language target) const {
  std::string out;
  for (const auto& ch : split_graphemes(text)) {
    if (is_space(ch) || is_punctuation_glyph(ch)) continue;
    std::string_view word = kMissingGloss;
    const auto entry = glossary_->annotate(ch).front();
    if (target == Language::kKorean && entry.reading) {
      word = *entry.reading;
    } else if (target == Language::kEnglish && !entry.definitions.empty()) {
      word = entry.definitions.front();
    }
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

void ReferenceBackend::translate(const TranslationRequest& request,
                                 const DeltaSink& sink,
                                 std::stop_token stop) const {
  const auto text = translate_text(request.text, request.target);
  const auto chars = split_graphemes(text);
  for (std::size_t i = 0; i < chars.size(); i += rules_.fragment_chars) {
    if (stop.stop_requested()) {
      throw Error(Errc::kCancelled, "translation cancelled");
    }
    if (rules_.fragment_delay.count() > 0 && i > 0) {
      std::this_thread::sleep_for(rules_.fragment_delay);
    }
    std::string fragment;
    const auto end = std::min(chars.size(), i + rules_.fragment_chars);
    for (auto k = i; k < end; ++k) fragment += chars[k];
    sink({std::move(fragment), false});
  }
  sink({"", true});
}

RemoteBackend::RemoteBackend(BackendDescriptor descriptor,
                             std::shared_ptr<const PunctLabelRegistry> registry,
                             RemoteOptions options)
    : descriptor_(std::move(descriptor)),
      registry_(std::move(registry)),
      options_(options),
      in_flight_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(options.max_in_flight, 1, 1024))) {
  descriptor_.validate();
  if (!registry_) throw Error(Errc::kInvalidConfig, "remote backend needs a registry");
  const auto& url = *descriptor_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::kInvalidConfig, "endpoint '" + url + "' lacks a scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  if (path_start != std::string::npos) base_path_ = url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

RemoteBackend::~RemoteBackend() = default;

std::vector<std::string> RemoteBackend::request_labels(
    std::string_view task, std::string_view text) const {
  SemaphoreGuard guard(in_flight_);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.connect_timeout);
  client.set_read_timeout(options_.read_timeout);
  const json body = {{"v", 1}, {"task", task}, {"text", text}};
  auto res = client.Post(base_path_ + "/label", body.dump(), "application/json");
  if (!res) {
    throw Error(Errc::kBackendUnavailable,
                "backend '" + descriptor_.name + "' unreachable: " +
                    httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::kBackendUnavailable,
                "backend '" + descriptor_.name + "' returned HTTP " +
                    std::to_string(res->status));
  }
  const auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || reply.value("v", 0) != 1 ||
      !reply.contains("labels") || !reply["labels"].is_array()) {
    throw Error(Errc::kInvalidBackendResponse,
                "backend '" + descriptor_.name + "' sent a malformed reply");
  }
  std::vector<std::string> labels;
  for (const auto& l : reply["labels"]) {
    if (!l.is_string()) {
      throw Error(Errc::kInvalidBackendResponse, "non-string label in reply");
    }
    labels.push_back(l.get<std::string>());
  }
  const auto expected = char_count(text);
  if (labels.size() != expected) {
    throw Error(Errc::kInvalidBackendResponse,
                "backend returned " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(expected) + " characters");
  }
  return labels;
}

PunctLabelSeq RemoteBackend::label_window(std::string_view text) const {
  auto labels = request_labels("punct", text);
  for (const auto& l : labels) {
    if (registry_->find(l) == nullptr) {
      throw Error(Errc::kInvalidBackendResponse,
                  "backend returned unregistered label '" + l + "'");
    }
  }
  return labels;
}

TagSeq RemoteBackend::tag_window(std::string_view text) const {
  const auto raw = request_labels("ner", text);
  TagSeq tags;
  tags.reserve(raw.size());
  for (const auto& s : raw) {
    Tag t;
    try {
      t = parse_tag(s);
    } catch (const Error&) {
      throw Error(Errc::kInvalidBackendResponse,
                  "backend returned unknown tag '" + s + "'");
    }
    if (t.kind != Tag::Kind::kOutside && t.type == EntityType::kOrganization) {
      throw Error(Errc::kInvalidBackendResponse,
                  "backend returned unsupported tag '" + s + "'");
    }
    tags.push_back(t);
  }
  return encode_iob2(decode_iob2(tags), tags.size());
}

void RemoteBackend::translate(const TranslationRequest& request,
                              const DeltaSink& sink,
                              std::stop_token stop) const {
  SemaphoreGuard guard(in_flight_);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.connect_timeout);
  client.set_read_timeout(options_.read_timeout);

  StreamAssembler assembler;
  std::string pending;
  std::string failure;
  bool cancelled = false;
  auto handle_line = [&](std::string_view line) -> bool {
    if (line.empty()) return true;
    const auto msg = json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("delta") ||
        !msg["delta"].is_string() || !msg.contains("done") ||
        !msg["done"].is_boolean()) {
      failure = "malformed stream line";
      return false;
    }
    StreamDelta delta{msg["delta"].get<std::string>(), msg["done"].get<bool>()};
    try {
      assembler.push(delta);
    } catch (const Error& e) {
      failure = e.what();
      return false;
    }
    sink(delta);
    return true;
  };

  httplib::Request req;
  req.method = "POST";
  req.path = base_path_ + "/translate";
  req.set_header("Content-Type", "application/json");
  req.set_header("Accept", "application/x-ndjson");
  req.body = json{{"v", 1}, {"prompt", request.prompt}}.dump();
  req.content_receiver = [&](const char* data, std::size_t len, uint64_t,
                             uint64_t) {
    if (stop.stop_requested()) {
      cancelled = true;
      return false;
    }
    pending.append(data, len);
    for (auto nl = pending.find('\n'); nl != std::string::npos;
         nl = pending.find('\n')) {
      const auto line = pending.substr(0, nl);
      pending.erase(0, nl + 1);
      if (!handle_line(line)) return false;
    }
    return true;
  };

  auto res = client.send(req);
  if (cancelled) throw Error(Errc::kCancelled, "translation cancelled");
  if (!failure.empty()) throw Error(Errc::kInvalidBackendResponse, failure);
  if (!res) {
    if (assembler.text().empty() && !assembler.done()) {
      throw Error(Errc::kBackendUnavailable,
                  "backend '" + descriptor_.name + "' unreachable: " +
                      httplib::to_string(res.error()));
    }
    throw Error(Errc::kStreamTruncated, "stream interrupted");
  }
  if (res->status != 200) {
    throw Error(Errc::kBackendUnavailable,
                "backend '" + descriptor_.name + "' returned HTTP " +
                    std::to_string(res->status));
  }
  if (!pending.empty() && !handle_line(pending)) {
    throw Error(Errc::kInvalidBackendResponse, failure);
  }
  assembler.finish();
}

void BackendSet::add(std::shared_ptr<const Backend> backend) {
  const auto name = backend->descriptor().name;
  if (default_.empty()) default_ = name;
  backends_[name] = std::move(backend);
}

void BackendSet::set_default(std::string name) {
  if (!backends_.contains(name)) {
    throw Error(Errc::kInvalidConfig, "default backend '" + name +
                                          "' is not configured");
  }
  default_ = std::move(name);
}

const Backend& BackendSet::get(std::optional<std::string_view> name) const {
  const std::string_view key = (name && !name->empty()) ? *name : default_;
  const auto it = backends_.find(key);
  if (it == backends_.end()) {
    throw Error(Errc::kUnknownBackend,
                "no backend named '" + std::string(key) + "'");
  }
  return *it->second;
}

std::vector<std::string> BackendSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, backend] : backends_) out.push_back(name);
  return out;
}

}  // namespace hanjakit
