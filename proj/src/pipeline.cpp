#include "hanjakit/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

using json = nlohmann::json;

namespace {

std::ifstream open_table(const std::filesystem::path& path,
                         std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kInvalidConfig,
                "cannot open " + std::string(what) + " " + path.string());
  }
  return in;
}

std::shared_ptr<const Glossary> load_glossary(const Config& c) {
  auto g = std::make_shared<Glossary>(Glossary{{}, {}, LinkTemplate(c.link_template)});
  if (!c.readings.empty()) {
    auto in = open_table(c.readings, "readings table");
    g->readings = ReadingTable(load_readings(in).table);
  }
  if (!c.cedict.empty()) {
    auto in = open_table(c.cedict, "CC-CEDICT file");
    g->cedict = CedictIndex(parse_cedict(in).entries);
  }
  return g;
}

// Raw text for labeling; strict strip first, glyph removal as fallback.
std::pair<std::string, bool> raw_text(const Services& s, std::string_view text) {
  if (!contains_punctuation(text)) return {std::string(text), false};
  try {
    return {strip_punctuation(*s.registry, text).text, true};
  } catch (const Error&) {
    return {remove_punctuation_glyphs(text), true};
  }
}

}  // namespace

std::shared_ptr<const Services> Services::load(const Config& config) {
  auto s = std::make_shared<Services>();
  s->config = config;
  s->registry = config.registry.empty()
                    ? std::make_shared<const PunctLabelRegistry>(
                          PunctLabelRegistry::builtin())
                    : std::make_shared<const PunctLabelRegistry>(
                          PunctLabelRegistry::load(config.registry));
  s->glossary = load_glossary(config);
  try {
    s->window = WindowPlan(config.window_size, config.window_stride);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidConfig, e.what());
  }
  if (config.translate_chunk_chars == 0) {
    throw Error(Errc::kInvalidConfig, "translate_chunk_chars must be positive");
  }

  for (const auto& b : config.backends) {
    if (b.descriptor.kind == BackendDescriptor::Kind::kReference) {
      ReferenceRules rules;
      if (b.punct_rules.empty()) {
        rules.punct_after = ReferenceRules::default_punct_rules();
      } else {
        auto in = open_table(b.punct_rules, "punctuation rules");
        rules.punct_after = ReferenceRules::load_punct_rules(in, *s->registry);
      }
      if (!b.gazetteer.empty()) {
        auto in = open_table(b.gazetteer, "gazetteer");
        rules.gazetteer = ReferenceRules::load_gazetteer(in);
      }
      rules.fragment_chars = b.fragment_chars;
      rules.fragment_delay = b.fragment_delay;
      s->backends.add(std::make_shared<ReferenceBackend>(
          b.descriptor, s->registry, s->glossary, std::move(rules)));
    } else {
      s->backends.add(
          std::make_shared<RemoteBackend>(b.descriptor, s->registry, b.remote));
    }
  }
  const auto names = s->backends.names();
  if (std::ranges::find(names, config.default_backend) == names.end()) {
    throw Error(Errc::kInvalidConfig,
                "default backend '" + config.default_backend + "' is not configured");
  }
  s->backends.set_default(config.default_backend);
  return s;
}

void Services::check_input(std::string_view text) const {
  if (text.empty()) throw Error(Errc::kEmptyText, "text is empty");
  // Cheap byte bound before segmenting: a character is at least one byte.
  if (text.size() > config.input_limit * 64 ||
      char_count(text) > config.input_limit) {
    throw Error(Errc::kInputTooLarge,
                "text exceeds " + std::to_string(config.input_limit) +
                    " characters");
  }
}

PunctuateResult punctuate(const Services& services, std::string_view text,
                          RenderMode mode,
                          std::optional<std::string_view> backend) {
  services.check_input(text);
  PunctuateResult r;
  std::tie(r.text, r.stripped) = raw_text(services, text);
  if (r.text.empty()) throw Error(Errc::kEmptyText, "text has no characters");
  r.mode = mode;
  r.labels = label_punctuation(services.backends.get(backend), r.text,
                               services.window);
  r.rendered = apply_labels(*services.registry, r.text, r.labels, mode);
  r.offsets = align_offsets(*services.registry, r.text, r.labels, mode);
  return r;
}

NerResult recognize_entities(const Services& services, std::string_view text,
                             std::optional<std::string_view> backend) {
  services.check_input(text);
  NerResult r;
  std::tie(r.text, r.stripped) = raw_text(services, text);
  if (r.text.empty()) throw Error(Errc::kEmptyText, "text has no characters");
  r.tags = tag_entities(services.backends.get(backend), r.text,
                        services.window);
  r.spans = decode_iob2(r.tags);
  return r;
}

TranslationJob make_translation_job(const Services& services,
                                    std::string_view text, Language target,
                                    std::optional<std::string_view> backend) {
  services.check_input(text);
  const auto max_units = services.config.translate_chunk_chars;
  std::vector<bool> breaks;
  if (contains_punctuation(text)) {
    breaks = sentence_breaks(text);
  } else if (char_count(text) > max_units) {
    const auto& b = services.backends.get(backend);
    if (b.descriptor().supports(Capability::kPunctuate)) {
      const auto labels = label_punctuation(b, text, services.window);
      for (const auto& id : labels) {
        breaks.push_back(services.registry->at(id).ends_sentence());
      }
    }
  }
  return TranslationJob::create(std::string(text), target, max_units, breaks);
}

std::string translate(const Services& services, TranslationJob& job,
                      const DeltaSink& sink,
                      std::optional<std::string_view> backend,
                      std::stop_token stop) {
  StreamAssembler assembler;
  translate_stream(
      services.backends.get(backend), job,
      [&](const StreamDelta& d) {
        assembler.push(d);
        if (sink) sink(d);
      },
      stop);
  return assembler.finish();
}

json to_json(const EntitySpan& s) {
  return {{"start", s.start}, {"end", s.end}, {"type", to_string(s.type)}};
}

EntitySpan span_from_json(const json& j) {
  try {
    const auto start = j.at("start").get<std::int64_t>();
    const auto end = j.at("end").get<std::int64_t>();
    if (start < 0 || end < 0) {
      throw Error(Errc::kSpanOutOfRange, "span offsets must be non-negative");
    }
    return {static_cast<std::size_t>(start), static_cast<std::size_t>(end),
            parse_entity_type(j.at("type").get<std::string>())};
  } catch (const json::exception& e) {
    throw Error(Errc::kInvalidRequest, std::string("bad span: ") + e.what());
  }
}

json to_json(const PunctuateResult& r) {
  return {{"text", r.text},         {"labels", r.labels},
          {"mode", to_string(r.mode)}, {"rendered", r.rendered},
          {"offsets", r.offsets},   {"stripped", r.stripped}};
}

json to_json(const NerResult& r) {
  json spans = json::array();
  for (const auto& s : r.spans) spans.push_back(to_json(s));
  return {{"text", r.text},
          {"tags", tag_strings(r.tags)},
          {"spans", std::move(spans)},
          {"stripped", r.stripped}};
}

json to_json(const GlossaryEntry& e) {
  return {{"char", e.character},
          {"reading", e.reading ? json(*e.reading) : json(nullptr)},
          {"definitions", e.definitions},
          {"link", e.link}};
}

json to_json(const StreamDelta& d) {
  return {{"delta", d.text}, {"done", d.done}};
}

}  // namespace hanjakit
