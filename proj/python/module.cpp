#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hanjakit/batch.hpp"
#include "hanjakit/entities.hpp"
#include "hanjakit/error.hpp"
#include "hanjakit/glossary.hpp"
#include "hanjakit/pipeline.hpp"
#include "hanjakit/punctuation.hpp"
#include "hanjakit/translation.hpp"

namespace py = pybind11;
using namespace hanjakit;

namespace {

const PunctLabelRegistry& registry() { return PunctLabelRegistry::builtin(); }

// JSON crosses the boundary as text; the Python side decodes it.
class PyPipeline {
 public:
  explicit PyPipeline(const std::string& config_path) {
    auto config = Config::load(config_path);
    config.apply_env();
    services_ = Services::load(config);
  }

  std::string punctuate(const std::string& text, const std::string& mode,
                        const std::optional<std::string>& backend) const {
    return to_json(hanjakit::punctuate(*services_, text, parse_render_mode(mode),
                                       as_view(backend)))
        .dump();
  }

  std::string ner(const std::string& text,
                  const std::optional<std::string>& backend) const {
    return to_json(recognize_entities(*services_, text, as_view(backend))).dump();
  }

  std::string translate(const std::string& text, const std::string& target,
                        const std::optional<std::function<void(std::string)>>& on_delta,
                        const std::optional<std::string>& backend) const {
    auto job = make_translation_job(*services_, text, parse_language(target),
                                    as_view(backend));
    DeltaSink sink;
    if (on_delta) {
      sink = [&](const StreamDelta& d) {
        if (!d.text.empty()) (*on_delta)(d.text);
      };
    }
    return hanjakit::translate(*services_, job, sink, as_view(backend));
  }

  std::string glossary(const std::string& text) const {
    auto out = nlohmann::json::array();
    for (const auto& e : services_->glossary->annotate(text)) out.push_back(to_json(e));
    return out.dump();
  }

  std::string batch(const std::vector<std::string>& inputs, const std::vector<std::string>& tasks,
                    const std::string& output_dir, const std::string& mode,
                    const std::vector<std::string>& targets, std::size_t jobs) const {
    BatchManifest m;
    for (const auto& i : inputs) m.inputs.emplace_back(i);
    for (const auto& t : tasks) m.tasks.push_back(parse_task(t));
    m.targets.clear();
    for (const auto& t : targets) m.targets.push_back(parse_language(t));
    m.mode = parse_render_mode(mode);
    m.output_dir = output_dir;
    m.jobs = jobs;
    py::gil_scoped_release release;
    return run_batch(*services_, m).to_json().dump();
  }

  std::vector<std::string> backends() const { return services_->backends.names(); }

 private:
  static std::optional<std::string_view> as_view(const std::optional<std::string>& s) {
    if (!s) return std::nullopt;
    return std::string_view(*s);
  }

  std::shared_ptr<const Services> services_;
};

}  // namespace

PYBIND11_MODULE(_hanjakit, m) {
  m.doc() = "Hanja punctuation, entity tagging, glossary and translation";

  static PyObject* error_type =
      py::register_exception<Error>(m, "HanjakitError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args == (code, message)
      PyErr_SetObject(error_type,
                      py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  m.def("labels", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& l : registry().labels()) {
      out.emplace_back(l.id, l.glyphs, std::string(to_string(l.simple_projection)));
    }
    return out;
  }, "Registered labels as (id, glyphs, simple_projection), None first.");

  m.def("apply_labels",
        [](const std::string& text, const std::vector<std::string>& labels,
           const std::string& mode) {
          return apply_labels(registry(), text, labels, parse_render_mode(mode));
        },
        py::arg("text"), py::arg("labels"), py::arg("mode") = "Comprehensive");

  m.def("strip_punctuation", [](const std::string& punctuated) {
    auto s = strip_punctuation(registry(), punctuated);
    return py::make_tuple(s.text, s.labels);
  }, py::arg("text"));

  m.def("decode_iob2", [](const std::vector<std::string>& tags) {
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
    for (const auto& s : decode_iob2(parse_tags(tags))) {
      out.emplace_back(s.start, s.end, std::string(to_string(s.type)));
    }
    return out;
  }, py::arg("tags"));

  m.def("encode_iob2",
        [](const std::vector<std::tuple<std::size_t, std::size_t, std::string>>& spans,
           std::size_t length) {
          std::vector<EntitySpan> in;
          for (const auto& [start, end, type] : spans) {
            in.push_back({start, end, parse_entity_type(type)});
          }
          return tag_strings(encode_iob2(in, length));
        },
        py::arg("spans"), py::arg("length"));

  m.def("build_prompt",
        [](const std::string& text, const std::string& target, const std::string& source) {
          return build_prompt(parse_language(source), parse_language(target), text);
        },
        py::arg("text"), py::arg("target"), py::arg("source") = "Hanja");

  m.def("chunk",
        [](const std::string& text, std::size_t max_units) {
          return chunk(text, max_units, sentence_breaks(text));
        },
        py::arg("text"), py::arg("max_units") = kDefaultChunkUnits);

  m.def("split_characters", &split_graphemes, py::arg("text"));

  m.def("parse_cedict", [](const std::string& text) {
    auto parsed = parse_cedict(text);
    py::list entries;
    for (const auto& e : parsed.entries) {
      py::dict d;
      d["traditional"] = e.traditional;
      d["simplified"] = e.simplified;
      d["pinyin"] = e.pinyin;
      d["definitions"] = e.definitions;
      entries.append(d);
    }
    return py::make_tuple(entries, parsed.skipped);
  }, py::arg("text"));

  py::class_<PyPipeline>(m, "_Pipeline")
      .def(py::init<const std::string&>(), py::arg("config_path"))
      .def("punctuate", &PyPipeline::punctuate)
      .def("ner", &PyPipeline::ner)
      .def("translate", &PyPipeline::translate)
      .def("glossary", &PyPipeline::glossary)
      .def("batch", &PyPipeline::batch)
      .def("backends", &PyPipeline::backends);
}
