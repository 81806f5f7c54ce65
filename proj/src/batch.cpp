#include "hanjakit/batch.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kNotFound, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::kNotFound, "cannot read " + path.string());
  auto text = buf.str();
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  if (!is_valid_utf8(text)) {
    throw Error(Errc::kInvalidUtf8, path.string() + " is not valid UTF-8");
  }
  return text;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw Error(Errc::kStorageFailure, "cannot write " + path.string());
}

}  // namespace

void BatchManifest::validate() const {
  if (tasks.empty()) throw Error(Errc::kInvalidConfig, "no tasks requested");
  if (output_dir.empty()) {
    throw Error(Errc::kInvalidConfig, "no output directory given");
  }
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) {
    throw Error(Errc::kInvalidConfig,
                "output directory " + output_dir.string() + " is not usable");
  }
  if (std::find(tasks.begin(), tasks.end(), Task::kTranslate) != tasks.end() &&
      targets.empty()) {
    throw Error(Errc::kInvalidConfig, "translation needs a target language");
  }
}

json BatchSummary::to_json() const {
  json files_json = json::array();
  for (const auto& f : files) {
    json j = {{"input", f.input.generic_string()},
              {"status", f.error ? "failed" : "ok"}};
    if (f.output) j["output"] = f.output->filename().generic_string();
    if (f.error) j["error"] = *f.error;
    files_json.push_back(std::move(j));
  }
  return {{"files", std::move(files_json)},
          {"succeeded", succeeded},
          {"failed", failed}};
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

json process_document(const Services& services, const std::string& source_name,
                      std::string_view text, const BatchManifest& manifest) {
  const auto body = trim(text);
  std::optional<std::string_view> backend;
  if (manifest.backend) backend = *manifest.backend;
  json doc = {{"source", source_name}, {"text", body}};
  for (const auto task : manifest.tasks) {
    switch (task) {
      case Task::kPunctuate: {
        const auto r = punctuate(services, body, manifest.mode, backend);
        doc["text"] = r.text;
        doc["punctuate"] = to_json(r);
        break;
      }
      case Task::kNer: {
        const auto r = recognize_entities(services, body, backend);
        doc["text"] = r.text;
        doc["ner"] = to_json(r);
        break;
      }
      case Task::kTranslate: {
        json translations = json::object();
        for (const auto target : manifest.targets) {
          auto job = make_translation_job(services, body, target, backend);
          translations[std::string(to_string(target))] =
              translate(services, job, nullptr, backend);
        }
        doc["translate"] = std::move(translations);
        break;
      }
    }
  }
  return doc;
}

BatchSummary run_batch(const Services& services, const BatchManifest& manifest) {
  manifest.validate();
  const auto files = expand_inputs(manifest.inputs);
  BatchSummary summary;
  summary.files.resize(files.size());

  // Two inputs with the same file name would share an output file.
  std::vector<bool> collides(files.size(), false);
  for (std::size_t i = 0; i < files.size(); ++i) {
    summary.files[i].input = files[i];
    for (std::size_t k = 0; k < i; ++k) {
      if (!collides[k] && files[k].filename() == files[i].filename()) {
        collides[i] = true;
        summary.files[i].error =
            "output name collides with " + files[k].generic_string();
        break;
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < files.size(); i = next++) {
      if (collides[i]) continue;
      auto& outcome = summary.files[i];
      try {
        const auto name = files[i].filename().string();
        const auto doc =
            process_document(services, name, read_file(files[i]), manifest);
        const auto out_path = manifest.output_dir / (name + ".json");
        write_file(out_path, doc.dump(2) + "\n");
        outcome.output = out_path;
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
    }
  };

  std::size_t jobs = manifest.jobs;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(files.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
  }

  for (const auto& f : summary.files) {
    f.error ? ++summary.failed : ++summary.succeeded;
  }
  write_file(manifest.output_dir / "summary.json",
             summary.to_json().dump(2) + "\n");
  return summary;
}

}  // namespace hanjakit
