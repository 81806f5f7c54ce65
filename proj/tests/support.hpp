#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hanjakit/text.hpp"

namespace hanjakit::testing {

inline std::filesystem::path data_dir() { return HANJAKIT_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return HANJAKIT_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hanjakit-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Characters for random texts. Includes multi-code-point clusters so that
// character counts and byte counts disagree.
inline const std::vector<std::string>& hanja_pool() {
  static const std::vector<std::string> pool = {
      "子", "曰", "學", "而", "時", "習", "之", "不", "亦", "說", "乎", "有",
      "朋", "自", "遠", "方", "來", "樂", "人", "知", "慍", "君", "也", "者",
      "天", "地", "玄", "黃", "宇", "宙", "洪", "荒", "日", "月", "李", "舜",
      "臣", "漢", "城", "國", "王", "民", "道", "德", "仁", "義", "禮", "智",
      "葛\xF3\xA0\x84\x80",  // 葛 + VS17 (ideographic variation sequence)
      "e\xCC\x81",            // e + combining acute
  };
  return pool;
}

inline std::string random_text(std::mt19937_64& rng, std::size_t length) {
  const auto& pool = hanja_pool();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < length; ++i) out += pool[pick(rng)];
  return out;
}

}  // namespace hanjakit::testing
