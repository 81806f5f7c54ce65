#include <doctest.h>

#include <random>

#include "hanjakit/error.hpp"
#include "hanjakit/punctuation.hpp"
#include "hanjakit/translation.hpp"
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

std::vector<StreamDelta> regroup(std::mt19937_64& rng, const std::string& text) {
  const auto chars = split_graphemes(text);
  std::vector<StreamDelta> out;
  std::size_t i = 0;
  while (i < chars.size()) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 5)(rng);
    StreamDelta d;
    for (std::size_t k = 0; k < n && i < chars.size(); ++k) d.text += chars[i++];
    out.push_back(d);
  }
  out.push_back({"", true});
  return out;
}

}  // namespace

TEST_SUITE("translation") {

TEST_CASE("prompt template") {
  CHECK(build_prompt(Language::kHanja, Language::kKorean, "學而時習之") ==
        "Translate the following text from Hanja into Korean.\n"
        "Hanja: 學而時習之\n"
        "Korean:");
  CHECK(build_prompt(Language::kHanja, Language::kEnglish, "學而時習之") ==
        "Translate the following text from Hanja into English.\n"
        "Hanja: 學而時習之\n"
        "English:");
  CHECK(error_of([] { build_prompt(Language::kHanja, Language::kKorean, ""); }) ==
        Errc::kEmptyText);
  CHECK(error_of([] { build_prompt(Language::kKorean, Language::kEnglish, "x"); }) ==
        Errc::kUnsupportedDirection);
  CHECK(error_of([] { build_prompt(Language::kHanja, Language::kHanja, "x"); }) ==
        Errc::kUnsupportedDirection);
}

TEST_CASE("language names") {
  CHECK(parse_language("english") == Language::kEnglish);
  CHECK(error_of([] { parse_language("Japanese"); }) == Errc::kUnsupportedDirection);
}

TEST_CASE("chunking covers the text and respects the limit") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 500; ++round) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 200)(rng);
    const auto max = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const auto text = testing::random_text(rng, n);
    std::vector<bool> breaks(n);
    for (std::size_t i = 0; i < n; ++i) breaks[i] = rng() % 7 == 0;
    const auto chunks = chunk(text, max, breaks);
    std::string joined;
    for (const auto& c : chunks) {
      REQUIRE_FALSE(c.empty());
      REQUIRE(char_count(c) <= max);
      joined += c;
    }
    REQUIRE(joined == text);
  }
}

TEST_CASE("chunking prefers the latest sentence break") {
  const std::string text = "天地玄黃。宇宙洪荒。日月";
  const auto breaks = sentence_breaks(text);
  CHECK(breaks[4]);
  CHECK(breaks[9]);
  CHECK(chunk(text, 8, breaks) ==
        std::vector<std::string>{"天地玄黃。", "宇宙洪荒。日月"});
  CHECK(chunk(text, 12, breaks) == std::vector<std::string>{text});
  // No break in reach: hard split at the limit.
  CHECK(chunk("天地玄黃宇宙", 4) == std::vector<std::string>{"天地玄黃", "宇宙"});
  CHECK(chunk("", 4).empty());
  CHECK(error_of([] { chunk("天", 0); }) == Errc::kInvalidConfig);
  CHECK(error_of([] { chunk("天地", 4, std::vector<bool>{true}); }) ==
        Errc::kLengthMismatch);
}

TEST_CASE("chunking from labels") {
  const auto& reg = PunctLabelRegistry::builtin();
  PunctLabelSeq labels(6, "None");
  labels[1] = "Question";
  labels[3] = "Comma";
  CHECK(chunk("天地玄黃宇宙", 4, reg, labels) ==
        std::vector<std::string>{"天地", "玄黃宇宙"});
}

TEST_CASE("stream assembly") {
  std::mt19937_64 rng(32);
  for (int round = 0; round < 300; ++round) {
    const auto text = testing::random_text(rng, rng() % 40);
    const auto deltas = regroup(rng, text);
    REQUIRE(assemble_stream(deltas) == text);
  }
  const std::vector<StreamDelta> truncated = {{"天", false}, {"地", false}};
  CHECK(error_of([&] { assemble_stream(truncated); }) == Errc::kStreamTruncated);
  const std::vector<StreamDelta> late = {{"天", true}, {"地", false}};
  CHECK(error_of([&] { assemble_stream(late); }) == Errc::kDeltaAfterDone);
  const std::vector<StreamDelta> text_on_done = {{"天", false}, {"地", true}};
  CHECK(assemble_stream(text_on_done) == "天地");

  StreamAssembler a;
  a.push({"天", false});
  CHECK_FALSE(a.done());
  CHECK(a.text() == "天");
  a.push({"", true});
  CHECK(a.finish() == "天");
}

TEST_CASE("joining chunk translations") {
  const std::vector<std::string> parts = {"one", "two", "three"};
  CHECK(join_translations(parts) == "one\ntwo\nthree");
  CHECK(join_translations(std::vector<std::string>{}).empty());
}

TEST_CASE("job lifecycle") {
  auto job = TranslationJob::create("天地玄黃宇宙", Language::kEnglish, 4);
  CHECK(job.chunks().size() == 2);
  CHECK(job.prompt(1) == build_prompt(Language::kHanja, Language::kEnglish, "宇宙"));
  CHECK(job.state() == JobState::kPending);
  CHECK(error_of([&] { job.complete(); }) == Errc::kInvalidState);
  job.start();
  CHECK(error_of([&] { job.start(); }) == Errc::kInvalidState);
  job.complete();
  CHECK(job.state() == JobState::kDone);
  CHECK(error_of([&] { job.fail("late"); }) == Errc::kInvalidState);

  auto failing = TranslationJob::create("天", Language::kKorean);
  failing.start();
  failing.fail("backend down");
  CHECK(failing.state() == JobState::kFailed);
  CHECK(failing.failure() == "backend down");

  CHECK(error_of([] { TranslationJob::create("", Language::kKorean); }) == Errc::kEmptyText);
  CHECK(error_of([] { TranslationJob::create("天", Language::kHanja); }) ==
        Errc::kUnsupportedDirection);
}

}  // TEST_SUITE
