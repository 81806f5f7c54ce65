#include <doctest.h>

#include <algorithm>
#include <random>

#include "hanjakit/entities.hpp"
#include "hanjakit/error.hpp"
#include "iob2_oracle.hpp"

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

TagSeq tags(std::initializer_list<const char*> names) {
  TagSeq out;
  for (const auto* n : names) out.push_back(parse_tag(n));
  return out;
}

}  // namespace

TEST_SUITE("entities") {

TEST_CASE("tag parsing") {
  CHECK(parse_tag("O") == Tag::outside());
  CHECK(parse_tag("B-PER") == Tag::begin(EntityType::kPerson));
  CHECK(parse_tag("I-MISC") == Tag::inside(EntityType::kMisc));
  CHECK(to_string(Tag::begin(EntityType::kLocation)) == "B-LOC");
  for (const auto* bad : {"", "B", "B-", "X-PER", "B-PERSON1", "o", "I_LOC"}) {
    CHECK(error_of([&] { parse_tag(bad); }) == Errc::kUnknownTag);
  }
  CHECK(parse_entity_type("Location") == EntityType::kLocation);
  CHECK(parse_entity_type("LOC") == EntityType::kLocation);
}

TEST_CASE("decode worked examples") {
  CHECK(decode_iob2(tags({"B-PER", "I-PER", "I-PER", "O", "B-LOC", "I-LOC"})) ==
        std::vector<EntitySpan>{{0, 3, EntityType::kPerson}, {4, 6, EntityType::kLocation}});
  // Adjacent entities of the same type stay separate.
  CHECK(decode_iob2(tags({"B-PER", "B-PER"})) ==
        std::vector<EntitySpan>{{0, 1, EntityType::kPerson}, {1, 2, EntityType::kPerson}});
  // A stray I opens a new span; a type switch inside a run splits it.
  CHECK(decode_iob2(tags({"O", "I-LOC", "I-PER"})) ==
        std::vector<EntitySpan>{{1, 2, EntityType::kLocation}, {2, 3, EntityType::kPerson}});
  CHECK(decode_iob2(TagSeq{}).empty());
}

TEST_CASE("decode agrees with the brute-force oracle on random long inputs") {
  std::mt19937_64 rng(21);
  const auto alphabet = testing::full_tag_alphabet();
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int round = 0; round < 500; ++round) {
    TagSeq seq(std::uniform_int_distribution<std::size_t>(0, 30)(rng));
    for (auto& t : seq) t = alphabet[pick(rng)];
    REQUIRE(decode_iob2(seq) == testing::brute_force_decode(seq));
  }
}

TEST_CASE("encode") {
  const std::vector<EntitySpan> spans = {{4, 6, EntityType::kLocation},
                                         {0, 3, EntityType::kPerson}};
  CHECK(tag_strings(encode_iob2(spans, 7)) ==
        std::vector<std::string>{"B-PER", "I-PER", "I-PER", "O", "B-LOC", "I-LOC", "O"});
  const std::vector<EntitySpan> overlap = {{0, 3, EntityType::kPerson},
                                           {2, 4, EntityType::kLocation}};
  CHECK(error_of([&] { encode_iob2(overlap, 5); }) == Errc::kOverlappingSpans);
  const std::vector<EntitySpan> outside = {{3, 6, EntityType::kPerson}};
  CHECK(error_of([&] { encode_iob2(outside, 5); }) == Errc::kSpanOutOfRange);
  const std::vector<EntitySpan> empty = {{2, 2, EntityType::kPerson}};
  CHECK(error_of([&] { encode_iob2(empty, 5); }) == Errc::kSpanOutOfRange);
}

TEST_CASE("round trips on random valid inputs") {
  std::mt19937_64 rng(22);
  for (int round = 0; round < 500; ++round) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
    const auto spans = testing::random_spans(rng, n);
    REQUIRE(decode_iob2(encode_iob2(spans, n)) == spans);
    const auto seq = encode_iob2(spans, n);
    REQUIRE(encode_iob2(decode_iob2(seq), n) == seq);
  }
}

TEST_CASE("add_span replaces overlapping spans") {
  std::vector<EntitySpan> spans = {{0, 2, EntityType::kPerson},
                                   {3, 5, EntityType::kLocation},
                                   {7, 9, EntityType::kMisc}};
  const auto out = add_span(spans, {1, 4, EntityType::kMisc}, 10);
  CHECK(out == std::vector<EntitySpan>{{1, 4, EntityType::kMisc}, {7, 9, EntityType::kMisc}});
  CHECK(add_span(spans, {5, 7, EntityType::kPerson}, 10).size() == 4);
  CHECK(error_of([&] { add_span(spans, {8, 11, EntityType::kPerson}, 10); }) ==
        Errc::kSpanOutOfRange);
}

TEST_CASE("add_span keeps the store valid") {
  std::mt19937_64 rng(23);
  const std::size_t n = 20;
  std::vector<EntitySpan> spans;
  for (int round = 0; round < 2000; ++round) {
    const auto a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const auto b = std::uniform_int_distribution<std::size_t>(a + 1, n)(rng);
    const EntitySpan s{a, b, static_cast<EntityType>(round % 4)};
    const auto before = spans;
    spans = add_span(spans, s, n);
    REQUIRE(is_valid_span_store(spans, n));
    REQUIRE(std::count(spans.begin(), spans.end(), s) == 1);
    // Exactly the spans overlapping the new one disappear.
    std::size_t kept = 0;
    for (const auto& old : before) kept += old.overlaps(s) ? 0 : 1;
    REQUIRE(spans.size() == kept + 1);
    if (round % 3 == 0) {
      const auto pos = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      const auto removed = remove_span_at(spans, pos);
      const auto hit = std::any_of(spans.begin(), spans.end(),
                                   [&](const auto& x) { return x.contains(pos); });
      REQUIRE(removed.size() == spans.size() - (hit ? 1 : 0));
      spans = removed;
    }
  }
}

TEST_CASE("span store validity") {
  const std::vector<EntitySpan> unsorted = {{3, 4, EntityType::kPerson},
                                            {0, 1, EntityType::kPerson}};
  CHECK_FALSE(is_valid_span_store(unsorted, 5));
  const std::vector<EntitySpan> ok = {{0, 1, EntityType::kPerson},
                                      {1, 5, EntityType::kPerson}};
  CHECK(is_valid_span_store(ok, 5));
  CHECK_FALSE(is_valid_span_store(ok, 4));
}

}  // TEST_SUITE
