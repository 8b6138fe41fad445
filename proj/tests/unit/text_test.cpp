#include <doctest.h>

#include <random>

#include "charonette/error.hpp"
#include "charonette/text.hpp"

using namespace charonette;

TEST_CASE("utf8 decode and encode are inverse") {
  const std::string s = "Bom que aqui a gente bebe e vai esquentando, né? Saúde!";
  const auto cps = decode_utf8(s);
  CHECK(encode_utf8(cps) == s);
  CHECK(utf8_length(s) == cps.size());
  CHECK(utf8_length("né") == 2);
  CHECK(utf8_length("") == 0);
}

TEST_CASE("utf8 round trip over random scalar values") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::uint32_t> dist(1, 0x10FFFF);
  for (int round = 0; round < 200; ++round) {
    std::u32string text;
    for (int i = 0; i < 20; ++i) {
      char32_t c = dist(rng);
      if (c >= 0xD800 && c <= 0xDFFF) c = U'x';
      text.push_back(c);
    }
    CHECK(decode_utf8(encode_utf8(text)) == text);
  }
}

TEST_CASE("invalid utf8 is a parse error") {
  for (const std::string bad : {std::string("\xC3"), std::string("\xFF"), std::string("a\xE2\x82"),
                                std::string("\xC0\xAF"), std::string("\xED\xA0\x80")}) {
    try {
      decode_utf8(bad);
      FAIL("accepted invalid utf8");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse_error);
    }
  }
}

TEST_CASE("substring by scalar offsets") {
  const std::string s = "então né";
  CHECK(utf8_substr(s, Span{0, 5}) == "então");
  CHECK(utf8_substr(s, Span{6, 8}) == "né");
  CHECK(utf8_substr(s, Span{6, 50}) == "né");
}

TEST_CASE("lowercasing covers accented letters") {
  CHECK(to_lower("ÉRAMOS Ação") == "éramos ação");
  CHECK(to_lower("Reykjavik") == "reykjavik");
}

TEST_CASE("tokenize drops punctuation and reports scalar spans") {
  const std::string s = "Bom que aqui a gente bebe e vai esquentando, né?";
  const auto tokens = tokenize(s);
  REQUIRE(tokens.size() == 10);
  CHECK(tokens[0].text == "Bom");
  CHECK(tokens[0].span == Span{0, 3});
  CHECK(tokens[8].text == "esquentando");
  CHECK(tokens[9].text == "né");
  CHECK(tokens[9].span == Span{45, 47});
  for (const auto& t : tokens) CHECK(utf8_substr(s, t.span) == t.text);
  for (std::size_t i = 1; i < tokens.size(); ++i) CHECK(tokens[i - 1].span.end <= tokens[i].span.start);
}

TEST_CASE("split_words keeps punctuation attached") {
  const auto words = split_words("  Bom que aqui,\tné? ");
  REQUIRE(words.size() == 4);
  CHECK(words[2] == "aqui,");
  CHECK(words[3] == "né?");
  CHECK(trim("  x y \n") == "x y");
}

TEST_CASE("span predicates") {
  CHECK(Span{0, 3}.overlaps(Span{2, 4}));
  CHECK_FALSE(Span{0, 3}.overlaps(Span{3, 4}));
  CHECK(Span{1, 3}.within(3));
  CHECK_FALSE(Span{1, 4}.within(3));
  CHECK_FALSE(Span{2, 2}.within(3));
}
