#include <gtest/gtest.h>

#include "trailpack/text.hpp"
#include "trailpack/url.hpp"

namespace trailpack {
namespace {

TEST(Utf8, AcceptsWellFormedText) {
  EXPECT_FALSE(text::first_invalid_utf8("plain ascii").has_value());
  EXPECT_FALSE(text::first_invalid_utf8("Mulino \xC3\xA8 \xE2\x82\xAC \xF0\x9F\x8C\xB2").has_value());
  EXPECT_FALSE(text::first_invalid_utf8("").has_value());
}

TEST(Utf8, ReportsOffsetOfFirstBadSequence) {
  EXPECT_EQ(text::first_invalid_utf8("ab\xFF"), 2u);
  EXPECT_EQ(text::first_invalid_utf8("a\xC3"), 1u);            // truncated
  EXPECT_EQ(text::first_invalid_utf8("\xC0\xAF"), 0u);         // overlong
  EXPECT_EQ(text::first_invalid_utf8("x\xED\xA0\x80"), 1u);    // surrogate
  EXPECT_EQ(text::first_invalid_utf8("\xF4\x90\x80\x80"), 0u); // above U+10FFFF
}

TEST(Text, WordsAndLengths) {
  EXPECT_EQ(text::word_count(""), 0u);
  EXPECT_EQ(text::word_count("   \n\t "), 0u);
  EXPECT_EQ(text::word_count("  one two\tthree\nfour  "), 4u);
  EXPECT_EQ(text::trim(" \t x y \n"), "x y");
  EXPECT_EQ(text::length("caff\xC3\xA8"), 5u);
  EXPECT_EQ(text::byte_offset("caff\xC3\xA8!", 5), 6u);
  EXPECT_EQ(text::byte_offset("ab", 9), 2u);
}

TEST(Url, ParsesAbsoluteHttp) {
  auto u = url::parse_absolute_http("HTTPS://example.org/a/b.geojson?x=1#frag");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->scheme, "https");
  EXPECT_EQ(u->authority, "example.org");
  EXPECT_EQ(u->path, "/a/b.geojson");
  EXPECT_EQ(u->query, "x=1");
  EXPECT_EQ(u->fragment, "frag");
  EXPECT_EQ(url::path_extension(*u), "geojson");
}

TEST(Url, RejectsEverythingElse) {
  for (const char* bad : {"", "tour.geojson", "/abs/path", "ftp://example.org/x", "https://",
                          "https:///x", "hello world", "https://exa mple.org/", "mailto:a@b.c"}) {
    EXPECT_FALSE(url::is_absolute_http(bad)) << bad;
  }
}

TEST(Url, QueryParamsDecodeAndKeepOrder) {
  auto params = url::query_params("b=2&a=x%20y&c&d=1+1");
  ASSERT_TRUE(params);
  ASSERT_EQ(params->size(), 4u);
  EXPECT_EQ((*params)[0], (std::pair<std::string, std::string>{"b", "2"}));
  EXPECT_EQ((*params)[1].second, "x y");
  EXPECT_EQ((*params)[2].second, "");
  EXPECT_EQ((*params)[3].second, "1 1");
  EXPECT_FALSE(url::query_params("a=%G1"));
  EXPECT_FALSE(url::query_params("a=%4"));
}

TEST(Url, PercentEncodingRoundTrips) {
  const std::string raw = "mill 3/\xC3\xA8?&=";
  const auto encoded = url::percent_encode(raw);
  EXPECT_EQ(encoded.find_first_of(" /?&="), std::string::npos);
  EXPECT_EQ(url::percent_decode(encoded), raw);
  EXPECT_EQ(url::percent_encode("A-z_0.~"), "A-z_0.~");
}

}  // namespace
}  // namespace trailpack
