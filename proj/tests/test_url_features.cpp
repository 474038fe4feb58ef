#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "oracles/oracles.hpp"
#include "urlspam/random.hpp"
#include "urlspam/url_features.hpp"

using namespace urlspam;

namespace {

UrlParts parts_of(std::string_view s) { return parse_url(RawUrl(s)); }

std::string random_url(Rng& rng, std::size_t length) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABC0123456789./:?&=#@%-_";
  std::string s;
  for (std::size_t i = 0; i < length; ++i) s += alphabet[uniform_below(rng, alphabet.size())];
  return s;
}

}  // namespace

TEST(ParseUrl, FullUrl) {
  const auto p = parts_of("https://a.b/c?x=1#f");
  ASSERT_TRUE(p.scheme && p.host && p.query && p.fragment_text);
  EXPECT_EQ(*p.scheme, "https");
  EXPECT_EQ(*p.host, "a.b");
  EXPECT_EQ(p.path, "/c");
  EXPECT_EQ(*p.query, "x=1");
  EXPECT_EQ(*p.fragment_text, "f");
}

TEST(ParseUrl, BareHost) {
  const auto p = parts_of("example.com");
  EXPECT_FALSE(p.scheme);
  ASSERT_TRUE(p.host);
  EXPECT_EQ(*p.host, "example.com");
  EXPECT_EQ(p.path, "");
  EXPECT_FALSE(p.query);
  EXPECT_FALSE(p.fragment_text);
}

TEST(ParseUrl, IpHostWithPath) {
  const auto p = parts_of("http://192.168.0.1/login");
  EXPECT_EQ(*p.scheme, "http");
  EXPECT_EQ(*p.host, "192.168.0.1");
  EXPECT_EQ(p.path, "/login");
  EXPECT_FALSE(p.query);
  EXPECT_FALSE(p.fragment_text);
}

TEST(ParseUrl, SchemeIsLowercased) {
  const auto p = parts_of("HTTPS://Example.com");
  EXPECT_EQ(*p.scheme, "https");
}

TEST(ParseUrl, InvalidSchemeIsTreatedAsHost) {
  const auto p = parts_of("1http://x.com/a");
  EXPECT_FALSE(p.scheme);
}

TEST(ParseUrl, QuestionMarkInsideFragmentIsNotAQuery) {
  const auto p = parts_of("http://x.com/a#frag?z=1");
  EXPECT_FALSE(p.query);
  EXPECT_EQ(*p.fragment_text, "frag?z=1");
}

TEST(ParseUrl, EmptyAfterTrimThrows) {
  EXPECT_THROW(RawUrl("   \t\n"), Error);
  try {
    RawUrl("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyUrl);
  }
}

TEST(ParseUrl, ReassembleReproducesInput) {
  Rng rng(11);
  for (int t = 0; t < 500; ++t) {
    const auto s = random_url(rng, 1 + uniform_below(rng, 60));
    const RawUrl raw(s);
    const auto p = parse_url(raw);
    std::string normalized = raw.text();
    if (p.scheme) {
      const auto sep = normalized.find("://");
      for (std::size_t i = 0; i < sep; ++i) normalized[i] = detail::ascii_lower(normalized[i]);
    }
    EXPECT_EQ(p.reassemble(), normalized) << s;
    if (p.scheme) {
      for (char c : *p.scheme) EXPECT_TRUE(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-');
    }
  }
}

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(shannon_entropy("aaaa"), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("abcd"), 2.0);
  EXPECT_NEAR(shannon_entropy("aab"), 0.9183, 1e-4);
  EXPECT_DOUBLE_EQ(shannon_entropy(""), 0.0);
}

TEST(Entropy, MatchesBruteForceOracle) {
  Rng rng(3);
  for (std::size_t len : {1u, 2u, 17u, 256u, 1000u, 10000u}) {
    std::u32string s;
    for (std::size_t i = 0; i < len; ++i) {
      // Mix of ASCII and non-ASCII code points.
      const auto r = uniform_below(rng, 40);
      s.push_back(r < 30 ? static_cast<char32_t>('a' + r % 26) : static_cast<char32_t>(0x400 + r));
    }
    EXPECT_NEAR(shannon_entropy(std::u32string_view(s)), oracle::entropy(s), 1e-9) << len;
  }
}

TEST(Entropy, BoundedByLogLength) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_url(rng, 1 + uniform_below(rng, 200));
    const double h = shannon_entropy(s);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(s.size())) + 1e-12);
    const bool all_same = s.find_first_not_of(s[0]) == std::string::npos;
    EXPECT_EQ(h == 0.0, all_same);
  }
}

TEST(Words, Examples) {
  EXPECT_EQ(count_words("http://a.com"), 3u);
  EXPECT_EQ(count_words("12345"), 0u);
  EXPECT_EQ(count_words("https://mail.news.example.com/path?a=1&b=2#frag"), 9u);
}

TEST(Subdomains, Examples) {
  EXPECT_EQ(count_subdomains(parts_of("example.com")), 0u);
  EXPECT_EQ(count_subdomains(parts_of("mail.news.example.com")), 2u);
  EXPECT_EQ(count_subdomains(parts_of("192.168.0.1")), 0u);
  EXPECT_EQ(count_subdomains(parts_of("http://user@a.b.example.com:8080/x")), 2u);
}

TEST(DetectIp, Examples) {
  EXPECT_EQ(detect_ip(parts_of("192.168.0.1")), 1);
  EXPECT_EQ(detect_ip(parts_of("example.com")), 0);
  EXPECT_EQ(detect_ip(parts_of("999.1.1.1")), 0);
  EXPECT_EQ(detect_ip(parts_of("http://[2001:db8::1]/x")), 1);
  EXPECT_EQ(detect_ip(parts_of("http://1.2.3/x")), 0);
  EXPECT_EQ(detect_ip(parts_of("http://10.0.0.1:8080/x")), 1);
}

TEST(ExtractFeatures, FullExample) {
  const auto f = extract_features("https://mail.news.example.com/path?a=1&b=2#frag");
  EXPECT_EQ(f.url_length, 47);
  EXPECT_EQ(f.has_subscribe, 0);
  EXPECT_EQ(f.contains_hash, 1);
  EXPECT_EQ(f.num_digits, 2);
  EXPECT_EQ(f.non_https, 0);
  EXPECT_EQ(f.num_words, 9);
  EXPECT_NEAR(f.entropy, 4.53035554343471, 1e-12);
  EXPECT_EQ(f.num_params, 2);
  EXPECT_EQ(f.num_fragments, 1);
  EXPECT_EQ(f.num_subdomains, 2);
  EXPECT_EQ(f.num_pct20, 0);
  EXPECT_EQ(f.num_at, 0);
  EXPECT_EQ(f.has_ip, 0);
}

TEST(ExtractFeatures, SubscribeExample) {
  const auto f = extract_features("http://example.com/subscribe?id=123");
  EXPECT_EQ(f.has_subscribe, 1);
  EXPECT_EQ(f.non_https, 1);
  EXPECT_EQ(f.num_digits, 3);
  EXPECT_EQ(f.num_params, 1);
  EXPECT_EQ(f.url_length, 35);
}

TEST(ExtractFeatures, SingleCharacter) {
  const auto f = extract_features("a");
  FeatureVector expected;
  expected.url_length = 1;
  expected.num_words = 1;
  expected.non_https = 1;
  EXPECT_EQ(f, expected);
}

TEST(ExtractFeatures, EncodedSpacesAndAt) {
  const auto f = extract_features("http://x.com/a%20b%20%2020@c");
  EXPECT_EQ(f.num_pct20, 3);
  EXPECT_EQ(f.num_at, 1);
  EXPECT_EQ(extract_features("http://x.com/%2%20").num_pct20, 1);
  EXPECT_EQ(extract_features("http://x.com/%2020").num_pct20, 1);
}

TEST(ExtractFeatures, EmptyQueryHasNoParams) {
  EXPECT_EQ(extract_features("http://x.com/a?").num_params, 0);
  EXPECT_EQ(extract_features("http://x.com/a?b&c&d").num_params, 3);
}

TEST(ExtractFeatures, NonUtf8BytesAreReplaced) {
  const std::string bad = std::string("http://x.com/") + static_cast<char>(0xff) + static_cast<char>(0xfe);
  const auto f = extract_features(bad);
  EXPECT_EQ(f.url_length, 15);
  EXPECT_TRUE(std::isfinite(f.entropy));
}

TEST(ExtractFeatures, LengthCountsCodePoints) {
  const auto f = extract_features("http://été.fr/ü");
  EXPECT_EQ(f.url_length, 15);
  EXPECT_NEAR(f.entropy, 3.1395722619867223, 1e-12);
}

TEST(ExtractFeatures, PropertyInvariants) {
  Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    std::string s = random_url(rng, 1 + uniform_below(rng, 80));
    if (s.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const auto f = extract_features(s);
    for (double v : f.to_array()) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
    EXPECT_LE(f.entropy, std::log2(f.url_length) + 1e-12);
    EXPECT_EQ(f.contains_hash == 1, f.num_fragments >= 1);
    EXPECT_GE(f.num_fragments, f.contains_hash);
    const auto parts = parse_url(RawUrl(s));
    EXPECT_EQ(f.num_params == 0, !parts.query || parts.query->empty());

    // Appending a parameter to a query-free URL.
    if (!parts.query && !parts.fragment_text) {
      const auto g = extract_features(s + "?x=1");
      EXPECT_EQ(g.num_params, f.num_params + 1) << s;
      EXPECT_EQ(g.url_length, f.url_length + 4);
    }
    EXPECT_EQ(extract_features(s), f);
  }
}

TEST(ExtractFeatures, SubscribeIsCaseInsensitive) {
  EXPECT_EQ(extract_features("http://x.com/SUBSCRIBE").has_subscribe,
            extract_features("http://x.com/subscribe").has_subscribe);
  EXPECT_EQ(extract_features("http://x.com/SuBsCrIbE").has_subscribe, 1);
}

TEST(ExtractFeatures, DeterministicAcrossThreads) {
  Rng rng(7);
  std::vector<std::string> urls;
  for (int i = 0; i < 200; ++i) urls.push_back("http://" + random_url(rng, 30));
  std::vector<FeatureVector> a(urls.size()), b(urls.size());
  for (std::size_t i = 0; i < urls.size(); ++i) a[i] = extract_features(urls[i]);
  std::vector<std::jthread> pool;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < urls.size(); i += 4) b[i] = extract_features(urls[i]);
    });
  }
  pool.clear();
  EXPECT_EQ(a, b);
}

TEST(FeatureVector, CanonicalOrder) {
  EXPECT_EQ(kFeatureNames.size(), 13u);
  EXPECT_EQ(kFeatureNames[0], "url_length");
  EXPECT_EQ(kFeatureNames[6], "entropy");
  EXPECT_EQ(kFeatureNames[12], "has_ip");
  FeatureVector f;
  f.num_subdomains = 5;
  EXPECT_EQ(f.to_array()[9], 5);
}
