#pragma once

// URL parsing and the 13-feature vector computed for every URL.
//
// Features are computed over the trimmed URL text decoded as UTF-8, with each
// invalid byte replaced by U+FFFD; lengths and entropies count code points.

#include <algorithm>
#include <array>
#include <arpa/inet.h>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "urlspam/error.hpp"

namespace urlspam {

inline constexpr std::size_t kFeatureCount = 13;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "url_length", "has_subscribe", "contains_hash", "num_digits", "non_https",
    "num_words",  "entropy",       "num_params",    "num_fragments", "num_subdomains",
    "num_%20",    "num_@",         "has_ip",
};

// ---------------------------------------------------------------------------
// UTF-8

namespace detail {
inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}
}  // namespace detail

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes UTF-8, replacing every byte that does not start a well-formed
/// sequence with U+FFFD.
inline std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min_cp = 0x10000;
    }
    bool ok = len != 0 && i + len <= bytes.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (ok && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacementChar);
      ++i;
    }
  }
  return out;
}

/// Lossy UTF-8 normalization: invalid bytes become U+FFFD.
inline std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (char32_t cp : decode_utf8(bytes)) detail::append_utf8(out, cp);
  return out;
}

// ---------------------------------------------------------------------------
// RawUrl / UrlParts

/// A URL string: sanitized UTF-8, trimmed of ASCII whitespace, never empty.
class RawUrl {
 public:
  explicit RawUrl(std::string_view bytes) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto first = bytes.find_first_not_of(ws);
    if (first == std::string_view::npos) throw Error(ErrorCode::EmptyUrl, "URL is empty");
    const auto last = bytes.find_last_not_of(ws);
    text_ = sanitize_utf8(bytes.substr(first, last - first + 1));
  }

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

struct UrlParts {
  std::optional<std::string> scheme;
  std::optional<std::string> host;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment_text;

  /// Inverse of parse_url on normalized input.
  std::string reassemble() const {
    std::string out;
    if (scheme) out += *scheme + "://";
    if (host) out += *host;
    out += path;
    if (query) out += "?" + *query;
    if (fragment_text) out += "#" + *fragment_text;
    return out;
  }

  friend bool operator==(const UrlParts&, const UrlParts&) = default;
};

namespace detail {
inline bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool valid_scheme(std::string_view s) {
  if (s.empty() || !ascii_alpha(s.front())) return false;
  for (char c : s) {
    if (!(ascii_alpha(c) || ascii_digit(c) || c == '+' || c == '.' || c == '-')) return false;
  }
  return true;
}
}  // namespace detail

/// Splits a URL into scheme, host (the whole authority), path, query and
/// fragment. The scheme is lowercased; everything else is kept verbatim.
inline UrlParts parse_url(const RawUrl& raw) {
  std::string_view rest = raw.text();
  UrlParts parts;
  if (const auto sep = rest.find("://"); sep != std::string_view::npos &&
                                         detail::valid_scheme(rest.substr(0, sep))) {
    std::string scheme(rest.substr(0, sep));
    for (char& c : scheme) c = detail::ascii_lower(c);
    parts.scheme = std::move(scheme);
    rest.remove_prefix(sep + 3);
  }
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    parts.fragment_text = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (const auto q = rest.find('?'); q != std::string_view::npos) {
    parts.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  const auto slash = rest.find('/');
  const auto host = rest.substr(0, slash);
  if (!host.empty()) parts.host = std::string(host);
  if (slash != std::string_view::npos) parts.path = std::string(rest.substr(slash));
  return parts;
}

/// Host name inside an authority: drops "userinfo@" and a trailing ":port".
inline std::string_view hostname(std::string_view authority) {
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    return close == std::string_view::npos ? authority : authority.substr(0, close + 1);
  }
  if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  return authority;
}

inline bool is_ipv4_literal(std::string_view host) {
  int octets = 0;
  std::size_t i = 0;
  while (true) {
    std::size_t digits = 0;
    int value = 0;
    while (i < host.size() && detail::ascii_digit(host[i]) && digits < 4) {
      value = value * 10 + (host[i] - '0');
      ++i, ++digits;
    }
    if (digits == 0 || digits > 3 || value > 255) return false;
    ++octets;
    if (i == host.size()) return octets == 4;
    if (host[i] != '.' || octets == 4) return false;
    ++i;
  }
}

inline bool is_ipv6_literal(std::string_view host) {
  if (host.size() < 3 || host.front() != '[' || host.back() != ']') return false;
  std::string inner(host.substr(1, host.size() - 2));
  if (const auto zone = inner.find('%'); zone != std::string::npos) inner.resize(zone);
  in6_addr addr{};
  return inet_pton(AF_INET6, inner.c_str(), &addr) == 1;
}

// ---------------------------------------------------------------------------
// Individual features

/// Shannon entropy in bits of the code point distribution of `text`.
inline double shannon_entropy(std::u32string_view text) {
  if (text.empty()) return 0.0;
  std::array<std::size_t, 128> ascii{};
  std::map<char32_t, std::size_t> other;
  for (char32_t c : text) {
    if (c < 128) {
      ++ascii[c];
    } else {
      ++other[c];
    }
  }
  const double n = static_cast<double>(text.size());
  double h = 0.0;
  auto term = [&](std::size_t count) {
    if (count == 0) return;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  };
  for (auto count : ascii) term(count);
  for (const auto& [cp, count] : other) term(count);
  // Rounding can push a uniform distribution a hair above log2(n).
  return std::clamp(h, 0.0, std::log2(n));
}

inline double shannon_entropy(std::string_view utf8) { return shannon_entropy(decode_utf8(utf8)); }

/// Maximal runs of ASCII letters.
inline std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool alpha = detail::ascii_alpha(c);
    if (alpha && !in_word) ++words;
    in_word = alpha;
  }
  return words;
}

inline std::size_t count_words(const RawUrl& raw) { return count_words(raw.text()); }

inline int detect_ip(const UrlParts& parts) {
  if (!parts.host) return 0;
  const auto host = hostname(*parts.host);
  return (is_ipv4_literal(host) || is_ipv6_literal(host)) ? 1 : 0;
}

/// Labels beyond the registrable "name.tld" pair; no public-suffix list, so
/// "example.co.uk" reports one subdomain.
inline std::size_t count_subdomains(const UrlParts& parts) {
  if (!parts.host || detect_ip(parts)) return 0;
  const auto host = hostname(*parts.host);
  std::size_t labels = 0;
  std::size_t start = 0;
  while (start <= host.size()) {
    auto dot = host.find('.', start);
    if (dot == std::string_view::npos) dot = host.size();
    if (dot > start) ++labels;
    start = dot + 1;
  }
  return labels > 2 ? labels - 2 : 0;
}

// ---------------------------------------------------------------------------
// Feature vector

struct FeatureVector {
  double url_length = 0;
  double has_subscribe = 0;
  double contains_hash = 0;
  double num_digits = 0;
  double non_https = 0;
  double num_words = 0;
  double entropy = 0;
  double num_params = 0;
  double num_fragments = 0;
  double num_subdomains = 0;
  double num_pct20 = 0;
  double num_at = 0;
  double has_ip = 0;

  /// Canonical column order, matching kFeatureNames.
  std::array<double, kFeatureCount> to_array() const {
    return {url_length, has_subscribe, contains_hash, num_digits, non_https, num_words, entropy,
            num_params, num_fragments, num_subdomains, num_pct20,  num_at,    has_ip};
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline FeatureVector extract_features(const RawUrl& raw) {
  const std::string& text = raw.text();
  const UrlParts parts = parse_url(raw);
  const std::u32string code_points = decode_utf8(text);

  FeatureVector f;
  f.url_length = static_cast<double>(code_points.size());

  std::string lower(text);
  for (char& c : lower) c = detail::ascii_lower(c);
  f.has_subscribe = lower.find("subscribe") != std::string::npos ? 1 : 0;

  std::size_t digits = 0, hashes = 0, ats = 0, pct20 = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (detail::ascii_digit(c)) ++digits;
    if (c == '#') ++hashes;
    if (c == '@') ++ats;
    if (c == '%' && i + 2 < text.size() && text[i + 1] == '2' && text[i + 2] == '0') {
      ++pct20;
      i += 2;
    }
  }
  f.contains_hash = hashes > 0 ? 1 : 0;
  f.num_digits = static_cast<double>(digits);
  f.non_https = (parts.scheme && *parts.scheme == "https") ? 0 : 1;
  f.num_words = static_cast<double>(count_words(text));
  f.entropy = shannon_entropy(std::u32string_view(code_points));
  if (parts.query && !parts.query->empty()) {
    f.num_params = 1.0 + static_cast<double>(std::count(parts.query->begin(), parts.query->end(), '&'));
  }
  f.num_fragments = static_cast<double>(hashes);
  f.num_subdomains = static_cast<double>(count_subdomains(parts));
  f.num_pct20 = static_cast<double>(pct20);
  f.num_at = static_cast<double>(ats);
  f.has_ip = detect_ip(parts);
  return f;
}

inline FeatureVector extract_features(std::string_view url) { return extract_features(RawUrl(url)); }

}  // namespace urlspam
