#pragma once

// Line-oriented key/value text used by the model file format. Each line is a
// key followed by space-separated tokens. Doubles are written as hexadecimal
// floats, so reading and re-writing a payload reproduces it byte for byte.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "urlspam/error.hpp"

namespace urlspam::io {

inline std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw Error(ErrorCode::ModelFormat, "bad number '" + token + "'");
  }
  return v;
}

inline std::int64_t parse_int(const std::string& token) {
  char* end = nullptr;
  const long long v = std::strtoll(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw Error(ErrorCode::ModelFormat, "bad integer '" + token + "'");
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class... Tokens>
  void line(std::string_view key, const Tokens&... tokens) {
    out_ << key;
    ((out_ << ' ' << token(tokens)), ...);
    out_ << '\n';
  }

  void doubles(std::string_view key, const std::vector<double>& values) {
    out_ << key << ' ' << values.size();
    for (double v : values) out_ << ' ' << hex_double(v);
    out_ << '\n';
  }

  void ints(std::string_view key, const std::vector<int>& values) {
    out_ << key << ' ' << values.size();
    for (int v : values) out_ << ' ' << v;
    out_ << '\n';
  }

 private:
  static std::string token(double v) { return hex_double(v); }
  static std::string token(float v) = delete;
  static std::string token(const std::string& v) { return v; }
  static std::string token(std::string_view v) { return std::string(v); }
  static std::string token(const char* v) { return v; }
  static std::string token(bool v) { return v ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string token(I v) {
    return std::to_string(v);
  }

  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next line's tokens after `key`; throws if the key differs.
  std::vector<std::string> expect(std::string_view key) {
    auto tokens = next_line();
    if (tokens.empty() || tokens.front() != key) {
      throw Error(ErrorCode::ModelFormat, "expected '" + std::string(key) + "', found '" +
                                              (tokens.empty() ? std::string("<eof>") : tokens.front()) + "'");
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  std::vector<std::string> expect(std::string_view key, std::size_t count) {
    auto tokens = expect(key);
    if (tokens.size() != count) {
      throw Error(ErrorCode::ModelFormat, "'" + std::string(key) + "' expects " + std::to_string(count) + " values");
    }
    return tokens;
  }

  double real(std::string_view key) { return parse_double(expect(key, 1)[0]); }
  std::int64_t integer(std::string_view key) { return parse_int(expect(key, 1)[0]); }
  std::string word(std::string_view key) { return expect(key, 1)[0]; }

  std::vector<double> doubles(std::string_view key) {
    const auto tokens = expect(key);
    const auto n = counted(key, tokens);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = parse_double(tokens[i + 1]);
    return out;
  }

  std::vector<int> ints(std::string_view key) {
    const auto tokens = expect(key);
    const auto n = counted(key, tokens);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(parse_int(tokens[i + 1]));
    return out;
  }

  std::vector<std::string> next_line() {
    std::string text;
    if (!std::getline(in_, text)) return {};
    std::istringstream ss(text);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(std::move(t));
    return tokens;
  }

 private:
  static std::size_t counted(std::string_view key, const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw Error(ErrorCode::ModelFormat, "'" + std::string(key) + "' missing count");
    const auto n = parse_int(tokens[0]);
    if (n < 0 || static_cast<std::size_t>(n) + 1 != tokens.size()) {
      throw Error(ErrorCode::ModelFormat, "'" + std::string(key) + "' count mismatch");
    }
    return static_cast<std::size_t>(n);
  }

  std::istream& in_;
};

}  // namespace urlspam::io
