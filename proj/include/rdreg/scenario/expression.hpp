#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "rdreg/error.hpp"

namespace rdreg {

/// Profile expressions over x in [0, 1]: sums of terms c, c*x^k,
/// c*sin(k*pi*x), c*cos(k*pi*x). Nothing else is accepted.
struct ExprTerm {
  enum class Kind { constant, power, sine, cosine };
  Kind kind = Kind::constant;
  double coef = 0.0;
  double k = 0.0;  // exponent (power) or multiple of pi (sine, cosine)

  double operator()(double x) const {
    switch (kind) {
      case Kind::constant: return coef;
      case Kind::power: return coef * std::pow(x, k);
      case Kind::sine: return coef * std::sin(k * std::numbers::pi * x);
      case Kind::cosine: return coef * std::cos(k * std::numbers::pi * x);
    }
    return 0.0;
  }

  friend bool operator==(const ExprTerm&, const ExprTerm&) = default;
};

struct Expression {
  std::vector<ExprTerm> terms;

  double operator()(double x) const {
    double s = 0.0;
    for (const ExprTerm& t : terms) s += t(x);
    return s;
  }

  friend bool operator==(const Expression&, const Expression&) = default;
};

namespace detail {

inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ExprParser {
 public:
  ExprParser(std::string_view src, int line) : s_(src), line_(line) {}

  Expression parse() {
    Expression e;
    skip();
    if (pos_ == s_.size()) fail("empty expression");
    double sign = 1.0;
    if (peek('+') || peek('-')) sign = take() == '-' ? -1.0 : 1.0;
    e.terms.push_back(term(sign));
    while (true) {
      skip();
      if (pos_ == s_.size()) break;
      if (!(peek('+') || peek('-'))) fail("expected '+' or '-'");
      sign = take() == '-' ? -1.0 : 1.0;
      e.terms.push_back(term(sign));
    }
    return e;
  }

 private:
  ExprTerm term(double sign) {
    ExprTerm t;
    t.coef = sign;
    bool shaped = false;
    do {
      skip();
      if (std::isdigit(static_cast<unsigned char>(cur())) || cur() == '.') {
        t.coef *= number();
      } else if (word("pi")) {
        t.coef *= std::numbers::pi;
      } else if (word("x")) {
        double k = 1.0;
        skip();
        if (peek('^')) {
          take();
          skip();
          k = number();
          if (k < 0 || k != std::floor(k)) fail("exponent must be a non-negative integer");
        }
        shape(t, shaped, ExprTerm::Kind::power, k);
      } else if (word("sin") || word("cos")) {
        const bool sine = s_.substr(pos_ - 3, 3) == "sin";
        shape(t, shaped, sine ? ExprTerm::Kind::sine : ExprTerm::Kind::cosine, trig_argument());
      } else {
        fail("unsupported token");
      }
      skip();
    } while (peek('*') && (take(), true));
    return t;
  }

  // Accepts (pi*x), (k*pi*x), (pi*k*x).
  double trig_argument() {
    expect('(');
    double k = 1.0;
    bool have_pi = false, have_x = false;
    do {
      skip();
      if (std::isdigit(static_cast<unsigned char>(cur())) || cur() == '.')
        k *= number();
      else if (word("pi"))
        have_pi = have_pi ? (fail("repeated pi"), true) : true;
      else if (word("x"))
        have_x = have_x ? (fail("repeated x"), true) : true;
      else
        fail("trigonometric argument must be k*pi*x");
      skip();
    } while (peek('*') && (take(), true));
    expect(')');
    if (!have_pi || !have_x) fail("trigonometric argument must be k*pi*x");
    return k;
  }

  void shape(ExprTerm& t, bool& shaped, ExprTerm::Kind kind, double k) {
    if (shaped) fail("product of two non-constant factors is not supported");
    shaped = true;
    t.kind = kind;
    t.k = k;
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    const std::string tok(s_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) fail("malformed number '" + tok + "'");
    return v;
  }

  bool word(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) return false;
    const std::size_t after = pos_ + w.size();
    if (after < s_.size() && std::isalnum(static_cast<unsigned char>(s_[after]))) return false;
    pos_ = after;
    return true;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char cur() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  bool peek(char c) const { return cur() == c; }
  char take() { return s_[pos_++]; }
  void expect(char c) {
    skip();
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(line_, "expression '" + std::string(s_) + "': " + msg);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text, int line = 0) { return detail::ExprParser(text, line).parse(); }

/// Canonical text; parse_expression(to_string(e)) == e.
inline std::string to_string(const Expression& e) {
  std::string out;
  for (std::size_t i = 0; i < e.terms.size(); ++i) {
    const ExprTerm& t = e.terms[i];
    const double mag = std::abs(t.coef);
    if (i == 0)
      out += std::signbit(t.coef) ? "-" : "";
    else
      out += std::signbit(t.coef) ? " - " : " + ";
    out += detail::num17(mag);
    switch (t.kind) {
      case ExprTerm::Kind::constant: break;
      case ExprTerm::Kind::power: out += "*x^" + detail::num17(t.k); break;
      case ExprTerm::Kind::sine: out += "*sin(" + detail::num17(t.k) + "*pi*x)"; break;
      case ExprTerm::Kind::cosine: out += "*cos(" + detail::num17(t.k) + "*pi*x)"; break;
    }
  }
  return out;
}

}  // namespace rdreg
