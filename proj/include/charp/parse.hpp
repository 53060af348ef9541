// Recursive-descent parser for the canonical polynomial syntax
// (+, -, *, ^, parentheses, integer coefficients, named variables) and for
// matrix literals [[...], [...]]. Errors carry line and column.
#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "charp/matrix.hpp"
#include "charp/poly.hpp"

namespace charp {

class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, std::size_t line, std::size_t col)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) +
                           ": " + what),
        line_(line), col_(col) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return col_; }

private:
  std::size_t line_, col_;
};

namespace detail {

class PolyParser {
public:
  PolyParser(std::string_view text, RingPtr ring, std::size_t line, std::size_t col0)
      : text_(text), ring_(std::move(ring)), line_(line), col0_(col0) {}

  ModPoly parse_poly() {
    ModPoly v = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return v;
  }

  PolyMatrix parse_matrix() {
    PolyMatrix m = matrix();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return m;
  }

private:
  [[noreturn]] void fail(const std::string& what) { throw parse_error(what, line_, col0_ + pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  std::uint64_t number() {
    skip_ws();
    if (pos_ >= text_.size() || !std::isdigit((unsigned char)text_[pos_])) fail("expected a number");
    std::uint64_t v = 0;
    while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > (1ULL << 40)) fail("number too large");
      ++pos_;
    }
    return v;
  }

  ModPoly atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected a polynomial atom");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ModPoly v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit((unsigned char)c)) return ModPoly::constant(ring_, number());
    if (std::isalpha((unsigned char)c) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_' || text_[pos_] == '\''))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (ring_->has_t && name == "t") return ModPoly::tvar(ring_);
      for (std::size_t i = 0; i < ring_->nx(); ++i)
        if (ring_->xvars[i] == name) return ModPoly::variable(ring_, i);
      pos_ = start;
      fail("unknown variable '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  ModPoly power() {
    ModPoly base = atom();
    if (eat('^')) return base.pow(number());
    return base;
  }

  ModPoly product() {
    ModPoly v = power();
    for (;;) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        v = v * power();
      } else if (std::isalpha((unsigned char)c) || c == '(' || c == '_') {
        // juxtaposition, as in 2x or x(y + 1)
        v = v * power();
      } else {
        return v;
      }
    }
  }

  ModPoly expr() {
    bool neg = false;
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      neg = true;
    } else if (peek() == '+') {
      ++pos_;
    }
    ModPoly v = product();
    if (neg) v = -v;
    for (;;) {
      char c = peek();
      if (c == '+') {
        ++pos_;
        v = v + product();
      } else if (c == '-') {
        ++pos_;
        v = v - product();
      } else {
        return v;
      }
    }
  }

  PolyMatrix matrix() {
    if (!eat('[')) fail("expected '['");
    std::vector<std::vector<ModPoly>> rows;
    for (;;) {
      if (!eat('[')) fail("expected '[' starting a row");
      std::vector<ModPoly> row;
      if (peek() != ']')
        for (;;) {
          row.push_back(expr());
          if (!eat(',')) break;
        }
      if (!eat(']')) fail("expected ']' ending a row");
      if (!rows.empty() && rows.front().size() != row.size()) fail("ragged matrix rows");
      rows.push_back(std::move(row));
      if (!eat(',')) break;
    }
    if (!eat(']')) fail("expected ']' ending the matrix");
    PolyMatrix m(ring_, rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
    return m;
  }

  std::string_view text_;
  RingPtr ring_;
  std::size_t pos_ = 0;
  std::size_t line_, col0_;
};

} // namespace detail

inline ModPoly parse_poly(std::string_view text, const RingPtr& ring, std::size_t line = 1,
                          std::size_t col0 = 1) {
  return detail::PolyParser(text, ring, line, col0).parse_poly();
}

inline PolyMatrix parse_matrix(std::string_view text, const RingPtr& ring, std::size_t line = 1,
                               std::size_t col0 = 1) {
  return detail::PolyParser(text, ring, line, col0).parse_matrix();
}

} // namespace charp
