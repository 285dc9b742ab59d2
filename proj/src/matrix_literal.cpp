#include "microlam/matrix_literal.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <variant>

#include "microlam/errors.hpp"
#include "microlam/hulls.hpp"

namespace microlam {
namespace {

using Value = std::variant<Rational, RMat>;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  RMat parse() {
    Value v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    if (auto* m = std::get_if<RMat>(&v)) return *m;
    fail("expression is a scalar, expected a matrix");
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::invalid_input,
                "matrix literal '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Value expr() {
    Value v = term();
    for (;;) {
      if (accept('+'))
        v = combine(v, term(), '+');
      else if (accept('-'))
        v = combine(v, term(), '-');
      else
        return v;
    }
  }

  Value term() {
    Value v = factor();
    for (;;) {
      if (accept('*'))
        v = combine(v, factor(), '*');
      else if (accept('/'))
        v = combine(v, factor(), '/');
      else
        return v;
    }
  }

  Value factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return combine(Rational(-1), factor(), '*');
    }
    if (c == '+') {
      ++pos_;
      return factor();
    }
    if (c == '(') {
      ++pos_;
      Value v = expr();
      expect(')');
      return v;
    }
    if (c == '[') return bracket_matrix();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return named();
    fail(std::string("unexpected character '") + c + "'");
  }

  Rational scalar(const Value& v) {
    if (auto* q = std::get_if<Rational>(&v)) return *q;
    fail("expected a scalar entry");
  }

  Value bracket_matrix() {
    expect('[');
    std::vector<std::vector<Rational>> rows;
    do {
      expect('[');
      std::vector<Rational> row;
      do row.push_back(scalar(expr()));
      while (accept(','));
      expect(']');
      rows.push_back(std::move(row));
    } while (accept(','));
    expect(']');
    const std::size_t cols = rows.front().size();
    RMat m(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) fail("ragged rows (row " + std::to_string(i) + ")");
      for (std::size_t j = 0; j < cols; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
  }

  Value number() {
    const std::size_t start = pos_;
    std::int64_t num = 0, den = 1;
    bool digits = false;
    auto push_digit = [&](char ch) {
      if (num > (INT64_MAX - 9) / 10) fail("number too long for exact arithmetic");
      num = num * 10 + (ch - '0');
      digits = true;
    };
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) push_digit(s_[pos_++]);
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        push_digit(s_[pos_++]);
        if (den > INT64_MAX / 10) fail("too many decimals");
        den *= 10;
      }
    }
    if (!digits) {
      pos_ = start;
      fail("malformed number");
    }
    Rational q(num, den);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      int sign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) sign = (s_[pos_++] == '-') ? -1 : 1;
      int e = 0;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("malformed exponent");
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) e = e * 10 + (s_[pos_++] - '0');
      if (e > 18) fail("exponent out of exact range");
      std::int64_t p = 1;
      for (int i = 0; i < e; ++i) p *= 10;
      q = sign > 0 ? q * Rational(p) : q / Rational(p);
    }
    return q;
  }

  Value named() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    if (name == "diag") {
      expect('(');
      std::vector<Rational> entries;
      do entries.push_back(scalar(expr()));
      while (accept(','));
      expect(')');
      return RMat::diag(entries);
    }
    if (name == "Id" || name == "Id3") return RMat::identity(3);
    if (name == "Id2") return RMat::identity(2);
    const T3Wells w = t3_wells();
    if (name == "A1") return w.A[0];
    if (name == "A2") return w.A[1];
    if (name == "A3") return w.A[2];
    if (name == "S1") return w.S[0];
    if (name == "S2") return w.S[1];
    if (name == "S3") return w.S[2];
    pos_ = start;
    fail("unknown name '" + name + "'");
  }

  Value combine(const Value& a, const Value& b, char op) {
    const auto* qa = std::get_if<Rational>(&a);
    const auto* qb = std::get_if<Rational>(&b);
    const auto* ma = std::get_if<RMat>(&a);
    const auto* mb = std::get_if<RMat>(&b);
    switch (op) {
      case '+':
      case '-':
        if (qa && qb) return op == '+' ? *qa + *qb : *qa - *qb;
        if (ma && mb) return op == '+' ? *ma + *mb : *ma - *mb;
        fail("cannot add a scalar and a matrix");
      case '*':
        if (qa && qb) return *qa * *qb;
        if (qa && mb) return *qa * *mb;
        if (ma && qb) return *qb * *ma;
        return *ma * *mb;
      case '/':
        if (!qb) fail("division by a matrix");
        if (*qb == 0) fail("division by zero");
        if (qa) return *qa / *qb;
        return (Rational(1) / *qb) * *ma;
    }
    fail("bad operator");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

RMat parse_matrix_literal(std::string_view text) { return Parser(text).parse(); }

}  // namespace microlam
