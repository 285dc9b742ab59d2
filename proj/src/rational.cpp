#include "microlam/rational.hpp"

#include "microlam/errors.hpp"

namespace microlam {

double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

RMat RMat::diag(const std::vector<Rational>& entries) {
  const int n = static_cast<int>(entries.size());
  RMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
  return m;
}

RMat RMat::identity(int n) { return diag(std::vector<Rational>(static_cast<std::size_t>(n), Rational(1))); }

bool RMat::is_zero() const {
  for (const auto& x : a_)
    if (x != 0) return false;
  return true;
}

bool RMat::is_diagonal() const {
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if (i != j && (*this)(i, j) != 0) return false;
  return true;
}

std::vector<Rational> RMat::diagonal() const {
  std::vector<Rational> d;
  for (int i = 0; i < std::min(rows_, cols_); ++i) d.push_back((*this)(i, i));
  return d;
}

Mat RMat::to_mat() const {
  Mat m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = to_double((*this)(i, j));
  return m;
}

static void same_shape(const RMat& a, const RMat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::dimension_mismatch,
          "matrix shapes differ: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

RMat operator+(const RMat& a, const RMat& b) {
  same_shape(a, b);
  RMat c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

RMat operator-(const RMat& a, const RMat& b) {
  same_shape(a, b);
  RMat c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

RMat operator*(const Rational& s, const RMat& a) {
  RMat c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

RMat operator*(const RMat& a, const RMat& b) {
  require(a.cols() == b.rows(), ErrorCode::dimension_mismatch, "matrix product shape mismatch");
  RMat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Rational s(0);
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Rational frobenius_sq(const RMat& a) {
  Rational s(0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return s;
}

std::string to_string(const RMat& a) {
  std::string s = "[";
  for (int i = 0; i < a.rows(); ++i) {
    s += (i ? ",[" : "[");
    for (int j = 0; j < a.cols(); ++j) s += (j ? "," : "") + to_string(a(i, j));
    s += "]";
  }
  return s + "]";
}

}  // namespace microlam
