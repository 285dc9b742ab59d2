#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "microlam/linalg.hpp"

namespace microlam {

using Rational = boost::rational<std::int64_t>;

// Boost's mixed (integer, rational) equality recurses forever under C++20 reversed-operator rules.
inline bool operator==(const Rational& a, int b) { return a == Rational(b); }
inline bool operator==(int b, const Rational& a) { return a == Rational(b); }

double to_double(const Rational& q);
std::string to_string(const Rational& q);

// Exact rational matrix for well algebra.
class RMat {
 public:
  RMat() = default;
  RMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {}

  static RMat diag(const std::vector<Rational>& entries);
  static RMat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

  bool is_zero() const;
  bool is_diagonal() const;
  std::vector<Rational> diagonal() const;
  Mat to_mat() const;

  friend bool operator==(const RMat& a, const RMat& b) = default;
  friend RMat operator+(const RMat& a, const RMat& b);
  friend RMat operator-(const RMat& a, const RMat& b);
  friend RMat operator*(const Rational& s, const RMat& a);
  friend RMat operator*(const RMat& a, const RMat& b);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> a_;
};

Rational frobenius_sq(const RMat& a);
std::string to_string(const RMat& a);

}  // namespace microlam
