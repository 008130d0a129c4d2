#pragma once

// Small dense vectors and square matrices over int64 and exact rationals.
// Ranks in this project are tiny (n = 1, 2, 3), so everything is a flat
// std::vector with row-major storage.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace hnngeo {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using IntVec = std::vector<std::int64_t>;
using RatVec = std::vector<Rational>;
using RealVec = std::vector<double>;

template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, T(0)) {}
  SquareMatrix(std::size_t n, std::vector<T> entries)
      : n_(n), a_(std::move(entries)) {}

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return a_[i * n_ + j];
  }
  const std::vector<T>& entries() const noexcept { return a_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> a_;
};

using IntMatrix = SquareMatrix<std::int64_t>;
using RatMatrix = SquareMatrix<Rational>;
using RealMatrix = SquareMatrix<double>;

// Checked int64 helpers; throw Error(Overflow) instead of wrapping.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

IntVec add(const IntVec& a, const IntVec& b);
IntVec sub(const IntVec& a, const IntVec& b);
IntVec negate(const IntVec& a);
IntVec mul(const IntMatrix& m, const IntVec& v);
bool is_zero(const IntVec& v) noexcept;

std::int64_t determinant(const IntMatrix& m);
// adj(m) with m * adj(m) = det(m) * I.
IntMatrix adjugate(const IntMatrix& m);

RatMatrix to_rational(const IntMatrix& m);
RealMatrix to_real(const RatMatrix& m);
RatMatrix mul(const RatMatrix& a, const RatMatrix& b);
RatVec mul(const RatMatrix& m, const RatVec& v);
RatVec to_rational(const IntVec& v);
RealVec to_real(const RatVec& v);
Rational determinant(const RatMatrix& m);
// Throws Error(SingularMatrix) when m is not invertible.
RatMatrix inverse(const RatMatrix& m);
// m^k for any integer k (negative powers go through the inverse).
RatMatrix power(const RatMatrix& m, int k);

RealMatrix mul(const RealMatrix& a, const RealMatrix& b);
RealVec mul(const RealMatrix& m, const RealVec& v);
RealMatrix inverse(const RealMatrix& m);

// Parses "a/b", "a", or a decimal like "0.5" into an exact rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
std::string to_string(const IntVec& v);

}  // namespace hnngeo
