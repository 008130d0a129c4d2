#include "hnngeo/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hnngeo/error.hpp"

namespace hnngeo {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::ConjugacyMismatch: return "ConjugacyMismatch";
    case ErrorKind::UnknownLetter: return "UnknownLetter";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UnsupportedPresentation: return "UnsupportedPresentation";
    case ErrorKind::OutsideBall: return "OutsideBall";
    case ErrorKind::OutsideWindow: return "OutsideWindow";
    case ErrorKind::DegenerateGrid: return "DegenerateGrid";
    case ErrorKind::FibreMismatch: return "FibreMismatch";
    case ErrorKind::PathEscapesWindow: return "PathEscapesWindow";
    case ErrorKind::InsufficientRange: return "InsufficientRange";
    case ErrorKind::NoValidEnvelope: return "NoValidEnvelope";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::Overflow: return "Overflow";
  }
  return "Unknown";
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw Error(ErrorKind::Overflow, "int64 addition overflow");
  }
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw Error(ErrorKind::Overflow, "int64 multiplication overflow");
  }
  return r;
}

IntVec add(const IntVec& a, const IntVec& b) {
  IntVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_add(a[i], b[i]);
  return r;
}

IntVec sub(const IntVec& a, const IntVec& b) {
  IntVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    r[i] = checked_add(a[i], checked_mul(-1, b[i]));
  }
  return r;
}

IntVec negate(const IntVec& a) {
  IntVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_mul(-1, a[i]);
  return r;
}

IntVec mul(const IntMatrix& m, const IntVec& v) {
  const std::size_t n = m.dim();
  IntVec r(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      r[i] = checked_add(r[i], checked_mul(m(i, j), v[j]));
    }
  }
  return r;
}

bool is_zero(const IntVec& v) noexcept {
  for (auto x : v) {
    if (x != 0) return false;
  }
  return true;
}

namespace {

// Laplace expansion; n <= 4 in practice.
BigInt det_big(const std::vector<BigInt>& a, std::size_t n) {
  if (n == 1) return a[0];
  if (n == 2) return a[0] * a[3] - a[1] * a[2];
  BigInt total = 0;
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<BigInt> minor;
    minor.reserve((n - 1) * (n - 1));
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != col) minor.push_back(a[i * n + j]);
      }
    }
    BigInt term = a[col] * det_big(minor, n - 1);
    if (col % 2 == 0) {
      total += term;
    } else {
      total -= term;
    }
  }
  return total;
}

std::int64_t narrow(const BigInt& x) {
  if (x > std::numeric_limits<std::int64_t>::max() ||
      x < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorKind::Overflow, "value does not fit in int64");
  }
  return static_cast<std::int64_t>(x);
}

}  // namespace

std::int64_t determinant(const IntMatrix& m) {
  std::vector<BigInt> a(m.entries().begin(), m.entries().end());
  return narrow(det_big(a, m.dim()));
}

IntMatrix adjugate(const IntMatrix& m) {
  const std::size_t n = m.dim();
  IntMatrix adj(n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<BigInt> minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        for (std::size_t c = 0; c < n; ++c) {
          if (c != i) minor.push_back(m(r, c));
        }
      }
      BigInt cof = det_big(minor, n - 1);
      if ((i + j) % 2 == 1) cof = -cof;
      adj(i, j) = narrow(cof);
    }
  }
  return adj;
}

RatMatrix to_rational(const IntMatrix& m) {
  RatMatrix r(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) r(i, j) = Rational(m(i, j));
  }
  return r;
}

RealMatrix to_real(const RatMatrix& m) {
  RealMatrix r(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      r(i, j) = static_cast<double>(m(i, j));
    }
  }
  return r;
}

RatMatrix mul(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t n = a.dim();
  RatMatrix r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += a(i, k) * b(k, j);
    }
  }
  return r;
}

RatVec mul(const RatMatrix& m, const RatVec& v) {
  const std::size_t n = m.dim();
  RatVec r(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r[i] += m(i, j) * v[j];
  }
  return r;
}

RatVec to_rational(const IntVec& v) {
  RatVec r;
  r.reserve(v.size());
  for (auto x : v) r.emplace_back(x);
  return r;
}

RealVec to_real(const RatVec& v) {
  RealVec r;
  r.reserve(v.size());
  for (const auto& x : v) r.push_back(static_cast<double>(x));
  return r;
}

Rational determinant(const RatMatrix& m) {
  const std::size_t n = m.dim();
  RatMatrix a = m;
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a(pivot, col) == 0) ++pivot;
    if (pivot == n) return Rational(0);
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      Rational f = a(i, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
    }
  }
  return det;
}

RatMatrix inverse(const RatMatrix& m) {
  const std::size_t n = m.dim();
  RatMatrix a = m;
  RatMatrix inv = RatMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a(pivot, col) == 0) ++pivot;
    if (pivot == n) throw Error(ErrorKind::SingularMatrix, "matrix not invertible");
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(col, j), a(pivot, j));
      std::swap(inv(col, j), inv(pivot, j));
    }
    Rational p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a(i, col) == 0) continue;
      Rational f = a(i, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

RatMatrix power(const RatMatrix& m, int k) {
  RatMatrix base = k >= 0 ? m : inverse(m);
  unsigned e = static_cast<unsigned>(k >= 0 ? k : -k);
  RatMatrix r = RatMatrix::identity(m.dim());
  while (e > 0) {
    if (e & 1u) r = mul(r, base);
    e >>= 1u;
    if (e > 0) base = mul(base, base);
  }
  return r;
}

RealMatrix mul(const RealMatrix& a, const RealMatrix& b) {
  const std::size_t n = a.dim();
  RealMatrix r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) r(i, j) += a(i, k) * b(k, j);
    }
  }
  return r;
}

RealVec mul(const RealMatrix& m, const RealVec& v) {
  const std::size_t n = m.dim();
  RealVec r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r[i] += m(i, j) * v[j];
  }
  return r;
}

RealMatrix inverse(const RealMatrix& m) {
  RatMatrix q(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) q(i, j) = Rational(m(i, j));
  }
  return to_real(inverse(q));
}

namespace {

// boost parses a leading "0" as octal, so digits are validated and
// normalized here before conversion.
bool parse_decimal_integer(std::string s, BigInt& out) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto first = s.find_first_not_of('0');
  s = first == std::string::npos ? "0" : s.substr(first);
  out = BigInt(s);
  if (neg) out = -out;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorKind::ParseError, "not a rational number: '" + text + "'");
  };
  BigInt num;
  BigInt den;
  if (auto slash = text.find('/'); slash != std::string::npos) {
    if (!parse_decimal_integer(text.substr(0, slash), num) ||
        !parse_decimal_integer(text.substr(slash + 1), den) || den == 0) {
      return fail();
    }
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string::npos) {
    std::string frac = text.substr(dot + 1);
    if (frac.empty() || frac[0] == '-' || frac[0] == '+' ||
        !parse_decimal_integer(text.substr(0, dot) + frac, num)) {
      return fail();
    }
    den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    return Rational(num, den);
  }
  if (!parse_decimal_integer(text, num)) return fail();
  return Rational(num);
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << numerator(q);
  if (denominator(q) != 1) os << '/' << denominator(q);
  return os.str();
}

std::string to_string(const IntVec& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  os << ')';
  return os.str();
}

}  // namespace hnngeo
