#include "hnngeo/presentation.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

constexpr std::int64_t kMaxBoxPoints = 10'000'000;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

CosetTable::CosetTable(IntMatrix lattice) : lattice_(std::move(lattice)) {
  const std::size_t n = lattice_.dim();
  det_ = determinant(lattice_);
  if (det_ == 0) {
    throw Error(ErrorKind::SingularMatrix, "lattice matrix has determinant 0");
  }
  index_ = std::llabs(det_);
  adj_ = adjugate(lattice_);

  std::int64_t box = 1;
  for (std::size_t i = 0; i < n; ++i) {
    box = checked_mul(box, index_);
    if (box > kMaxBoxPoints) {
      throw Error(ErrorKind::BudgetExceeded, "coset enumeration box too large");
    }
  }

  // Lexicographic sweep of [0, K)^n; the first point seen in a class is its
  // lex-least member, and the sweep starts at the zero vector.
  IntVec point(n, 0);
  for (std::int64_t count = 0; count < box; ++count) {
    IntVec key = class_key(point);
    auto it = std::lower_bound(
        key_to_rep_.begin(), key_to_rep_.end(), key,
        [](const auto& entry, const IntVec& k) { return entry.first < k; });
    if (it == key_to_rep_.end() || it->first != key) {
      key_to_rep_.insert(it, {key, reps_.size()});
      reps_.push_back(point);
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++point[i] < index_) break;
      point[i] = 0;
    }
  }
}

IntVec CosetTable::class_key(const IntVec& v) const {
  IntVec key = mul(adj_, v);
  for (auto& x : key) x = floor_mod(x, index_);
  return key;
}

CosetTable::Decomposition CosetTable::decompose(const IntVec& v) const {
  IntVec key = class_key(v);
  auto it = std::lower_bound(
      key_to_rep_.begin(), key_to_rep_.end(), key,
      [](const auto& entry, const IntVec& k) { return entry.first < k; });
  // Every class has a representative in the box, so the lookup cannot miss.
  const IntVec& rep = reps_[it->second];
  IntVec diff = sub(v, rep);
  IntVec q = mul(adj_, diff);
  for (auto& x : q) x /= det_;
  return {rep, std::move(q)};
}

bool CosetTable::contains(const IntVec& v) const {
  return is_zero(class_key(v));
}

Presentation::Presentation(std::size_t n, IntMatrix m1, IntMatrix m2,
                           RatMatrix phi)
    : n_(n),
      m1_(std::move(m1)),
      m2_(std::move(m2)),
      phi_(std::move(phi)),
      cosets1_(m1_),
      cosets2_(m2_) {
  powers_.reserve(2 * kCachedPowers + 1);
  RatMatrix inv = inverse(phi_);
  std::vector<RatMatrix> neg;
  RatMatrix cur = RatMatrix::identity(n_);
  for (int k = 1; k <= kCachedPowers; ++k) {
    cur = mul(cur, inv);
    neg.push_back(cur);
  }
  for (auto it = neg.rbegin(); it != neg.rend(); ++it) powers_.push_back(*it);
  cur = RatMatrix::identity(n_);
  powers_.push_back(cur);
  for (int k = 1; k <= kCachedPowers; ++k) {
    cur = mul(cur, phi_);
    powers_.push_back(cur);
  }
}

RatMatrix Presentation::phi_power(int k) const {
  if (k >= -kCachedPowers && k <= kCachedPowers) {
    return powers_[static_cast<std::size_t>(k + kCachedPowers)];
  }
  return power(phi_, k);
}

bool Presentation::is_bs1q() const noexcept {
  return n_ == 1 && m1_(0, 0) == 1;
}

std::string Presentation::description() const {
  std::ostringstream os;
  auto print_int = [&](const IntMatrix& m) {
    os << '[';
    for (std::size_t i = 0; i < n_; ++i) {
      if (i) os << ';';
      for (std::size_t j = 0; j < n_; ++j) {
        if (j) os << ',';
        os << m(i, j);
      }
    }
    os << ']';
  };
  os << "HNN(Z^" << n_ << ", m1=";
  print_int(m1_);
  os << ", m2=";
  print_int(m2_);
  os << ", phi=[";
  for (std::size_t i = 0; i < n_; ++i) {
    if (i) os << ';';
    for (std::size_t j = 0; j < n_; ++j) {
      if (j) os << ',';
      os << to_string(phi_(i, j));
    }
  }
  os << "])";
  return os.str();
}

Presentation validate_presentation(std::size_t n, IntMatrix m1, IntMatrix m2,
                                   RatMatrix phi) {
  if (n == 0) throw Error(ErrorKind::ConfigError, "rank must be positive");
  if (m1.dim() != n || m2.dim() != n || phi.dim() != n) {
    throw Error(ErrorKind::ConfigError, "matrix dimensions do not match rank");
  }
  if (determinant(m1) == 0) {
    throw Error(ErrorKind::SingularMatrix, "det(m1) = 0");
  }
  if (determinant(m2) == 0) {
    throw Error(ErrorKind::SingularMatrix, "det(m2) = 0");
  }
  if (determinant(phi) == 0) {
    throw Error(ErrorKind::SingularMatrix, "phi is singular");
  }
  if (mul(phi, to_rational(m1)) != to_rational(m2)) {
    throw Error(ErrorKind::ConjugacyMismatch, "phi * m1 != m2");
  }
  return Presentation(n, std::move(m1), std::move(m2), std::move(phi));
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::int64_t parse_int(const std::string& s, const std::string& context) {
  Rational q = parse_rational(s);
  if (denominator(q) != 1) {
    throw Error(ErrorKind::ParseError, "expected an integer in " + context);
  }
  return static_cast<std::int64_t>(numerator(q));
}

}  // namespace

Presentation presentation_from_preset(const std::string& preset) {
  auto parts = split(preset, ':');
  if (parts.size() == 3 && parts[0] == "bs") {
    std::int64_t p = parse_int(parts[1], preset);
    std::int64_t q = parse_int(parts[2], preset);
    if (p == 0 || q == 0) {
      throw Error(ErrorKind::SingularMatrix, "BS parameters must be nonzero");
    }
    return validate_presentation(1, IntMatrix(1, {p}), IntMatrix(1, {q}),
                                 RatMatrix(1, {Rational(q, p)}));
  }
  if (parts.size() == 3 && parts[0] == "abc") {
    std::int64_t n = parse_int(parts[1], preset);
    if (n <= 0) throw Error(ErrorKind::ParseError, "abc rank must be positive");
    auto rows = split(parts[2], ';');
    if (static_cast<std::int64_t>(rows.size()) != n) {
      throw Error(ErrorKind::ParseError, "abc matrix must have n rows: " + preset);
    }
    std::vector<std::int64_t> entries;
    for (const auto& row : rows) {
      auto cols = split(row, ',');
      if (static_cast<std::int64_t>(cols.size()) != n) {
        throw Error(ErrorKind::ParseError, "abc matrix must be square: " + preset);
      }
      for (const auto& c : cols) entries.push_back(parse_int(c, preset));
    }
    const auto dim = static_cast<std::size_t>(n);
    IntMatrix m2(dim, entries);
    return validate_presentation(dim, IntMatrix::identity(dim), m2,
                                 to_rational(m2));
  }
  throw Error(ErrorKind::ParseError, "unknown preset '" + preset +
                                         "' (expected bs:p:q or abc:n:matrix)");
}

Presentation presentation_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    auto read_int = [&](const char* key) {
      const auto& rows = doc.at(key);
      if (rows.size() != n) {
        throw Error(ErrorKind::ConfigError, std::string(key) + " must have n rows");
      }
      std::vector<std::int64_t> entries;
      for (const auto& row : rows) {
        if (row.size() != n) {
          throw Error(ErrorKind::ConfigError, std::string(key) + " must be square");
        }
        for (const auto& x : row) entries.push_back(x.get<std::int64_t>());
      }
      return IntMatrix(n, entries);
    };
    IntMatrix m1 = read_int("m1");
    IntMatrix m2 = read_int("m2");
    const auto& phi_rows = doc.at("phi");
    if (phi_rows.size() != n) {
      throw Error(ErrorKind::ConfigError, "phi must have n rows");
    }
    std::vector<Rational> entries;
    for (const auto& row : phi_rows) {
      if (row.size() != n) throw Error(ErrorKind::ConfigError, "phi must be square");
      for (const auto& x : row) {
        if (x.is_string()) {
          entries.push_back(parse_rational(x.get<std::string>()));
        } else if (x.is_number_integer()) {
          entries.emplace_back(x.get<std::int64_t>());
        } else {
          throw Error(ErrorKind::ConfigError,
                      "phi entries must be \"a/b\" strings or integers");
        }
      }
    }
    return validate_presentation(n, std::move(m1), std::move(m2),
                                 RatMatrix(n, entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
}

nlohmann::json presentation_to_json(const Presentation& p) {
  const std::size_t n = p.rank();
  nlohmann::json doc;
  doc["n"] = n;
  auto int_rows = [&](const IntMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  doc["m1"] = int_rows(p.m1());
  doc["m2"] = int_rows(p.m2());
  nlohmann::json phi = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(to_string(p.phi()(i, j)));
    phi.push_back(row);
  }
  doc["phi"] = phi;
  return doc;
}

}  // namespace hnngeo
