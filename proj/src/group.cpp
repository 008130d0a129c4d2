#include "hnngeo/group.hpp"

#include <cctype>
#include <deque>
#include <sstream>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

inline void hash_combine(std::size_t& seed, std::size_t v) noexcept {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

std::size_t hash_value(const IntVec& v) noexcept {
  std::size_t seed = v.size();
  for (auto x : v) hash_combine(seed, std::hash<std::int64_t>{}(x));
  return seed;
}

std::size_t hash_value(const std::vector<Syllable>& s) noexcept {
  std::size_t seed = s.size();
  for (const auto& syl : s) {
    hash_combine(seed, static_cast<std::size_t>(syl.sign + 1));
    hash_combine(seed, hash_value(syl.rep));
  }
  return seed;
}

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
  std::size_t seed = hash_value(g.syllables);
  hash_combine(seed, hash_value(g.head));
  return seed;
}

Group::Group(Presentation presentation) : pres_(std::move(presentation)) {}

GroupElement Group::identity() const {
  return GroupElement{{}, IntVec(rank(), 0)};
}

GroupElement Group::generator(Letter letter) const {
  GroupElement g = identity();
  mul_letter(g, letter);
  return g;
}

GroupElement Group::x(std::size_t i, std::int64_t power) const {
  GroupElement g = identity();
  g.head.at(i) = power;
  return g;
}

GroupElement Group::t(int power) const {
  GroupElement g = identity();
  const Letter letter{rank(), power >= 0 ? 1 : -1};
  for (int k = 0; k < std::abs(power); ++k) mul_letter(g, letter);
  return g;
}

GroupElement Group::from_vector(const IntVec& v) const {
  return GroupElement{{}, v};
}

std::vector<Letter> Group::generators() const {
  std::vector<Letter> gens;
  for (std::size_t i = 0; i < rank(); ++i) {
    gens.push_back({i, 1});
    gens.push_back({i, -1});
  }
  gens.push_back({rank(), 1});
  gens.push_back({rank(), -1});
  return gens;
}

void Group::mul_vector(GroupElement& g, const IntVec& v) const {
  g.head = add(g.head, v);
}

void Group::mul_letter(GroupElement& g, Letter letter) const {
  const std::size_t n = rank();
  if (letter.gen > n || (letter.sign != 1 && letter.sign != -1)) {
    throw Error(ErrorKind::UnknownLetter, "letter outside the generating set");
  }
  if (letter.gen < n) {
    g.head[letter.gen] = checked_add(g.head[letter.gen], letter.sign);
    return;
  }
  // head * t^e: split head = r + L u where L is the lattice that t^e moves
  // past (m2 for t, m1 for t^-1), then u crosses to the other side.
  const bool up = letter.sign == 1;
  const CosetTable& crossing = up ? pres_.cosets2() : pres_.cosets1();
  const IntMatrix& landing = up ? pres_.m1() : pres_.m2();
  auto [rep, u] = crossing.decompose(g.head);
  if (!g.syllables.empty() && g.syllables.back().sign == -letter.sign &&
      is_zero(rep)) {
    // Pinch t^-e L(u) t^e.
    IntVec prev = std::move(g.syllables.back().rep);
    g.syllables.pop_back();
    g.head = add(prev, mul(landing, u));
    return;
  }
  g.syllables.push_back({letter.sign, std::move(rep)});
  g.head = mul(landing, u);
}

GroupElement Group::multiply(const GroupElement& a, const GroupElement& b) const {
  GroupElement c = a;
  for (const auto& syl : b.syllables) {
    mul_vector(c, syl.rep);
    mul_letter(c, {rank(), syl.sign});
  }
  mul_vector(c, b.head);
  return c;
}

GroupElement Group::inverse(const GroupElement& g) const {
  GroupElement r = identity();
  mul_vector(r, negate(g.head));
  for (auto it = g.syllables.rbegin(); it != g.syllables.rend(); ++it) {
    mul_letter(r, {rank(), -it->sign});
    mul_vector(r, negate(it->rep));
  }
  return r;
}

GroupElement Group::power(const GroupElement& g, std::int64_t k) const {
  GroupElement base = k >= 0 ? g : inverse(g);
  GroupElement r = identity();
  for (std::int64_t i = 0; i < (k >= 0 ? k : -k); ++i) r = multiply(r, base);
  return r;
}

GroupElement Group::britton_reduce(const Word& word) const {
  GroupElement g = identity();
  for (const auto& letter : word) mul_letter(g, letter);
  return g;
}

Word Group::to_word(const GroupElement& g) const {
  Word w;
  auto push_vector = [&](const IntVec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const int sign = v[i] >= 0 ? 1 : -1;
      for (std::int64_t k = 0; k < (v[i] >= 0 ? v[i] : -v[i]); ++k) {
        w.push_back({i, sign});
      }
    }
  };
  for (const auto& syl : g.syllables) {
    push_vector(syl.rep);
    w.push_back({rank(), syl.sign});
  }
  push_vector(g.head);
  return w;
}

int Group::t_exponent(const GroupElement& g) const noexcept {
  int sum = 0;
  for (const auto& syl : g.syllables) sum += syl.sign;
  return sum;
}

SemidirectElement Group::j_N(const GroupElement& g) const {
  const std::size_t n = rank();
  RatVec v(n, Rational(0));
  RatMatrix level_power = RatMatrix::identity(n);
  const RatMatrix& up = pres_.phi();
  const RatMatrix down = pres_.phi_power(-1);
  int level = 0;
  auto add_scaled = [&](const IntVec& r) {
    if (is_zero(r)) return;
    RatVec step = mul(level_power, to_rational(r));
    for (std::size_t i = 0; i < n; ++i) v[i] += step[i];
  };
  for (const auto& syl : g.syllables) {
    add_scaled(syl.rep);
    level += syl.sign;
    level_power = mul(level_power, syl.sign == 1 ? up : down);
  }
  add_scaled(g.head);
  return {std::move(v), level};
}

SemidirectElement Group::semidirect_multiply(const SemidirectElement& a,
                                             const SemidirectElement& b) const {
  RatVec moved = mul(pres_.phi_power(a.level), b.translation);
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += a.translation[i];
  return {std::move(moved), a.level + b.level};
}

AffineMap Group::affine_oracle(const Word& word) const {
  if (!pres_.is_bs1q()) {
    throw Error(ErrorKind::UnsupportedPresentation,
                "affine oracle needs a BS(1,q) presentation");
  }
  const Rational q(pres_.m2()(0, 0));
  AffineMap cur;
  for (const auto& letter : word) {
    // cur o letter, with (a,b) o (c,d) = (ac, ad + b).
    if (letter.gen == 0) {
      cur.offset += cur.scale * letter.sign;
    } else if (letter.gen == 1) {
      cur.scale *= letter.sign == 1 ? q : 1 / q;
    } else {
      throw Error(ErrorKind::UnknownLetter, "letter outside the generating set");
    }
  }
  return cur;
}

AffineMap Group::affine_oracle(const GroupElement& g) const {
  return affine_oracle(to_word(g));
}

std::optional<int> Group::word_length(const GroupElement& g, int budget) const {
  if (budget < 0) return std::nullopt;
  const GroupElement id = identity();
  if (g == id) return 0;
  std::unordered_map<GroupElement, int, GroupElementHash> seen;
  std::deque<GroupElement> queue;
  seen.emplace(id, 0);
  queue.push_back(id);
  const auto gens = generators();
  while (!queue.empty()) {
    GroupElement cur = std::move(queue.front());
    queue.pop_front();
    const int d = seen.at(cur);
    if (d >= budget) break;
    for (const auto& letter : gens) {
      GroupElement next = cur;
      mul_letter(next, letter);
      if (seen.contains(next)) continue;
      if (next == g) return d + 1;
      if (seen.size() >= kDefaultBallCap) {
        throw Error(ErrorKind::BudgetExceeded, "word-length BFS exceeded the ball cap");
      }
      seen.emplace(next, d + 1);
      queue.push_back(std::move(next));
    }
  }
  return std::nullopt;
}

GroupBall Group::ball(int radius, std::size_t cap) const {
  if (radius < 0) throw Error(ErrorKind::ConfigError, "ball radius must be >= 0");
  GroupBall b;
  b.radius_ = radius;
  b.elements_.push_back(identity());
  b.lengths_.push_back(0);
  b.index_.emplace(identity(), 0);
  b.offsets_ = {0, 1};
  const auto gens = generators();
  std::size_t begin = 0;
  for (int r = 1; r <= radius; ++r) {
    const std::size_t end = b.elements_.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& letter : gens) {
        GroupElement next = b.elements_[i];
        mul_letter(next, letter);
        if (b.index_.contains(next)) continue;
        if (b.elements_.size() >= cap) {
          throw Error(ErrorKind::BudgetExceeded,
                      "ball(" + std::to_string(radius) + ") exceeds cap of " +
                          std::to_string(cap) + " elements");
        }
        b.index_.emplace(next, b.elements_.size());
        b.elements_.push_back(std::move(next));
        b.lengths_.push_back(r);
      }
    }
    begin = end;
    b.offsets_.push_back(b.elements_.size());
  }
  return b;
}

std::optional<int> GroupBall::length_of(const GroupElement& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return lengths_[it->second];
}

Word Group::parse_word(const std::string& text) const {
  const std::size_t n = rank();
  Word word;
  std::size_t pos = 0;
  auto fail = [&](ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg + " at position " + std::to_string(pos));
  };
  auto read_int = [&]() -> std::int64_t {
    const std::size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    const std::size_t digits = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits) {
      pos = start;
      fail(ErrorKind::ParseError, "expected an integer");
    }
    try {
      return std::stoll(text.substr(start, pos - start));
    } catch (const std::exception&) {
      pos = start;
      fail(ErrorKind::ParseError, "integer out of range");
    }
    return 0;
  };
  while (pos < text.size()) {
    const char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') {
      ++pos;
      continue;
    }
    const std::size_t letter_pos = pos;
    std::size_t gen = 0;
    if (c == 't') {
      gen = n;
      ++pos;
    } else if (c == 'x') {
      ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        std::int64_t idx = read_int();
        if (idx < 1 || static_cast<std::size_t>(idx) > n) {
          pos = letter_pos;
          fail(ErrorKind::UnknownLetter, "generator index out of range");
        }
        gen = static_cast<std::size_t>(idx - 1);
      } else if (n != 1) {
        pos = letter_pos;
        fail(ErrorKind::UnknownLetter, "bare 'x' is ambiguous for rank > 1, use x1..xn");
      }
    } else {
      fail(ErrorKind::UnknownLetter, std::string("unknown letter '") + c + "'");
    }
    std::int64_t exponent = 1;
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      exponent = read_int();
    }
    const int sign = exponent >= 0 ? 1 : -1;
    for (std::int64_t k = 0; k < (exponent >= 0 ? exponent : -exponent); ++k) {
      word.push_back({gen, sign});
    }
  }
  return word;
}

std::string Group::format_word(const Word& w) const {
  const std::size_t n = rank();
  std::ostringstream os;
  bool first = true;
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    const auto count = static_cast<std::int64_t>(j - i) * w[i].sign;
    if (!first) os << ' ';
    first = false;
    if (w[i].gen == n) {
      os << 't';
    } else {
      os << 'x';
      if (n > 1) os << (w[i].gen + 1);
    }
    if (count != 1) os << '^' << count;
    i = j;
  }
  return first ? "1" : os.str();
}

std::string Group::format(const GroupElement& g) const {
  return format_word(to_word(g));
}

}  // namespace hnngeo
