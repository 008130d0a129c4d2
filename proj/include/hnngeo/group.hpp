#pragma once

// Exact arithmetic in Gamma = HNN(Z^n, Z^n, i1, i2) on Britton-reduced
// normal forms.
//
// An element is stored as
//
//     r_1 t^{e_1} r_2 t^{e_2} ... r_k t^{e_k} * head
//
// where each r_j is the canonical coset representative of m2 Z^n (when
// e_j = +1) or of m1 Z^n (when e_j = -1), and head is an arbitrary vector
// of Z^n. The form is reduced when no pinch t^e 0 t^-e occurs, i.e. a
// syllable with r_{j+1} = 0 never follows one of opposite sign. Because
// right multiplication by G only changes head, the syllable list is also
// the Bass-Serre coordinate of the coset gG.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hnngeo/linalg.hpp"
#include "hnngeo/presentation.hpp"

namespace hnngeo {

struct Syllable {
  int sign = 1;  // exponent of t, +1 or -1
  IntVec rep;    // coset representative written before t^sign

  friend bool operator==(const Syllable&, const Syllable&) = default;
  friend auto operator<=>(const Syllable&, const Syllable&) = default;
};

struct GroupElement {
  std::vector<Syllable> syllables;
  IntVec head;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

std::size_t hash_value(const IntVec& v) noexcept;
std::size_t hash_value(const std::vector<Syllable>& s) noexcept;

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept;
};

// Generator letter: gen in [0, n) is x_{gen+1}, gen == n is t.
struct Letter {
  std::size_t gen = 0;
  int sign = 1;

  friend bool operator==(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;

// Image of an element in R^n x|_phi Z with (v,k)(v',k') = (v + phi^k v', k+k').
struct SemidirectElement {
  RatVec translation;
  int level = 0;

  friend bool operator==(const SemidirectElement&, const SemidirectElement&) = default;
};

// The affine map y -> scale * y + offset.
struct AffineMap {
  Rational scale = 1;
  Rational offset = 0;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

class GroupBall;

class Group {
 public:
  static constexpr std::size_t kDefaultBallCap = 2'000'000;

  explicit Group(Presentation presentation);

  const Presentation& presentation() const noexcept { return pres_; }
  std::size_t rank() const noexcept { return pres_.rank(); }

  GroupElement identity() const;
  GroupElement generator(Letter letter) const;
  GroupElement x(std::size_t i, std::int64_t power = 1) const;
  GroupElement t(int power = 1) const;
  GroupElement from_vector(const IntVec& v) const;  // element of G = Z^n

  // Generators in a fixed order: x_1, x_1^-1, ..., x_n, x_n^-1, t, t^-1.
  std::vector<Letter> generators() const;

  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement power(const GroupElement& g, std::int64_t k) const;

  // Right multiplication by one letter; the core of the normal-form automaton.
  void mul_letter(GroupElement& g, Letter letter) const;
  void mul_vector(GroupElement& g, const IntVec& v) const;

  // Throws UnknownLetter for letters outside the generating set.
  GroupElement britton_reduce(const Word& word) const;
  // A word spelling the normal form; reducing it reproduces g.
  Word to_word(const GroupElement& g) const;

  int t_exponent(const GroupElement& g) const noexcept;
  SemidirectElement j_N(const GroupElement& g) const;
  SemidirectElement semidirect_multiply(const SemidirectElement& a,
                                        const SemidirectElement& b) const;

  // Faithful affine image, BS(1,q) only: x -> (y -> y+1), t -> (y -> q y).
  // Throws UnsupportedPresentation otherwise.
  AffineMap affine_oracle(const GroupElement& g) const;
  AffineMap affine_oracle(const Word& word) const;

  // Exact word length by BFS from the identity; nullopt when |g| > budget.
  std::optional<int> word_length(const GroupElement& g, int budget) const;

  // All elements of length <= radius. Throws BudgetExceeded past `cap`.
  GroupBall ball(int radius, std::size_t cap = kDefaultBallCap) const;

  // Word syntax: letters x (n = 1) or x1..xn, and t, each optionally
  // followed by ^k with k a nonzero integer. Whitespace and '*' separate.
  Word parse_word(const std::string& text) const;
  std::string format(const GroupElement& g) const;
  std::string format_word(const Word& w) const;

 private:
  Presentation pres_;
};

class GroupBall {
 public:
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }
  const std::vector<int>& lengths() const noexcept { return lengths_; }
  // Elements are stored in BFS order, so sphere r is a contiguous range.
  std::size_t sphere_begin(int r) const { return offsets_.at(static_cast<std::size_t>(r)); }
  std::size_t sphere_end(int r) const {
    return offsets_.at(static_cast<std::size_t>(r) + 1);
  }
  std::optional<int> length_of(const GroupElement& g) const;

 private:
  friend class Group;
  int radius_ = 0;
  std::vector<GroupElement> elements_;
  std::vector<int> lengths_;
  std::vector<std::size_t> offsets_;
  std::unordered_map<GroupElement, std::size_t, GroupElementHash> index_;
};

}  // namespace hnngeo
