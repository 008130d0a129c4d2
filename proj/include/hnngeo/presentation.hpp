#pragma once

// HNN data for Gamma = HNN(Z^n, Z^n, i1, i2) with stable letter t and
// relation t * i1(h) * t^-1 = i2(h). The automorphism phi of R^n conjugates
// the two inclusions: phi * m1 = m2.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hnngeo/linalg.hpp"

namespace hnngeo {

// Canonical coset representatives of the sublattice L * Z^n inside Z^n.
class CosetTable {
 public:
  struct Decomposition {
    IntVec rep;  // canonical representative of v's class
    IntVec quotient;  // u with v = rep + L * u
  };

  explicit CosetTable(IntMatrix lattice);

  const IntMatrix& lattice() const noexcept { return lattice_; }
  std::int64_t index() const noexcept { return index_; }
  const std::vector<IntVec>& reps() const noexcept { return reps_; }

  Decomposition decompose(const IntVec& v) const;
  IntVec rep_of(const IntVec& v) const { return decompose(v).rep; }
  bool contains(const IntVec& v) const;  // v in L * Z^n

 private:
  IntVec class_key(const IntVec& v) const;

  IntMatrix lattice_;
  IntMatrix adj_;
  std::int64_t det_ = 0;
  std::int64_t index_ = 0;
  std::vector<IntVec> reps_;
  std::vector<std::pair<IntVec, std::size_t>> key_to_rep_;  // sorted by key
};

// A checked presentation. Construct through validate_presentation() or the
// preset/JSON helpers, which enforce the invariants.
class Presentation {
 public:
  std::size_t rank() const noexcept { return n_; }
  const IntMatrix& m1() const noexcept { return m1_; }
  const IntMatrix& m2() const noexcept { return m2_; }
  const RatMatrix& phi() const noexcept { return phi_; }
  const CosetTable& cosets1() const noexcept { return cosets1_; }
  const CosetTable& cosets2() const noexcept { return cosets2_; }
  std::int64_t index1() const noexcept { return cosets1_.index(); }
  std::int64_t index2() const noexcept { return cosets2_.index(); }

  // Number of monoid generators: x_1^{+-1}, ..., x_n^{+-1}, t^{+-1}.
  std::size_t generator_count() const noexcept { return 2 * n_ + 2; }

  // phi^k; precomputed for |k| <= kCachedPowers.
  RatMatrix phi_power(int k) const;
  static constexpr int kCachedPowers = 40;

  // True for BS(1, q): n = 1 and m1 = [1].
  bool is_bs1q() const noexcept;

  std::string description() const;

 private:
  friend Presentation validate_presentation(std::size_t, IntMatrix, IntMatrix,
                                            RatMatrix);
  Presentation(std::size_t n, IntMatrix m1, IntMatrix m2, RatMatrix phi);

  std::size_t n_;
  IntMatrix m1_;
  IntMatrix m2_;
  RatMatrix phi_;
  CosetTable cosets1_;
  CosetTable cosets2_;
  std::vector<RatMatrix> powers_;  // phi^k at index k + kCachedPowers
};

// Errors: SingularMatrix (det m1 or det m2 is 0, or phi singular),
// ConjugacyMismatch (phi * m1 != m2).
Presentation validate_presentation(std::size_t n, IntMatrix m1, IntMatrix m2,
                                   RatMatrix phi);

// "bs:p:q" sets m1 = [p], m2 = [q], phi = [q/p].
// "abc:n:a,b;c,d" sets m1 = I, m2 = the given matrix, phi = m2.
Presentation presentation_from_preset(const std::string& preset);

// {"n": int, "m1": [[int]], "m2": [[int]], "phi": [["a/b"]]}
Presentation presentation_from_json(const nlohmann::json& doc);
nlohmann::json presentation_to_json(const Presentation& p);

}  // namespace hnngeo
