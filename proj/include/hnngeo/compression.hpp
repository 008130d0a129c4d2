#pragma once

// Explicit maps of tree balls and group balls into l^p, and estimation of
// compression exponents from (distance, image distance) samples.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hnngeo/bass_serre.hpp"
#include "hnngeo/group.hpp"

namespace hnngeo {

enum class EmbeddingKind { EdgeIndicator, WeightedGeodesic, OrbitConcat };

std::string to_string(EmbeddingKind kind);

struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::EdgeIndicator;
  double beta = 0.5;  // WeightedGeodesic only, in (0,1)
  double p = 2.0;     // > 1
  TreeVertex root;

  void validate() const;  // throws ConfigError
};

// Finitely supported function on edges: (edge index, value), sorted by index.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

// ||a - b||_p^p.
double lp_power_distance(const SparseVector& a, const SparseVector& b, double p);
double lp_distance(const SparseVector& a, const SparseVector& b, double p);

// Images of every vertex of the ball; coordinates index ball.edges().
struct TreeEmbedding {
  std::vector<SparseVector> images;  // parallel to ball.vertices()
  std::vector<int> depth;            // d_T(root, v)
};

// Throws OutsideBall when the root is not a ball vertex.
TreeEmbedding embed_tree(const EmbeddingSpec& spec, const BassSerreTree& tree,
                         const TreeBall& ball);

// g -> tree image of gG, direct sum with j_N(g) (translation scaled by
// `translation_scale`, level as one coordinate).
struct GroupEmbedding {
  std::vector<GroupElement> elements;
  std::vector<SparseVector> tree_part;
  std::vector<RealVec> flat_part;
  double p = 2.0;

  double distance(std::size_t i, std::size_t j) const;
};

GroupEmbedding embed_group(const EmbeddingSpec& tree_spec, const BassSerreTree& tree,
                           const TreeBall& ball, const std::vector<GroupElement>& elements,
                           double translation_scale = 1.0);

struct ExponentEstimate {
  double alpha_hat = 0.0;
  double C_hat = 0.0;
  double D_hat = 0.0;
  double A_hat = 0.0;
  double B_hat = 0.0;
  std::size_t pair_count = 0;
  double d_min = 0.0;
  double d_max = 0.0;
};

inline constexpr double kAlphaStep = 0.01;
inline constexpr std::size_t kMinPairs = 50;
inline constexpr double kMinRange = 8.0;

// Samples are (d, image distance). Pairs with d <= 0 are ignored.
// Throws InsufficientRange (fewer than 50 pairs, or d_max / d_min < 8) and
// NoValidEnvelope (every image distance is 0).
ExponentEstimate estimate_exponent(const std::vector<std::pair<double, double>>& samples);

// Index pairs over `count` points: all pairs when count <= 2000, otherwise
// 100000 pairs drawn uniformly with the given seed.
inline constexpr std::size_t kAllPairsLimit = 2000;
inline constexpr std::size_t kSampledPairs = 100000;
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t count,
                                                              std::uint64_t seed);

std::vector<std::pair<double, double>> tree_samples(const TreeEmbedding& embedding,
                                                    const BassSerreTree& tree,
                                                    const TreeBall& ball, double p,
                                                    std::uint64_t seed);

// Word distances |g^-1 h| come from `lengths`, a ball of radius at least
// twice that of the embedded elements.
std::vector<std::pair<double, double>> group_samples(const GroupEmbedding& embedding,
                                                     const Group& group,
                                                     const GroupBall& lengths,
                                                     std::uint64_t seed);

// An exponent value together with the expression it came from.
struct SymbolicExponent {
  double value = 0.0;
  std::string expr;

  friend bool operator==(const SymbolicExponent&, const SymbolicExponent&) = default;
};

SymbolicExponent exponent_literal(double value);
SymbolicExponent exponent_named(std::string name, double value);
// Compression of a product: the smaller factor. Equal inputs are returned
// unchanged.
SymbolicExponent compose_min(const SymbolicExponent& a, const SymbolicExponent& b);

}  // namespace hnngeo
