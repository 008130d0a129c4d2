#pragma once

// The fibre product M = {(x, y) in T x Y : c(x) = b(y)} with the sum metric
// d = d_T + d_Y, the diagonal Gamma-action, the two-piece connecting path
// (theta1 along a tree geodesic, theta2 along a Y geodesic) that bounds the
// induced path metric d_M from above, and finite probes of properness and
// of the orbit quasi-isometry.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hnngeo/bass_serre.hpp"
#include "hnngeo/group.hpp"
#include "hnngeo/y_space.hpp"

namespace hnngeo {

// Heights are compared in floating point; integer shifts of a dyadic height
// are exact, so this only absorbs interpolation round-off.
inline constexpr double kFibreTol = 1e-9;

struct MPoint {
  TreePoint tree;
  YPoint y;
};

// Both components move affinely in the arc parameter.
struct MArc {
  int part = 1;  // 1 for theta1, 2 for theta2
  TreeEdge edge;
  double u0 = 0.0;
  double u1 = 0.0;
  YPoint y0;
  YPoint y1;
  double length = 0.0;
};

struct MPath {
  std::vector<MArc> arcs;
  double total_length = 0.0;
  double theta1_length = 0.0;
  double theta2_length = 0.0;
  double tree_distance = 0.0;  // d_T(x0, x1)
  YDistance y21;               // bracket for d_Y(y2, y1)
};

struct ProductDistance {
  double lower = 0.0;
  double upper = 0.0;
  double tree = 0.0;
  YDistance y;
};

struct Normalization {
  GroupElement g;
  MPoint point;
};

struct ProperReport {
  int radius = 0;
  std::size_t elements = 0;
  std::size_t collisions = 0;
  // Index r: min over |gamma| = r of the lower product distance from the
  // base point to its translate (r = 0 included).
  std::vector<double> min_displacement_by_length;
  bool displacement_nondecreasing = true;
  std::size_t skipped = 0;  // translates that left the tree ball or window
};

struct QIFit {
  double A_upper = 0.0;
  double B_upper = 0.0;
  double a_lower = 0.0;
  double b_lower = 0.0;
  std::size_t sample_count = 0;
  std::size_t rejected = 0;
  bool success() const noexcept { return a_lower > 0.0; }
};

class MilleFeuille {
 public:
  MilleFeuille(const BassSerreTree& tree, const TreeBall& ball, const YModel& model);

  const BassSerreTree& tree() const noexcept { return *tree_; }
  const TreeBall& ball() const noexcept { return *ball_; }
  const YModel& model() const noexcept { return *model_; }

  // Throws FibreMismatch when |c(t) - b(y)| > kFibreTol.
  MPoint make_mpoint(const TreePoint& t, const YPoint& y) const;
  MPoint base_point() const;
  bool on_fibre(const MPoint& m) const;

  // Throws OutsideBall / OutsideWindow when the image leaves the model.
  MPoint act(const GroupElement& g, const MPoint& m) const;

  ProductDistance product_distance(const MPoint& a, const MPoint& b) const;

  // Throws PathEscapesWindow when the beta ray of theta2 leaves the ball.
  MPath connect_theta(const MPoint& a, const MPoint& b) const;
  // Same, with a precomputed field rooted at y2 = (a.y.x, c(b.tree)).
  MPath connect_theta(const MPoint& a, const MPoint& b, YField& from_y2) const;
  double dM_upper(const MPoint& a, const MPoint& b) const;

  // Point at arc length s (clamped) along a path.
  MPoint point_on(const MPath& path, double s) const;

  // Moves m onto an edge from the base vertex to one of its |det m2| upper
  // neighbours, with height in [0,1) and x in [0,1)^n.
  Normalization normalize_to_fundamental_domain(const MPoint& m) const;

  ProperReport properness_probe(int radius) const;

 private:
  const BassSerreTree* tree_;
  const TreeBall* ball_;
  const YModel* model_;
};

// gamma . (point at u on [base, t], y = (x, u)) with gamma uniform in
// `elements`, u on a 1/8 grid and x on a 1/4 grid in [0,1)^n. Returns
// nullopt when the translate leaves the ball or window.
std::optional<MPoint> sample_mpoint(const MilleFeuille& space,
                                    const std::vector<GroupElement>& elements,
                                    std::mt19937_64& rng);

struct LemmaRow {
  double tree_distance = 0.0;
  double product_lower = 0.0;
  double product_upper = 0.0;
  double dM_upper = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double y21_upper = 0.0;
};

struct LemmaReport {
  std::size_t pairs = 0;        // pairs evaluated
  std::size_t informative = 0;  // pairs with product_upper > 0
  std::size_t rejected = 0;     // samples or paths that left the ball or window
  double kappa = 0.0;
  double ratio_min = 0.0;  // dM_upper / product_upper over informative pairs
  double ratio_max = 0.0;
  double ratio_mean = 0.0;
  double fraction_within = 0.0;  // ratio in [1/(1+kappa), 4(1+kappa)]
  std::size_t lower_violations = 0;   // product lower > dM_upper
  std::size_t upper_violations = 0;   // dM_upper > 4(1+kappa) product upper
  std::size_t theta1_violations = 0;  // theta1 > 2 d_T
  std::size_t theta2_violations = 0;  // theta2 > 2(1+kappa) d_Y(y2, y1)
  std::vector<LemmaRow> rows;

  bool ok() const noexcept {
    return lower_violations + upper_violations + theta1_violations + theta2_violations == 0;
  }
};

// Draws pairs until `pairs` have been evaluated or `max_attempts` draws have
// been made. Rejections are counted, not fatal.
LemmaReport verify_lemma(const MilleFeuille& space, const std::vector<GroupElement>& elements,
                         std::size_t pairs, std::uint64_t seed, std::size_t max_attempts);

struct NormalizationSweep {
  std::size_t samples = 0;
  std::size_t successes = 0;
  std::size_t rejected = 0;  // samples that left the ball or window
};

NormalizationSweep normalization_sweep(const MilleFeuille& space,
                                       const std::vector<GroupElement>& elements,
                                       std::size_t samples, std::uint64_t seed);

struct QIFitOptions {
  double grid_step = 0.05;
  int window = 6;
  double x_max = 32.0;
  int extra_tree_radius = 6;
};

// Samples (|gamma|, dM_upper, lower d) over ball(radius) from the base point
// and fits affine bounds valid on every sample.
QIFit orbit_qi_fit(const Group& group, int radius, const QIFitOptions& options = {});

// Tightest affine bounds over (w, v) samples: the upper line minimizes its
// value at the middle of the w-range subject to lying above all samples;
// the lower line maximizes it subject to lying below.
struct AffineBound {
  double slope = 0.0;
  double intercept = 0.0;
};
AffineBound fit_upper_line(const std::vector<std::pair<double, double>>& samples);
AffineBound fit_lower_line(const std::vector<std::pair<double, double>>& samples);

}  // namespace hnngeo
