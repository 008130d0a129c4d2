#pragma once

// The space Y = R^n x R with the strip metric: on s in [i, i+1) a step
// (dx, ds) costs sqrt(|phi^-i dx|_B^2 + ds^2), B the base inner product.
// Gamma acts by (v, k).(x, s) = (v + phi^k x, s + k), isometrically.
//
// Distances are approximated on a grid. Strip i carries its own lattice
// x = h phi^i k, rows s = i + j h (j = 0..N, N = 1/h), so every strip looks
// the same in lattice coordinates and t maps grid to grid. Adjacent strips
// meet at integer heights through short glue edges.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hnngeo/group.hpp"
#include "hnngeo/linalg.hpp"
#include "hnngeo/presentation.hpp"

namespace hnngeo {

struct YPoint {
  RealVec x;
  double s = 0.0;

  friend bool operator==(const YPoint&, const YPoint&) = default;
};

// Exact variant for rational inputs.
struct RatYPoint {
  RatVec x;
  Rational s = 0;

  friend bool operator==(const RatYPoint&, const RatYPoint&) = default;
};

YPoint to_real(const RatYPoint& p);

YPoint act_y(const Group& group, const GroupElement& g, const YPoint& p);
RatYPoint act_y(const Group& group, const GroupElement& g, const RatYPoint& p);
inline double height_b(const YPoint& p) noexcept { return p.s; }
inline Rational height_b(const RatYPoint& p) { return p.s; }
YPoint vertical_ray_alpha(const YPoint& p, double u);

struct YWindow {
  int s_max = 8;        // heights in [-s_max, s_max]
  double x_max = 32.0;  // |x_i| <= x_max
};

struct YDistance {
  double lower = 0.0;
  double upper = 0.0;
  double snap = 0.0;  // snapping cost of both endpoints
};

// Piecewise-linear path through the listed points.
struct YPath {
  std::vector<YPoint> points;
  double length = 0.0;
};

class YField;

class YModel {
 public:
  // base_metric defaults to the identity. Throws DegenerateGrid unless
  // 1/grid_step is an integer no larger than 255 and the window holds a cell.
  YModel(const Presentation& presentation, double grid_step, YWindow window = {},
         std::optional<RatMatrix> base_metric = std::nullopt);
  ~YModel();
  YModel(const YModel&) = delete;
  YModel& operator=(const YModel&) = delete;

  std::size_t rank() const noexcept { return n_; }
  double grid_step() const noexcept { return h_; }
  int rows_per_strip() const noexcept { return rows_; }
  const YWindow& window() const noexcept { return window_; }
  // Multiplicative slack: stencil term plus 2 h sqrt(n lambda_max(B)).
  double kappa() const noexcept { return kappa_; }
  double stencil_kappa() const noexcept { return stencil_kappa_; }

  bool in_window(const YPoint& p) const;
  void require(const YPoint& p) const;  // throws OutsideWindow

  // |dx| in the metric of strip i.
  double strip_norm(int strip, const RealVec& dx) const;
  // Length of the straight segment a -> b, split at integer heights.
  double segment_length(const YPoint& a, const YPoint& b) const;

  YDistance distance(const YPoint& a, const YPoint& b) const;
  YPath geodesic(const YPoint& a, const YPoint& b) const;
  // Shortest-path field from one source, grown lazily as targets are queried.
  YField field(const YPoint& source) const;

  // Nodes inside the box |x_i| <= x_extent, s in [s_lo, s_hi].
  // Columns: x1..xn, s, strip_index.
  void write_grid_csv(std::ostream& out, double x_extent, double s_lo, double s_hi) const;

 private:
  friend class YField;
  struct Node {
    int strip = 0;
    int row = 0;
    std::array<std::int64_t, 2> k{0, 0};
  };
  struct Move {
    std::array<std::int64_t, 2> a{0, 0};
    int b = 0;
    double cost = 0.0;        // inside the strip
    double cost_below = 0.0;  // horizontal, measured in the strip below
    double cost_above = 0.0;  // horizontal, measured in the strip above
  };

  std::uint64_t pack(const Node& v) const;
  Node unpack(std::uint64_t key) const;
  YPoint position(const Node& v) const;
  bool node_in_window(const Node& v) const;
  // Nearest node and the cost of reaching it.
  std::pair<Node, double> snap(const YPoint& p) const;
  template <typename F>
  void for_each_neighbor(const Node& v, F&& visit) const;
  std::vector<std::array<std::int64_t, 2>> glue_corners(const std::array<std::int64_t, 2>& kp) const;
  double glue_cost(const std::array<std::int64_t, 2>& k,
                   const std::array<std::int64_t, 2>& kp) const;
  const RealMatrix& phi_power(int k) const;

  std::size_t n_;
  double h_;
  int rows_;
  YWindow window_;
  RealMatrix base_;
  RealMatrix phi_;
  RealMatrix phi_inv_;
  std::vector<RealMatrix> powers_;  // phi^k for k in [-s_max-1, s_max+1]
  std::vector<Move> moves_;
  double stencil_kappa_ = 0.0;
  double kappa_ = 0.0;
};

class YField {
 public:
  YField(const YModel& model, const YPoint& source);
  YField(YField&&) noexcept;
  YField& operator=(YField&&) noexcept;
  ~YField();

  const YPoint& source() const noexcept { return source_; }
  YDistance distance_to(const YPoint& target);
  YPath path_to(const YPoint& target);
  std::size_t settled_count() const noexcept;

 private:
  struct State;
  // Grows the search until the node of `target` is settled; returns its
  // grid distance (infinity if unreachable) and the snap data.
  double settle(std::uint64_t key);

  const YModel* model_;
  YPoint source_;
  double source_snap_ = 0.0;
  std::uint64_t source_key_ = 0;
  std::unique_ptr<State> state_;
};

YDistance y_distance(const YPoint& a, const YPoint& b, const YModel& model);
YPath y_geodesic(const YPoint& a, const YPoint& b, const YModel& model);

}  // namespace hnngeo
