#include "hnngeo/y_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStripOffset = 128;

double quad_form(const RealMatrix& b, const RealVec& v) {
  double q = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) q += v[i] * b(i, j) * v[j];
  }
  return q;
}

bool positive_definite(const RatMatrix& b) {
  const std::size_t n = b.dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (b(i, j) != b(j, i)) return false;
    }
  }
  // Sylvester: all leading principal minors positive.
  for (std::size_t k = 1; k <= n; ++k) {
    RatMatrix minor(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) minor(i, j) = b(i, j);
    }
    if (determinant(minor) <= 0) return false;
  }
  return true;
}

double lambda_max(const RealMatrix& b) {
  if (b.dim() == 1) return b(0, 0);
  const double half_tr = 0.5 * (b(0, 0) + b(1, 1));
  const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
  return half_tr + std::sqrt(std::max(0.0, half_tr * half_tr - det));
}

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Inradius of the convex hull of unit vectors (dimension 2 or 3), found by
// testing every candidate facet.
double hull_inradius(const std::vector<Vec3>& u, int dim) {
  double best = kInf;
  const std::size_t m = u.size();
  auto consider = [&](Vec3 nrm, const Vec3& p) {
    const double len = std::sqrt(dot(nrm, nrm));
    if (len < 1e-12) return;
    for (auto& c : nrm) c /= len;
    double off = dot(nrm, p);
    if (off < 0) {
      for (auto& c : nrm) c = -c;
      off = -off;
    }
    for (const auto& q : u) {
      if (dot(nrm, q) > off + 1e-12) return;
    }
    best = std::min(best, off);
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (dim == 2) {
        consider({-(u[j][1] - u[i][1]), u[j][0] - u[i][0], 0.0}, u[i]);
        continue;
      }
      for (std::size_t k = j + 1; k < m; ++k) {
        const Vec3 a{u[j][0] - u[i][0], u[j][1] - u[i][1], u[j][2] - u[i][2]};
        const Vec3 b{u[k][0] - u[i][0], u[k][1] - u[i][1], u[k][2] - u[i][2]};
        consider({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                  a[0] * b[1] - a[1] * b[0]},
                 u[i]);
      }
    }
  }
  return best;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

}  // namespace

YPoint to_real(const RatYPoint& p) {
  return {to_real(p.x), static_cast<double>(p.s)};
}

YPoint act_y(const Group& group, const GroupElement& g, const YPoint& p) {
  const SemidirectElement e = group.j_N(g);
  const RealMatrix phik = to_real(group.presentation().phi_power(e.level));
  RealVec x = mul(phik, p.x);
  const RealVec v = to_real(e.translation);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += v[i];
  return {std::move(x), p.s + e.level};
}

RatYPoint act_y(const Group& group, const GroupElement& g, const RatYPoint& p) {
  const SemidirectElement e = group.j_N(g);
  RatVec x = mul(group.presentation().phi_power(e.level), p.x);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += e.translation[i];
  return {std::move(x), p.s + e.level};
}

YPoint vertical_ray_alpha(const YPoint& p, double u) { return {p.x, p.s + u}; }

YModel::YModel(const Presentation& presentation, double grid_step, YWindow window,
               std::optional<RatMatrix> base_metric)
    : n_(presentation.rank()), h_(grid_step), window_(window) {
  if (n_ > 2) {
    throw Error(ErrorKind::UnsupportedPresentation,
                "grid distances are implemented for rank 1 and 2");
  }
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw Error(ErrorKind::DegenerateGrid, "grid step must be positive");
  }
  const double inv = 1.0 / grid_step;
  rows_ = static_cast<int>(std::lround(inv));
  if (rows_ < 1 || rows_ > 255 || std::abs(rows_ * grid_step - 1.0) > 1e-9) {
    throw Error(ErrorKind::DegenerateGrid,
                "1/grid_step must be an integer between 1 and 255");
  }
  if (window.s_max < 1 || window.s_max > 100 || !(window.x_max >= grid_step)) {
    throw Error(ErrorKind::DegenerateGrid, "window too small for the grid step");
  }
  RatMatrix b = base_metric ? *base_metric : RatMatrix::identity(n_);
  if (b.dim() != n_ || !positive_definite(b)) {
    throw Error(ErrorKind::ConfigError, "base metric must be symmetric positive definite");
  }
  base_ = to_real(b);
  phi_ = to_real(presentation.phi());
  phi_inv_ = to_real(inverse(presentation.phi()));
  for (int k = -window_.s_max - 2; k <= window_.s_max + 2; ++k) {
    powers_.push_back(to_real(presentation.phi_power(k)));
  }

  // Stencil in lattice coordinates (a, b).
  std::vector<std::pair<std::array<std::int64_t, 2>, int>> raw;
  if (n_ == 1) {
    for (int a = -2; a <= 2; ++a) {
      for (int b2 = -2; b2 <= 2; ++b2) {
        if ((a || b2) && gcd64(a, b2) == 1) raw.push_back({{a, 0}, b2});
      }
    }
  } else {
    for (int a0 = -1; a0 <= 1; ++a0) {
      for (int a1 = -1; a1 <= 1; ++a1) {
        for (int b2 = -1; b2 <= 1; ++b2) {
          if (a0 || a1 || b2) raw.push_back({{a0, a1}, b2});
        }
      }
    }
  }
  // Cholesky factor of B so that |R a|^2 = a^T B a.
  const double r11 = std::sqrt(base_(0, 0));
  const double r12 = n_ == 2 ? base_(0, 1) / r11 : 0.0;
  const double r22 = n_ == 2 ? std::sqrt(base_(1, 1) - r12 * r12) : 0.0;
  std::vector<Vec3> units;
  for (const auto& [a, b2] : raw) {
    RealVec av(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n_));
    Move m;
    m.a = a;
    m.b = b2;
    m.cost = h_ * std::sqrt(quad_form(base_, av) + double(b2) * b2);
    if (b2 == 0) {
      m.cost_below = h_ * std::sqrt(quad_form(base_, mul(phi_, av)));
      m.cost_above = h_ * std::sqrt(quad_form(base_, mul(phi_inv_, av)));
    }
    moves_.push_back(m);
    Vec3 w = n_ == 1 ? Vec3{r11 * a[0], double(b2), 0.0}
                     : Vec3{r11 * a[0] + r12 * a[1], r22 * a[1], double(b2)};
    const double len = std::sqrt(dot(w, w));
    for (auto& c : w) c /= len;
    units.push_back(w);
  }
  stencil_kappa_ = 1.0 / hull_inradius(units, static_cast<int>(n_) + 1) - 1.0;
  kappa_ = stencil_kappa_ + 2.0 * h_ * std::sqrt(double(n_) * lambda_max(base_));
}

YModel::~YModel() = default;

const RealMatrix& YModel::phi_power(int k) const {
  const int idx = k + window_.s_max + 2;
  if (idx < 0 || idx >= static_cast<int>(powers_.size())) {
    throw Error(ErrorKind::OutsideWindow, "height outside the Y window");
  }
  return powers_[static_cast<std::size_t>(idx)];
}

bool YModel::in_window(const YPoint& p) const {
  if (p.x.size() != n_ || !std::isfinite(p.s)) return false;
  if (p.s < -window_.s_max || p.s > window_.s_max) return false;
  for (double c : p.x) {
    if (!std::isfinite(c) || std::abs(c) > window_.x_max) return false;
  }
  return true;
}

void YModel::require(const YPoint& p) const {
  if (!in_window(p)) throw Error(ErrorKind::OutsideWindow, "Y point outside the window");
}

double YModel::strip_norm(int strip, const RealVec& dx) const {
  return std::sqrt(quad_form(base_, mul(phi_power(-strip), dx)));
}

double YModel::segment_length(const YPoint& a, const YPoint& b) const {
  const int lo_strip = -window_.s_max;
  const int hi_strip = window_.s_max - 1;
  RealVec dx(n_);
  for (std::size_t i = 0; i < n_; ++i) dx[i] = b.x[i] - a.x[i];
  const double ds = b.s - a.s;
  if (ds == 0.0) {
    const double fl = std::floor(a.s);
    if (fl == a.s) {
      // On a strip boundary: the cheaper adjacent strip.
      const int s = static_cast<int>(fl);
      double best = kInf;
      if (s - 1 >= lo_strip) best = std::min(best, strip_norm(s - 1, dx));
      if (s <= hi_strip) best = std::min(best, strip_norm(s, dx));
      return best;
    }
    return strip_norm(std::clamp(static_cast<int>(fl), lo_strip, hi_strip), dx);
  }
  // Split at integer heights.
  std::vector<double> cuts{0.0};
  const double s0 = std::min(a.s, b.s);
  const double s1 = std::max(a.s, b.s);
  for (double c = std::floor(s0) + 1.0; c < s1; c += 1.0) {
    cuts.push_back((c - a.s) / ds);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double f = cuts[i + 1] - cuts[i];
    if (f <= 0.0) continue;
    const double mid = a.s + 0.5 * (cuts[i] + cuts[i + 1]) * ds;
    const int strip = std::clamp(static_cast<int>(std::floor(mid)), lo_strip, hi_strip);
    RealVec piece(n_);
    for (std::size_t k = 0; k < n_; ++k) piece[k] = f * dx[k];
    const double hn = strip_norm(strip, piece);
    total += std::sqrt(hn * hn + f * f * ds * ds);
  }
  return total;
}

std::uint64_t YModel::pack(const Node& v) const {
  std::uint64_t key = static_cast<std::uint64_t>(v.strip + kStripOffset) << 56;
  key |= static_cast<std::uint64_t>(v.row) << 48;
  if (n_ == 1) {
    constexpr std::int64_t off = std::int64_t(1) << 47;
    if (v.k[0] <= -off || v.k[0] >= off) {
      throw Error(ErrorKind::OutsideWindow, "lattice index out of range");
    }
    key |= static_cast<std::uint64_t>(v.k[0] + off);
  } else {
    constexpr std::int64_t off = std::int64_t(1) << 23;
    for (int i = 0; i < 2; ++i) {
      if (v.k[i] <= -off || v.k[i] >= off) {
        throw Error(ErrorKind::OutsideWindow, "lattice index out of range");
      }
    }
    key |= static_cast<std::uint64_t>(v.k[0] + off) << 24;
    key |= static_cast<std::uint64_t>(v.k[1] + off);
  }
  return key;
}

YModel::Node YModel::unpack(std::uint64_t key) const {
  Node v;
  v.strip = static_cast<int>(key >> 56) - kStripOffset;
  v.row = static_cast<int>((key >> 48) & 0xff);
  if (n_ == 1) {
    constexpr std::int64_t off = std::int64_t(1) << 47;
    v.k[0] = static_cast<std::int64_t>(key & ((std::uint64_t(1) << 48) - 1)) - off;
  } else {
    constexpr std::int64_t off = std::int64_t(1) << 23;
    const std::uint64_t mask = (std::uint64_t(1) << 24) - 1;
    v.k[0] = static_cast<std::int64_t>((key >> 24) & mask) - off;
    v.k[1] = static_cast<std::int64_t>(key & mask) - off;
  }
  return v;
}

YPoint YModel::position(const Node& v) const {
  RealVec k(v.k.begin(), v.k.begin() + static_cast<std::ptrdiff_t>(n_));
  RealVec x = mul(phi_power(v.strip), k);
  for (auto& c : x) c *= h_;
  return {std::move(x), v.strip + static_cast<double>(v.row) / rows_};
}

bool YModel::node_in_window(const Node& v) const {
  const RealMatrix& p = phi_power(v.strip);
  for (std::size_t i = 0; i < n_; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < n_; ++j) c += p(i, j) * static_cast<double>(v.k[j]);
    if (std::abs(h_ * c) > window_.x_max + 1e-9) return false;
  }
  return true;
}

std::pair<YModel::Node, double> YModel::snap(const YPoint& p) const {
  require(p);
  Node v;
  v.strip = std::clamp(static_cast<int>(std::floor(p.s)), -window_.s_max, window_.s_max - 1);
  v.row = static_cast<int>(std::lround((p.s - v.strip) * rows_));
  v.row = std::clamp(v.row, 0, rows_);
  RealVec local = mul(phi_power(-v.strip), p.x);
  for (std::size_t i = 0; i < n_; ++i) {
    v.k[i] = static_cast<std::int64_t>(std::llround(local[i] / h_));
  }
  if (!node_in_window(v)) {
    // Pull back toward the origin along any axis that overshot.
    for (std::size_t i = 0; i < n_ && !node_in_window(v); ++i) {
      v.k[i] += v.k[i] > 0 ? -1 : 1;
    }
    if (!node_in_window(v)) {
      throw Error(ErrorKind::OutsideWindow, "no grid node near the window edge");
    }
  }
  return {v, segment_length(p, position(v))};
}

std::vector<std::array<std::int64_t, 2>> YModel::glue_corners(
    const std::array<std::int64_t, 2>& kp) const {
  std::array<std::vector<std::int64_t>, 2> opts;
  for (std::size_t i = 0; i < n_; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < n_; ++j) c += phi_(i, j) * static_cast<double>(kp[j]);
    const auto f = static_cast<std::int64_t>(std::floor(c + 1e-9));
    const auto u = static_cast<std::int64_t>(std::ceil(c - 1e-9));
    opts[i].push_back(f);
    if (u != f) opts[i].push_back(u);
  }
  std::vector<std::array<std::int64_t, 2>> out;
  if (n_ == 1) {
    for (auto a : opts[0]) out.push_back({a, 0});
  } else {
    for (auto a : opts[0]) {
      for (auto b : opts[1]) out.push_back({a, b});
    }
  }
  return out;
}

double YModel::glue_cost(const std::array<std::int64_t, 2>& k,
                         const std::array<std::int64_t, 2>& kp) const {
  // Displacement in the lower strip's lattice units: k - phi kp.
  RealVec d(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < n_; ++j) c += phi_(i, j) * static_cast<double>(kp[j]);
    d[i] = static_cast<double>(k[i]) - c;
  }
  const double lower = std::sqrt(quad_form(base_, d));
  const double upper = std::sqrt(quad_form(base_, mul(phi_inv_, d)));
  return h_ * std::min(lower, upper);
}

template <typename F>
void YModel::for_each_neighbor(const Node& v, F&& visit) const {
  const bool has_below = v.strip - 1 >= -window_.s_max;
  const bool has_above = v.strip + 1 <= window_.s_max - 1;
  for (const auto& m : moves_) {
    const int row = v.row + m.b;
    if (row < 0 || row > rows_) continue;
    Node w{v.strip, row, {v.k[0] + m.a[0], v.k[1] + m.a[1]}};
    if (!node_in_window(w)) continue;
    double cost = m.cost;
    if (m.b == 0 && v.row == 0 && has_below) cost = std::min(cost, m.cost_below);
    if (m.b == 0 && v.row == rows_ && has_above) cost = std::min(cost, m.cost_above);
    visit(w, cost);
  }
  if (v.row == 0 && has_below) {
    for (const auto& c : glue_corners(v.k)) {
      Node w{v.strip - 1, rows_, c};
      if (node_in_window(w)) visit(w, glue_cost(c, v.k));
    }
  }
  if (v.row == rows_ && has_above) {
    // Upper-strip nodes kp whose corner set contains k: kp near phi^-1 k.
    std::array<std::int64_t, 2> lo{0, 0};
    std::array<std::int64_t, 2> hi{0, 0};
    for (std::size_t i = 0; i < n_; ++i) {
      double mn = kInf;
      double mx = -kInf;
      for (int corner = 0; corner < (1 << n_); ++corner) {
        double c = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
          const double kj = static_cast<double>(v.k[j]) + (((corner >> j) & 1) ? 1.0 : -1.0);
          c += phi_inv_(i, j) * kj;
        }
        mn = std::min(mn, c);
        mx = std::max(mx, c);
      }
      lo[i] = static_cast<std::int64_t>(std::floor(mn));
      hi[i] = static_cast<std::int64_t>(std::ceil(mx));
    }
    std::array<std::int64_t, 2> kp{0, 0};
    for (kp[0] = lo[0]; kp[0] <= hi[0]; ++kp[0]) {
      for (kp[1] = lo[1]; kp[1] <= hi[1]; ++kp[1]) {
        const auto corners = glue_corners(kp);
        if (std::find(corners.begin(), corners.end(), v.k) == corners.end()) continue;
        Node w{v.strip + 1, 0, kp};
        if (node_in_window(w)) visit(w, glue_cost(v.k, kp));
      }
    }
  }
}

YDistance YModel::distance(const YPoint& a, const YPoint& b) const {
  YField f(*this, a);
  return f.distance_to(b);
}

YPath YModel::geodesic(const YPoint& a, const YPoint& b) const {
  YField f(*this, a);
  return f.path_to(b);
}

YField YModel::field(const YPoint& source) const { return YField(*this, source); }

void YModel::write_grid_csv(std::ostream& out, double x_extent, double s_lo,
                            double s_hi) const {
  for (std::size_t i = 0; i < n_; ++i) out << 'x' << (i + 1) << ',';
  out << "s,strip_index\n";
  for (int strip = -window_.s_max; strip < window_.s_max; ++strip) {
    if (strip + 1 < s_lo || strip > s_hi) continue;
    // Bounding box of lattice indices covering |x| <= x_extent.
    const RealMatrix& inv = phi_power(-strip);
    std::array<std::int64_t, 2> bound{0, 0};
    for (std::size_t i = 0; i < n_; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < n_; ++j) r += std::abs(inv(i, j)) * x_extent;
      bound[i] = static_cast<std::int64_t>(std::ceil(r / h_));
    }
    for (int row = 0; row <= rows_; ++row) {
      const double s = strip + static_cast<double>(row) / rows_;
      if (s < s_lo || s > s_hi) continue;
      Node v{strip, row, {0, 0}};
      for (v.k[0] = -bound[0]; v.k[0] <= bound[0]; ++v.k[0]) {
        for (v.k[1] = -bound[1]; v.k[1] <= bound[1]; ++v.k[1]) {
          YPoint p = position(v);
          bool inside = true;
          for (double c : p.x) inside = inside && std::abs(c) <= x_extent + 1e-12;
          if (!inside) continue;
          for (double c : p.x) out << c << ',';
          out << p.s << ',' << strip << '\n';
        }
      }
    }
  }
}

struct YField::State {
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  std::vector<std::uint64_t> keys;
  std::vector<double> dist;
  std::vector<std::uint32_t> parent;
  std::vector<char> settled;
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::size_t settled_count = 0;

  std::uint32_t slot(std::uint64_t key) {
    auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(keys.size()));
    if (inserted) {
      keys.push_back(key);
      dist.push_back(kInf);
      parent.push_back(std::numeric_limits<std::uint32_t>::max());
      settled.push_back(0);
    }
    return it->second;
  }
};

YField::YField(const YModel& model, const YPoint& source)
    : model_(&model), source_(source), state_(std::make_unique<State>()) {
  auto [node, cost] = model.snap(source);
  source_snap_ = cost;
  source_key_ = model.pack(node);
  state_->index.reserve(1 << 16);
  const auto idx = state_->slot(source_key_);
  state_->dist[idx] = 0.0;
  state_->heap.push({0.0, idx});
}

YField::YField(YField&&) noexcept = default;
YField& YField::operator=(YField&&) noexcept = default;
YField::~YField() = default;

std::size_t YField::settled_count() const noexcept { return state_->settled_count; }

double YField::settle(std::uint64_t key) {
  State& st = *state_;
  if (auto it = st.index.find(key); it != st.index.end() && st.settled[it->second]) {
    return st.dist[it->second];
  }
  while (!st.heap.empty()) {
    auto [d, idx] = st.heap.top();
    st.heap.pop();
    if (st.settled[idx] || d > st.dist[idx]) continue;
    st.settled[idx] = 1;
    ++st.settled_count;
    const std::uint64_t cur = st.keys[idx];
    model_->for_each_neighbor(model_->unpack(cur), [&](const YModel::Node& w, double cost) {
      const auto j = st.slot(model_->pack(w));
      const double nd = d + cost;
      if (!st.settled[j] && nd < st.dist[j]) {
        st.dist[j] = nd;
        st.parent[j] = idx;
        st.heap.push({nd, j});
      }
    });
    if (cur == key) return d;
  }
  return kInf;
}

YDistance YField::distance_to(const YPoint& target) {
  if (target == source_) return {0.0, 0.0, 0.0};
  auto [node, cost] = model_->snap(target);
  const double grid = settle(model_->pack(node));
  if (!std::isfinite(grid)) {
    throw Error(ErrorKind::OutsideWindow, "target unreachable inside the Y window");
  }
  YDistance out;
  out.snap = source_snap_ + cost;
  const double via_grid = source_snap_ + grid + cost;
  out.upper = std::min(via_grid, model_->segment_length(source_, target));
  const double vertical = std::abs(target.s - source_.s);
  out.lower = std::max(vertical, grid / (1.0 + model_->kappa()) - out.snap);
  out.lower = std::clamp(out.lower, 0.0, out.upper);
  return out;
}

YPath YField::path_to(const YPoint& target) {
  YPath path;
  if (target == source_) return path;
  const YDistance d = distance_to(target);
  const double straight = model_->segment_length(source_, target);
  if (straight <= d.upper) {
    path.points = {source_, target};
    path.length = straight;
    return path;
  }
  auto [node, cost] = model_->snap(target);
  const State& st = *state_;
  std::vector<YPoint> rev{target};
  std::uint32_t idx = st.index.at(model_->pack(node));
  while (true) {
    rev.push_back(model_->position(model_->unpack(st.keys[idx])));
    if (st.parent[idx] == std::numeric_limits<std::uint32_t>::max()) break;
    idx = st.parent[idx];
  }
  rev.push_back(source_);
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    if (path.points.empty() || !(path.points.back() == *it)) path.points.push_back(*it);
  }
  path.length = d.upper;
  return path;
}

YDistance y_distance(const YPoint& a, const YPoint& b, const YModel& model) {
  return model.distance(a, b);
}

YPath y_geodesic(const YPoint& a, const YPoint& b, const YModel& model) {
  return model.geodesic(a, b);
}

}  // namespace hnngeo
