#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "numerics.hpp"
#include "vec.hpp"

namespace bogovskii {

/// Uniform tensor grid with nodes at integer multiples of h and a membership mask.
/// Axis 0 varies fastest in the linear node index.
template <int N>
class Grid {
 public:
  using Index = std::array<int, N>;

  Grid(const Index& first, const Index& dims, double h, std::vector<std::uint8_t> mask)
      : first_(first), dims_(dims), h_(h), mask_(std::move(mask)) {
    if (!(h_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
    std::size_t total = 1;
    for (int d = 0; d < N; ++d) {
      if (dims_[d] < 1) throw Error(ErrorCode::InvalidArgument, "grid needs at least one node per axis");
      stride_[d] = total;
      total *= static_cast<std::size_t>(dims_[d]);
    }
    if (mask_.size() != total) throw Error(ErrorCode::InvalidArgument, "mask size does not match grid");
    for (std::size_t i = 0; i < total; ++i)
      if (mask_[i]) masked_.push_back(i);
  }

  double h() const { return h_; }
  double cell_volume() const { return std::pow(h_, N); }
  const Index& dims() const { return dims_; }
  const Index& first() const { return first_; }
  std::size_t size() const { return mask_.size(); }
  std::size_t stride(int axis) const { return stride_[axis]; }
  bool masked(std::size_t i) const { return mask_[i] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  /// Linear indices of masked nodes in increasing order.
  const std::vector<std::size_t>& masked_nodes() const { return masked_; }

  Index multi(std::size_t i) const {
    Index m;
    for (int d = 0; d < N; ++d) {
      m[d] = static_cast<int>(i % static_cast<std::size_t>(dims_[d]));
      i /= static_cast<std::size_t>(dims_[d]);
    }
    return m;
  }

  std::size_t linear(const Index& m) const {
    std::size_t i = 0;
    for (int d = 0; d < N; ++d) i += static_cast<std::size_t>(m[d]) * stride_[d];
    return i;
  }

  bool in_bounds(const Index& m) const {
    for (int d = 0; d < N; ++d)
      if (m[d] < 0 || m[d] >= dims_[d]) return false;
    return true;
  }

  Vec<N> point(const Index& m) const {
    Vec<N> x;
    for (int d = 0; d < N; ++d) x[d] = (first_[d] + m[d]) * h_;
    return x;
  }
  Vec<N> point(std::size_t i) const { return point(multi(i)); }

  Vec<N> lower_corner() const { return point(Index{}); }
  Vec<N> upper_corner() const {
    Index m;
    for (int d = 0; d < N; ++d) m[d] = dims_[d] - 1;
    return point(m);
  }

  /// Multi-index of the node at or below x along every axis (may be out of bounds).
  Index floor_index(const Vec<N>& x) const {
    Index m;
    for (int d = 0; d < N; ++d) m[d] = static_cast<int>(std::floor(x[d] / h_ + 1e-9)) - first_[d];
    return m;
  }

 private:
  Index first_;
  Index dims_;
  double h_;
  std::vector<std::uint8_t> mask_;
  std::array<std::size_t, N> stride_{};
  std::vector<std::size_t> masked_;
};

/// Grid over the box [lo - padding, hi + padding] with mask given by `inside`.
template <int N>
std::shared_ptr<const Grid<N>> make_box_grid(const Vec<N>& lo, const Vec<N>& hi, double h, double padding,
                                             const std::function<bool(const Vec<N>&)>& inside) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  typename Grid<N>::Index first, dims;
  for (int d = 0; d < N; ++d) {
    int a = static_cast<int>(std::floor((lo[d] - padding) / h + 1e-9));
    int b = static_cast<int>(std::ceil((hi[d] + padding) / h - 1e-9));
    first[d] = a;
    dims[d] = b - a + 1;
  }
  std::size_t total = 1;
  for (int d = 0; d < N; ++d) total *= static_cast<std::size_t>(dims[d]);
  std::vector<std::uint8_t> mask(total, 0);
  Grid<N> probe(first, dims, h, mask);
  for (std::size_t i = 0; i < total; ++i) mask[i] = inside(probe.point(i)) ? 1 : 0;
  return std::make_shared<const Grid<N>>(first, dims, h, std::move(mask));
}

/// Grid covering the closed domain; the mask marks nodes in the closure.
template <int N>
std::shared_ptr<const Grid<N>> make_grid(const StarDomain<N>& dom, double h, double padding = 0.0) {
  const auto& box = dom.bounding_box();
  return make_box_grid<N>(box.lo, box.hi, h, padding, [&dom](const Vec<N>& x) { return dom.contains(x); });
}

/// Samples of a function on a grid. Values off the mask are stored (normally zero);
/// support_flag asserts that the sampled function vanishes off the mask.
template <int N, class T = double>
struct GridField {
  std::shared_ptr<const Grid<N>> grid;
  std::vector<T> values;
  bool support_flag = true;

  GridField() = default;
  explicit GridField(std::shared_ptr<const Grid<N>> g, bool flag = true)
      : grid(std::move(g)), values(grid->size(), ValueTraits<T>::zero()), support_flag(flag) {}

  /// f on masked nodes, zero elsewhere.
  template <class F>
  static GridField sample(std::shared_ptr<const Grid<N>> g, F&& f) {
    GridField out(std::move(g), true);
    for (std::size_t i : out.grid->masked_nodes()) out.values[i] = f(out.grid->point(i));
    return out;
  }

  /// f on every node of the box, masked or not.
  template <class F>
  static GridField sample_all(std::shared_ptr<const Grid<N>> g, F&& f) {
    GridField out(std::move(g), false);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f(out.grid->point(i));
    return out;
  }

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  GridField& operator+=(const GridField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    support_flag = support_flag && o.support_flag;
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    support_flag = support_flag && o.support_flag;
    return *this;
  }
  GridField& operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

  /// Cubic Lagrange interpolation on the 4^N surrounding nodes; zero outside the box.
  T interpolate(const Vec<N>& x) const;
};

template <int N>
using ScalarField = GridField<N, double>;
template <int N>
using VectorField = GridField<N, Vec<N>>;
template <int N>
using MatrixField = GridField<N, Mat<N>>;

namespace detail {

inline std::array<double, 4> cubic_lagrange_weights(double t) {
  // nodes at -1, 0, 1, 2
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace detail

template <int N, class T>
T GridField<N, T>::interpolate(const Vec<N>& x) const {
  const Grid<N>& g = *grid;
  auto base = g.floor_index(x);
  std::array<std::array<double, 4>, N> w;
  Vec<N> p0 = g.point(base);
  for (int d = 0; d < N; ++d) w[d] = detail::cubic_lagrange_weights((x[d] - p0[d]) / g.h());
  T acc = ValueTraits<T>::zero();
  constexpr int kCount = N == 2 ? 16 : 64;
  for (int c = 0; c < kCount; ++c) {
    typename Grid<N>::Index m;
    double weight = 1.0;
    int code = c;
    for (int d = 0; d < N; ++d) {
      int o = code % 4;
      code /= 4;
      m[d] = base[d] + o - 1;
      weight *= w[d][o];
    }
    if (!g.in_bounds(m)) continue;
    acc += weight * values[g.linear(m)];
  }
  return acc;
}

/// Sum of values times cell volume over masked nodes, in node order.
template <int N, class T>
T integrate(const GridField<N, T>& f) {
  using Traits = ValueTraits<T>;
  std::array<CompensatedSum, Traits::components> sums;
  for (std::size_t i : f.grid->masked_nodes()) {
    for (int k = 0; k < Traits::components; ++k) sums[k].add(Traits::at(f.values[i], k));
  }
  T out = Traits::zero();
  const double vol = f.grid->cell_volume();
  for (int k = 0; k < Traits::components; ++k) Traits::at(out, k) = sums[k].value() * vol;
  return out;
}

/// Sum of |values| times cell volume over masked nodes.
template <int N, class T>
double integrate_abs(const GridField<N, T>& f) {
  CompensatedSum s;
  for (std::size_t i : f.grid->masked_nodes()) s.add(magnitude(f.values[i]));
  return s.value() * f.grid->cell_volume();
}

/// Largest |value| over masked nodes.
template <int N, class T>
double max_abs(const GridField<N, T>& f) {
  double m = 0.0;
  for (std::size_t i : f.grid->masked_nodes()) m = std::max(m, magnitude(f.values[i]));
  return m;
}

enum class Stencil : std::uint8_t { None, Centered, OneSided };

template <class T>
struct GradientOf;
template <>
struct GradientOf<double> {
  template <int N>
  using type = Vec<N>;
};
template <int N>
struct GradientOf<Vec<N>> {
  template <int M>
  using type = Mat<M>;
};

/// Finite-difference gradient together with the stencil used at each node
/// (OneSided if any axis needed a one-sided stencil).
template <int N, class T>
struct FdGradient {
  using G = typename GradientOf<T>::template type<N>;
  GridField<N, G> gradient;
  std::vector<Stencil> stencil;
};

/// Derivative of a single node value along `axis`. Neighbours are usable if they
/// are masked, or if the field is asserted zero off the mask.
template <int N, class T>
bool fd_derivative(const GridField<N, T>& f, std::size_t i, int axis, T& out, bool& centered) {
  const Grid<N>& g = *f.grid;
  auto m = g.multi(i);
  auto usable = [&](int offset) {
    auto k = m;
    k[axis] += offset;
    if (!g.in_bounds(k)) return false;
    return f.support_flag || g.masked(g.linear(k));
  };
  auto value = [&](int offset) {
    auto k = m;
    k[axis] += offset;
    return f.values[g.linear(k)];
  };
  const double h = g.h();
  if (usable(-1) && usable(1)) {
    out = (value(1) - value(-1)) * (0.5 / h);
    centered = true;
    return true;
  }
  centered = false;
  if (usable(1) && usable(2)) {
    out = (-3.0 * value(0) + 4.0 * value(1) - value(2)) * (0.5 / h);
    return true;
  }
  if (usable(-1) && usable(-2)) {
    out = (3.0 * value(0) - 4.0 * value(-1) + value(-2)) * (0.5 / h);
    return true;
  }
  if (usable(1)) {
    out = (value(1) - value(0)) / h;
    return true;
  }
  if (usable(-1)) {
    out = (value(0) - value(-1)) / h;
    return true;
  }
  return false;
}

/// Centered differences where both neighbours are usable, one-sided otherwise.
/// For vector fields entry (i, j) is the derivative of component i along axis j.
template <int N, class T>
FdGradient<N, T> fd_gradient(const GridField<N, T>& f) {
  using G = typename GradientOf<T>::template type<N>;
  FdGradient<N, T> out{GridField<N, G>(f.grid, false), std::vector<Stencil>(f.size(), Stencil::None)};
  for (std::size_t i : f.grid->masked_nodes()) {
    G grad{};
    bool all_centered = true;
    bool ok = true;
    for (int axis = 0; axis < N && ok; ++axis) {
      T d{};
      bool centered = false;
      ok = fd_derivative(f, i, axis, d, centered);
      all_centered = all_centered && centered;
      if constexpr (std::is_same_v<T, double>) {
        grad[axis] = d;
      } else {
        for (int c = 0; c < N; ++c) grad(c, axis) = d[c];
      }
    }
    if (!ok) continue;
    out.gradient.values[i] = grad;
    out.stencil[i] = all_centered ? Stencil::Centered : Stencil::OneSided;
  }
  return out;
}

/// Nodes with nonzero values, with their positions and values premultiplied by the cell volume.
template <int N, class T>
struct WeightedSupport {
  std::vector<std::size_t> nodes;
  std::vector<Vec<N>> points;
  std::vector<T> weighted;
  Vec<N> lo;  // bounding box of the points
  Vec<N> hi;

  /// Distance from x to the bounding box of the support (0 inside).
  double distance_to(const Vec<N>& x) const {
    double d2 = 0.0;
    for (int k = 0; k < N; ++k) {
      double out = std::max({0.0, lo[k] - x[k], x[k] - hi[k]});
      d2 += out * out;
    }
    return std::sqrt(d2);
  }
};

template <int N, class T>
WeightedSupport<N, T> weighted_support(const GridField<N, T>& f) {
  WeightedSupport<N, T> s;
  const double vol = f.grid->cell_volume();
  for (std::size_t i : f.grid->masked_nodes()) {
    if (magnitude(f.values[i]) == 0.0) continue;
    s.nodes.push_back(i);
    s.points.push_back(f.grid->point(i));
    s.weighted.push_back(vol * f.values[i]);
  }
  for (int k = 0; k < N; ++k) {
    s.lo[k] = std::numeric_limits<double>::infinity();
    s.hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& p : s.points) {
    for (int k = 0; k < N; ++k) {
      s.lo[k] = std::min(s.lo[k], p[k]);
      s.hi[k] = std::max(s.hi[k], p[k]);
    }
  }
  return s;
}

}  // namespace bogovskii
