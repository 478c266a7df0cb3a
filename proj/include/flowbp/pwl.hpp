#pragma once

// Exact piecewise-linear convex functions over the integers.
//
// A PwlConvex stores its finite vertices x_0 < ... < x_{k-1}, the function
// value at each vertex and the slope of every piece between consecutive
// vertices. A domain that is unbounded on one side carries a ray slope on
// that side. Outside the domain the function is +inf. The representation is
// canonical: adjacent pieces never share a slope, so two functions are equal
// iff their representations are equal.
//
// The only form without a genuine vertex is an affine function on the whole
// line; it is stored with the single reference vertex x = 0.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "flowbp/error.hpp"
#include "flowbp/integer.hpp"

namespace flowbp {

template <class I>
class ExtendedInt {
 public:
  enum class Kind { kNegInf, kFinite, kPosInf };

  ExtendedInt(I v) : kind_(Kind::kFinite), value_(std::move(v)) {}  // NOLINT(implicit)

  static ExtendedInt neg_inf() { return ExtendedInt(Kind::kNegInf); }
  static ExtendedInt pos_inf() { return ExtendedInt(Kind::kPosInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_neg_inf() const { return kind_ == Kind::kNegInf; }
  bool is_pos_inf() const { return kind_ == Kind::kPosInf; }
  const I& value() const { return value_; }

  friend bool operator==(const ExtendedInt& a, const ExtendedInt& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }
  friend bool operator<(const ExtendedInt& a, const ExtendedInt& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.is_finite() && a.value_ < b.value_;
  }
  friend bool operator>(const ExtendedInt& a, const ExtendedInt& b) { return b < a; }
  friend bool operator<=(const ExtendedInt& a, const ExtendedInt& b) { return !(b < a); }

 private:
  explicit ExtendedInt(Kind k) : kind_(k), value_(0) {}

  Kind kind_;
  I value_;
};

template <class I>
class PwlConvex {
 public:
  using Storage = boost::container::small_vector<I, 6>;
  using value_type = I;

  // Builds f from breakpoints a_0 < ... < a_k (a_0 may be -inf, a_k may be
  // +inf), slopes c_1 <= ... <= c_k and the value of f at a finite point of
  // the domain. k = 0 describes the indicator of the single point a_0.
  static PwlConvex construct(std::span<const ExtendedInt<I>> breakpoints,
                             std::span<const I> slopes, const I& anchor_x,
                             const I& anchor_value) {
    for (std::size_t i = 1; i < slopes.size(); ++i) {
      if (slopes[i] < slopes[i - 1]) throw Error(Errc::kNonConvex, "slopes decrease");
    }
    if (breakpoints.empty()) throw Error(Errc::kMalformedDomain, "no breakpoints");
    if (slopes.size() + 1 != breakpoints.size()) {
      throw Error(Errc::kMalformedDomain, "need exactly one slope per piece");
    }
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      const auto& b = breakpoints[i];
      if (b.is_neg_inf() && i != 0) throw Error(Errc::kMalformedDomain, "-inf must come first");
      if (b.is_pos_inf() && i + 1 != breakpoints.size()) {
        throw Error(Errc::kMalformedDomain, "+inf must come last");
      }
      if (i > 0 && !(breakpoints[i - 1] < b)) {
        throw Error(Errc::kMalformedDomain, "breakpoints must be strictly increasing");
      }
    }
    if (breakpoints.size() == 1 && !breakpoints[0].is_finite()) {
      throw Error(Errc::kMalformedDomain, "single-point domain must be finite");
    }
    if (!(breakpoints.front() <= ExtendedInt<I>(anchor_x)) ||
        !(ExtendedInt<I>(anchor_x) <= breakpoints.back())) {
      throw Error(Errc::kAnchorOutOfDomain, "anchor outside the domain");
    }

    const bool left_open = breakpoints.front().is_neg_inf();
    const bool right_open = breakpoints.back().is_pos_inf();
    Storage xs;
    for (const auto& b : breakpoints) {
      if (b.is_finite()) xs.push_back(b.value());
    }
    if (xs.empty()) {
      // (-inf, +inf) with one slope.
      return line(slopes[0], anchor_value - slopes[0] * anchor_x);
    }
    const I left_slope = left_open ? slopes.front() : I(0);
    const I right_slope = right_open ? slopes.back() : I(0);
    Storage inner(slopes.begin() + (left_open ? 1 : 0),
                  slopes.end() - (right_open ? 1 : 0));

    // Value at xs[0] from the anchor, then the recurrence forward.
    I y0 = anchor_value;
    if (anchor_x < xs[0]) {
      y0 = anchor_value + left_slope * (xs[0] - anchor_x);
    } else {
      std::size_t i = 0;
      I acc = anchor_value;
      // Walk backwards from the anchor's piece to xs[0].
      while (i + 1 < xs.size() && xs[i + 1] <= anchor_x) ++i;
      if (i + 1 == xs.size() && anchor_x > xs.back()) {
        acc = anchor_value - right_slope * (anchor_x - xs.back());
      } else if (anchor_x > xs[i]) {
        acc = anchor_value - inner[i] * (anchor_x - xs[i]);
      }
      for (std::size_t j = i; j > 0; --j) acc = acc - inner[j - 1] * (xs[j] - xs[j - 1]);
      y0 = acc;
    }
    Storage ys;
    ys.push_back(y0);
    for (std::size_t i = 1; i < xs.size(); ++i) {
      ys.push_back(ys.back() + inner[i - 1] * (xs[i] - xs[i - 1]));
    }
    return from_parts(left_open, left_slope, std::move(xs), std::move(ys), std::move(inner),
                      right_open, right_slope);
  }

  static PwlConvex zero() { return line(I(0), I(0)); }

  static PwlConvex line(I slope, I value_at_zero) {
    PwlConvex f;
    f.left_open_ = f.right_open_ = true;
    f.left_slope_ = slope;
    f.right_slope_ = std::move(slope);
    f.xs_.push_back(I(0));
    f.ys_.push_back(std::move(value_at_zero));
    return f;
  }

  static PwlConvex point(I x, I value) {
    PwlConvex f;
    f.xs_.push_back(std::move(x));
    f.ys_.push_back(std::move(value));
    return f;
  }

  // z -> slope * (z - lo) + value_at_lo on [lo, hi]; hi = nullopt means +inf.
  static PwlConvex segment(const I& lo, const std::optional<I>& hi, const I& slope,
                           const I& value_at_lo) {
    if (hi && *hi < lo) throw Error(Errc::kMalformedDomain, "segment with hi < lo");
    if (hi && *hi == lo) return point(lo, value_at_lo);
    PwlConvex f;
    f.xs_.push_back(lo);
    f.ys_.push_back(value_at_lo);
    if (hi) {
      f.xs_.push_back(*hi);
      f.ys_.push_back(value_at_lo + slope * (*hi - lo));
      f.inner_.push_back(slope);
    } else {
      f.right_open_ = true;
      f.right_slope_ = slope;
    }
    return f;
  }

  // Canonicalizing constructor: drops vertices whose adjacent slopes agree
  // and rejects non-convex slope sequences. xs must be strictly increasing,
  // ys and inner sized to match.
  static PwlConvex from_parts(bool left_open, I left_slope, Storage xs, Storage ys,
                              Storage inner, bool right_open, I right_slope) {
    const std::size_t k = xs.size();
    PwlConvex f;
    f.left_open_ = left_open;
    f.right_open_ = right_open;
    f.left_slope_ = left_open ? std::move(left_slope) : I(0);
    f.right_slope_ = right_open ? std::move(right_slope) : I(0);
    for (std::size_t i = 0; i < k; ++i) {
      const bool has_before = i > 0 || left_open;
      const bool has_after = i + 1 < k || right_open;
      if (has_before && has_after) {
        const I& before = i > 0 ? inner[i - 1] : f.left_slope_;
        const I& after = i + 1 < k ? inner[i] : f.right_slope_;
        if (before == after) continue;
      }
      if (!f.xs_.empty()) f.inner_.push_back(inner[i - 1]);
      f.xs_.push_back(std::move(xs[i]));
      f.ys_.push_back(std::move(ys[i]));
    }
    if (f.xs_.empty()) {
      // Every vertex dropped: an affine function on the whole line.
      return line(f.left_slope_, ys[0] - f.left_slope_ * xs[0]);
    }
    const I* prev = left_open ? &f.left_slope_ : nullptr;
    for (const I& s : f.inner_) {
      if (prev && !(*prev < s)) throw Error(Errc::kNonConvex, "slopes must increase");
      prev = &s;
    }
    if (right_open && prev && !(*prev < f.right_slope_)) {
      throw Error(Errc::kNonConvex, "slopes must increase");
    }
    return f;
  }

  ExtendedInt<I> lower() const {
    return left_open_ ? ExtendedInt<I>::neg_inf() : ExtendedInt<I>(xs_.front());
  }
  ExtendedInt<I> upper() const {
    return right_open_ ? ExtendedInt<I>::pos_inf() : ExtendedInt<I>(xs_.back());
  }
  bool left_open() const { return left_open_; }
  bool right_open() const { return right_open_; }
  const I& left_ray_slope() const { return left_slope_; }
  const I& right_ray_slope() const { return right_slope_; }
  const Storage& vertices() const { return xs_; }
  const Storage& values() const { return ys_; }
  const Storage& inner_slopes() const { return inner_; }

  bool is_line() const {
    return left_open_ && right_open_ && inner_.empty() && left_slope_ == right_slope_;
  }
  bool is_point() const { return !left_open_ && !right_open_ && xs_.size() == 1; }

  std::size_t piece_count() const {
    if (is_line()) return 1;
    return inner_.size() + (left_open_ ? 1 : 0) + (right_open_ ? 1 : 0);
  }

  std::vector<ExtendedInt<I>> breakpoints() const {
    std::vector<ExtendedInt<I>> out;
    if (left_open_) out.push_back(ExtendedInt<I>::neg_inf());
    if (!is_line()) out.insert(out.end(), xs_.begin(), xs_.end());
    if (right_open_) out.push_back(ExtendedInt<I>::pos_inf());
    return out;
  }

  std::vector<I> slopes() const {
    if (is_line()) return {left_slope_};
    std::vector<I> out;
    if (left_open_) out.push_back(left_slope_);
    out.insert(out.end(), inner_.begin(), inner_.end());
    if (right_open_) out.push_back(right_slope_);
    return out;
  }

  std::pair<I, I> anchor() const { return {xs_.front(), ys_.front()}; }

  bool contains(const I& z) const {
    return (left_open_ || !(z < xs_.front())) && (right_open_ || !(xs_.back() < z));
  }

  // f(z), or nullopt when z is outside the domain (f = +inf there).
  std::optional<I> operator()(const I& z) const {
    if (!contains(z)) return std::nullopt;
    if (!(xs_[0] < z)) return ys_[0] + left_slope_ * (z - xs_[0]);
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i] < z)) return ys_[i - 1] + inner_[i - 1] * (z - xs_[i - 1]);
    }
    return ys_.back() + right_slope_ * (z - xs_.back());
  }

  // Exact value at a rational point p/q.
  std::optional<Rational<I>> operator()(const Rational<I>& z) const {
    const I& p = z.num;
    const I& q = z.den;
    auto scaled = [&](std::size_t i) { return xs_[i] * q; };
    if (!left_open_ && p < scaled(0)) return std::nullopt;
    if (!right_open_ && scaled(xs_.size() - 1) < p) return std::nullopt;
    if (!(scaled(0) < p)) return Rational<I>(ys_[0] * q + left_slope_ * (p - scaled(0)), q);
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(scaled(i) < p)) {
        return Rational<I>(ys_[i - 1] * q + inner_[i - 1] * (p - scaled(i - 1)), q);
      }
    }
    const std::size_t last = xs_.size() - 1;
    return Rational<I>(ys_[last] * q + right_slope_ * (p - scaled(last)), q);
  }

  // Slope of the piece immediately right of z; nullopt at the upper end.
  std::optional<I> right_derivative(const I& z) const {
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (z < xs_[i]) return i == 0 ? left_slope_ : inner_[i - 1];
    }
    if (right_open_) return right_slope_;
    return std::nullopt;
  }

  // Slope of the piece immediately left of z; nullopt at the lower end.
  std::optional<I> left_derivative(const I& z) const {
    for (std::size_t i = xs_.size(); i > 0; --i) {
      if (xs_[i - 1] < z) return i == xs_.size() ? right_slope_ : inner_[i - 1];
    }
    if (left_open_) return left_slope_;
    return std::nullopt;
  }

  friend bool operator==(const PwlConvex& a, const PwlConvex& b) {
    return a.left_open_ == b.left_open_ && a.right_open_ == b.right_open_ &&
           a.left_slope_ == b.left_slope_ && a.right_slope_ == b.right_slope_ &&
           a.xs_ == b.xs_ && a.ys_ == b.ys_ && a.inner_ == b.inner_;
  }

 private:
  PwlConvex() = default;

  bool left_open_ = false;
  bool right_open_ = false;
  I left_slope_{0};
  I right_slope_{0};
  Storage xs_;
  Storage ys_;
  Storage inner_;
};

template <class I>
std::optional<I> evaluate(const PwlConvex<I>& f, const I& z) {
  return f(z);
}

template <class I>
std::optional<Rational<I>> evaluate(const PwlConvex<I>& f, const Rational<I>& z) {
  return f(z);
}

template <class I>
std::size_t piece_count(const PwlConvex<I>& f) {
  return f.piece_count();
}

// Smallest minimizer.
template <class I>
I argmin(const PwlConvex<I>& f) {
  const auto& xs = f.vertices();
  const auto& inner = f.inner_slopes();
  if (f.left_open() && !(f.left_ray_slope() < I(0))) {
    throw Error(Errc::kUnbounded, "no smallest minimizer: function flat or decreasing toward -inf");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i + 1 < xs.size()) {
      if (!(inner[i] < I(0))) return xs[i];
    } else if (!f.right_open() || !(f.right_ray_slope() < I(0))) {
      return xs[i];
    }
  }
  throw Error(Errc::kUnbounded, "function decreases toward +inf");
}

namespace detail {

template <class I>
PwlConvex<I> combine(const PwlConvex<I>& f, const PwlConvex<I>& g, bool negate_g) {
  using Storage = typename PwlConvex<I>::Storage;
  const auto lo = std::max(f.lower(), g.lower(), [](const auto& a, const auto& b) { return a < b; });
  const auto hi = std::min(f.upper(), g.upper(), [](const auto& a, const auto& b) { return a < b; });
  if (hi < lo) throw Error(Errc::kEmptyDomain, "domains do not intersect");

  auto in_domain = [&](const I& x) {
    return (!lo.is_finite() || !(x < lo.value())) && (!hi.is_finite() || !(hi.value() < x));
  };
  Storage xs;
  const auto& fx = f.vertices();
  const auto& gx = g.vertices();
  std::size_t i = 0, j = 0;
  while (i < fx.size() || j < gx.size()) {
    const I* next;
    if (j == gx.size() || (i < fx.size() && fx[i] < gx[j])) {
      next = &fx[i++];
    } else if (i == fx.size() || gx[j] < fx[i]) {
      next = &gx[j++];
    } else {
      next = &fx[i++];
      ++j;
    }
    if (in_domain(*next)) xs.push_back(*next);
  }
  // Both whole-line affine with different reference points: keep one.
  if (xs.size() > 1 && f.is_line() && g.is_line()) xs.resize(1);

  Storage ys;
  Storage inner;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const I gv = *g(xs[k]);
    ys.push_back(negate_g ? *f(xs[k]) - gv : *f(xs[k]) + gv);
    if (k + 1 < xs.size()) {
      const I gs = *g.right_derivative(xs[k]);
      inner.push_back(negate_g ? *f.right_derivative(xs[k]) - gs
                               : *f.right_derivative(xs[k]) + gs);
    }
  }
  const bool left_open = lo.is_neg_inf();
  const bool right_open = hi.is_pos_inf();
  I ls = left_open ? (negate_g ? f.left_ray_slope() - g.left_ray_slope()
                               : f.left_ray_slope() + g.left_ray_slope())
                   : I(0);
  I rs = right_open ? (negate_g ? f.right_ray_slope() - g.right_ray_slope()
                                : f.right_ray_slope() + g.right_ray_slope())
                    : I(0);
  return PwlConvex<I>::from_parts(left_open, std::move(ls), std::move(xs), std::move(ys),
                                  std::move(inner), right_open, std::move(rs));
}

// Index of the vertex splitting f's pieces into slopes < sigma (left) and
// slopes >= sigma (right). The caller guarantees it is finite.
template <class I>
std::size_t junction(const PwlConvex<I>& f, const I& sigma) {
  const auto& inner = f.inner_slopes();
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (!(inner[i] < sigma)) return i;
  }
  return inner.size();
}

}  // namespace detail

template <class I>
PwlConvex<I> add(const PwlConvex<I>& f, const PwlConvex<I>& g) {
  return detail::combine(f, g, false);
}

// f + c.
template <class I>
PwlConvex<I> add_constant(const PwlConvex<I>& f, const I& c) {
  auto ys = f.values();
  for (auto& y : ys) y = y + c;
  return PwlConvex<I>::from_parts(f.left_open(), f.left_ray_slope(), f.vertices(), std::move(ys), f.inner_slopes(),
                                  f.right_open(), f.right_ray_slope());
}

// f - g on the intersection of the domains. Throws kNonConvex when the
// difference is not convex.
template <class I>
PwlConvex<I> difference(const PwlConvex<I>& f, const PwlConvex<I>& g) {
  return detail::combine(f, g, true);
}

// z -> f(sign * z + offset) for sign in {+1, -1}.
template <class I>
PwlConvex<I> compose_affine(const PwlConvex<I>& f, int sign, const I& offset) {
  using Storage = typename PwlConvex<I>::Storage;
  if (sign != 1 && sign != -1) throw Error(Errc::kUnsupported, "affine sign must be +1 or -1");
  const auto& xs = f.vertices();
  const auto& ys = f.values();
  const auto& inner = f.inner_slopes();
  Storage nx, ny, ni;
  if (sign == 1) {
    for (const I& x : xs) nx.push_back(x - offset);
    ny = ys;
    ni = inner;
    return PwlConvex<I>::from_parts(f.left_open(), f.left_ray_slope(), std::move(nx),
                                    std::move(ny), std::move(ni), f.right_open(),
                                    f.right_ray_slope());
  }
  const std::size_t k = xs.size();
  for (std::size_t i = 0; i < k; ++i) {
    nx.push_back(offset - xs[k - 1 - i]);
    ny.push_back(ys[k - 1 - i]);
  }
  for (std::size_t i = 0; i + 1 < k; ++i) ni.push_back(-inner[k - 2 - i]);
  return PwlConvex<I>::from_parts(f.right_open(), -f.right_ray_slope(), std::move(nx),
                                  std::move(ny), std::move(ni), f.left_open(),
                                  -f.left_ray_slope());
}

// Infimal convolution t -> min_{x1 + x2 = t} f(x1) + g(x2).
//
// Both functions are split at the vertex where their slopes cross a common
// value sigma (sigma = 0 when possible, so the split points are the smallest
// minimizers). The result is anchored at the sum of the split points and
// grows outward: to the left by repeatedly taking the steeper of the two
// next pieces, to the right by taking the flatter. A ray ends the walk on its
// side and absorbs whatever the other function still has there.
template <class I>
PwlConvex<I> inf_convolve2(const PwlConvex<I>& f, const PwlConvex<I>& g) {
  using Storage = typename PwlConvex<I>::Storage;

  // Steepest left ray and flattest right ray bound the slope range.
  std::optional<I> left_ray, right_ray;
  for (const auto* h : {&f, &g}) {
    if (h->left_open() && (!left_ray || *left_ray < h->left_ray_slope())) {
      left_ray = h->left_ray_slope();
    }
    if (h->right_open() && (!right_ray || h->right_ray_slope() < *right_ray)) {
      right_ray = h->right_ray_slope();
    }
  }
  if (left_ray && right_ray && *right_ray < *left_ray) {
    throw Error(Errc::kUnbounded, "infimal convolution is -inf everywhere");
  }
  if (left_ray && right_ray && *left_ray == *right_ray) {
    // Affine on the whole line: slope s plus the minima of f - s*x and g - s*x,
    // both attained at a vertex.
    const I& s = *left_ray;
    auto shifted_min = [&](const PwlConvex<I>& h) {
      const auto& xs = h.vertices();
      const auto& ys = h.values();
      I best = ys[0] - s * xs[0];
      for (std::size_t i = 1; i < xs.size(); ++i) best = std::min(best, ys[i] - s * xs[i]);
      return best;
    };
    return PwlConvex<I>::line(s, shifted_min(f) + shifted_min(g));
  }

  I sigma(0);
  if (left_ray && !(*left_ray < sigma)) sigma = *left_ray + I(1);
  if (right_ray && *right_ray < sigma) sigma = *right_ray;

  const std::size_t jf = detail::junction(f, sigma);
  const std::size_t jg = detail::junction(g, sigma);
  const I x0 = f.vertices()[jf] + g.vertices()[jg];
  const I y0 = f.values()[jf] + g.values()[jg];

  // Walk one side. For the left side `step` is -1 and the piece with the
  // larger slope goes first; for the right side the smaller one does.
  struct Side {
    Storage xs, ys, slopes;
    bool open = false;
    I ray{0};
  };
  auto walk = [&](bool leftward) {
    Side side;
    std::size_t idx[2] = {jf, jg};
    const PwlConvex<I>* fn[2] = {&f, &g};
    I cx = x0, cy = y0;
    for (;;) {
      // Next piece of each function on this side: slope, length (nullopt = ray).
      std::optional<I> slope[2];
      std::optional<I> length[2];
      for (int h = 0; h < 2; ++h) {
        const auto& xs = fn[h]->vertices();
        const auto& inner = fn[h]->inner_slopes();
        const std::size_t i = idx[h];
        if (leftward) {
          if (i > 0) {
            slope[h] = inner[i - 1];
            length[h] = xs[i] - xs[i - 1];
          } else if (fn[h]->left_open()) {
            slope[h] = fn[h]->left_ray_slope();
          }
        } else {
          if (i + 1 < xs.size()) {
            slope[h] = inner[i];
            length[h] = xs[i + 1] - xs[i];
          } else if (fn[h]->right_open()) {
            slope[h] = fn[h]->right_ray_slope();
          }
        }
      }
      int pick;
      if (!slope[0] && !slope[1]) break;
      if (!slope[1]) {
        pick = 0;
      } else if (!slope[0]) {
        pick = 1;
      } else if (leftward) {
        pick = *slope[1] < *slope[0] ? 0 : 1;
      } else {
        pick = *slope[0] < *slope[1] ? 0 : 1;
      }
      if (!length[pick]) {
        side.open = true;
        side.ray = *slope[pick];
        break;
      }
      const I& len = *length[pick];
      if (leftward) {
        cx = cx - len;
        cy = cy - *slope[pick] * len;
        --idx[pick];
      } else {
        cx = cx + len;
        cy = cy + *slope[pick] * len;
        ++idx[pick];
      }
      side.xs.push_back(cx);
      side.ys.push_back(cy);
      side.slopes.push_back(*slope[pick]);
    }
    return side;
  };

  Side left = walk(true);
  Side right = walk(false);

  Storage xs, ys, inner;
  for (std::size_t i = left.xs.size(); i > 0; --i) {
    xs.push_back(std::move(left.xs[i - 1]));
    ys.push_back(std::move(left.ys[i - 1]));
    inner.push_back(std::move(left.slopes[i - 1]));
  }
  xs.push_back(x0);
  ys.push_back(y0);
  for (std::size_t i = 0; i < right.xs.size(); ++i) {
    xs.push_back(std::move(right.xs[i]));
    ys.push_back(std::move(right.ys[i]));
    inner.push_back(std::move(right.slopes[i]));
  }
  return PwlConvex<I>::from_parts(left.open, std::move(left.ray), std::move(xs), std::move(ys),
                                  std::move(inner), right.open, std::move(right.ray));
}

namespace detail {

// Balanced pairwise reduction of an interpolation: each pass halves the
// number of functions.
template <class I, class Vec>
PwlConvex<I> reduce_pairwise(Vec& fs) {
  while (fs.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < fs.size(); i += 2) {
      if (i + 1 < fs.size()) {
        fs[out++] = inf_convolve2(fs[i], fs[i + 1]);
      } else {
        fs[out++] = std::move(fs[i]);
      }
    }
    fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(out), fs.end());
  }
  return std::move(fs.front());
}

}  // namespace detail

// t -> min over sum_i signs[i] * x_i = t of sum_i fs[i](x_i).
template <class I>
PwlConvex<I> scaled_interpolation(std::span<const PwlConvex<I>> fs, std::span<const int> signs) {
  if (fs.empty() || fs.size() != signs.size()) {
    throw Error(Errc::kUnsupported, "scaled interpolation needs one sign per function");
  }
  boost::container::small_vector<PwlConvex<I>, 4> work;
  work.reserve(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    work.push_back(signs[i] == 1 ? fs[i] : compose_affine(fs[i], signs[i], I(0)));
  }
  return detail::reduce_pairwise<I>(work);
}

template <class J, class I>
PwlConvex<J> pwl_cast(const PwlConvex<I>& f) {
  if constexpr (std::is_same_v<I, J>) {
    return f;
  } else {
    using Storage = typename PwlConvex<J>::Storage;
    auto conv = [](const I& v) { return int_from<J>(to_big(v)); };
    Storage xs, ys, inner;
    for (const auto& v : f.vertices()) xs.push_back(conv(v));
    for (const auto& v : f.values()) ys.push_back(conv(v));
    for (const auto& v : f.inner_slopes()) inner.push_back(conv(v));
    return PwlConvex<J>::from_parts(f.left_open(), conv(f.left_ray_slope()), std::move(xs),
                                    std::move(ys), std::move(inner), f.right_open(),
                                    conv(f.right_ray_slope()));
  }
}

}  // namespace flowbp
