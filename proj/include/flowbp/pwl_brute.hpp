#pragma once

// Brute-force minimization over rational grids, independent of the stitch
// and reduction code in pwl.hpp. Used by the tests and by `flowbp selftest`.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "flowbp/pwl.hpp"
#include "flowbp/random.hpp"

namespace flowbp::brute {

using C = CheckedInt;
using F = PwlConvex<C>;
using Q = Rational<C>;

inline std::vector<Q> grid(Int lo, Int hi, Int den) {
  std::vector<Q> out;
  for (Int p = lo * den; p <= hi * den; ++p) out.emplace_back(C(p), C(den));
  return out;
}

inline std::optional<Q> min_opt(std::optional<Q> a, std::optional<Q> b) {
  if (!a) return b;
  if (!b) return a;
  return *b < *a ? b : a;
}

// min over x in `xs` of f(x) + g(t - x).
inline std::optional<Q> convolve(const F& f, const F& g, const Q& t, const std::vector<Q>& xs) {
  std::optional<Q> best;
  for (const Q& x : xs) {
    auto a = f(x);
    if (!a) continue;
    auto b = g(t - x);
    if (!b) continue;
    best = min_opt(best, *a + *b);
  }
  return best;
}

// min over sum_i s_i x_i = t of sum_i f_i(x_i). All but one variable range
// over `xs` and the remaining one is solved for; every choice of the solved
// variable is tried, so `xs` only has to contain the vertex coordinates.
inline std::optional<Q> scaled(std::span<const F> fs, std::span<const int> signs, const Q& t,
                               const std::vector<Q>& xs) {
  const std::size_t k = fs.size();
  std::optional<Q> best;
  std::vector<std::size_t> idx(k, 0);
  for (std::size_t free = 0; free < k; ++free) {
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      Q rest = t;
      std::optional<Q> total = Q(C(0));
      for (std::size_t i = 0; i < k; ++i) {
        if (i == free) continue;
        const Q& x = xs[idx[i]];
        auto v = fs[i](x);
        if (!v) {
          total.reset();
          break;
        }
        *total = *total + *v;
        rest = rest - Q(C(signs[i])) * x;
      }
      if (total) {
        auto v = fs[free](Q(C(signs[free])) * rest);
        if (v) best = min_opt(best, *total + *v);
      }
      std::size_t i = 0;
      for (; i < k; ++i) {
        if (i == free) continue;
        if (++idx[i] < xs.size()) break;
        idx[i] = 0;
      }
      if (i == k) break;
    }
  }
  return best;
}

// Random convex function with 1 to 4 finite vertices in [lo, hi], slopes in
// [smin, smax] and a ray on each side with probability ray_num / ray_den.
inline F random_pwl(Rng& rng, Int lo, Int hi, Int smin, Int smax, std::uint64_t ray_num,
                    std::uint64_t ray_den) {
  const Int k = rng.between(1, 4);
  std::vector<Int> pts;
  while (static_cast<Int>(pts.size()) < k) {
    const Int x = rng.between(lo, hi);
    if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  const bool left = rng.chance(ray_num, ray_den);
  const bool right = rng.chance(ray_num, ray_den);
  std::vector<ExtendedInt<C>> bps;
  if (left) bps.push_back(ExtendedInt<C>::neg_inf());
  for (Int x : pts) bps.emplace_back(C(x));
  if (right) bps.push_back(ExtendedInt<C>::pos_inf());
  std::vector<Int> s;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) s.push_back(rng.between(smin, smax));
  std::sort(s.begin(), s.end());
  std::vector<C> slopes(s.begin(), s.end());
  return F::construct(bps, slopes, C(pts.front()), C(rng.between(-10, 10)));
}

}  // namespace flowbp::brute
