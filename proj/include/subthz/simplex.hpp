// SPDX-License-Identifier: Apache-2.0
//
// Derivative-free Nelder-Mead simplex minimizer.

#ifndef SUBTHZ_SIMPLEX_HPP
#define SUBTHZ_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "subthz/errors.hpp"

namespace subthz {

struct SimplexOptions {
  double tolerance = 1e-10;     // stop when the simplex diameter (inf-norm) falls below this
  int max_iter = 2000;
  double initial_step = 0.05;   // relative step for nonzero start components
  double zero_step = 0.00025;   // absolute step for zero start components
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // false: max_iter reached before the diameter criterion
};

/// Minimizes `objective(const std::vector<double>&) -> double` from `start`.
///
/// Standard Nelder-Mead moves (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values inside the run are treated as
/// +inf, which keeps the simplex out of invalid parameter regions.
template <class Objective>
SimplexResult minimize_simplex(Objective&& objective, std::vector<double> start, const SimplexOptions& opt = {}) {
  const std::size_t n = start.size();
  if (n == 0) throw ConfigError("minimize_simplex: empty start point");
  SimplexResult res;
  auto eval = [&](const std::vector<double>& p) {
    ++res.evaluations;
    const double v = objective(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  const double f_start = objective(start);
  ++res.evaluations;
  if (!std::isfinite(f_start)) throw DomainError("minimize_simplex: objective is not finite at the start point");

  std::vector<std::vector<double>> v(n + 1, start);
  std::vector<double> f(n + 1, f_start);
  for (std::size_t i = 0; i < n; ++i) {
    v[i + 1][i] += start[i] != 0.0 ? opt.initial_step * start[i] : opt.zero_step;
    f[i + 1] = eval(v[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto blend = [n](const std::vector<double>& a, const std::vector<double>& b, double t, std::vector<double>& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + t * (b[k] - a[k]);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    {
      std::vector<std::vector<double>> vs(n + 1);
      std::vector<double> fs(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        vs[i] = std::move(v[order[i]]);
        fs[i] = f[order[i]];
      }
      v.swap(vs);
      f.swap(fs);
    }

    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(v[i][k] - v[0][k]));
    if (diameter < opt.tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opt.max_iter) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += v[i][k];
    for (double& c : centroid) c /= static_cast<double>(n);

    blend(centroid, v[n], -1.0, trial);  // reflection
    const double fr = eval(trial);
    if (fr < f[0]) {
      blend(centroid, v[n], -2.0, trial2);  // expansion
      const double fe = eval(trial2);
      if (fe < fr) {
        v[n] = trial2;
        f[n] = fe;
      } else {
        v[n] = trial;
        f[n] = fr;
      }
      continue;
    }
    if (fr < f[n - 1]) {
      v[n] = trial;
      f[n] = fr;
      continue;
    }
    if (fr < f[n]) {
      blend(centroid, trial, 0.5, trial2);  // outside contraction
      const double fc = eval(trial2);
      if (fc <= fr) {
        v[n] = trial2;
        f[n] = fc;
        continue;
      }
    } else {
      blend(centroid, v[n], 0.5, trial2);  // inside contraction
      const double fc = eval(trial2);
      if (fc < f[n]) {
        v[n] = trial2;
        f[n] = fc;
        continue;
      }
    }
    for (std::size_t i = 1; i <= n; ++i) {  // shrink toward the best vertex
      blend(v[0], v[i], 0.5, v[i]);
      f[i] = eval(v[i]);
    }
  }

  res.x = v[0];
  res.value = f[0];
  return res;
}

/// Repeats minimize_simplex from its own answer (fresh simplex each time)
/// until a pass improves the objective by less than `opt.tolerance` or
/// `max_passes` is reached. Recovers from premature collapse of the simplex.
template <class Objective>
SimplexResult minimize_simplex_restarted(Objective&& objective, std::vector<double> start, const SimplexOptions& opt = {},
                                         int max_passes = 4) {
  SimplexResult best = minimize_simplex(objective, std::move(start), opt);
  for (int pass = 1; pass < max_passes; ++pass) {
    SimplexResult next = minimize_simplex(objective, best.x, opt);
    next.iterations += best.iterations;
    next.evaluations += best.evaluations;
    const double gain = best.value - next.value;
    if (next.value <= best.value) {
      best = std::move(next);
    } else {
      best.iterations = next.iterations;
      best.evaluations = next.evaluations;
    }
    if (!(gain >= opt.tolerance)) break;
  }
  return best;
}

}  // namespace subthz

#endif  // SUBTHZ_SIMPLEX_HPP
