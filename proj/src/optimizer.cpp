#include "sdb/optimizer.hpp"

#include "sdb/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <string>

namespace sdb {

void Bounds::validate() const {
  if (lower.size() != upper.size())
    throw UsageError("bounds: lower and upper differ in length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw UsageError("bounds: lower >= upper at coordinate " +
                       std::to_string(i));
}

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != lower.size())
    return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i]))
      return false;
  return true;
}

void Bounds::clamp(std::span<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], lower[i], upper[i]);
}

void SimplexConfig::validate() const {
  if (max_iterations == 0 || !(f_tolerance > 0.0) || !(x_tolerance > 0.0) ||
      !(initial_scale >= 0.0) || initial_scale > 0.5)
    throw UsageError("simplex configuration: iterations and tolerances must "
                     "be positive and the initial scale within [0, 0.5]");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinStep = 1e-7;

// The search runs in unit-box coordinates so that one step size suits
// parameters whose ranges differ by orders of magnitude. Coordinates whose
// positive range spans two decades or more are mapped logarithmically.
struct UnitBox {
  const Bounds &b;
  std::vector<char> log_axis;

  UnitBox(const Bounds &bounds, bool log_scaling) : b(bounds) {
    log_axis.resize(b.size(), 0);
    if (log_scaling)
      for (std::size_t i = 0; i < b.size(); ++i)
        log_axis[i] = b.lower[i] > 0.0 && b.upper[i] >= 100.0 * b.lower[i];
  }
  void to_unit(std::span<const double> x, std::span<double> u) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      u[i] = log_axis[i]
                 ? std::log(x[i] / b.lower[i]) / std::log(b.upper[i] / b.lower[i])
                 : (x[i] - b.lower[i]) / (b.upper[i] - b.lower[i]);
  }
  void from_unit(std::span<const double> u, std::span<double> x) const {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double v =
          log_axis[i]
              ? b.lower[i] * std::exp(u[i] * std::log(b.upper[i] / b.lower[i]))
              : b.lower[i] + u[i] * (b.upper[i] - b.lower[i]);
      x[i] = std::clamp(v, b.lower[i], b.upper[i]);
    }
  }
};

std::vector<std::vector<double>> unit_simplex(std::span<const double> u0,
                                              double scale, Rng &rng) {
  const std::size_t n = u0.size();
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<std::vector<double>> s(n + 1,
                                     std::vector<double>(u0.begin(), u0.end()));
  for (std::size_t i = 0; i < n; ++i) {
    double step = std::max(scale * mag(rng), kMinStep);
    if (sign(rng))
      step = -step;
    double v = u0[i] + step;
    if (v < 0.0 || v > 1.0)
      v = u0[i] - step;
    s[i + 1][i] = std::clamp(v, 0.0, 1.0);
    if (s[i + 1][i] == u0[i]) // only when the box is narrower than the step
      s[i + 1][i] = u0[i] > 0.5 ? u0[i] - kMinStep : u0[i] + kMinStep;
  }
  return s;
}

struct Coefficients {
  double expansion, contraction, shrink;
};

// Reflection is always 1. The adaptive set scales with dimension and equals
// the standard one (2, 0.5, 0.5) for n = 2.
Coefficients coefficients(std::size_t n, bool adaptive) {
  if (!adaptive || n < 2)
    return {2.0, 0.5, 0.5};
  const double d = static_cast<double>(n);
  return {1.0 + 2.0 / d, 0.75 - 0.5 / d, 1.0 - 1.0 / d};
}

struct NelderMead {
  const Objective &f;
  const UnitBox &box;
  const SimplexConfig &cfg;
  std::size_t evaluations = 0;
  std::vector<double> scratch;

  double eval(std::span<const double> u) {
    scratch.resize(u.size());
    box.from_unit(u, scratch);
    ++evaluations;
    const double v = f(scratch);
    return std::isfinite(v) ? v : kInf;
  }

  // Returns iterations used; simplex[0] holds the best vertex on exit.
  std::size_t run(std::vector<std::vector<double>> &simplex,
                  std::vector<double> &fv, std::size_t budget) {
    const std::size_t n = simplex.size() - 1;
    const Coefficients c = coefficients(n, cfg.adaptive);
    std::vector<double> sum(n), centroid(n), xr(n), xe(n), xc(n);
    auto clamp01 = [](std::vector<double> &v) {
      for (auto &x : v)
        x = std::clamp(x, 0.0, 1.0);
    };
    auto full_sort = [&] {
      std::vector<std::size_t> order(n + 1);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      std::vector<std::vector<double>> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = std::move(simplex[order[i]]);
        f2[i] = fv[order[i]];
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    };
    auto resum = [&] {
      std::fill(sum.begin(), sum.end(), 0.0);
      for (const auto &v : simplex)
        for (std::size_t d = 0; d < n; ++d)
          sum[d] += v[d];
    };
    // Replaces the worst vertex and moves it to its sorted position, after
    // any vertex with an equal value.
    auto replace_worst = [&](const std::vector<double> &x, double f) {
      for (std::size_t d = 0; d < n; ++d)
        sum[d] += x[d] - simplex[n][d];
      std::copy(x.begin(), x.end(), simplex[n].begin());
      fv[n] = f;
      std::size_t i = n;
      while (i > 0 && fv[i - 1] > f) {
        std::swap(simplex[i], simplex[i - 1]);
        std::swap(fv[i], fv[i - 1]);
        --i;
      }
    };

    std::size_t it = 0;
    full_sort();
    resum();
    while (it < budget) {
      if (converged(simplex, fv, it))
        break;
      ++it;
      if (it % (4 * n + 1) == 0)
        resum(); // bound the drift of the running sum
      const auto &worst = simplex[n];
      for (std::size_t d = 0; d < n; ++d)
        centroid[d] = (sum[d] - worst[d]) / static_cast<double>(n);

      for (std::size_t d = 0; d < n; ++d)
        xr[d] = centroid[d] + (centroid[d] - worst[d]);
      clamp01(xr);
      const double fr = eval(xr);

      if (fr < fv[0]) {
        for (std::size_t d = 0; d < n; ++d)
          xe[d] = centroid[d] + c.expansion * (centroid[d] - worst[d]);
        clamp01(xe);
        const double fe = eval(xe);
        if (fe < fr)
          replace_worst(xe, fe);
        else
          replace_worst(xr, fr);
      } else if (fr < fv[n - 1]) {
        replace_worst(xr, fr);
      } else {
        const bool outside = fr < fv[n];
        for (std::size_t d = 0; d < n; ++d)
          xc[d] = outside ? centroid[d] + c.contraction * (xr[d] - centroid[d])
                          : centroid[d] + c.contraction * (worst[d] - centroid[d]);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[n])) {
          replace_worst(xc, fc);
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t d = 0; d < n; ++d)
              simplex[i][d] = simplex[0][d] + c.shrink * (simplex[i][d] - simplex[0][d]);
            fv[i] = eval(simplex[i]);
          }
          full_sort();
          resum();
        }
      }
    }
    return it;
  }

  // The vertex spread is O(n^2), so it is checked every few iterations.
  bool converged(const std::vector<std::vector<double>> &simplex,
                 const std::vector<double> &fv, std::size_t it) const {
    const std::size_t n = simplex.size() - 1;
    if (std::isfinite(fv[n]) && fv[n] - fv[0] < cfg.f_tolerance)
      return true;
    if (it % 8 != 0)
      return false;
    double spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d)
        spread = std::max(spread, std::abs(simplex[i][d] - simplex[0][d]));
    return spread < cfg.x_tolerance;
  }
};

} // namespace

std::vector<std::vector<double>> random_initial_simplex(
    std::span<const double> x0, const Bounds &b, double scale, Rng &rng) {
  b.validate();
  if (!b.contains(x0))
    throw UsageError("initial point lies outside the bounds");
  UnitBox box{b, false};
  std::vector<double> u0(x0.size());
  box.to_unit(x0, u0);
  auto unit = unit_simplex(u0, scale, rng);
  std::vector<std::vector<double>> out;
  out.reserve(unit.size());
  for (const auto &u : unit) {
    std::vector<double> x(u.size());
    box.from_unit(u, x);
    out.push_back(std::move(x));
  }
  out.front().assign(x0.begin(), x0.end());
  return out;
}

MinimizeResult minimize(const Objective &f, std::span<const double> x0,
                        const Bounds &b, const SimplexConfig &cfg) {
  b.validate();
  cfg.validate();
  if (!b.contains(x0))
    throw UsageError("initial point lies outside the bounds");

  MinimizeResult best;
  best.x.assign(x0.begin(), x0.end());
  best.f = f(best.x);
  best.evaluations = 1;
  if (!std::isfinite(best.f))
    throw NumericalError("objective is not finite at the initial point");

  UnitBox box{b, cfg.log_scaling};
  NelderMead nm{f, box, cfg, 0, {}};
  Rng rng(cfg.rng_seed);
  std::vector<double> u_best(x0.size());
  box.to_unit(best.x, u_best);
  const std::size_t n = x0.size();

  for (std::size_t round = 0; round <= cfg.restarts; ++round) {
    if (best.iterations >= cfg.max_iterations)
      break;
    auto simplex = unit_simplex(u_best, cfg.initial_scale, rng);
    std::vector<double> fv(n + 1);
    fv[0] = best.f;
    for (std::size_t i = 1; i <= n; ++i)
      fv[i] = nm.eval(simplex[i]);
    best.iterations +=
        nm.run(simplex, fv, cfg.max_iterations - best.iterations);
    if (fv[0] < best.f) {
      best.f = fv[0];
      u_best = simplex[0];
      box.from_unit(u_best, best.x);
    } else if (round > 0) {
      break; // restart made no progress
    }
  }
  best.evaluations += nm.evaluations;
  return best;
}

MinimizeResult multi_start_minimize(const Objective &f,
                                    std::span<const std::vector<double>> starts,
                                    const Bounds &b, const SimplexConfig &cfg,
                                    std::size_t jobs) {
  if (starts.empty())
    throw UsageError("multi-start minimisation needs at least one start");
  std::vector<MinimizeResult> results(starts.size());
  auto run_one = [&](std::size_t i) {
    SimplexConfig c = cfg;
    c.rng_seed = cfg.rng_seed + i;
    results[i] = minimize(f, starts[i], b, c);
  };
  if (jobs <= 1 || starts.size() == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i)
      run_one(i);
  } else {
    for (std::size_t first = 0; first < starts.size(); first += jobs) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = first; i < std::min(first + jobs, starts.size()); ++i)
        batch.push_back(std::async(std::launch::async, run_one, i));
      for (auto &fut : batch)
        fut.get();
    }
  }
  MinimizeResult best = results.front();
  std::size_t iterations = 0, evaluations = 0;
  for (const auto &r : results) {
    iterations += r.iterations;
    evaluations += r.evaluations;
    if (r.f < best.f)
      best = r;
  }
  best.iterations = iterations;
  best.evaluations = evaluations;
  return best;
}

} // namespace sdb
