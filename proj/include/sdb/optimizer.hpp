#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace sdb {

/// Box constraints, lower < upper elementwise.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  void validate() const;
  bool contains(std::span<const double> x) const;
  void clamp(std::span<double> x) const;
};

struct SimplexConfig {
  std::size_t max_iterations = 20000;
  /// Absolute spread of objective values across the simplex.
  double f_tolerance = 1e-9;
  /// Largest vertex distance from the best vertex, as a fraction of each
  /// coordinate's bound range.
  double x_tolerance = 1e-9;
  /// Additional runs restarted from the best point with a fresh simplex.
  std::size_t restarts = 2;
  /// Initial simplex edge as a fraction of each bound range.
  double initial_scale = 0.1;
  std::uint64_t rng_seed = 1;
  /// Dimension-dependent expansion, contraction and shrink coefficients
  /// (1 + 2/n, 0.75 - 1/(2n), 1 - 1/n); false selects 2, 0.5, 0.5.
  bool adaptive = true;
  /// Search positive coordinates whose range spans two or more decades in
  /// log space.
  bool log_scaling = true;

  void validate() const;
};

struct MinimizeResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using Rng = std::mt19937_64;

/// N+1 vertices: x0 itself, then x0 displaced along each coordinate by a
/// random signed step of magnitude in [scale/2, scale] of the bound range
/// (at least a 1e-7 fraction), reflected back inside the box when needed.
std::vector<std::vector<double>> random_initial_simplex(
    std::span<const double> x0, const Bounds &b, double scale, Rng &rng);

/// Nelder-Mead with coordinate clamping. Non-finite objective values during
/// the search are treated as +inf; a non-finite value at x0 throws
/// NumericalError.
MinimizeResult minimize(const Objective &f, std::span<const double> x0,
                        const Bounds &b, const SimplexConfig &cfg);

/// Runs minimize from each start and keeps the lowest result. `iterations`
/// and `evaluations` are summed over all starts. Starts are independent and
/// run on up to `jobs` threads; results do not depend on `jobs`.
MinimizeResult multi_start_minimize(const Objective &f,
                                    std::span<const std::vector<double>> starts,
                                    const Bounds &b, const SimplexConfig &cfg,
                                    std::size_t jobs = 1);

/// Starting depths (m) used when a cold-started region has no depth prior.
inline constexpr std::array<double, 17> kDepthLadder = {
    0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0,
    8.0, 10.0, 12.5, 15.0, 17.5, 20.0, 25.0, 30.0};

} // namespace sdb
