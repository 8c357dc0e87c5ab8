#include "sdb/report.hpp"

#include "sdb/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include <json.hpp>

namespace sdb {

namespace {

bool within(double d, double limit) { return d <= limit * (1.0 + 1e-9); }

} // namespace

RegressionReport regression_report(std::span<const double> model,
                                   std::span<const double> measured) {
  if (model.size() != measured.size())
    throw UsageError("model and measured depths differ in length");
  if (model.empty())
    throw UsageError("no soundings overlap the model depths");
  RegressionReport r;
  const double n = static_cast<double>(model.size());
  r.n = model.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < r.n; ++i) {
    mx += measured[i] / n;
    my += model[i] / n;
  }
  double sxx = 0, syy = 0, sxy = 0, abs_sum = 0, rel_sum = 0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double dx = measured[i] - mx, dy = model[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
    const double d = std::abs(model[i] - measured[i]);
    const double rel = 100.0 * d / measured[i];
    abs_sum += d;
    rel_sum += rel;
    for (std::size_t k = 0; k < 6; ++k) {
      if (within(d, RegressionReport::kAbsoluteRows[k]))
        r.within_m[k] += 100.0 / n;
      if (within(rel, RegressionReport::kRelativeRows[k]))
        r.within_pct[k] += 100.0 / n;
    }
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  r.slope = sxx > 0 ? sxy / sxx : nan;
  r.intercept = sxx > 0 ? my - r.slope * mx : nan;
  if (sxx > 0 && syy > 0)
    r.r2 = sxy * sxy / (sxx * syy);
  else
    r.r2 = sxx > 0 && syy == 0 && sxy == 0 ? 0.0 : nan;
  r.mae = abs_sum / n;
  r.mean_relative = rel_sum / n;
  return r;
}

RegressionReport regression_report(std::span<const double> model,
                                   std::size_t width, std::size_t height,
                                   const GeoTransform &gt,
                                   const SoundingSet &soundings) {
  if (model.size() != width * height)
    throw UsageError("model raster does not match its dimensions");
  std::vector<double> m, s;
  for (const auto &p : soundings.points) {
    const auto px = pixel_of(gt, width, height, p.x, p.y);
    if (!px || !std::isfinite(model[*px]))
      continue;
    m.push_back(model[*px]);
    s.push_back(p.depth);
  }
  return regression_report(m, s);
}

std::string RegressionReport::to_text() const {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "N             %8zu\n", n);
  out += line;
  std::snprintf(line, sizeof line, "R^2           %8.4f\n", r2);
  out += line;
  std::snprintf(line, sizeof line, "regression    y = %.4f x %+.4f\n", slope,
                intercept);
  out += line;
  std::snprintf(line, sizeof line, "MAE (m)       %8.4f\n", mae);
  out += line;
  std::snprintf(line, sizeof line, "mean rel. (%%) %8.4f\n\n", mean_relative);
  out += line;
  out += "within (m)   points (%)   within (%)   points (%)\n";
  for (std::size_t k = 0; k < 6; ++k) {
    std::snprintf(line, sizeof line, "%10.2f   %10.2f   %10.0f   %10.2f\n",
                  kAbsoluteRows[k], within_m[k], kRelativeRows[k],
                  within_pct[k]);
    out += line;
  }
  return out;
}

std::string RegressionReport::to_json() const {
  nlohmann::json j{{"n", n},
                   {"r2", r2},
                   {"slope", slope},
                   {"intercept", intercept},
                   {"mae_m", mae},
                   {"mean_relative_pct", mean_relative}};
  for (std::size_t k = 0; k < 6; ++k) {
    j["within_m"].push_back({{"limit", kAbsoluteRows[k]}, {"pct", within_m[k]}});
    j["within_pct"].push_back(
        {{"limit", kRelativeRows[k]}, {"pct", within_pct[k]}});
  }
  return j.dump(2);
}

} // namespace sdb
