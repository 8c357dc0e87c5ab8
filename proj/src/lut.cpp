#include "sdb/scene_stack.hpp"

#include "sdb/error.hpp"

#include <algorithm>
#include <limits>

namespace sdb {

PixelResult center_result(const ModelFit &fit, std::size_t slot) {
  if (slot >= fit.dims.n_pixels)
    throw UsageError("centre slot outside the region");
  PixelResult r;
  r.P = fit.P;
  r.G = fit.G;
  r.X = fit.X;
  r.delta = fit.delta;
  r.H = fit.H[slot];
  const auto nb = fit.dims.n_bottom;
  r.B.assign(fit.B.begin() + slot * nb, fit.B.begin() + (slot + 1) * nb);
  r.q.assign(fit.q.begin() + slot * nb, fit.q.begin() + (slot + 1) * nb);
  r.e_photic = fit.e_photic;
  r.iterations = fit.iterations;
  r.source = fit.source;
  return r;
}

DynamicLut::DynamicLut(std::size_t n_scenes, std::size_t n_bands,
                       double match_threshold)
    : n_scenes_(n_scenes), n_bands_(n_bands),
      match_threshold_(match_threshold),
      insertion_threshold_(initial_threshold(n_scenes)) {
  if (n_scenes == 0 || n_bands == 0)
    throw UsageError("LUT needs at least one scene and one band");
  if (!(match_threshold >= 0.0))
    throw UsageError("LUT match threshold must be nonnegative");
}

double DynamicLut::initial_threshold(std::size_t n_scenes) {
  return std::max(1.5, 1.125 * static_cast<double>(n_scenes));
}

double DynamicLut::threshold_cap(std::size_t n_scenes) {
  return 2.5 + 2.5 * static_cast<double>(n_scenes);
}

namespace {

std::vector<double> region_key(const Region &region) {
  std::vector<double> key;
  for (std::size_t j = 0; j < region.measured.n_scenes; ++j) {
    auto s = region.center_spectrum(j);
    key.insert(key.end(), s.begin(), s.end());
  }
  return key;
}

} // namespace

std::optional<DynamicLut::Match> DynamicLut::query(const Region &region) const {
  return query(region_key(region), region.tides);
}

std::optional<DynamicLut::Match>
DynamicLut::query(std::span<const double> key,
                  std::span<const double> tides) const {
  if (key.size() != n_scenes_ * n_bands_ || tides.size() != n_scenes_)
    throw UsageError("LUT query has the wrong shape");
  const Entry *best = nullptr;
  double best_angle = std::numeric_limits<double>::infinity();
  for (const auto &e : entries_) {
    double total = 0.0;
    for (std::size_t j = 0; j < n_scenes_; ++j)
      total += spectral_angle_or_max(key.subspan(j * n_bands_, n_bands_),
                                     std::span<const double>(e.key).subspan(
                                         j * n_bands_, n_bands_));
    const double angle = total / static_cast<double>(n_scenes_);
    if (angle < best_angle) {
      best_angle = angle;
      best = &e;
    }
  }
  if (!best || !(best_angle < match_threshold_))
    return std::nullopt;
  Match m{best->result, best_angle, best->timestamp};
  double shift = 0.0;
  for (std::size_t j = 0; j < n_scenes_; ++j)
    shift += tides[j] - best->tides[j];
  m.result.H += shift / static_cast<double>(n_scenes_);
  m.result.source = FitSource::Lut;
  m.result.iterations = 0;
  return m;
}

bool DynamicLut::insert(const Region &region, const PixelResult &result) {
  return insert(region_key(region), region.tides, result);
}

bool DynamicLut::insert(std::span<const double> key,
                        std::span<const double> tides,
                        const PixelResult &result) {
  if (key.size() != n_scenes_ * n_bands_ || tides.size() != n_scenes_)
    throw UsageError("LUT entry has the wrong shape");
  if (!(result.e_photic < insertion_threshold_)) {
    if (++consecutive_failures_ >= kAdaptAfter) {
      insertion_threshold_ = std::min(insertion_threshold_ * kAdaptFactor,
                                      threshold_cap(n_scenes_));
      consecutive_failures_ = 0;
    }
    return false;
  }
  consecutive_failures_ = 0;
  if (entries_.size() == kCapacity)
    entries_.pop_front();
  entries_.push_back(Entry{std::vector<double>(key.begin(), key.end()),
                           std::vector<double>(tides.begin(), tides.end()),
                           result, clock_++});
  return true;
}

} // namespace sdb
