#pragma once

#include "sdb/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sdb {

/// Every tunable of a run. Files are flat `key = value` lines; `#` starts a
/// comment and unknown keys are errors. See RunConfig::describe for keys.
struct RunConfig {
  InversionOptions inversion;
  std::vector<std::string> bottom_types{"sand", "seagrass"};
  std::string bottom_dir; ///< curve files replacing the built-in library
  std::size_t max_combination = 4;
  bool weighted_median = true;
  bool unmix = true;
  bool align = true;
  double datum_offset = 0.0;
  UnmixOptions unmixing;
  DepthErrorConfig depth_error;
  std::uint64_t rng_seed = 1;
  std::size_t jobs = 1;

  /// Library restricted to the first n_bottom of bottom_types.
  BottomLibrary library() const;
  PipelineOptions pipeline() const;
  void validate() const;

  /// Current values in file syntax, one key per line.
  std::string to_text() const;
  /// Sets one key. Throws UsageError for unknown keys or bad values.
  void set(const std::string &key, const std::string &value);

  static RunConfig parse(const std::string &text);
  static RunConfig load(const std::filesystem::path &path);
};

} // namespace sdb
