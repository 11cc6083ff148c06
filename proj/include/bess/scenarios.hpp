#pragma once

#include "bess/qp.hpp"

#include <filesystem>
#include <istream>
#include <string>

namespace bess {

/// Uniformly sampled power series on a profile-local clock (hours from the
/// midnight of the first sample's day).
struct Profile {
  double start_h = 0.0;
  double slot_hours = 1.0;
  Vec values;

  Eigen::Index size() const { return values.size(); }
  double time_of(Eigen::Index k) const { return start_h + static_cast<double>(k) * slot_hours; }
  void validate() const;
};

/// base * (1 + amplitude_fraction * exp(-(k - k_c)^2 / (2 sigma^2))), with the
/// width sigma counted in sampling periods, not hours.
struct GaussianPeakSpec {
  double base = 50.0;
  double amplitude_fraction = 0.0;
  double center_h = 17.0;
  double sigma_slots = 4.0;
};

/// Synthetic demand with a Gaussian peak. A center outside the sampled range
/// only logs a warning.
Profile gaussian_peak_profile(const GaussianPeakSpec& spec, double start_h, Eigen::Index n_slots,
                              double slot_hours);

/// Synthetic renewable output with a Gaussian peak; same shape as the demand
/// generator.
Profile res_peak_profile(const GaussianPeakSpec& spec, double start_h, Eigen::Index n_slots,
                         double slot_hours);

enum class Interpolation { Linear, Previous };

struct CsvOptions {
  std::string value_column;
  double slot_hours = 5.0 / 60.0;
  Interpolation interpolation = Interpolation::Linear;
  /// Empty: use `timestamp`, then `time_h`, then the first column.
  std::string timestamp_column;
  /// Clamp negative resampled values to zero (PV output).
  bool clamp_negative = false;
  /// Optional requested coverage; n_slots = 0 means "whole file".
  double start_h = 0.0;
  Eigen::Index n_slots = 0;
};

/// Reads a comma-separated profile with a header row. Timestamps are either
/// fractional hours or ISO-8601 date-times (auto-detected from the first data
/// row) and must be strictly increasing; they may be irregular. Values are
/// resampled onto a uniform grid of opts.slot_hours.
Profile load_csv_profile(const std::filesystem::path& path, const CsvOptions& opts);
Profile parse_csv_profile(std::istream& in, const CsvOptions& opts, const std::string& source = "<stream>");

/// Parses "YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z]" into hours since 1970-01-01.
/// Returns false on malformed input.
bool parse_iso_hours(const std::string& text, double& hours);

}  // namespace bess
