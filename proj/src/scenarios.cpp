#include "bess/scenarios.hpp"

#include "bess/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace bess {

void Profile::validate() const {
  if (!(slot_hours > 0.0)) throw Error(ErrorCode::InvalidArgument, "profile slot length must be positive");
  if (values.size() < 1) throw Error(ErrorCode::InvalidArgument, "profile is empty");
  if (!values.allFinite()) throw Error(ErrorCode::InvalidArgument, "profile has non-finite values");
}

Profile gaussian_peak_profile(const GaussianPeakSpec& spec, double start_h, Eigen::Index n_slots,
                              double slot_hours) {
  if (!(spec.base >= 0.0) || !(spec.amplitude_fraction >= 0.0) || !(spec.sigma_slots > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian peak needs base >= 0, amplitude >= 0, sigma > 0");
  }
  if (n_slots < 1 || !(slot_hours > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty profile grid");

  const double k_center = (spec.center_h - start_h) / slot_hours;
  if (k_center < 0.0 || k_center > static_cast<double>(n_slots - 1)) {
    spdlog::warn("peak center {} h lies outside the profile [{}, {}] h", spec.center_h, start_h,
                 start_h + static_cast<double>(n_slots - 1) * slot_hours);
  }
  Profile p;
  p.start_h = start_h;
  p.slot_hours = slot_hours;
  p.values.resize(n_slots);
  const double two_s2 = 2.0 * spec.sigma_slots * spec.sigma_slots;
  for (Eigen::Index k = 0; k < n_slots; ++k) {
    const double d = static_cast<double>(k) - k_center;
    p.values[k] = spec.base * (1.0 + spec.amplitude_fraction * std::exp(-d * d / two_s2));
  }
  return p;
}

Profile res_peak_profile(const GaussianPeakSpec& spec, double start_h, Eigen::Index n_slots,
                         double slot_hours) {
  return gaussian_peak_profile(spec, start_h, n_slots, slot_hours);
}

bool parse_iso_hours(const std::string& text, double& hours) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed) != 6) {
    return false;
  }
  if (sep != 'T' && sep != ' ') return false;
  std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == ':') {
    const char* first = rest.c_str() + 1;
    const char* last = rest.c_str() + rest.size();
    auto [ptr, ec] = std::from_chars(first, last, sec);
    if (ec != std::errc{} || ptr == first) return false;
    rest = std::string(ptr, last);
  }
  if (!(rest.empty() || rest == "Z")) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return false;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  hours = static_cast<double>(days) * 24.0 + h + mi / 60.0 + sec / 3600.0;
  return true;
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.c_str();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.c_str() + s.size(), out);
  return ec == std::errc{} && ptr == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

Profile parse_csv_profile(std::istream& in, const CsvOptions& opts, const std::string& source) {
  if (!(opts.slot_hours > 0.0)) throw Error(ErrorCode::InvalidArgument, "target slot length must be positive");
  auto fail = [&source](ErrorCode code, std::size_t line, const std::string& what) {
    throw Error(code, source + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_row(line);
    break;
  }
  if (header.empty()) fail(ErrorCode::ParseError, lineno, "missing header row");

  auto column = [&header](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : std::distance(header.begin(), it);
  };
  std::ptrdiff_t tcol = 0;
  if (!opts.timestamp_column.empty()) {
    tcol = column(opts.timestamp_column);
    if (tcol < 0) fail(ErrorCode::ParseError, lineno, "no column '" + opts.timestamp_column + "'");
  } else if (column("timestamp") >= 0) {
    tcol = column("timestamp");
  } else if (column("time_h") >= 0) {
    tcol = column("time_h");
  }
  const std::ptrdiff_t vcol = column(opts.value_column);
  if (vcol < 0) fail(ErrorCode::ParseError, lineno, "no column '" + opts.value_column + "'");

  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::size_t> lines;
  enum class Clock { Unknown, Hours, Iso } clock = Clock::Unknown;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      fail(ErrorCode::ParseError, lineno,
           "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    const std::string& ts = cells[static_cast<std::size_t>(tcol)];
    if (clock == Clock::Unknown) {
      double probe = 0.0;
      clock = parse_double(ts, probe) ? Clock::Hours : Clock::Iso;
    }
    double t = 0.0;
    const bool ok = clock == Clock::Hours ? parse_double(ts, t) : parse_iso_hours(ts, t);
    if (!ok) fail(ErrorCode::ParseError, lineno, "bad timestamp '" + ts + "'");
    double v = 0.0;
    if (!parse_double(cells[static_cast<std::size_t>(vcol)], v)) {
      fail(ErrorCode::ParseError, lineno, "bad value '" + cells[static_cast<std::size_t>(vcol)] + "'");
    }
    if (!times.empty() && !(t > times.back())) {
      fail(ErrorCode::NonMonotoneTimestamps, lineno,
           "timestamp '" + ts + "' does not follow line " + std::to_string(lines.back()));
    }
    times.push_back(t);
    values.push_back(v);
    lines.push_back(lineno);
  }
  if (times.empty()) fail(ErrorCode::InsufficientCoverage, lineno, "no data rows");

  // ISO clocks are rebased on the midnight of the first sample.
  if (clock == Clock::Iso) {
    const double midnight = std::floor(times.front() / 24.0) * 24.0;
    for (auto& t : times) t -= midnight;
  }

  const double eps = 1e-9;
  const double slot = opts.slot_hours;
  double t0 = times.front();
  Eigen::Index n = 0;
  if (opts.n_slots > 0) {
    t0 = opts.start_h;
    n = opts.n_slots;
    const double t_end = t0 + static_cast<double>(n - 1) * slot;
    if (t0 < times.front() - eps || t_end > times.back() + eps) {
      throw Error(ErrorCode::InsufficientCoverage,
                  source + ": data spans [" + std::to_string(times.front()) + ", " + std::to_string(times.back()) +
                      "] h but [" + std::to_string(t0) + ", " + std::to_string(t_end) + "] h was requested");
    }
  } else {
    n = static_cast<Eigen::Index>(std::floor((times.back() - t0) / slot + eps)) + 1;
  }

  // Median input spacing, for gap reporting.
  double typical = slot;
  if (times.size() > 1) {
    std::vector<double> dt(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) dt[i - 1] = times[i] - times[i - 1];
    std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
    typical = dt[dt.size() / 2];
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - times[i - 1] > 2.0 * typical) {
      spdlog::warn("{}: gap of {} h before line {} is interpolated", source, times[i] - times[i - 1], lines[i]);
    }
  }

  Profile p;
  p.start_h = t0;
  p.slot_hours = slot;
  p.values.resize(n);
  std::size_t i = 0;
  int clamped = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * slot;
    while (i + 1 < times.size() && times[i + 1] <= t + eps * std::max(1.0, std::abs(t))) ++i;
    double v = 0.0;
    if (std::abs(times[i] - t) <= eps * std::max(1.0, std::abs(t)) || i + 1 == times.size()) {
      v = values[i];
    } else if (opts.interpolation == Interpolation::Previous) {
      v = values[i];
    } else {
      const double w = (t - times[i]) / (times[i + 1] - times[i]);
      v = values[i] + w * (values[i + 1] - values[i]);
    }
    if (opts.clamp_negative && v < 0.0) {
      v = 0.0;
      ++clamped;
    }
    p.values[k] = v;
  }
  if (clamped > 0) spdlog::info("{}: clamped {} negative resampled values to 0", source, clamped);
  return p;
}

Profile load_csv_profile(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_csv_profile(in, opts, path.string());
}

}  // namespace bess
