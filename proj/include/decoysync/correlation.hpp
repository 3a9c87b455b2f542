#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "decoysync/channel.hpp"
#include "decoysync/error.hpp"
#include "decoysync/fft.hpp"
#include "decoysync/protocol.hpp"

namespace decoysync {

//! Correlation value per candidate lag in [-d_max, +d_max] with summary
//! statistics. values[k] belongs to lag k - d_max.
struct CorrelationSeries {
  std::int64_t d_max = 0;
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0; // population standard deviation over all lags
  std::int64_t peak_lag = 0;
  double peak_value = 0.0;
  double sigma_multiple = 0.0; // (peak_value - mean) / std, 0 if std == 0

  std::size_t size() const noexcept { return values.size(); }
  std::int64_t lag_at(std::size_t k) const noexcept {
    return static_cast<std::int64_t>(k) - d_max;
  }
  double at_lag(std::int64_t lag) const { return values.at(static_cast<std::size_t>(lag + d_max)); }
};

//! Fills in the statistics of a series. Ties for the maximum resolve to the
//! smallest lag.
inline CorrelationSeries make_series(std::vector<double> values, std::int64_t d_max) {
  if (values.size() != static_cast<std::size_t>(2 * d_max + 1))
    throw Error(ErrorKind::InvalidInput, "series must hold 2*d_max+1 lags");
  CorrelationSeries s;
  s.d_max = d_max;
  s.values = std::move(values);

  const auto peak = std::max_element(s.values.begin(), s.values.end());
  s.peak_value = *peak;
  s.peak_lag = s.lag_at(static_cast<std::size_t>(peak - s.values.begin()));

  double sum = 0.0;
  for (const auto v : s.values)
    sum += v;
  s.mean = sum / static_cast<double>(s.values.size());
  double ss = 0.0;
  for (const auto v : s.values)
    ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.values.size()));
  s.sigma_multiple = s.std > 0.0 ? (s.peak_value - s.mean) / s.std : 0.0;
  return s;
}

struct SyncEstimate {
  std::int64_t offset_bins = 0;
  double freq_factor = 1.0; // 1 + delta
  double delta_ppm = 0.0;
  double sigma_multiple = 0.0;
  double peak_value = 0.0;
  bool success = false; // assigned by whoever knows the ground truth
};

//! Linear (non-circular) cross-correlation of one template against click
//! records of length n + 2 d_max, via zero-padded real FFTs:
//!   corr[lag] = sum_m t[m] * clicks[m + d_max + lag],  lag in [-d_max, d_max]
//! The template spectrum is computed once, so correlating many click records
//! (e.g. a frequency search) costs one forward and one inverse transform
//! each.
class Correlator {
public:
  Correlator(const Template &tmpl, std::int64_t d_max)
      : n_(tmpl.size()), d_max_(d_max),
        fft_(detail::next_pow2(2 * tmpl.size() + 2 * static_cast<std::size_t>(d_max) - 1)) {
    if (tmpl.size() == 0)
      throw Error(ErrorKind::InvalidInput, "empty template");
    if (d_max < 0)
      throw Error(ErrorKind::InvalidInput, "d_max must be >= 0");
    auto buf = fft_.real();
    std::copy(tmpl.values.begin(), tmpl.values.end(), buf.begin());
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(n_), buf.end(), 0.0);
    fft_.forward();
    const auto spec = fft_.spectrum();
    const double scale = 1.0 / static_cast<double>(fft_.length());
    template_conj_.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k)
      template_conj_[k] = std::conj(spec[k]) * scale;
  }

  std::size_t template_length() const noexcept { return n_; }
  std::int64_t d_max() const noexcept { return d_max_; }
  std::size_t transform_length() const noexcept { return fft_.length(); }
  std::size_t clicks_length() const noexcept {
    return n_ + 2 * static_cast<std::size_t>(d_max_);
  }

  CorrelationSeries correlate(std::span<const std::uint8_t> clicks) {
    if (clicks.size() != clicks_length())
      throw Error(ErrorKind::InvalidInput,
                  "click record length " + std::to_string(clicks.size()) + " != template length + 2*d_max = " +
                      std::to_string(clicks_length()));
    auto buf = fft_.real();
    std::transform(clicks.begin(), clicks.end(), buf.begin(),
                   [](std::uint8_t c) { return c ? 1.0 : 0.0; });
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(clicks.size()), buf.end(), 0.0);
    fft_.forward();
    auto spec = fft_.spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k)
      spec[k] *= template_conj_[k];
    fft_.inverse();

    const auto lags = static_cast<std::size_t>(2 * d_max_ + 1);
    std::vector<double> values(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(lags));
    return make_series(std::move(values), d_max_);
  }

  CorrelationSeries correlate(const ClickSequence &clicks) {
    if (clicks.d_max != d_max_)
      throw Error(ErrorKind::InvalidInput, "click record d_max differs from correlator d_max");
    return correlate(std::span<const std::uint8_t>(clicks.clicks));
  }

private:
  std::size_t n_;
  std::int64_t d_max_;
  detail::RealFft fft_;
  std::vector<std::complex<double>> template_conj_;
};

inline CorrelationSeries cross_correlate(const Template &tmpl, const ClickSequence &clicks) {
  if (clicks.size() != tmpl.size() + 2 * static_cast<std::size_t>(clicks.d_max))
    throw Error(ErrorKind::InvalidInput, "click record length must equal template length + 2*d_max");
  Correlator corr(tmpl, clicks.d_max);
  return corr.correlate(clicks);
}

inline SyncEstimate recover_offset(const CorrelationSeries &corr) {
  SyncEstimate est;
  est.offset_bins = corr.peak_lag;
  est.sigma_multiple = corr.sigma_multiple;
  est.peak_value = corr.peak_value;
  return est;
}

//! Peak height in units of the standard deviation of the off-peak lags;
//! lags within +-exclusion_halfwidth of the peak are left out of mean/std.
inline double peak_significance(const CorrelationSeries &corr, std::int64_t exclusion_halfwidth = 2) {
  if (exclusion_halfwidth < 0)
    throw Error(ErrorKind::InvalidInput, "exclusion halfwidth must be >= 0");
  if (!(static_cast<std::int64_t>(corr.size()) > 2 * exclusion_halfwidth + 10))
    throw Error(ErrorKind::InvalidInput, "too few lags for the requested exclusion window");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < corr.size(); ++k) {
    if (std::abs(corr.lag_at(k) - corr.peak_lag) <= exclusion_halfwidth)
      continue;
    sum += corr.values[k];
    ++count;
  }
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t k = 0; k < corr.size(); ++k) {
    if (std::abs(corr.lag_at(k) - corr.peak_lag) <= exclusion_halfwidth)
      continue;
    ss += (corr.values[k] - mean) * (corr.values[k] - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0.0))
    throw Error(ErrorKind::DegenerateSeries, "off-peak lags have zero spread");
  return (corr.peak_value - mean) / sd;
}

//! Undoes a receiver clock running fast by delta_ppm: click j moves to
//! round(j / (1 + delta_ppm * 1e-6)); collisions merge, out-of-range clicks
//! are dropped.
inline std::vector<std::uint8_t> resample_clicks(std::span<const std::uint8_t> clicks, double delta_ppm) {
  std::vector<std::uint8_t> out(clicks.size(), 0);
  if (delta_ppm == 0.0) {
    std::copy(clicks.begin(), clicks.end(), out.begin());
    return out;
  }
  const double factor = 1.0 + delta_ppm * 1e-6;
  const auto len = static_cast<std::int64_t>(clicks.size());
  for (std::int64_t j = 0; j < len; ++j) {
    if (!clicks[static_cast<std::size_t>(j)])
      continue;
    const std::int64_t k = std::llround(static_cast<double>(j) / factor);
    if (k >= 0 && k < len)
      out[static_cast<std::size_t>(k)] = 1;
  }
  return out;
}

//! Stretch/compress search: for every candidate frequency offset the clicks
//! are resampled and correlated; the (delta, lag) with the globally largest
//! peak wins. Exact ties go to the smaller |delta|, then the smaller lag.
inline SyncEstimate recover_frequency_and_offset(Correlator &correlator, const ClickSequence &clicks,
                                                 std::span<const double> delta_grid_ppm) {
  if (delta_grid_ppm.empty())
    throw Error(ErrorKind::InvalidConfig, "frequency search grid is empty");
  if (clicks.d_max != correlator.d_max())
    throw Error(ErrorKind::InvalidInput, "click record d_max differs from correlator d_max");

  SyncEstimate best;
  bool have_best = false;
  for (const double delta : delta_grid_ppm) {
    const auto resampled = resample_clicks(clicks.clicks, delta);
    const auto series = correlator.correlate(resampled);
    const auto key = std::make_tuple(-series.peak_value, std::abs(delta), series.peak_lag, delta);
    const auto best_key =
        std::make_tuple(-best.peak_value, std::abs(best.delta_ppm), best.offset_bins, best.delta_ppm);
    if (!have_best || key < best_key) {
      best = recover_offset(series);
      best.delta_ppm = delta;
      best.freq_factor = 1.0 + delta * 1e-6;
      have_best = true;
    }
  }
  return best;
}

inline SyncEstimate recover_frequency_and_offset(const Template &tmpl, const ClickSequence &clicks,
                                                 std::span<const double> delta_grid_ppm) {
  if (delta_grid_ppm.empty())
    throw Error(ErrorKind::InvalidConfig, "frequency search grid is empty");
  if (clicks.size() != tmpl.size() + 2 * static_cast<std::size_t>(clicks.d_max))
    throw Error(ErrorKind::InvalidInput, "click record length must equal template length + 2*d_max");
  Correlator correlator(tmpl, clicks.d_max);
  return recover_frequency_and_offset(correlator, clicks, delta_grid_ppm);
}

} // namespace decoysync
