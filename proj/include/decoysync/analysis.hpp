#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <ranges>
#include <vector>

#include "decoysync/channel.hpp"
#include "decoysync/error.hpp"
#include "decoysync/protocol.hpp"

namespace decoysync {

//! Centered sliding-window average of binary trial outcomes.
//!
//! Odd windows cover [i - W/2, i + W/2]. Even windows use the usual centered
//! 2xW average: W+1 samples with the two end samples at half weight, so the
//! total weight is still W and the window stays symmetric about i. Near the
//! ends the window is clipped to the sequence and normalized by the weight
//! that remains.
template <std::ranges::input_range R>
std::vector<double> performance_score(const R &successes, std::size_t window = 100) {
  if (window < 1)
    throw Error(ErrorKind::InvalidInput, "window must be >= 1");
  std::vector<double> x;
  for (const auto &s : successes)
    x.push_back(static_cast<bool>(s) ? 1.0 : 0.0);
  if (x.empty())
    throw Error(ErrorKind::InvalidInput, "no trial outcomes to score");

  const auto n = static_cast<std::int64_t>(x.size());
  const auto half = static_cast<std::int64_t>(window / 2);
  const bool even = window % 2 == 0;

  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    prefix[i + 1] = prefix[i] + x[i];

  std::vector<double> score(x.size());
  for (std::int64_t i = 0; i < n; ++i) {
    // Full-weight interior part.
    const std::int64_t inner = even ? half - 1 : half;
    const std::int64_t lo = std::max<std::int64_t>(0, i - inner);
    const std::int64_t hi = std::min<std::int64_t>(n - 1, i + inner);
    double sum = prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
    double weight = static_cast<double>(hi - lo + 1);
    if (even) {
      for (const std::int64_t j : {i - half, i + half}) {
        if (j >= 0 && j < n) {
          sum += 0.5 * x[static_cast<std::size_t>(j)];
          weight += 0.5;
        }
      }
    }
    score[static_cast<std::size_t>(i)] = sum / weight;
  }
  return score;
}

//! Fraction of key given up to bright sync pulses: the sync bins themselves
//! plus the bins blinded by the dead time that follows a detected sync pulse.
inline double key_rate_penalty(double p_sync, double p_detect_sync, double dead_bins) {
  if (p_sync < 0.0 || p_sync > 1.0 || p_detect_sync < 0.0 || p_detect_sync > 1.0 || dead_bins < 0.0)
    throw Error(ErrorKind::InvalidInput, "penalty inputs must be non-negative probabilities / counts");
  return p_sync + p_sync * p_detect_sync * dead_bins;
}

//! Auxiliary QBER model: background clicks are wrong half the time,
//!   QBER = 0.5 p_bg / (p_det + p_bg),  p_bg = bcr t_bin,
//!   p_det = sum_i prob_i (1 - exp(-mu_i eta)).
//! It does not reproduce the QBER values quoted alongside the published
//! sweeps; it is a labeled convenience, not a validated metric.
inline double qber_estimate(const ChannelConfig &channel, const IntensityTable &table) {
  channel.validate();
  const double eta = channel.eta();
  double p_det = 0.0;
  for (const auto &e : table.entries())
    p_det += e.prob * -std::expm1(-e.mu * eta);
  const double p_bg = channel.background_per_bin();
  if (!(p_det + p_bg > 0.0))
    throw Error(ErrorKind::UndefinedQber, "no detections expected (p_det + p_bg = 0)");
  return 0.5 * p_bg / (p_det + p_bg);
}

inline std::size_t detection_count(const ClickSequence &clicks) {
  return static_cast<std::size_t>(std::count_if(clicks.clicks.begin(), clicks.clicks.end(),
                                                [](std::uint8_t c) { return c != 0; }));
}

} // namespace decoysync
