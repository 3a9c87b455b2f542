#pragma once

#include <cmath>
#include <cstdint>

#include "decoysync/channel.hpp"
#include "decoysync/error.hpp"
#include "decoysync/protocol.hpp"

namespace decoysync {

//! FFT core limits of the target hardware.
struct HardwareBudget {
  std::int64_t max_transform_points = std::int64_t{1} << 27;
  double rep_rate = 2.5e9; // Hz

  void validate() const {
    if (max_transform_points < 2)
      throw Error(ErrorKind::InvalidConfig, "max_transform_points must be >= 2");
    if (!(rep_rate > 0.0))
      throw Error(ErrorKind::InvalidConfig, "rep_rate must be > 0");
  }
};

struct OffsetBudget {
  std::int64_t d_max_bins = 0;
  double d_max_seconds = 0.0;
};

//! Transform length needed to correlate a block of n_alice bins over
//! +-d_max_bins lags: n_alice + 2 d_max.
constexpr std::int64_t required_transform_length(std::int64_t n_alice, std::int64_t d_max_bins) {
  if (n_alice < 0 || d_max_bins < 0)
    throw Error(ErrorKind::InvalidInput, "n_alice and d_max must be >= 0");
  return n_alice + 2 * d_max_bins;
}

//! Largest clock offset that still fits n_alice + 2 d_max <= N.
inline OffsetBudget max_offset_for_transform(std::int64_t n_alice, const HardwareBudget &budget = {}) {
  budget.validate();
  if (n_alice < 0)
    throw Error(ErrorKind::InvalidInput, "n_alice must be >= 0");
  if (n_alice > budget.max_transform_points)
    throw Error(ErrorKind::Infeasible, "block of " + std::to_string(n_alice) +
                                           " bins exceeds the transform length budget");
  OffsetBudget out;
  out.d_max_bins = (budget.max_transform_points - n_alice) / 2;
  out.d_max_seconds = static_cast<double>(out.d_max_bins) / budget.rep_rate;
  return out;
}

//! Peak smear (bins) over a block caused by a residual frequency offset.
constexpr double syntonization_smear(double delta_ppm, double n_alice) {
  return (delta_ppm < 0 ? -delta_ppm : delta_ppm) * 1e-6 * n_alice;
}

//! Buffer Alice needs to hold her sent states until Bob's report arrives.
inline double state_buffer_bytes(double latency_seconds, double bits_per_bin = 2.0,
                                 const HardwareBudget &budget = {}) {
  budget.validate();
  if (latency_seconds < 0.0 || bits_per_bin < 0.0)
    throw Error(ErrorKind::InvalidInput, "latency and bits per bin must be >= 0");
  return std::ceil(latency_seconds * budget.rep_rate * bits_per_bin / 8.0);
}

struct LockLimit {
  bool feasible = false;             // at channel.loss_db
  double loss_limit_db = 0.0;        // loss where detections/shift == threshold
  double detections_per_shift = 0.0; // at channel.loss_db
};

//! Detections Bob collects while a residual frequency offset walks his clock
//! by one bin, at the given loss.
inline double detections_per_bin_shift(const IntensityTable &table, const ChannelConfig &channel,
                                       double loss_db, double delta_ppm) {
  const double eta = std::pow(10.0, -loss_db / 10.0);
  double p_det = 0.0;
  for (const auto &e : table.entries())
    p_det += e.prob * click_probability(e.mu, eta, channel.bcr, channel.t_bin);
  const double rep_rate = 1.0 / channel.t_bin;
  const double seconds_per_shift = channel.t_bin / (delta_ppm * 1e-6);
  return p_det * rep_rate * seconds_per_shift;
}

//! Whether locking Bob's oscillator on photon arrival times is viable: it
//! needs `min_detections` per bin of accumulated drift. The loss limit is
//! bisected on [0, 100] dB to 0.1 dB; it sits at 0 when even a lossless
//! channel falls short and at 100 when the bracket never does.
inline LockLimit arrival_lock_limit(const IntensityTable &table, const ChannelConfig &channel,
                                    double delta_ppm, double min_detections = 10.0) {
  channel.validate();
  if (!(delta_ppm > 0.0))
    throw Error(ErrorKind::InvalidInput, "delta_ppm must be > 0");
  constexpr double kLo = 0.0, kHi = 100.0, kTol = 0.1;

  auto rate = [&](double loss) { return detections_per_bin_shift(table, channel, loss, delta_ppm); };

  LockLimit out;
  out.detections_per_shift = rate(channel.loss_db);
  out.feasible = out.detections_per_shift >= min_detections;
  if (rate(kLo) < min_detections) {
    out.loss_limit_db = kLo;
  } else if (rate(kHi) >= min_detections) {
    out.loss_limit_db = kHi;
  } else {
    double lo = kLo, hi = kHi; // rate(lo) >= threshold > rate(hi)
    while (hi - lo > kTol) {
      const double mid = 0.5 * (lo + hi);
      (rate(mid) >= min_detections ? lo : hi) = mid;
    }
    out.loss_limit_db = 0.5 * (lo + hi);
  }
  return out;
}

} // namespace decoysync
