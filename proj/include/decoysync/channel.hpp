#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "decoysync/error.hpp"
#include "decoysync/protocol.hpp"
#include "decoysync/rng.hpp"

namespace decoysync {

//! Quantum channel and receiver parameters.
struct ChannelConfig {
  double loss_db = 25.0;   // attenuation, >= 0
  double bcr = 1e3;        // background count rate [Hz]
  double t_bin = 4e-10;    // bin duration [s]; 2.5 GHz repetition
  std::int64_t dead_bins = 0;
  double delta_ppm = 0.0;  // fractional frequency offset of Bob's clock

  double eta() const noexcept { return std::pow(10.0, -loss_db / 10.0); }
  double background_per_bin() const noexcept { return bcr * t_bin; }

  void validate() const {
    if (!(loss_db >= 0.0) || !std::isfinite(loss_db))
      throw Error(ErrorKind::InvalidConfig, "loss_db must be finite and >= 0");
    if (!(bcr >= 0.0))
      throw Error(ErrorKind::InvalidConfig, "bcr must be >= 0");
    if (!(t_bin > 0.0))
      throw Error(ErrorKind::InvalidConfig, "t_bin must be > 0");
    if (!(background_per_bin() < 1.0))
      throw Error(ErrorKind::InvalidConfig, "bcr * t_bin must be < 1");
    if (dead_bins < 0)
      throw Error(ErrorKind::InvalidConfig, "dead_bins must be >= 0");
    if (!(std::abs(delta_ppm) <= 100.0))
      throw Error(ErrorKind::InvalidConfig, "|delta_ppm| must be <= 100");
  }
};

//! Bob's padded detection record. Index i + d_max + true_offset holds the
//! outcome of Alice's bin i; the d_max bins on either side are padding.
struct ClickSequence {
  std::vector<std::uint8_t> clicks;
  std::int64_t d_max = 0;
  std::int64_t true_offset = 0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return clicks.size(); }
  std::size_t n_alice() const noexcept {
    return clicks.size() - 2 * static_cast<std::size_t>(d_max);
  }
};

//! P = 1 - exp(-mu * eta) * (1 - bcr * t_bin)
inline double click_probability(double mu, double eta, double bcr, double t_bin) {
  if (!(mu >= 0.0))
    throw Error(ErrorKind::InvalidConfig, "mu must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "eta must lie in (0, 1]");
  const double background = bcr * t_bin;
  if (!(background >= 0.0 && background < 1.0))
    throw Error(ErrorKind::InvalidConfig, "bcr * t_bin must lie in [0, 1)");
  // -expm1 keeps the small-probability regime accurate.
  const double no_signal = std::exp(-mu * eta);
  return -std::expm1(-mu * eta) + no_signal * background;
}

inline ClickSequence simulate_detections(const StateSequence &states, const ChannelConfig &channel,
                                         std::int64_t true_offset, std::int64_t d_max,
                                         std::uint64_t seed) {
  channel.validate();
  if (d_max < 0)
    throw Error(ErrorKind::InvalidConfig, "d_max must be >= 0");
  if (true_offset < -d_max || true_offset > d_max)
    throw Error(ErrorKind::InvalidConfig, "|true_offset| = " + std::to_string(true_offset) +
                                              " exceeds d_max = " + std::to_string(d_max));
  const double eta = channel.eta();
  std::vector<double> p_click(states.table.size());
  for (std::size_t i = 0; i < p_click.size(); ++i)
    p_click[i] = click_probability(states.table[i].mu, eta, channel.bcr, channel.t_bin);
  const double p_pad = channel.background_per_bin();

  const auto n = static_cast<std::int64_t>(states.size());
  ClickSequence out{std::vector<std::uint8_t>(static_cast<std::size_t>(n + 2 * d_max), 0),
                    d_max, true_offset, seed};
  const std::int64_t start = d_max + true_offset;
  Xoshiro256 rng(seed);
  // One uniform draw per output index, left to right.
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(out.size()); ++j) {
    const std::int64_t alice_bin = j - start;
    const double p = (alice_bin >= 0 && alice_bin < n)
                         ? p_click[states.intensities[static_cast<std::size_t>(alice_bin)]]
                         : p_pad;
    out.clicks[static_cast<std::size_t>(j)] = rng.bernoulli(p) ? 1 : 0;
  }
  return out;
}

//! After each surviving click the detector is blind for `dead_bins` bins.
inline ClickSequence apply_dead_time(ClickSequence clicks, std::int64_t dead_bins) {
  if (dead_bins < 0)
    throw Error(ErrorKind::InvalidConfig, "dead_bins must be >= 0");
  if (dead_bins == 0)
    return clicks;
  std::int64_t blind_until = -1; // last blinded index
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(clicks.size()); ++j) {
    auto &c = clicks.clicks[static_cast<std::size_t>(j)];
    if (!c)
      continue;
    if (j <= blind_until)
      c = 0;
    else
      blind_until = j + dead_bins;
  }
  return clicks;
}

//! Moves the click at index j to round(j * (1 + delta_ppm * 1e-6)). Clicks
//! landing on the same index merge; clicks pushed past the end are lost.
inline ClickSequence apply_frequency_offset(ClickSequence clicks, double delta_ppm) {
  if (delta_ppm == 0.0)
    return clicks;
  const double factor = 1.0 + delta_ppm * 1e-6;
  std::vector<std::uint8_t> moved(clicks.size(), 0);
  const auto len = static_cast<std::int64_t>(clicks.size());
  for (std::int64_t j = 0; j < len; ++j) {
    if (!clicks.clicks[static_cast<std::size_t>(j)])
      continue;
    const std::int64_t k = std::llround(static_cast<double>(j) * factor);
    if (k >= 0 && k < len)
      moved[static_cast<std::size_t>(k)] = 1;
  }
  clicks.clicks = std::move(moved);
  return clicks;
}

} // namespace decoysync
