#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decoysync/error.hpp"
#include "decoysync/rng.hpp"

namespace decoysync {

enum class StateRole : std::uint8_t { Signal, Decoy, Sync };

struct IntensityEntry {
  double mu = 0.0;   // mean photon number
  double prob = 0.0; // send probability
  StateRole role = StateRole::Signal;
};

//! The set of pulse intensities Alice can send, with their send
//! probabilities. One signal entry, one decoy entry and at most one bright
//! sync entry; probabilities sum to one.
class IntensityTable {
public:
  static constexpr double kProbTolerance = 1e-12;

  IntensityTable() = default;

  explicit IntensityTable(std::vector<IntensityEntry> entries)
      : entries_(std::move(entries)) {
    validate();
  }

  const std::vector<IntensityEntry> &entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const IntensityEntry &operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> index_of(StateRole role) const noexcept {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].role == role)
        return i;
    return std::nullopt;
  }

  bool has_sync() const noexcept { return index_of(StateRole::Sync).has_value(); }

  //! Probability-weighted mean photon number.
  double mean_mu() const noexcept {
    double acc = 0.0;
    for (const auto &e : entries_)
      acc += e.prob * e.mu;
    return acc;
  }

private:
  void validate() const {
    int signals = 0, decoys = 0, syncs = 0;
    double total = 0.0;
    for (const auto &e : entries_) {
      if (!(e.mu >= 0.0) || !std::isfinite(e.mu))
        throw Error(ErrorKind::InvalidConfig, "mean photon number must be finite and >= 0");
      if (!(e.prob >= 0.0 && e.prob <= 1.0))
        throw Error(ErrorKind::InvalidConfig,
                    "send probability " + std::to_string(e.prob) + " outside [0, 1]");
      total += e.prob;
      switch (e.role) {
      case StateRole::Signal: ++signals; break;
      case StateRole::Decoy: ++decoys; break;
      case StateRole::Sync: ++syncs; break;
      }
    }
    if (signals != 1 || decoys != 1 || syncs > 1)
      throw Error(ErrorKind::InvalidConfig,
                  "table needs exactly one signal, one decoy and at most one sync entry");
    if (std::abs(total - 1.0) > kProbTolerance)
      throw Error(ErrorKind::InvalidConfig,
                  "send probabilities sum to " + std::to_string(total) + ", not 1");
  }

  std::vector<IntensityEntry> entries_;
};

struct SyncPulse {
  double mu = 50.0;
  double prob = 0.01;
};

//! Builds the 1-decoy table, or its bright-pulse extension when `sync` is
//! given with a nonzero probability. The sync probability is taken half from
//! the signal and half from the decoy state.
inline IntensityTable build_intensity_table(double mu_signal, double mu_decoy,
                                            double p_signal, double p_decoy,
                                            std::optional<SyncPulse> sync = std::nullopt) {
  if (std::abs(p_signal + p_decoy - 1.0) > IntensityTable::kProbTolerance)
    throw Error(ErrorKind::InvalidConfig, "p_signal + p_decoy must equal 1");
  if (!sync || sync->prob == 0.0) {
    return IntensityTable({{mu_signal, p_signal, StateRole::Signal},
                           {mu_decoy, p_decoy, StateRole::Decoy}});
  }
  const double p_sync = sync->prob;
  if (!(p_sync > 0.0) || !(p_sync < 2.0 * p_signal) || !(p_sync < 2.0 * p_decoy))
    throw Error(ErrorKind::InvalidConfig,
                "sync probability must lie in (0, min(2 p_signal, 2 p_decoy))");
  return IntensityTable({{mu_signal, p_signal - p_sync / 2.0, StateRole::Signal},
                         {mu_decoy, p_decoy - p_sync / 2.0, StateRole::Decoy},
                         {sync->mu, p_sync, StateRole::Sync}});
}

//! Alice's per-bin choice of intensity, as indices into `table`.
struct StateSequence {
  std::vector<std::uint8_t> intensities;
  IntensityTable table;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return intensities.size(); }
  double mu_at(std::size_t bin) const { return table[intensities[bin]].mu; }
};

inline StateSequence generate_states(const IntensityTable &table, std::size_t n_alice,
                                     std::uint64_t seed) {
  if (n_alice == 0)
    throw Error(ErrorKind::InvalidConfig, "n_alice must be >= 1");
  if (table.size() == 0)
    throw Error(ErrorKind::InvalidConfig, "empty intensity table");

  // Inverse-CDF categorical draw; the last entry absorbs rounding in the
  // cumulative sum.
  std::vector<double> cdf(table.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    acc += table[i].prob;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  StateSequence out{std::vector<std::uint8_t>(n_alice), table, seed};
  Xoshiro256 rng(seed);
  const auto last = static_cast<std::uint8_t>(table.size() - 1);
  for (auto &state : out.intensities) {
    const double u = rng.uniform();
    std::uint8_t k = 0;
    while (k < last && !(u < cdf[k]))
      ++k;
    state = k;
  }
  return out;
}

enum class TemplateMode { Binary, Intensity };

struct Template {
  std::vector<double> values;
  bool zero_mean = true;

  std::size_t size() const noexcept { return values.size(); }
};

//! Maps Alice's states onto the sequence correlated against Bob's clicks.
//! Binary mode: signal and sync bins -> 1, decoy bins -> 0. Intensity mode:
//! each bin carries its mean photon number.
inline Template make_template(const StateSequence &states,
                              TemplateMode mode = TemplateMode::Binary,
                              bool zero_mean = true) {
  std::vector<double> lut(states.table.size());
  for (std::size_t i = 0; i < lut.size(); ++i) {
    const auto &e = states.table[i];
    lut[i] = mode == TemplateMode::Intensity ? e.mu : (e.role == StateRole::Decoy ? 0.0 : 1.0);
  }

  Template t{std::vector<double>(states.size()), zero_mean};
  for (std::size_t i = 0; i < states.size(); ++i)
    t.values[i] = lut[states.intensities[i]];

  if (zero_mean) {
    // Per-level counts give an exact mean regardless of n.
    std::vector<std::size_t> counts(lut.size(), 0);
    for (const auto s : states.intensities)
      ++counts[s];
    double mean = 0.0;
    for (std::size_t i = 0; i < lut.size(); ++i)
      mean += lut[i] * (static_cast<double>(counts[i]) / static_cast<double>(states.size()));
    for (auto &v : t.values)
      v -= mean;
  }
  return t;
}

} // namespace decoysync
