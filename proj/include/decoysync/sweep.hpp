#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "decoysync/analysis.hpp"
#include "decoysync/channel.hpp"
#include "decoysync/config.hpp"
#include "decoysync/correlation.hpp"
#include "decoysync/error.hpp"
#include "decoysync/protocol.hpp"
#include "decoysync/rng.hpp"

namespace decoysync {

//! One simulated synchronization attempt.
struct SweepRow {
  double param_value = 0.0;
  std::int64_t trial_index = 0;
  std::uint64_t seed_used = 0;
  std::int64_t true_offset_bins = 0;
  std::int64_t recovered_offset_bins = 0;
  bool success = false;
  double sigma_multiple = 0.0;
  std::int64_t detections = 0;
  double score = 0.0;

  bool operator==(const SweepRow &) const = default;
};

//! Extra per-trial detail the sweep table does not carry.
struct TrialDetail {
  SweepRow row;
  SyncEstimate estimate;
  CorrelationSeries correlation; // at the winning frequency candidate
  double peak_significance = 0.0;
};

struct SweepSpec {
  SweptParam swept_param = SweptParam::ChannelLossDb;
  std::vector<double> grid;
  std::int64_t trials_per_point = 100;
  Config fixed;
  std::uint64_t base_seed = 1;
  std::int64_t d_max_bins = 0;
  std::int64_t score_window = 100;

  static SweepSpec from_config(const Config &cfg) {
    SweepSpec s;
    s.swept_param = cfg.sweep.param;
    s.grid = cfg.sweep.grid;
    s.trials_per_point = cfg.sweep.trials;
    s.fixed = cfg;
    s.base_seed = cfg.seed;
    s.d_max_bins = cfg.d_max();
    s.score_window = cfg.sweep.window;
    return s;
  }

  void validate() const {
    if (grid.empty())
      throw Error(ErrorKind::InvalidConfig, "sweep grid is empty");
    if (trials_per_point < 1)
      throw Error(ErrorKind::InvalidConfig, "trials_per_point must be >= 1");
    if (score_window < 1)
      throw Error(ErrorKind::InvalidConfig, "score window must be >= 1");
    Config probe = fixed;
    probe.sweep.grid = grid;
    probe.sync.d_max_bins = d_max_bins;
    probe.validate();
    for (const double v : grid)
      (void)config_at(v).protocol.table();
  }

  //! The fixed configuration with the swept parameter set to `value`.
  Config config_at(double value) const {
    Config c = fixed;
    c.sync.d_max_bins = d_max_bins;
    c.seed = base_seed;
    switch (swept_param) {
    case SweptParam::BlockSize: c.sync.n_alice = std::llround(value); break;
    case SweptParam::BackgroundRate: c.channel.bcr = value; break;
    case SweptParam::ChannelLossDb: c.channel.loss_db = value; break;
    case SweptParam::SyncBrightness: c.protocol.sync_mu = value; break;
    case SweptParam::SyncProbability: c.protocol.sync_probability = value; break;
    }
    return c;
  }

  //! Largest n_alice + 2 d_max any grid point needs.
  std::int64_t largest_record() const {
    std::int64_t n = fixed.sync.n_alice;
    if (swept_param == SweptParam::BlockSize)
      for (const double v : grid)
        n = std::max(n, static_cast<std::int64_t>(std::llround(v)));
    return n + 2 * d_max_bins;
  }
};

//! Seed of trial `trial_index` at grid point `grid_index`.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t grid_index, std::int64_t trial_index) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(grid_index), static_cast<std::uint64_t>(trial_index)});
}

//! generate states -> template -> detections at a random (or fixed) offset
//! -> optional dead time / drift -> correlation (or frequency search) ->
//! argmax. Deterministic in (config, grid_index, trial_index).
inline TrialDetail run_trial_detail(const Config &cfg, std::int64_t trial_index, std::size_t grid_index = 0,
                                    double param_value = 0.0) {
  const auto seed = trial_seed(cfg.seed, grid_index, trial_index);
  const auto d_max = cfg.d_max();
  const auto table = cfg.protocol.table();

  const auto states =
      generate_states(table, static_cast<std::size_t>(cfg.sync.n_alice), derive_seed(seed, {1}));
  const auto tmpl = make_template(states, cfg.protocol.template_mode, cfg.protocol.zero_mean);

  std::int64_t offset = 0;
  if (cfg.sync.true_offset) {
    offset = *cfg.sync.true_offset;
  } else {
    Xoshiro256 offset_rng(derive_seed(seed, {2}));
    offset = offset_rng.uniform_int(-d_max, d_max);
  }

  auto clicks = simulate_detections(states, cfg.channel, offset, d_max, derive_seed(seed, {3}));
  if (cfg.channel.dead_bins > 0)
    clicks = apply_dead_time(std::move(clicks), cfg.channel.dead_bins);
  if (cfg.channel.delta_ppm != 0.0)
    clicks = apply_frequency_offset(std::move(clicks), cfg.channel.delta_ppm);

  TrialDetail out;
  Correlator correlator(tmpl, d_max);
  if (cfg.sync.delta_grid_ppm.empty()) {
    out.correlation = correlator.correlate(clicks);
    out.estimate = recover_offset(out.correlation);
  } else {
    out.estimate = recover_frequency_and_offset(correlator, clicks, cfg.sync.delta_grid_ppm);
    out.correlation = correlator.correlate(resample_clicks(clicks.clicks, out.estimate.delta_ppm));
  }
  out.estimate.success = out.estimate.offset_bins == offset;
  try {
    out.peak_significance = peak_significance(out.correlation, cfg.sync.exclusion_halfwidth);
  } catch (const Error &) {
    out.peak_significance = 0.0; // too few lags or flat series
  }

  auto &row = out.row;
  row.param_value = param_value;
  row.trial_index = trial_index;
  row.seed_used = seed;
  row.true_offset_bins = offset;
  row.recovered_offset_bins = out.estimate.offset_bins;
  row.success = out.estimate.success;
  row.sigma_multiple = out.correlation.sigma_multiple;
  row.detections = static_cast<std::int64_t>(detection_count(clicks));
  row.score = row.success ? 1.0 : 0.0;
  return out;
}

inline SweepRow run_trial(const Config &cfg, std::int64_t trial_index, std::size_t grid_index = 0,
                          double param_value = 0.0) {
  return run_trial_detail(cfg, trial_index, grid_index, param_value).row;
}

struct PerformanceSeries {
  std::vector<double> param_values; // per trial, grid order
  std::vector<std::uint8_t> successes;
  std::vector<double> score;
  std::int64_t window = 100;
};

struct PointSummary {
  double param_value = 0.0;
  double success_rate = 0.0;
  double mean_detections = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  PerformanceSeries performance;
  std::vector<PointSummary> points;
};

struct SweepOptions {
  unsigned threads = 1; // 0: one per hardware thread
  bool allow_large = false;
};

inline constexpr std::int64_t kDeskScaleLimit = std::int64_t{1} << 28;

//! Runs every (grid point x trial) and fills the sliding-window score over
//! the flattened, grid-ordered trial sequence. Rows land at fixed indices,
//! so the output does not depend on the thread count.
inline SweepResult run_sweep(const SweepSpec &spec, const SweepOptions &options = {}) {
  spec.validate();
  if (!options.allow_large && spec.largest_record() > kDeskScaleLimit)
    throw Error(ErrorKind::InvalidConfig,
                "n_alice + 2*d_max = " + std::to_string(spec.largest_record()) +
                    " exceeds 2^28; pass --allow-large to run it anyway");

  const auto per_point = static_cast<std::size_t>(spec.trials_per_point);
  const std::size_t total = spec.grid.size() * per_point;
  std::vector<Config> configs;
  for (const double v : spec.grid)
    configs.push_back(spec.config_at(v));

  SweepResult result;
  result.rows.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        const std::size_t g = i / per_point;
        result.rows[i] = run_trial(configs[g], static_cast<std::int64_t>(i % per_point), g, spec.grid[g]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = total;
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  if (failure)
    std::rethrow_exception(failure);

  auto &perf = result.performance;
  perf.window = spec.score_window;
  for (const auto &row : result.rows) {
    perf.param_values.push_back(row.param_value);
    perf.successes.push_back(row.success ? 1 : 0);
  }
  perf.score = performance_score(perf.successes, static_cast<std::size_t>(spec.score_window));
  for (std::size_t i = 0; i < total; ++i)
    result.rows[i].score = perf.score[i];

  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    PointSummary p{spec.grid[g], 0.0, 0.0};
    for (std::size_t t = 0; t < per_point; ++t) {
      const auto &row = result.rows[g * per_point + t];
      p.success_rate += row.success ? 1.0 : 0.0;
      p.mean_detections += static_cast<double>(row.detections);
    }
    p.success_rate /= static_cast<double>(per_point);
    p.mean_detections /= static_cast<double>(per_point);
    result.points.push_back(p);
  }
  return result;
}

//! First grid position where the per-point success rate drops from >= level
//! to < level, linearly interpolated between the two points. nullopt if the
//! rate never crosses downward.
inline std::optional<double> score_crossing(const std::vector<PointSummary> &points, double level = 0.5) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto &a = points[i - 1];
    const auto &b = points[i];
    if (a.success_rate >= level && b.success_rate < level) {
      const double t = (a.success_rate - level) / (a.success_rate - b.success_rate);
      return a.param_value + t * (b.param_value - a.param_value);
    }
  }
  return std::nullopt;
}

} // namespace decoysync
