// Acceptance suite. One [PASS]/[FAIL] line per criterion; exit status is the
// number of failed criteria. `--criterion N` runs a single one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "decoysync/decoysync.hpp"
#include "oracles.hpp"

using namespace decoysync;

namespace {

// Tolerances and limits, fixed here.
constexpr double kOracleRelTol = 1e-9;
constexpr double kC1Seconds = 30;
constexpr double kC2Seconds = 10;
constexpr double kC3SigmaLo = 5.0, kC3SigmaHi = 9.0;
constexpr int kC3MinExact = 19;
constexpr double kC3Seconds = 120;
constexpr double kC4HighRate = 0.95, kC4LowRate = 0.5;
constexpr double kC4Seconds = 300;
constexpr double kC5MinRate = 0.5;
constexpr double kC5Seconds = 300;
constexpr double kC6MaxWithout = 0.2, kC6MinWith = 0.9, kC6MinGainDb = 13.0;
constexpr double kC6Seconds = 1200;
constexpr double kC8SecondsTol = 0.01e-3;
constexpr double kC9LockLo = 42.0, kC9LockHi = 46.0;
constexpr double kC10GridStep = 0.25;
constexpr int kC10MinGood = 95;
constexpr double kC10Seconds = 600;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Config scaled(double loss_db, double bcr, std::int64_t n_alice, std::int64_t d_max) {
  Config c;
  c.channel.loss_db = loss_db;
  c.channel.bcr = bcr;
  c.sync.n_alice = n_alice;
  c.sync.d_max_bins = d_max;
  return c;
}

// Success rate of `trials` trials of `cfg`, with its own seed.
double success_rate(const Config &cfg, int trials, std::uint64_t seed) {
  Config c = cfg;
  c.sweep.param = SweptParam::ChannelLossDb;
  c.sweep.grid = {cfg.channel.loss_db};
  c.sweep.trials = trials;
  c.seed = seed;
  const auto r = run_sweep(SweepSpec::from_config(c));
  return r.points.front().success_rate;
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Xoshiro256 rng(derive_seed(101, {1}));
  double worst = 0.0;
  for (int inst = 0; inst < 500; ++inst) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 2048));
    const auto d = rng.uniform_int(0, 512);
    Template t;
    for (std::size_t i = 0; i < n; ++i)
      t.values.push_back(rng.uniform() * 2.0 - 1.0);
    const double density = rng.uniform();
    std::vector<std::uint8_t> clicks(n + 2 * static_cast<std::size_t>(d));
    for (auto &c : clicks)
      c = rng.bernoulli(density) ? 1 : 0;
    const auto fast = Correlator(t, d).correlate(clicks).values;
    const auto slow = oracle::direct_correlation(t.values, clicks, d);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < slow.size(); ++k) {
      diff = std::max(diff, std::abs(fast[k] - slow[k]));
      scale = std::max(scale, std::abs(slow[k]));
    }
    if (scale > 0.0)
      worst = std::max(worst, diff / scale);
  }
  const double s = elapsed(t0);
  return {worst <= kOracleRelTol && s < kC1Seconds, fmt("max rel err %.3g over 500 instances, %.1f s", worst, s)};
}

Outcome noiseless_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  Config c = scaled(0.0, 0.0, 10'000, 1000);
  c.protocol.mu_signal = 1e6;
  c.protocol.mu_decoy = 0.0;
  const double rate = success_rate(c, 1000, 202);
  const double s = elapsed(t0);
  return {rate == 1.0 && s < kC2Seconds, fmt("exact recovery %.4f over 1000 trials, %.1f s", rate, s)};
}

Outcome high_background_significance() {
  const auto t0 = std::chrono::steady_clock::now();
  Config c = scaled(25.0, 1e4, 1'000'000, 10'000);
  c.sync.true_offset = 7000;
  c.seed = 303;
  std::vector<double> sig;
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const auto row = run_trial(c, i);
    sig.push_back(row.sigma_multiple);
    exact += row.success ? 1 : 0;
  }
  std::sort(sig.begin(), sig.end());
  const double median = 0.5 * (sig[9] + sig[10]);
  const double s = elapsed(t0);
  const bool ok = median >= kC3SigmaLo && median <= kC3SigmaHi && exact >= kC3MinExact && s < kC3Seconds;
  return {ok, fmt("median sigma %.2f (band [%g, %g]), exact %d/20, %.1f s", median, kC3SigmaLo, kC3SigmaHi, exact, s)};
}

Outcome block_size_regime() {
  const auto t0 = std::chrono::steady_clock::now();
  const double big = success_rate(scaled(25.0, 1e3, 1'000'000, 10'000), 100, 404);
  const double small = success_rate(scaled(25.0, 1e3, 50'000, 10'000), 100, 405);
  const double s = elapsed(t0);
  const bool ok = big >= kC4HighRate && small <= kC4LowRate && s < kC4Seconds;
  return {ok, fmt("success %.2f at n=1e6, %.2f at n=5e4, %.1f s", big, small, s)};
}

Outcome background_robustness() {
  const auto t0 = std::chrono::steady_clock::now();
  const double rate = success_rate(scaled(25.0, 5e4, 1'000'000, 10'000), 100, 505);
  const double s = elapsed(t0);
  return {rate >= kC5MinRate && s < kC5Seconds, fmt("success %.2f at bcr=5e4 Hz, %.1f s", rate, s)};
}

Outcome bright_pulse_gain() {
  const auto t0 = std::chrono::steady_clock::now();
  Config base = scaled(40.0, 1e3, 1'000'000, 10'000);
  Config bright = base;
  bright.protocol.sync_mu = 50.0;
  bright.protocol.sync_probability = 0.01;
  const double without = success_rate(base, 100, 606);
  const double with = success_rate(bright, 100, 607);

  std::vector<double> grid;
  for (double l = 20.0; l <= 64.0; l += 2.0)
    grid.push_back(l);
  auto crossing = [&](Config c, std::uint64_t seed) {
    c.sweep.param = SweptParam::ChannelLossDb;
    c.sweep.grid = grid;
    c.sweep.trials = 50;
    c.seed = seed;
    return score_crossing(run_sweep(SweepSpec::from_config(c)).points);
  };
  const auto x_base = crossing(base, 608);
  const auto x_bright = crossing(bright, 609);
  const double gain = (x_base && x_bright) ? *x_bright - *x_base : NAN;
  const double s = elapsed(t0);
  const bool ok = without <= kC6MaxWithout && with >= kC6MinWith && gain >= kC6MinGainDb && s < kC6Seconds;
  return {ok, fmt("success %.2f without / %.2f with at -40 dB; 0.5 crossing %.1f -> %.1f dB (gain %.1f), %.1f s",
                  without, with, x_base.value_or(NAN), x_bright.value_or(NAN), gain, s)};
}

Outcome penalty() {
  const double a = key_rate_penalty(0.01, 0.01, 25);
  const double b = key_rate_penalty(0.01, 0, 0);
  return {a == 0.0125 && b == 0.01, fmt("penalty %.17g and %.17g", a, b)};
}

Outcome transform_budget() {
  const auto off = max_offset_for_transform(50'000'000, HardwareBudget{std::int64_t{1} << 27, 2.5e9});
  const auto len = required_transform_length(500'000, 7'500'000);
  const bool ok = off.d_max_bins == 42'108'864 && std::abs(off.d_max_seconds - 16.84e-3) <= kC8SecondsTol &&
                  len < (std::int64_t{1} << 24);
  return {ok, fmt("d_max %lld bins = %.4f ms; transform length %lld", static_cast<long long>(off.d_max_bins),
                  off.d_max_seconds * 1e3, static_cast<long long>(len))};
}

Outcome syntonization_budget() {
  const double a = syntonization_smear(1.0, 1e6);
  const double b = syntonization_smear(1.0, 5e7);
  Config c;
  c.channel.bcr = 0.0;
  const auto lock = arrival_lock_limit(c.protocol.table(), c.channel, 1.0, 10.0);
  const bool ok = a == 1.0 && b == 50.0 && lock.loss_limit_db >= kC9LockLo && lock.loss_limit_db <= kC9LockHi;
  return {ok, fmt("smear %.17g and %.17g bins; lock limit %.2f dB (band [%g, %g])", a, b, lock.loss_limit_db,
                  kC9LockLo, kC9LockHi)};
}

Outcome frequency_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  Config c = scaled(25.0, 1e3, 1'000'000, 10'000);
  for (double g = -1.5; g <= 1.5 + 1e-9; g += kC10GridStep)
    c.sync.delta_grid_ppm.push_back(g);
  int good = 0, total = 0;
  std::uint64_t seed = 1000;
  for (const double delta : {1.0, -1.0, 0.5, -0.5}) {
    c.channel.delta_ppm = delta;
    c.seed = seed++;
    for (int i = 0; i < 25; ++i) {
      const auto d = run_trial_detail(c, i);
      const bool ok = std::abs(d.estimate.delta_ppm - delta) <= kC10GridStep + 1e-12 &&
                      std::abs(d.row.recovered_offset_bins - d.row.true_offset_bins) <= 1;
      good += ok ? 1 : 0;
      ++total;
    }
  }
  const double s = elapsed(t0);
  return {good >= kC10MinGood && s < kC10Seconds, fmt("%d/%d within one grid step and +-1 bin, %.1f s", good, total, s)};
}

Outcome determinism() {
  Config c = scaled(25.0, 1e3, 200'000, 2000);
  c.sweep.param = SweptParam::ChannelLossDb;
  c.sweep.grid = {20, 25, 30, 35, 40};
  c.sweep.trials = 20;
  c.sweep.window = 10;
  c.seed = 1111;
  const auto spec = SweepSpec::from_config(c);
  std::ostringstream one, four;
  write_csv(one, run_sweep(spec, {1, false}).rows);
  write_csv(four, run_sweep(spec, {4, false}).rows);
  return {one.str() == four.str(), fmt("%zu CSV bytes, threads 1 vs 4 %s", one.str().size(),
                                       one.str() == four.str() ? "identical" : "differ")};
}

struct Criterion {
  const char *name;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all{
      {"oracle equivalence", oracle_equivalence},
      {"noiseless recovery", noiseless_recovery},
      {"significance at -25 dB, bcr 1e4", high_background_significance},
      {"reliable block size", block_size_regime},
      {"background robustness", background_robustness},
      {"bright-pulse gain", bright_pulse_gain},
      {"sync penalty", penalty},
      {"transform budget", transform_budget},
      {"syntonization budgets", syntonization_budget},
      {"frequency round trip", frequency_round_trip},
      {"sweep determinism", determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc)
      selected.push_back(std::atoi(argv[++i]));
  }
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(all.size()); ++i)
      selected.push_back(i);

  int failed = 0;
  for (const int id : selected) {
    if (id < 1 || id > static_cast<int>(all.size())) {
      std::printf("[FAIL] C%d unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto &c = all[static_cast<std::size_t>(id - 1)];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] C%d %s: %s\n", o.pass ? "PASS" : "FAIL", id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed;
}
