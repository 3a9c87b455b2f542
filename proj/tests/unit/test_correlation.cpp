#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "decoysync/analysis.hpp"
#include "decoysync/channel.hpp"
#include "decoysync/correlation.hpp"
#include "decoysync/protocol.hpp"
#include "oracles.hpp"
#include "decoysync/rng.hpp"

using namespace decoysync;

namespace {

IntensityTable base_table() { return build_intensity_table(0.5, 0.25, 0.7, 0.3); }

// Clicks = the binary pattern of `states` embedded at `shift`, nothing else.
ClickSequence embed(const StateSequence &states, std::int64_t shift, std::int64_t d_max) {
  ClickSequence c{std::vector<std::uint8_t>(states.size() + 2 * d_max, 0), d_max, shift, 0};
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states.table[states.intensities[i]].role == StateRole::Signal)
      c.clicks[static_cast<std::size_t>(static_cast<std::int64_t>(i) + d_max + shift)] = 1;
  return c;
}

double max_relative_error(const std::vector<double> &got, const std::vector<double> &want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

} // namespace

TEST(CrossCorrelate, HandComputedExample) {
  const Template t{{1.0, 0.0, 1.0}, false};
  const ClickSequence c{{0, 1, 0, 1, 0}, 1, 0, 0};
  const auto s = cross_correlate(t, c);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s.at_lag(-1), 0.0, 1e-12);
  EXPECT_NEAR(s.at_lag(0), 2.0, 1e-12);
  EXPECT_NEAR(s.at_lag(1), 0.0, 1e-12);
  EXPECT_EQ(s.peak_lag, 0);
  EXPECT_EQ(s.values, oracle::direct_correlation(t.values, c.clicks, 1));
}

TEST(CrossCorrelate, RejectsLengthMismatch) {
  const Template t{{1.0, 0.0, 1.0}, false};
  try {
    cross_correlate(t, ClickSequence{{0, 1, 0, 1}, 1, 0, 0});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(CrossCorrelate, TransformLengthIsPowerOfTwoCoveringLinearCorrelation) {
  const Template t{std::vector<double>(1000, 1.0), true};
  Correlator c(t, 100);
  EXPECT_EQ(c.transform_length(), 4096u); // >= 1000 + 1200 - 1
  Correlator c2(Template{std::vector<double>(1024, 1.0), true}, 0);
  EXPECT_EQ(c2.transform_length(), 2048u);
}

TEST(CrossCorrelate, SelfMatchFindsShift) {
  Xoshiro256 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 64 + static_cast<std::size_t>(rng.uniform_int(0, 400));
    const std::int64_t d = rng.uniform_int(1, 64);
    const std::int64_t shift = rng.uniform_int(-d, d);
    const auto states = generate_states(base_table(), n, rng());
    const auto s = cross_correlate(make_template(states), embed(states, shift, d));
    ASSERT_EQ(s.peak_lag, shift) << "trial " << trial;
  }
}

// Property: FFT route equals the direct sum.
TEST(CrossCorrelate, FftMatchesDirectSum) {
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4095));
    const std::int64_t d = rng.uniform_int(0, 300);
    Template t{std::vector<double>(n), false};
    for (auto &v : t.values)
      v = -1.0 + 2.0 * rng.uniform();
    ClickSequence c{std::vector<std::uint8_t>(n + 2 * d), d, 0, 0};
    const double p = rng.uniform();
    for (auto &b : c.clicks)
      b = rng.bernoulli(p) ? 1 : 0;
    const auto fft = cross_correlate(t, c);
    const auto direct = oracle::direct_correlation(t.values, c.clicks, d);
    EXPECT_LE(max_relative_error(fft.values, direct), 1e-9) << "n=" << n << " d=" << d;
  }
}

// Property: alpha * t + beta keeps the argmax when the template is
// mean-subtracted afterwards, or when beta == 0.
TEST(CrossCorrelate, ArgmaxInvariantUnderPositiveScaling) {
  Xoshiro256 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 500;
    const std::int64_t d = 40;
    const std::int64_t shift = rng.uniform_int(-d, d);
    const auto states = generate_states(base_table(), n, rng());
    auto clicks = embed(states, shift, d);
    for (auto &b : clicks.clicks) // sprinkle background
      if (rng.bernoulli(0.05))
        b = 1;
    const double alpha = 0.1 + 10.0 * rng.uniform();
    const double beta = -5.0 + 10.0 * rng.uniform();

    const auto base = make_template(states, TemplateMode::Binary, true);
    const auto lag0 = cross_correlate(base, clicks).peak_lag;

    // Form 1: beta == 0.
    Template scaled = base;
    for (auto &v : scaled.values)
      v *= alpha;
    EXPECT_EQ(cross_correlate(scaled, clicks).peak_lag, lag0);

    // Form 2: affine map of the raw template, then mean subtraction.
    Template affine = make_template(states, TemplateMode::Binary, false);
    double mean = 0.0;
    for (auto &v : affine.values) {
      v = alpha * v + beta;
      mean += v;
    }
    mean /= static_cast<double>(n);
    for (auto &v : affine.values)
      v -= mean;
    EXPECT_EQ(cross_correlate(affine, clicks).peak_lag, lag0);
  }
}

// Property: shifting the clicks by +k moves the peak by +k.
TEST(CrossCorrelate, ShiftCovariance) {
  Xoshiro256 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2000;
    const std::int64_t d = 100;
    const std::int64_t shift = rng.uniform_int(-50, 50);
    const std::int64_t k = rng.uniform_int(-40, 40);
    const auto states = generate_states(base_table(), n, rng());
    auto clicks = embed(states, shift, d);
    for (std::size_t i = 0; i < clicks.size(); ++i)
      if (rng.bernoulli(0.02))
        clicks.clicks[i] = 1;
    const auto t = make_template(states);
    const auto before = cross_correlate(t, clicks).peak_lag;
    ClickSequence moved = clicks;
    std::fill(moved.clicks.begin(), moved.clicks.end(), 0);
    for (std::size_t i = 0; i < clicks.size(); ++i) {
      const auto j = static_cast<std::int64_t>(i) + k;
      if (clicks.clicks[i] && j >= 0 && j < static_cast<std::int64_t>(clicks.size()))
        moved.clicks[static_cast<std::size_t>(j)] = 1;
    }
    EXPECT_EQ(cross_correlate(t, moved).peak_lag, before + k);
  }
}

TEST(CrossCorrelate, FiberLinkExampleFindsElevenThousandBins) {
  ChannelConfig ch;
  ch.loss_db = 25.0;
  ch.bcr = 1e4;
  const std::int64_t d = 12000;
  const auto states = generate_states(base_table(), 1'000'000, 1001);
  const auto clicks = simulate_detections(states, ch, 11000, d, 1002);
  const auto s = cross_correlate(make_template(states), clicks);
  EXPECT_EQ(s.peak_lag, 11000);
  // Well above the 5 sigma needed among ~2e4 lags.
  EXPECT_GE(s.sigma_multiple, 5.0);
  EXPECT_EQ(recover_offset(s).offset_bins, 11000);
}

TEST(RecoverOffset, IncreasingSeriesPeaksAtEnd) {
  std::vector<double> v(21);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<double>(i);
  const auto est = recover_offset(make_series(v, 10));
  EXPECT_EQ(est.offset_bins, 10);
  EXPECT_EQ(est.freq_factor, 1.0);
}

TEST(RecoverOffset, TiesGoToSmallestLag) {
  std::vector<double> v(21, 0.0);
  v[-3 + 10] = 5.0;
  v[5 + 10] = 5.0;
  EXPECT_EQ(recover_offset(make_series(v, 10)).offset_bins, -3);
}

TEST(PeakSignificance, SpikeOverKnownBackground) {
  // Alternating +-1 background: mean 0, std 1. Spike at 10.
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  v[500] = 10.0;
  v[499] = v[501] = 0.0; // inside exclusion window
  const auto s = make_series(v, 500);
  EXPECT_NEAR(peak_significance(s, 2), 10.0, 0.02);
}

TEST(PeakSignificance, WhiteNoiseRarelyExceedsFiveSigma) {
  std::mt19937_64 gen(4242);
  std::normal_distribution<double> normal;
  int above = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(20001);
    for (auto &x : v)
      x = normal(gen);
    above += peak_significance(make_series(std::move(v), 10000), 2) > 5.0;
  }
  EXPECT_LE(above, 10); // <= 1%
}

TEST(PeakSignificance, FlatSeriesIsDegenerate) {
  try {
    peak_significance(make_series(std::vector<double>(101, 3.0), 50));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSeries);
  }
}

TEST(PeakSignificance, TooFewLags) {
  try {
    peak_significance(make_series(std::vector<double>(13, 1.0), 6), 2);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(FrequencySearch, ZeroGridEqualsPlainRecovery) {
  ChannelConfig ch;
  ch.loss_db = 20.0;
  const auto states = generate_states(base_table(), 200'000, 3);
  const auto clicks = simulate_detections(states, ch, -321, 1000, 4);
  const auto t = make_template(states);
  const auto plain = recover_offset(cross_correlate(t, clicks));
  const std::vector<double> grid{0.0};
  const auto searched = recover_frequency_and_offset(t, clicks, grid);
  EXPECT_EQ(searched.offset_bins, plain.offset_bins);
  EXPECT_EQ(searched.sigma_multiple, plain.sigma_multiple);
  EXPECT_EQ(searched.peak_value, plain.peak_value);
  EXPECT_EQ(searched.freq_factor, 1.0);
}

TEST(FrequencySearch, RecoversInjectedOnePpm) {
  const auto states = generate_states(base_table(), 1'000'000, 5);
  const std::int64_t d = 500, shift = 123;
  const auto drifted = apply_frequency_offset(embed(states, shift, d), 1.0);
  const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto est = recover_frequency_and_offset(make_template(states), drifted, grid);
  EXPECT_EQ(est.delta_ppm, 1.0);
  EXPECT_DOUBLE_EQ(est.freq_factor, 1.000001);
  EXPECT_EQ(est.offset_bins, shift);
}

TEST(FrequencySearch, OffGridDriftStaysWithinResidualSmear) {
  ChannelConfig ch;
  ch.loss_db = 10.0;
  const auto states = generate_states(base_table(), 1'000'000, 6);
  const std::int64_t d = 2000, shift = -777;
  const auto drifted = apply_frequency_offset(simulate_detections(states, ch, shift, d, 7), 0.7);
  const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto est = recover_frequency_and_offset(make_template(states), drifted, grid);
  EXPECT_LE(std::abs(est.offset_bins - shift), 1);
}

TEST(FrequencySearch, EmptyGridIsConfigError) {
  const Template t{{1.0, 0.0, 1.0}, false};
  const ClickSequence c{{0, 1, 0, 1, 0}, 1, 0, 0};
  try {
    recover_frequency_and_offset(t, c, std::vector<double>{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}
