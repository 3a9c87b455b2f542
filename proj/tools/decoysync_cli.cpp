// Command-line front end: single trials, parameter sweeps and the hardware
// budget calculators.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "decoysync/decoysync.hpp"

namespace {

using namespace decoysync;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  unsigned threads = 1;
};

Config load_config(const CommonOptions &o) {
  Config cfg = o.config_path.empty() ? parse_config_text("") : parse_config(o.config_path);
  if (o.seed)
    cfg.seed = *o.seed;
  return cfg;
}

ResultFormat parse_format(const std::string &f) {
  return f == "json" ? ResultFormat::Json : ResultFormat::Csv;
}

int run_simulate(const CommonOptions &o, std::int64_t trial) {
  const Config cfg = load_config(o);
  const auto d = cfg.d_max();
  if (cfg.sync.n_alice + 2 * d > kDeskScaleLimit)
    throw Error(ErrorKind::InvalidConfig, "n_alice + 2*d_max exceeds 2^28; lower d_max_bins or n_alice");
  const auto detail = run_trial_detail(cfg, trial);
  const auto &row = detail.row;

  std::printf("n_alice            %lld\n", static_cast<long long>(cfg.sync.n_alice));
  std::printf("d_max_bins         %lld\n", static_cast<long long>(d));
  std::printf("loss_db            %.6g\n", cfg.channel.loss_db);
  std::printf("bcr_hz             %.6g\n", cfg.channel.bcr);
  std::printf("seed               %llu\n", static_cast<unsigned long long>(row.seed_used));
  std::printf("detections         %lld\n", static_cast<long long>(row.detections));
  std::printf("true_offset        %lld\n", static_cast<long long>(row.true_offset_bins));
  std::printf("recovered_offset   %lld\n", static_cast<long long>(row.recovered_offset_bins));
  std::printf("recovered_delta    %.6g ppm\n", detail.estimate.delta_ppm);
  std::printf("sigma_multiple     %.4f\n", detail.correlation.sigma_multiple);
  std::printf("peak_significance  %.4f\n", detail.peak_significance);
  std::printf("success            %d\n", row.success ? 1 : 0);
  try {
    std::printf("qber_model         %.6g\n", qber_estimate(cfg.channel, cfg.protocol.table()));
  } catch (const Error &) {
    std::printf("qber_model         undefined\n");
  }

  if (!o.out_path.empty()) {
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out)
      throw Error(ErrorKind::Io, "cannot open '" + o.out_path + "' for writing");
    const auto &c = detail.correlation;
    if (parse_format(o.format) == ResultFormat::Json) {
      nlohmann::ordered_json j;
      j["d_max"] = c.d_max;
      j["peak_lag"] = c.peak_lag;
      j["mean"] = c.mean;
      j["std"] = c.std;
      j["sigma_multiple"] = c.sigma_multiple;
      j["values"] = c.values;
      out << j.dump() << '\n';
    } else {
      out << "lag,value\n";
      for (std::size_t k = 0; k < c.size(); ++k)
        out << c.lag_at(k) << ',' << detail::format_real(c.values[k]) << '\n';
    }
    if (!out)
      throw Error(ErrorKind::Io, "write to '" + o.out_path + "' failed");
  }
  return 0;
}

int run_sweep_cmd(const CommonOptions &o, bool allow_large) {
  const Config cfg = load_config(o);
  const auto spec = SweepSpec::from_config(cfg);
  const auto result = run_sweep(spec, {o.threads, allow_large});

  const auto format = parse_format(o.format);
  if (o.out_path.empty()) {
    if (format == ResultFormat::Csv)
      write_csv(std::cout, result.rows);
    else
      write_json(std::cout, result.rows);
  } else {
    emit_results(result.rows, format, o.out_path);
  }

  std::fprintf(stderr, "%-16s %-12s %-12s\n", std::string(to_string(spec.swept_param)).c_str(), "success",
               "detections");
  for (const auto &p : result.points)
    std::fprintf(stderr, "%-16.6g %-12.4f %-12.1f\n", p.param_value, p.success_rate, p.mean_detections);
  return 0;
}

struct FeasibilityOptions {
  double n_alice = 5e7;
  std::optional<double> d_max_bins;
  double delta_ppm = 1.0;
  double min_detections = 10.0;
  double transform_points = 134217728.0; // 2^27
  double rep_rate = 2.5e9;
  double latency = 0.0;
  double bits_per_bin = 2.0;
};

// Integer flags accept exponent notation ("5e7").
std::int64_t as_count(double v, const char *flag) {
  if (!(v >= 0.0) || v != std::trunc(v) || v > 9.0e15)
    throw Error(ErrorKind::InvalidConfig, std::string(flag) + " must be a non-negative integer");
  return static_cast<std::int64_t>(v);
}

int run_feasibility(const CommonOptions &o, const FeasibilityOptions &opts) {
  const Config cfg = load_config(o);
  struct {
    std::int64_t n_alice;
    std::optional<std::int64_t> d_max_bins;
    double delta_ppm, min_detections, rep_rate, latency, bits_per_bin;
  } f{as_count(opts.n_alice, "--n-alice"), std::nullopt, opts.delta_ppm, opts.min_detections,
      opts.rep_rate,  opts.latency,        opts.bits_per_bin};
  if (opts.d_max_bins)
    f.d_max_bins = as_count(*opts.d_max_bins, "--d-max-bins");
  const HardwareBudget budget{as_count(opts.transform_points, "--transform-points"), f.rep_rate};
  budget.validate();

  std::printf("n_alice                 %lld\n", static_cast<long long>(f.n_alice));
  std::printf("max_transform_points    %lld\n", static_cast<long long>(budget.max_transform_points));
  try {
    const auto off = max_offset_for_transform(f.n_alice, budget);
    std::printf("max_d_max_bins          %lld\n", static_cast<long long>(off.d_max_bins));
    std::printf("max_d_max_seconds       %.6g\n", off.d_max_seconds);
  } catch (const Error &e) {
    std::printf("max_d_max_bins          infeasible (%s)\n", e.what());
  }
  if (f.d_max_bins) {
    const auto n = required_transform_length(f.n_alice, *f.d_max_bins);
    std::printf("required_transform_len  %lld\n", static_cast<long long>(n));
    std::printf("fits_budget             %s\n", n <= budget.max_transform_points ? "yes" : "no");
  }
  std::printf("syntonization_smear     %.6g bins\n", syntonization_smear(f.delta_ppm, static_cast<double>(f.n_alice)));
  if (f.delta_ppm > 0.0) {
    const auto lock = arrival_lock_limit(cfg.protocol.table(), cfg.channel, f.delta_ppm, f.min_detections);
    std::printf("detections_per_shift    %.6g (at %.4g dB)\n", lock.detections_per_shift, cfg.channel.loss_db);
    std::printf("arrival_lock_feasible   %s\n", lock.feasible ? "yes" : "no");
    std::printf("arrival_lock_limit_db   %.2f\n", lock.loss_limit_db);
  }
  if (f.latency > 0.0)
    std::printf("state_buffer_bytes      %.0f\n", state_buffer_bytes(f.latency, f.bits_per_bin, budget));
  return 0;
}

void add_common(CLI::App *cmd, CommonOptions &o, bool with_threads) {
  cmd->add_option("--config", o.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "base seed (overrides the config)");
  cmd->add_option("--out", o.out_path, "output file");
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  if (with_threads)
    cmd->add_option("--threads", o.threads, "worker threads (0 = one per core)");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Clock offset recovery from decoy-state patterns: simulation and sweep harness"};
  app.require_subcommand(1);

  CommonOptions sim_opts, sweep_opts, feas_opts;
  std::int64_t trial = 0;
  bool allow_large = false;
  FeasibilityOptions feas;

  auto *sim = app.add_subcommand("simulate", "run one trial and optionally dump its correlation");
  add_common(sim, sim_opts, false);
  sim->add_option("--trial", trial, "trial index");

  auto *sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep, sweep_opts, true);
  sweep->add_flag("--allow-large", allow_large, "allow n_alice + 2*d_max above 2^28");

  auto *fz = app.add_subcommand("feasibility", "transform-length and syntonization budgets");
  add_common(fz, feas_opts, false);
  fz->add_option("--n-alice", feas.n_alice, "block size in bins");
  fz->add_option("--d-max-bins", feas.d_max_bins, "maximum clock offset in bins");
  fz->add_option("--delta-ppm", feas.delta_ppm, "residual frequency offset");
  fz->add_option("--min-detections", feas.min_detections, "detections needed per bin of drift");
  fz->add_option("--transform-points", feas.transform_points, "maximum FFT length");
  fz->add_option("--rep-rate", feas.rep_rate, "repetition rate in Hz");
  fz->add_option("--latency", feas.latency, "classical + quantum channel latency in seconds");
  fz->add_option("--bits-per-bin", feas.bits_per_bin, "stored bits per sent state");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_simulate(sim_opts, trial);
    if (sweep->parsed())
      return run_sweep_cmd(sweep_opts, allow_large);
    if (fz->parsed())
      return run_feasibility(feas_opts, feas);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
