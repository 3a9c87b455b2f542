#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decoysync/channel.hpp"
#include "decoysync/error.hpp"
#include "decoysync/protocol.hpp"

namespace decoysync {

enum class SweptParam { BlockSize, BackgroundRate, ChannelLossDb, SyncBrightness, SyncProbability };

inline std::string_view to_string(SweptParam p) {
  switch (p) {
  case SweptParam::BlockSize: return "block_size";
  case SweptParam::BackgroundRate: return "background_rate";
  case SweptParam::ChannelLossDb: return "channel_loss_db";
  case SweptParam::SyncBrightness: return "sync_brightness";
  case SweptParam::SyncProbability: return "sync_probability";
  }
  return "unknown";
}

struct ProtocolParams {
  double mu_signal = 0.5;
  double mu_decoy = 0.25;
  double p_signal = 0.7;
  double p_decoy = 0.3;
  double sync_mu = 50.0;
  double sync_probability = 0.0; // 0 disables bright sync pulses
  TemplateMode template_mode = TemplateMode::Intensity;
  bool zero_mean = true;

  IntensityTable table() const {
    std::optional<SyncPulse> sync;
    if (sync_probability != 0.0)
      sync = SyncPulse{sync_mu, sync_probability};
    return build_intensity_table(mu_signal, mu_decoy, p_signal, p_decoy, sync);
  }
};

struct SyncParams {
  std::int64_t n_alice = 1'000'000;
  std::optional<std::int64_t> d_max_bins; // wins over d_max_seconds when set
  double d_max_seconds = 3e-3;
  std::optional<std::int64_t> true_offset; // unset: uniform in [-d_max, d_max]
  std::vector<double> delta_grid_ppm;      // empty: no frequency search
  std::int64_t exclusion_halfwidth = 2;
};

struct SweepParams {
  SweptParam param = SweptParam::ChannelLossDb;
  std::vector<double> grid;
  std::int64_t trials = 100;
  std::int64_t window = 100;
};

//! Complete run configuration. Defaults reproduce the baseline fiber link:
//! 25 dB loss, 1 kHz background, 2.5 GHz bins, +-3 ms clock offset.
struct Config {
  ProtocolParams protocol;
  ChannelConfig channel;
  SyncParams sync;
  SweepParams sweep;
  std::uint64_t seed = 1;

  std::int64_t d_max() const {
    if (sync.d_max_bins)
      return *sync.d_max_bins;
    return std::llround(sync.d_max_seconds / channel.t_bin);
  }

  void validate() const {
    (void)protocol.table();
    channel.validate();
    if (sync.n_alice < 1)
      throw Error(ErrorKind::InvalidConfig, "n_alice must be >= 1");
    if (!(sync.d_max_seconds >= 0.0))
      throw Error(ErrorKind::InvalidConfig, "d_max_seconds must be >= 0");
    const auto d = d_max();
    if (d < 0)
      throw Error(ErrorKind::InvalidConfig, "d_max_bins must be >= 0");
    if (sync.true_offset && (*sync.true_offset < -d || *sync.true_offset > d))
      throw Error(ErrorKind::InvalidConfig, "|true_offset| must be <= d_max");
    if (sync.exclusion_halfwidth < 0)
      throw Error(ErrorKind::InvalidConfig, "exclusion_halfwidth must be >= 0");
    for (const double delta : sync.delta_grid_ppm)
      if (!(std::abs(delta) <= 100.0))
        throw Error(ErrorKind::InvalidConfig, "delta_grid entries must satisfy |delta| <= 100 ppm");
    if (sweep.trials < 1)
      throw Error(ErrorKind::InvalidConfig, "trials must be >= 1");
    if (sweep.window < 1)
      throw Error(ErrorKind::InvalidConfig, "window must be >= 1");
    const auto &g = sweep.grid;
    const bool up = std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    const bool down = std::adjacent_find(g.begin(), g.end(), std::less_equal<>()) == g.end();
    if (!up && !down)
      throw Error(ErrorKind::InvalidConfig, "sweep grid must be strictly monotone");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline std::string where(int line, std::string_view key) {
  return "line " + std::to_string(line) + ", key '" + std::string(key) + "'";
}

inline double parse_double(std::string_view v, int line, std::string_view key) {
  double out = 0.0;
  const auto *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw Error(ErrorKind::InvalidConfig, where(line, key) + ": '" + std::string(v) + "' is not a number");
  return out;
}

// Accepts "1000000" as well as "1e6"; rejects non-integral values.
inline std::int64_t parse_int(std::string_view v, int line, std::string_view key) {
  const double d = parse_double(v, line, key);
  if (d != std::trunc(d) || std::abs(d) > 9.0e15)
    throw Error(ErrorKind::InvalidConfig, where(line, key) + ": '" + std::string(v) + "' is not an integer");
  return static_cast<std::int64_t>(d);
}

inline std::uint64_t parse_u64(std::string_view v, int line, std::string_view key) {
  std::uint64_t out = 0;
  const auto *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorKind::InvalidConfig, where(line, key) + ": '" + std::string(v) + "' is not an unsigned integer");
  return out;
}

inline bool parse_bool(std::string_view v, int line, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw Error(ErrorKind::InvalidConfig, where(line, key) + ": '" + std::string(v) + "' is not a boolean");
}

inline std::vector<double> parse_list(std::string_view v, int line, std::string_view key) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (item.empty())
      throw Error(ErrorKind::InvalidConfig, where(line, key) + ": empty list element");
    out.push_back(parse_double(item, line, key));
    if (comma == std::string_view::npos)
      break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

// Key -> section it belongs to.
inline const std::map<std::string, std::string, std::less<>> &config_keys() {
  static const std::map<std::string, std::string, std::less<>> keys = {
      {"mu_signal", "protocol"},     {"mu_decoy", "protocol"},
      {"p_signal", "protocol"},      {"p_decoy", "protocol"},
      {"sync_mu", "protocol"},       {"sync_probability", "protocol"},
      {"template_mode", "protocol"}, {"zero_mean", "protocol"},
      {"loss_db", "channel"},        {"bcr", "channel"},
      {"t_bin", "channel"},          {"dead_bins", "channel"},
      {"delta_ppm", "channel"},      {"n_alice", "sync"},
      {"d_max_bins", "sync"},        {"d_max_seconds", "sync"},
      {"true_offset", "sync"},       {"delta_grid", "sync"},
      {"exclusion_halfwidth", "sync"}, {"param", "sweep"},
      {"grid", "sweep"},             {"grid_start", "sweep"},
      {"grid_stop", "sweep"},        {"grid_step", "sweep"},
      {"trials", "sweep"},           {"window", "sweep"},
      {"seed", "run"},
  };
  return keys;
}

inline SweptParam parse_swept_param(std::string_view v, int line, std::string_view key) {
  for (const auto p : {SweptParam::BlockSize, SweptParam::BackgroundRate, SweptParam::ChannelLossDb,
                       SweptParam::SyncBrightness, SweptParam::SyncProbability})
    if (v == to_string(p))
      return p;
  throw Error(ErrorKind::InvalidConfig, where(line, key) + ": unknown sweep parameter '" + std::string(v) + "'");
}

} // namespace detail

//! Parses `key = value` lines, optionally grouped under [protocol],
//! [channel], [sync], [sweep] or [run] headers. '#' and ';' start comments.
//! Keys outside any section are accepted as long as the key is known.
inline Config parse_config_text(std::string_view text) {
  using namespace detail;
  Config cfg;
  std::string section;
  std::set<std::string, std::less<>> seen;
  std::optional<double> grid_start, grid_stop, grid_step;
  bool have_grid_list = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos)
      line = line.substr(0, c);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string, std::less<>> sections = {"protocol", "channel", "sync", "sweep", "run"};
      if (!sections.contains(section))
        throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    const auto &keys = config_keys();
    const auto it = keys.find(key);
    if (it == keys.end() || (!section.empty() && it->second != section))
      throw Error(ErrorKind::InvalidConfig,
                  "unknown key '" + (section.empty() ? "" : section + ".") + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw Error(ErrorKind::InvalidConfig, where(line_no, key) + ": duplicate key");
    if (value.empty())
      throw Error(ErrorKind::InvalidConfig, where(line_no, key) + ": missing value");

    auto num = [&] { return parse_double(value, line_no, key); };
    auto integer = [&] { return parse_int(value, line_no, key); };

    if (key == "mu_signal") cfg.protocol.mu_signal = num();
    else if (key == "mu_decoy") cfg.protocol.mu_decoy = num();
    else if (key == "p_signal") cfg.protocol.p_signal = num();
    else if (key == "p_decoy") cfg.protocol.p_decoy = num();
    else if (key == "sync_mu") cfg.protocol.sync_mu = num();
    else if (key == "sync_probability") cfg.protocol.sync_probability = num();
    else if (key == "template_mode") {
      if (value == "binary") cfg.protocol.template_mode = TemplateMode::Binary;
      else if (value == "intensity") cfg.protocol.template_mode = TemplateMode::Intensity;
      else throw Error(ErrorKind::InvalidConfig, where(line_no, key) + ": expected binary or intensity");
    } else if (key == "zero_mean") cfg.protocol.zero_mean = parse_bool(value, line_no, key);
    else if (key == "loss_db") cfg.channel.loss_db = num();
    else if (key == "bcr") cfg.channel.bcr = num();
    else if (key == "t_bin") cfg.channel.t_bin = num();
    else if (key == "dead_bins") cfg.channel.dead_bins = integer();
    else if (key == "delta_ppm") cfg.channel.delta_ppm = num();
    else if (key == "n_alice") cfg.sync.n_alice = integer();
    else if (key == "d_max_bins") cfg.sync.d_max_bins = integer();
    else if (key == "d_max_seconds") cfg.sync.d_max_seconds = num();
    else if (key == "true_offset") cfg.sync.true_offset = integer();
    else if (key == "delta_grid") cfg.sync.delta_grid_ppm = parse_list(value, line_no, key);
    else if (key == "exclusion_halfwidth") cfg.sync.exclusion_halfwidth = integer();
    else if (key == "param") cfg.sweep.param = parse_swept_param(value, line_no, key);
    else if (key == "grid") { cfg.sweep.grid = parse_list(value, line_no, key); have_grid_list = true; }
    else if (key == "grid_start") grid_start = num();
    else if (key == "grid_stop") grid_stop = num();
    else if (key == "grid_step") grid_step = num();
    else if (key == "trials") cfg.sweep.trials = integer();
    else if (key == "window") cfg.sweep.window = integer();
    else if (key == "seed") cfg.seed = parse_u64(value, line_no, key);
  }

  const bool any_range = grid_start || grid_stop || grid_step;
  if (any_range) {
    if (have_grid_list)
      throw Error(ErrorKind::InvalidConfig, "give either grid or grid_start/grid_stop/grid_step, not both");
    if (!(grid_start && grid_stop && grid_step))
      throw Error(ErrorKind::InvalidConfig, "grid_start, grid_stop and grid_step must be given together");
    const double span = *grid_stop - *grid_start;
    if (*grid_step == 0.0 || span / *grid_step < 0.0)
      throw Error(ErrorKind::InvalidConfig, "grid_step must be nonzero and point from grid_start to grid_stop");
    const auto points = static_cast<std::int64_t>(std::floor(span / *grid_step + 1e-9)) + 1;
    for (std::int64_t i = 0; i < points; ++i)
      cfg.sweep.grid.push_back(*grid_start + static_cast<double>(i) * *grid_step);
  }

  cfg.validate();
  return cfg;
}

inline Config parse_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Io, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

} // namespace decoysync
