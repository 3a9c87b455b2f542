#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoysync/error.hpp"
#include "decoysync/sweep.hpp"

namespace decoysync {

enum class ResultFormat { Csv, Json };

inline constexpr std::string_view kCsvHeader =
    "param,trial,seed,true_offset,recovered_offset,success,sigma,detections,score";

namespace detail {

// %.17g round-trips every double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

inline void write_csv(std::ostream &out, const std::vector<SweepRow> &rows) {
  out << kCsvHeader << '\n';
  for (const auto &r : rows) {
    out << detail::format_real(r.param_value) << ',' << r.trial_index << ',' << r.seed_used << ','
        << r.true_offset_bins << ',' << r.recovered_offset_bins << ',' << (r.success ? 1 : 0) << ','
        << detail::format_real(r.sigma_multiple) << ',' << r.detections << ','
        << detail::format_real(r.score) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const std::vector<SweepRow> &rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto &r : rows) {
    arr.push_back({{"param", r.param_value},
                   {"trial", r.trial_index},
                   {"seed", r.seed_used},
                   {"true_offset", r.true_offset_bins},
                   {"recovered_offset", r.recovered_offset_bins},
                   {"success", r.success ? 1 : 0},
                   {"sigma", r.sigma_multiple},
                   {"detections", r.detections},
                   {"score", r.score}});
  }
  return arr;
}

inline void write_json(std::ostream &out, const std::vector<SweepRow> &rows) {
  out << to_json(rows).dump(2) << '\n';
}

inline void emit_results(const std::vector<SweepRow> &rows, ResultFormat format, const std::string &path) {
  if (rows.empty())
    throw Error(ErrorKind::InvalidInput, "no rows to write");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  if (format == ResultFormat::Csv)
    write_csv(out, rows);
  else
    write_json(out, rows);
  out.flush();
  if (!out)
    throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

inline std::vector<SweepRow> read_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw Error(ErrorKind::InvalidInput, "missing or unexpected CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() != 9)
      throw Error(ErrorKind::InvalidInput, "CSV row has " + std::to_string(f.size()) + " fields, expected 9");
    try {
      SweepRow r;
      r.param_value = std::stod(f[0]);
      r.trial_index = std::stoll(f[1]);
      r.seed_used = std::stoull(f[2]);
      r.true_offset_bins = std::stoll(f[3]);
      r.recovered_offset_bins = std::stoll(f[4]);
      r.success = f[5] == "1";
      r.sigma_multiple = std::stod(f[6]);
      r.detections = std::stoll(f[7]);
      r.score = std::stod(f[8]);
      rows.push_back(r);
    } catch (const std::logic_error &) {
      throw Error(ErrorKind::InvalidInput, "malformed CSV row: " + line);
    }
  }
  return rows;
}

inline std::vector<SweepRow> read_json(std::istream &in) {
  std::vector<SweepRow> rows;
  try {
    const auto arr = nlohmann::json::parse(in);
    for (const auto &o : arr) {
      SweepRow r;
      r.param_value = o.at("param").get<double>();
      r.trial_index = o.at("trial").get<std::int64_t>();
      r.seed_used = o.at("seed").get<std::uint64_t>();
      r.true_offset_bins = o.at("true_offset").get<std::int64_t>();
      r.recovered_offset_bins = o.at("recovered_offset").get<std::int64_t>();
      r.success = o.at("success").get<int>() == 1;
      r.sigma_multiple = o.at("sigma").get<double>();
      r.detections = o.at("detections").get<std::int64_t>();
      r.score = o.at("score").get<double>();
      rows.push_back(r);
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed JSON results: ") + e.what());
  }
  return rows;
}

inline std::vector<SweepRow> read_results(const std::string &path, ResultFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  return format == ResultFormat::Csv ? read_csv(in) : read_json(in);
}

} // namespace decoysync
