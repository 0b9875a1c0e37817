#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gaecausal/error.hpp"
#include "gaecausal/eval.hpp"
#include "gaecausal/optimizer.hpp"
#include "gaecausal/synth.hpp"
#include "gaecausal/tensor.hpp"

namespace gaecausal {

using Json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

// 17 significant digits, enough for a bit-exact round trip.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, end);
}

// Dense grid as comma-separated rows, one row per line.
inline std::string format_grid(const double* data, std::size_t rows, std::size_t cols) {
  std::string out;
  out.reserve(rows * cols * 24);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j > 0) out += ',';
      out += format_double(data[i * cols + j]);
    }
    out += '\n';
  }
  return out;
}

inline std::string format_grid(const Matrix& m) {
  return format_grid(m.data().data(), m.rows(), m.cols());
}

// Parses a comma-separated numeric grid. Blank lines are skipped; every row must
// have the same number of fields.
inline Matrix parse_grid(std::string_view text) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t fields = 0, col = 0;
    while (true) {
      std::size_t comma = line.find(',', col);
      if (comma == std::string_view::npos) comma = line.size();
      std::size_t b = col, e = comma;
      while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
      while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
      double v = 0.0;
      const char* first = line.data() + b;
      const char* last = line.data() + e;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (b == e || ec != std::errc() || ptr != last)
        throw ParseError("expected a number, found '" + std::string(line.substr(b, e - b)) + "'",
                         line_no, b + 1);
      values.push_back(v);
      ++fields;
      if (comma == line.size()) break;
      col = comma + 1;
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw ParseError("row has " + std::to_string(fields) + " fields, expected " +
                           std::to_string(cols),
                       line_no, 1);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("empty grid", 1, 1);
  return Matrix(rows, cols, std::move(values));
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  // Unique per thread so concurrent writers of the same target never share a temp file.
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

inline Matrix read_grid(const std::filesystem::path& path) {
  try {
    return parse_grid(read_text(path));
  } catch (const ParseError& e) {
    throw e.with_origin(path.string());
  }
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(origin + ": malformed JSON", line, column);
  }
}

inline Json grid_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix grid_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ParseError(what + ": row " + std::to_string(i) + " has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number())
        throw ParseError(what + ": non-numeric entry at row " + std::to_string(i));
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

// ---- datasets -------------------------------------------------------------

// Sidecar path for a dataset file: data.csv -> data.json.
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".json");
  return p;
}

inline Json dataset_metadata(const Dataset& ds) {
  Json j;
  j["n"] = ds.x.n();
  j["d"] = ds.x.d();
  j["l"] = ds.x.l();
  j["seed"] = ds.seed;
  j["sem_kind"] = to_string(ds.spec.kind);
  j["base_kind"] = to_string(ds.spec.base);
  j["noise_scale"] = ds.spec.noise_scale;
  j["scales"] = ds.scales;
  j["offsets"] = ds.offsets;
  j["truth"] = grid_json(ds.truth.matrix());
  return j;
}

// n rows, d*l columns grouped by variable, then dimension.
inline void write_dataset(const std::filesystem::path& csv, const Dataset& ds) {
  write_atomic(csv, format_grid(ds.x.data().data(), ds.x.n(), ds.x.d() * ds.x.l()));
  write_atomic(sidecar_path(csv), dataset_metadata(ds).dump(2) + "\n");
}

inline Dataset read_dataset(const std::filesystem::path& csv) {
  const std::filesystem::path meta_path = sidecar_path(csv);
  const Json meta = parse_json(read_text(meta_path), meta_path.string());
  Dataset ds;
  std::size_t n = 0, d = 0, l = 0;
  try {
    n = meta.at("n").get<std::size_t>();
    d = meta.at("d").get<std::size_t>();
    l = meta.at("l").get<std::size_t>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.spec.kind = parse_sem_kind(meta.at("sem_kind").get<std::string>());
    ds.spec.base = parse_sem_kind(meta.value("base_kind", std::string("gim")));
    ds.spec.noise_scale = meta.value("noise_scale", 1.0);
    ds.spec.l = l;
    ds.scales = meta.value("scales", std::vector<double>{});
    ds.offsets = meta.value("offsets", std::vector<double>{});
  } catch (const Json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what());
  }
  const Matrix truth = grid_from_json(meta.at("truth"), meta_path.string() + " truth");
  if (truth.rows() != d || truth.cols() != d)
    throw ParseError(meta_path.string() + ": truth must be " + std::to_string(d) + "x" +
                     std::to_string(d));
  ds.truth = WeightedAdjacency(truth);

  const Matrix grid = read_grid(csv);
  if (grid.rows() != n || grid.cols() != d * l)
    throw ParseError(csv.string() + ": expected " + std::to_string(n) + " rows of " +
                     std::to_string(d * l) + " columns, found " + std::to_string(grid.rows()) +
                     "x" + std::to_string(grid.cols()));
  ds.x = Tensor3(n, d, l, std::vector<double>(grid.data().begin(), grid.data().end()));
  return ds;
}

// ---- train reports --------------------------------------------------------

inline Json to_json(const TrainReport& r) {
  Json j;
  j["method"] = r.method;
  j["encoder_dims"] = r.encoder_dims;
  j["decoder_dims"] = r.decoder_dims;
  j["termination"] = to_string(r.termination);
  j["outer_iterations"] = r.outer_iterations;
  j["final_h"] = r.final_h;
  j["final_alpha"] = r.final_alpha;
  j["final_rho"] = r.final_rho;
  j["wall_time_seconds"] = r.wall_time_seconds;
  Json trace = Json::array();
  for (const OuterRecord& o : r.trace)
    trace.push_back({{"iteration", o.iteration},
                     {"alpha", o.alpha},
                     {"rho", o.rho},
                     {"h", o.h},
                     {"recon", o.recon},
                     {"l1", o.l1},
                     {"lagrangian", o.lagrangian},
                     {"best_step", o.best_step}});
  j["trace"] = std::move(trace);
  return j;
}

inline Termination parse_termination(const std::string& s) {
  if (s == "converged") return Termination::Converged;
  if (s == "rho_max") return Termination::RhoLimit;
  if (s == "max_outer") return Termination::MaxOuter;
  throw ParseError("unknown termination '" + s + "'");
}

inline TrainReport train_report_from_json(const Json& j) {
  TrainReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.encoder_dims = j.at("encoder_dims").get<std::vector<std::size_t>>();
    r.decoder_dims = j.at("decoder_dims").get<std::vector<std::size_t>>();
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.outer_iterations = j.at("outer_iterations").get<std::size_t>();
    r.final_h = j.at("final_h").get<double>();
    r.final_alpha = j.at("final_alpha").get<double>();
    r.final_rho = j.at("final_rho").get<double>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    for (const Json& o : j.at("trace"))
      r.trace.push_back(OuterRecord{o.at("iteration").get<std::size_t>(),
                                    o.at("alpha").get<double>(), o.at("rho").get<double>(),
                                    o.at("h").get<double>(), o.at("recon").get<double>(),
                                    o.at("l1").get<double>(), o.at("lagrangian").get<double>(),
                                    o.at("best_step").get<std::size_t>()});
  } catch (const Json::exception& e) {
    throw ParseError(std::string("train report: ") + e.what());
  }
  return r;
}

inline TrainReport read_train_report(const std::filesystem::path& path) {
  return train_report_from_json(parse_json(read_text(path), path.string()));
}

// ---- metrics rows ---------------------------------------------------------

struct MetricsRow {
  std::string method;
  std::string sem_kind;
  std::size_t d = 0;
  std::size_t l = 1;
  std::uint64_t seed = 0;
  GraphMetrics metrics;
  std::size_t repairs = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "method,sem_kind,d,l,seed,shd,tpr,extra,missing,reversed,wall_time_seconds,repairs";

inline std::string format_metrics_row(const MetricsRow& r) {
  const GraphMetrics& m = r.metrics;
  return r.method + "," + r.sem_kind + "," + std::to_string(r.d) + "," + std::to_string(r.l) +
         "," + std::to_string(r.seed) + "," + std::to_string(m.shd) + "," +
         format_double(m.tpr) + "," + std::to_string(m.extra) + "," +
         std::to_string(m.missing) + "," + std::to_string(m.reversed) + "," +
         format_double(m.wall_time_seconds) + "," + std::to_string(r.repairs);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? s.size() - pos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

namespace detail {

template <typename T>
T parse_field(const std::string& s, std::size_t line, std::size_t column) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad numeric field '" + s + "'", line, column);
  return v;
}

}  // namespace detail

// Parses a metrics table with kMetricsHeader as its first line.
inline std::vector<MetricsRow> parse_metrics(std::string_view text) {
  std::vector<MetricsRow> rows;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kMetricsHeader) throw ParseError("unexpected metrics header", 1, 1);
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 12)
      throw ParseError("metrics row has " + std::to_string(f.size()) + " fields, expected 12",
                       line_no, 1);
    std::vector<std::size_t> col(12, 1);
    for (std::size_t k = 1; k < 12; ++k) col[k] = col[k - 1] + f[k - 1].size() + 1;
    MetricsRow r;
    r.method = f[0];
    r.sem_kind = f[1];
    r.d = detail::parse_field<std::size_t>(f[2], line_no, col[2]);
    r.l = detail::parse_field<std::size_t>(f[3], line_no, col[3]);
    r.seed = detail::parse_field<std::uint64_t>(f[4], line_no, col[4]);
    r.metrics.shd = detail::parse_field<std::size_t>(f[5], line_no, col[5]);
    r.metrics.tpr = detail::parse_field<double>(f[6], line_no, col[6]);
    r.metrics.extra = detail::parse_field<std::size_t>(f[7], line_no, col[7]);
    r.metrics.missing = detail::parse_field<std::size_t>(f[8], line_no, col[8]);
    r.metrics.reversed = detail::parse_field<std::size_t>(f[9], line_no, col[9]);
    r.metrics.wall_time_seconds = detail::parse_field<double>(f[10], line_no, col[10]);
    r.repairs = detail::parse_field<std::size_t>(f[11], line_no, col[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace gaecausal
