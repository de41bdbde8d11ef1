#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pvcdr/models.hpp"

namespace pvcdr {

using json = nlohmann::json;

/// I/O failures (missing files, malformed content); the CLI maps these to
/// exit code 2, as opposed to validation failures (exit code 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Locale-independent double formatting, 17 significant digits: enough to
// round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw IoError(where + ": malformed number '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// CSV layout: header `y,x1,...,xp`, one row per observation, full double
/// precision so written datasets read back bit-identically.
inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  data.validate();
  os << "y";
  for (Eigen::Index j = 0; j < data.p(); ++j) os << ",x" << (j + 1);
  os << "\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    os << detail::format_double(data.y(i));
    for (Eigen::Index j = 0; j < data.p(); ++j)
      os << "," << detail::format_double(data.x(i, j));
    os << "\n";
  }
}

inline void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_dataset_csv(os, data);
  if (!os) throw IoError("write failed: " + path);
}

inline Dataset read_dataset_csv(std::istream& is, const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(name + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "y")
    throw IoError(name + ":1: expected header y,x1,...,xp");
  const std::size_t p = header.size() - 1;
  for (std::size_t j = 0; j < p; ++j)
    if (header[j + 1] != "x" + std::to_string(j + 1))
      throw IoError(name + ":1: expected header y,x1,...,xp");

  std::vector<double> ybuf;
  std::vector<double> xbuf;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto toks = detail::split_csv_line(line);
    if (toks.size() != p + 1)
      throw IoError(where + ": expected " + std::to_string(p + 1) + " fields, got " +
                    std::to_string(toks.size()));
    ybuf.push_back(detail::parse_double(toks[0], where));
    for (std::size_t j = 1; j < toks.size(); ++j)
      xbuf.push_back(detail::parse_double(toks[j], where));
  }
  if (ybuf.empty()) throw IoError(name + ": no observations");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(ybuf.size());
  data.y = Eigen::Map<Vector>(ybuf.data(), n);
  data.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                    Eigen::RowMajor>>(
      xbuf.data(), n, static_cast<Eigen::Index>(p));
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(name + ": " + e.what());
  }
  return data;
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return read_dataset_csv(is, path);
}

// ---------------------------------------------------------------------------
// JSON parameter files.
//
// model 3: {"model": 3, "p": …, "d": …, "gamma": [column-major], "sigma2": …,
//           "nu": {"family": "absdev", "center": …, "scale": …}}
// model 5: {"model": 5, "p": …, "mu": […], "gamma1": […], "gamma2": […],
//           "sigma2": …, "tau": {…}, "nu_mean": {"family": "linear",
//           "slopes": […], "intercepts": […]}}
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix matrix_from_colmajor(const json& arr, Eigen::Index rows,
                                   Eigen::Index cols, const std::string& field) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw IoError("field '" + field + "': expected " + std::to_string(rows * cols) +
                  " numbers (column-major)");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = arr.at(k++).get<double>();
  return m;
}

inline json matrix_to_colmajor(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back(m(i, j));
  return arr;
}

inline Vector vector_from_json(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw IoError("field '" + field + "': expected array");
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr.at(i).get<double>();
  return v;
}

inline json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace detail

inline VarianceProfile variance_profile_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "absdev")
    return VarianceProfile::abs_dev(j.at("center").get<double>(),
                                    j.at("scale").get<double>());
  if (family == "diag_absdev")
    return VarianceProfile::diag_abs_dev(
        detail::vector_from_json(j.at("centers"), "centers"),
        detail::vector_from_json(j.at("scales"), "scales"));
  if (family == "lookup") {
    std::map<double, Matrix> table;
    for (const auto& entry : j.at("table")) {
      const double y = entry.at("y").get<double>();
      const auto d = static_cast<Eigen::Index>(entry.at("d").get<int>());
      table[y] = detail::matrix_from_colmajor(entry.at("m"), d, d, "table.m");
    }
    return VarianceProfile::lookup(std::move(table));
  }
  throw IoError("unknown variance profile family '" + family + "'");
}

inline json variance_profile_to_json(const VarianceProfile& p) {
  json j;
  switch (p.family()) {
    case VarianceProfile::Family::AbsDev:
      j["family"] = "absdev";
      j["center"] = p.centers()(0);
      j["scale"] = p.scales()(0);
      break;
    case VarianceProfile::Family::DiagAbsDev:
      j["family"] = "diag_absdev";
      j["centers"] = detail::vector_to_json(p.centers());
      j["scales"] = detail::vector_to_json(p.scales());
      break;
    case VarianceProfile::Family::Lookup: {
      j["family"] = "lookup";
      json table = json::array();
      for (const auto& [y, m] : p.table()) {
        json e;
        e["y"] = y;
        e["d"] = static_cast<int>(m.rows());
        e["m"] = detail::matrix_to_colmajor(m);
        table.push_back(std::move(e));
      }
      j["table"] = std::move(table);
      break;
    }
  }
  return j;
}

inline MeanProfile mean_profile_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "linear")
    return MeanProfile::linear(detail::vector_from_json(j.at("slopes"), "slopes"),
                               detail::vector_from_json(j.at("intercepts"), "intercepts"));
  if (family == "lookup") {
    std::map<double, Vector> table;
    for (const auto& entry : j.at("table"))
      table[entry.at("y").get<double>()] =
          detail::vector_from_json(entry.at("v"), "table.v");
    return MeanProfile::lookup(std::move(table));
  }
  throw IoError("unknown mean profile family '" + family + "'");
}

inline json mean_profile_to_json(const MeanProfile& p) {
  json j;
  if (p.family() == MeanProfile::Family::Linear) {
    j["family"] = "linear";
    j["slopes"] = detail::vector_to_json(p.slopes());
    j["intercepts"] = detail::vector_to_json(p.intercepts());
  } else {
    j["family"] = "lookup";
    json table = json::array();
    for (const auto& [y, v] : p.table()) {
      json e;
      e["y"] = y;
      e["v"] = detail::vector_to_json(v);
      table.push_back(std::move(e));
    }
    j["table"] = std::move(table);
  }
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline Model3Params model3_params_from_json(const json& j) {
  const auto p = static_cast<Eigen::Index>(j.at("p").get<int>());
  const auto d = static_cast<Eigen::Index>(j.at("d").get<int>());
  Model3Params params{
      StiefelFrame(detail::matrix_from_colmajor(j.at("gamma"), p, d, "gamma")),
      variance_profile_from_json(j.at("nu")), j.at("sigma2").get<double>()};
  params.validate();
  return params;
}

inline Model5Params model5_params_from_json(const json& j) {
  const auto p = static_cast<Eigen::Index>(j.at("p").get<int>());
  const auto d1 = static_cast<Eigen::Index>(j.at("d1").get<int>());
  const auto d2 = static_cast<Eigen::Index>(j.at("d2").get<int>());
  Model5Params params{
      detail::vector_from_json(j.at("mu"), "mu"),
      StiefelFrame(detail::matrix_from_colmajor(j.at("gamma1"), p, d1, "gamma1")),
      mean_profile_from_json(j.at("nu_mean")),
      StiefelFrame(detail::matrix_from_colmajor(j.at("gamma2"), p, d2, "gamma2")),
      variance_profile_from_json(j.at("tau")),
      j.at("sigma2").get<double>()};
  params.validate();
  return params;
}

/// Reads a p x d frame from JSON holding either a fit output ("gamma_hat"
/// with "p"/"d") or a parameter-style "gamma" field.
inline StiefelFrame frame_from_json(const json& j) {
  const std::string field = j.contains("gamma_hat") ? "gamma_hat" : "gamma";
  if (!j.contains(field)) throw IoError("no 'gamma_hat' or 'gamma' field in frame file");
  const auto p = static_cast<Eigen::Index>(j.at("p").get<int>());
  const auto d = static_cast<Eigen::Index>(j.at("d").get<int>());
  return StiefelFrame(detail::matrix_from_colmajor(j.at(field), p, d, field));
}

}  // namespace pvcdr
