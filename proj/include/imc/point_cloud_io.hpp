#pragma once

// Point cloud CSV with a JSON metadata sidecar at <path>.meta.json.
// CSV schema: header `x0,...,x{n-1},weight`, decimal floats, LF endings.
// Doubles are written with 17 significant digits so save/load round-trips
// values bit-exactly.

#include "imc/manifold.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace imc {

class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError(context + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string sidecar_path(const std::string& path) {
  return path + ".meta.json";
}

inline void save_point_cloud(const SampledManifold& manifold,
                             const std::string& path) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw std::runtime_error("save_point_cloud: cannot open " + path);
  for (int c = 0; c < manifold.n(); ++c) csv << "x" << c << ",";
  csv << "weight\n";
  for (int i = 0; i < manifold.size(); ++i) {
    const double* p = manifold.point_ptr(i);
    for (int c = 0; c < manifold.n(); ++c)
      csv << detail::format_double(p[c]) << ",";
    csv << detail::format_double(manifold.weight(i)) << "\n";
  }

  nlohmann::json meta;
  meta["m"] = manifold.m();
  meta["n"] = manifold.n();
  meta["label"] = manifold.label();
  meta["shape_params"] =
      nlohmann::json::parse(manifold.shape_params(), nullptr, false);
  if (meta["shape_params"].is_discarded())
    meta["shape_params"] = nlohmann::json::object();
  std::ofstream side(sidecar_path(path), std::ios::binary);
  side << meta.dump(2) << "\n";
}

/// Loads a CSV + sidecar pair. `m_override > 0` replaces (or supplies, when
/// the sidecar is missing) the declared intrinsic dimension.
inline SampledManifold load_point_cloud(const std::string& path,
                                        int m_override = 0) {
  std::ifstream csv(path, std::ios::binary);
  if (!csv) throw std::runtime_error("load_point_cloud: cannot open " + path);

  int m = m_override;
  std::string label = "loaded";
  std::string shape_params = "{}";
  {
    std::ifstream side(sidecar_path(path), std::ios::binary);
    if (side) {
      nlohmann::json meta = nlohmann::json::parse(side, nullptr, false);
      if (meta.is_discarded())
        throw ParseError(sidecar_path(path) + ": invalid JSON");
      if (m_override == 0) m = meta.value("m", 0);
      label = meta.value("label", label);
      if (meta.contains("shape_params")) shape_params = meta["shape_params"].dump();
    } else if (m_override == 0) {
      throw ParseError(path + ": missing sidecar " + sidecar_path(path) +
                       " and no intrinsic dimension given");
    }
  }

  std::string line;
  if (!std::getline(csv, line)) throw ParseError(path + ": empty file");
  const auto header = detail::split_csv(line);
  const int n = static_cast<int>(header.size()) - 1;
  if (n < 1 || header.back() != "weight")
    throw ParseError(path + ": header must be x0,...,x{n-1},weight");
  for (int c = 0; c < n; ++c)
    if (header[c] != "x" + std::to_string(c))
      throw ParseError(path + ": unexpected header column '" + header[c] + "'");

  std::vector<double> pts;
  std::vector<double> ws;
  int lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string context = path + ":line " + std::to_string(lineno);
    const auto cells = detail::split_csv(line);
    if (static_cast<int>(cells.size()) != n + 1)
      throw ParseError(context + ": expected " + std::to_string(n + 1) +
                       " columns, got " + std::to_string(cells.size()));
    for (int c = 0; c < n; ++c)
      pts.push_back(detail::parse_double(cells[c], context));
    const double w = detail::parse_double(cells[n], context);
    if (!(w > 0.0)) throw ParseError(context + ": nonpositive weight");
    ws.push_back(w);
  }
  if (ws.empty()) throw ParseError(path + ": no data rows");
  if (m < 1 || m >= n)
    throw ParseError(path + ": declared m = " + std::to_string(m) +
                     " incompatible with n = " + std::to_string(n));
  return {m, n, std::move(pts), std::move(ws), label, shape_params};
}

}  // namespace imc
