#pragma once

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "counterexample.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "lipschitz.hpp"
#include "sweep.hpp"

namespace bogovskii {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

namespace detail {

[[noreturn]] inline void bad_field(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, path + ": " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad_field(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad_field(path + "." + key, "missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  return j.get<double>();
}

template <int N>
Vec<N> point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N))
    bad_field(path, "expected an array of " + std::to_string(N) + " numbers");
  Vec<N> v;
  for (int d = 0; d < N; ++d) v[d] = number(j[d], path + "[" + std::to_string(d) + "]");
  return v;
}

}  // namespace detail

/// Dimension declared by a domain config; 2 when absent.
inline int config_dim(const json& j) {
  if (!j.contains("dim")) return 2;
  const json& d = j["dim"];
  if (!d.is_number_integer() || (d.get<int>() != 2 && d.get<int>() != 3)) detail::bad_field("dim", "expected 2 or 3");
  return d.get<int>();
}

inline bool config_is_lipschitz(const json& j) { return j.is_object() && j.contains("pieces"); }

template <int N>
Ball<N> parse_ball(const json& j, const std::string& path) {
  Ball<N> b;
  b.center = detail::point<N>(detail::field(j, "center", path), path + ".center");
  b.radius = detail::number(detail::field(j, "radius", path), path + ".radius");
  if (!(b.radius > 0.0)) detail::bad_field(path + ".radius", "must be positive");
  return b;
}

template <int N>
Shape<N> parse_shape(const json& j, const std::string& path) {
  const json& kind_j = detail::field(j, "kind", path);
  if (!kind_j.is_string()) detail::bad_field(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "disk" || kind == "ball") return parse_ball<N>(j, path);
  if (kind == "ellipse" || kind == "ellipsoid") {
    Ellipsoid<N> e;
    e.center = detail::point<N>(detail::field(j, "center", path), path + ".center");
    e.semi_axes = detail::point<N>(detail::field(j, "semi_axes", path), path + ".semi_axes");
    return e;
  }
  if (kind == "rectangle" || kind == "box") {
    Box<N> b;
    b.lo = detail::point<N>(detail::field(j, "lo", path), path + ".lo");
    b.hi = detail::point<N>(detail::field(j, "hi", path), path + ".hi");
    return b;
  }
  if (kind == "star_polygon") {
    if constexpr (N != 2) {
      detail::bad_field(path + ".kind", "star_polygon is two-dimensional");
    } else {
      const json& v = detail::field(j, "vertices", path);
      if (!v.is_array() || v.size() < 3) detail::bad_field(path + ".vertices", "expected at least three points");
      StarPolygon poly;
      for (std::size_t k = 0; k < v.size(); ++k)
        poly.vertices.push_back(detail::point<2>(v[k], path + ".vertices[" + std::to_string(k) + "]"));
      return poly;
    }
  }
  detail::bad_field(path + ".kind", "unknown shape '" + kind + "'");
}

template <int N>
StarDomain<N> parse_star_domain(const json& j, const std::string& path = "domain") {
  Shape<N> shape = parse_shape<N>(detail::field(j, "shape", path), path + ".shape");
  Ball<N> ball = parse_ball<N>(detail::field(j, "ball", path), path + ".ball");
  int samples = 10000;
  if (j.contains("samples")) samples = static_cast<int>(detail::number(j["samples"], path + ".samples"));
  return StarDomain<N>(shape, ball, samples);
}

/// The mollifier: the "mollifier" entry when present, else the unit bump on the ball.
template <int N>
Mollifier<N> parse_mollifier(const json& j, const StarDomain<N>& dom, const std::string& path = "domain") {
  if (!j.contains("mollifier")) return make_bump<N>(dom.ball().center, dom.ball().radius);
  Ball<N> b = parse_ball<N>(j["mollifier"], path + ".mollifier");
  return make_bump<N>(b.center, b.radius);
}

template <int N>
LipschitzDomain<N> parse_lipschitz_domain(const json& j, const std::string& path = "domain") {
  const json& pieces = detail::field(j, "pieces", path);
  if (!pieces.is_array() || pieces.empty()) detail::bad_field(path + ".pieces", "expected a nonempty array");
  std::vector<StarDomain<N>> doms;
  for (std::size_t k = 0; k < pieces.size(); ++k)
    doms.push_back(parse_star_domain<N>(pieces[k], path + ".pieces[" + std::to_string(k) + "]"));
  std::vector<Mollifier<N>> bumps;
  if (j.contains("overlap_bumps")) {
    const json& ob = j["overlap_bumps"];
    if (!ob.is_array()) detail::bad_field(path + ".overlap_bumps", "expected an array");
    for (std::size_t k = 0; k < ob.size(); ++k) {
      Ball<N> b = parse_ball<N>(ob[k], path + ".overlap_bumps[" + std::to_string(k) + "]");
      bumps.push_back(make_bump<N>(b.center, b.radius));
    }
  }
  return LipschitzDomain<N>(std::move(doms), std::move(bumps));
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

/// FNV-1a of the canonical (sorted-key) serialization.
inline std::string config_hash(const json& j) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

/// Comma-separated table with a header row; numbers at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) { write_strings(header); }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
    out_ << '\n';
  }

  void row(const std::string& label, const std::vector<double>& values) {
    out_ << label;
    for (double v : values) out_ << ',' << format_number(v);
    out_ << '\n';
  }

 private:
  void write_strings(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  std::ostream& out_;
};

inline void write_csv(std::ostream& out, const SweepReport& r) {
  CsvWriter w(out, {"label", "numerator", "denominator", "ratio", "skipped"});
  for (const auto& row : r.rows) w.row(row.label, {row.numerator, row.denominator, row.ratio, row.skipped ? 1.0 : 0.0});
}

inline json to_json(const SweepReport& r) {
  json j;
  j["name"] = r.name;
  j["parameters"] = r.parameters;
  j["supremum"] = r.supremum;
  j["infimum"] = r.infimum;
  j["spread"] = r.spread();
  j["members"] = r.rows.size();
  j["skipped"] = r.rows.size() - r.counted();
  return j;
}

inline void write_csv(std::ostream& out, const CounterexampleReport& r) {
  CsvWriter w(out, {"delta", "pairing", "l1", "ratio"});
  for (const auto& row : r.rows) w.row({row.delta, row.pairing, row.l1, row.ratio});
}

/// One line per node: coordinates then the field components.
template <int N, class T>
void write_field_csv(std::ostream& out, const GridField<N, T>& f, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& nodes) {
  std::vector<std::string> header;
  const char* axes[] = {"x", "y", "z"};
  for (int d = 0; d < N; ++d) header.push_back(axes[d]);
  header.insert(header.end(), names.begin(), names.end());
  CsvWriter w(out, header);
  std::vector<double> row;
  for (std::size_t i : nodes) {
    row.clear();
    Vec<N> x = f.grid->point(i);
    for (int d = 0; d < N; ++d) row.push_back(x[d]);
    for (int k = 0; k < ValueTraits<T>::components; ++k) row.push_back(ValueTraits<T>::at(f.values[i], k));
    w.row(row);
  }
}

}  // namespace bogovskii
