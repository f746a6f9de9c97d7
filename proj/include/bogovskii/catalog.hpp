#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "inputs.hpp"

namespace bogovskii {

/// Named analytic input: "name" or "name:a,b,c".
struct InputSpec {
  std::string name;
  std::vector<double> params;
};

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

inline InputSpec parse_input_spec(const std::string& text) {
  InputSpec s;
  auto colon = text.find(':');
  s.name = text.substr(0, colon);
  if (colon != std::string::npos) s.params = parse_number_list(text.substr(colon + 1), "--f " + s.name);
  return s;
}

namespace detail {

inline void expect_params(const InputSpec& s, std::size_t count, const char* layout) {
  if (s.params.size() != count)
    throw Error(ErrorCode::InvalidArgument, "--f " + s.name + ": expected parameters " + layout);
}

template <int N>
Vec<N> take_point(const std::vector<double>& p, std::size_t at) {
  Vec<N> v;
  for (int d = 0; d < N; ++d) v[d] = p[at + d];
  return v;
}

/// Reads "x,y[,z],value" rows (with a header line) onto matching grid nodes.
template <int N>
ScalarField<N> read_field_csv(const std::shared_ptr<const Grid<N>>& grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "--f: cannot open '" + path + "'");
  ScalarField<N> f(grid, true);
  std::string line;
  std::getline(in, line);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto values = parse_number_list(line, path + " row " + std::to_string(row));
    if (values.size() != static_cast<std::size_t>(N + 1))
      throw Error(ErrorCode::InvalidArgument, path + " row " + std::to_string(row) + ": wrong column count");
    typename Grid<N>::Index m;
    for (int d = 0; d < N; ++d) m[d] = static_cast<int>(std::lround(values[d] / grid->h())) - grid->first()[d];
    if (!grid->in_bounds(m))
      throw Error(ErrorCode::InvalidArgument, path + " row " + std::to_string(row) + ": point outside the grid");
    f.values[grid->linear(m)] = values[N];
  }
  return f;
}

}  // namespace detail

/// Samples a catalog input on the grid:
///   dipole                      bump(0.3, 0; 0.2) - bump(-0.3, 0; 0.2)
///   dipole:p..., m..., r        grid-normalized bumps at p and m
///   holder:c..., r, alpha       zero-mean Hölder bump
///   atom:c..., rho, p           smooth h^p atom
///   log:c..., clip              log max(|x - c|, clip), zero mean on the mask
///   <path>.csv                  values read from a CSV file
template <int N>
ScalarField<N> make_input(const std::shared_ptr<const Grid<N>>& grid, const std::string& text) {
  if (text.size() > 4 && text.substr(text.size() - 4) == ".csv") return detail::read_field_csv(grid, text);
  InputSpec s = parse_input_spec(text);
  if (s.name == "dipole") {
    if (s.params.empty()) {
      Vec<N> a, b;
      a[0] = 0.3;
      b[0] = -0.3;
      return dipole(grid, a, b, 0.2);
    }
    detail::expect_params(s, 2 * N + 1, "(plus, minus, radius)");
    return dipole(grid, detail::take_point<N>(s.params, 0), detail::take_point<N>(s.params, N), s.params[2 * N]);
  }
  if (s.name == "holder") {
    detail::expect_params(s, N + 2, "(center, radius, alpha)");
    return holder_bump(grid, detail::take_point<N>(s.params, 0), s.params[N], s.params[N + 1]);
  }
  if (s.name == "atom") {
    detail::expect_params(s, N + 2, "(center, rho, p)");
    return atom(grid, detail::take_point<N>(s.params, 0), s.params[N], s.params[N + 1]);
  }
  if (s.name == "log") {
    detail::expect_params(s, N + 1, "(center, clip)");
    Vec<N> c = detail::take_point<N>(s.params, 0);
    double clip = s.params[N];
    if (!(clip > 0.0)) throw Error(ErrorCode::InvalidArgument, "--f log: clip must be positive");
    auto f = ScalarField<N>::sample(grid, [&](const Vec<N>& x) { return std::log(std::max(norm(x - c), clip)); });
    double mean = integrate(f) / (static_cast<double>(grid->masked_nodes().size()) * grid->cell_volume());
    for (std::size_t i : grid->masked_nodes()) f.values[i] -= mean;
    return f;
  }
  throw Error(ErrorCode::InvalidArgument, "--f: unknown input '" + s.name + "'");
}

/// "trig:10,cubic:10" style family description.
template <int N>
std::vector<AnalyticField<N>> make_family(const std::string& text, std::uint64_t seed) {
  int trig = 0, cubic = 0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--family: expected kind:count");
    std::string kind = item.substr(0, colon);
    int count = 0;
    try {
      count = std::stoi(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--family: bad count in '" + item + "'");
    }
    if (count < 0) throw Error(ErrorCode::InvalidArgument, "--family: negative count");
    if (kind == "trig") trig += count;
    else if (kind == "cubic") cubic += count;
    else throw Error(ErrorCode::InvalidArgument, "--family: unknown kind '" + kind + "'");
  }
  return analytic_family<N>(trig, cubic, seed);
}

}  // namespace bogovskii
