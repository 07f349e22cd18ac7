#pragma once

// MuFunction CSV layout:
//   atom0=<f(0)>
//   atom1=<f(1)>
//   x,value
//   <x_i>,<f(x_i)>      (n_grid + 1 rows; first and last rows are the traces)

#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stringmass/error.hpp"
#include "stringmass/format.hpp"
#include "stringmass/mufunc.hpp"

namespace stringmass {

inline void write_csv(std::ostream& os, const MuFunction& f) {
  const GridSpec grid = f.grid();
  os << "atom0=" << format_number(f.atom0) << '\n';
  os << "atom1=" << format_number(f.atom1) << '\n';
  os << "x,value\n";
  for (std::size_t i = 0; i < f.values.size(); ++i)
    os << format_number(grid.x(i)) << ',' << format_number(f.values[i]) << '\n';
}

inline MuFunction read_csv(std::istream& is) {
  auto parse = [](const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
      throw Error(ErrorCode::InvalidArgument, "malformed number '" + text + "'");
    return v;
  };
  std::string line;
  std::optional<double> atom0, atom1;
  bool header = false;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("atom0=", 0) == 0) {
      atom0 = parse(line.substr(6));
    } else if (line.rfind("atom1=", 0) == 0) {
      atom1 = parse(line.substr(6));
    } else if (line == "x,value") {
      header = true;
    } else {
      const auto comma = line.find(',');
      if (!header || comma == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "unexpected line '" + line + "'");
      values.push_back(parse(line.substr(comma + 1)));
    }
  }
  if (!atom0 || !atom1 || !header)
    throw Error(ErrorCode::InvalidArgument, "missing atom0/atom1 records or column header");
  return MuFunction(std::move(values), *atom0, *atom1);
}

}  // namespace stringmass
