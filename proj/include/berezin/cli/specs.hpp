#ifndef BEREZIN_CLI_SPECS_HPP
#define BEREZIN_CLI_SPECS_HPP

// Text forms of observables, test functions, points and k-grids used on the
// command line and in config files.
//
//   observable  u1 | u2 | u3 | const:C | linear:A1,A2,A3,B | poly:C,E1,E2,E3;C,E1,E2,E3;...
//   chi         component;component;...  with component one of
//               gaussian:CENTER,WIDTH | hermite:CENTER,WIDTH,C0,C1,... |
//               bump:LO,HI | poly:C0,C1,...
//   point       south | north | z=RE[,IM] | w=RE[,IM] | lat=U3,PHI
//   points      point;point;...  or  grid9
//   k-grid      K1,K2,...

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "berezin/asymptotics.hpp"
#include "berezin/cp1_model.hpp"
#include "berezin/observables.hpp"

namespace berezin::cli {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ValidationError("invalid number '" + t + "' in " + std::string(what));
  return v;
}

inline int parse_int(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ValidationError("invalid integer '" + t + "' in " + std::string(what));
  return v;
}

inline std::vector<double> parse_doubles(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (const auto& piece : split(text, ',')) out.push_back(parse_double(piece, what));
  return out;
}

/// Parsed observable plus a canonical text form used for cache keys.
struct ObservableSpec {
  Observable observable;
  std::string canonical;
};

inline ObservableSpec parse_observable(std::string_view text) {
  const std::string t = trim(text);
  if (t == "u1") return {Observable::u1(), "linear:1,0,0,0"};
  if (t == "u2") return {Observable::u2(), "linear:0,1,0,0"};
  if (t == "u3") return {Observable::u3(), "linear:0,0,1,0"};
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ValidationError("unknown observable '" + t + "'");
  const std::string kind = t.substr(0, colon);
  const std::string body = t.substr(colon + 1);
  if (kind == "const") {
    const double c = parse_double(body, "observable const");
    return {Observable::constant(c), "linear:0,0,0," + format_double(c)};
  }
  if (kind == "linear") {
    const auto v = parse_doubles(body, "observable linear");
    if (v.size() != 4) throw ValidationError("linear observable needs 4 numbers a1,a2,a3,b");
    return {Observable::linear(v[0], v[1], v[2], v[3]), "linear:" + format_double(v[0]) + "," + format_double(v[1]) +
                                                           "," + format_double(v[2]) + "," + format_double(v[3])};
  }
  if (kind == "poly") {
    PolynomialU poly;
    std::string canon = "poly:";
    for (const auto& term : split(body, ';')) {
      const auto v = parse_doubles(term, "observable poly term");
      if (v.size() != 4) throw ValidationError("poly term needs coefficient,e1,e2,e3");
      Monomial m{v[0], static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
      if (m.e1 != v[1] || m.e2 != v[2] || m.e3 != v[3] || m.e1 < 0 || m.e2 < 0 || m.e3 < 0)
        throw ValidationError("poly exponents must be nonnegative integers");
      if (canon.size() > 5) canon += ";";
      canon += format_double(m.coefficient) + "," + std::to_string(m.e1) + "," + std::to_string(m.e2) + "," +
               std::to_string(m.e3);
      poly.terms.push_back(m);
    }
    return {Observable(poly), canon};
  }
  throw ValidationError("unknown observable kind '" + kind + "'");
}

inline TestFunction parse_chi(std::string_view text) {
  TestFunction chi;
  for (const auto& raw : split(text, ';')) {
    const std::string comp = trim(raw);
    const auto colon = comp.find(':');
    if (colon == std::string::npos) throw ValidationError("test function component '" + comp + "' lacks ':'");
    const std::string kind = comp.substr(0, colon);
    const auto v = parse_doubles(comp.substr(colon + 1), "chi " + kind);
    try {
      if (kind == "gaussian") {
        if (v.size() != 2) throw ValidationError("gaussian needs center,width");
        chi = chi + TestFunction::gaussian(v[0], v[1]);
      } else if (kind == "hermite") {
        if (v.size() < 3) throw ValidationError("hermite needs center,width,c0[,c1...]");
        chi = chi + TestFunction::hermite(v[0], v[1], std::vector<double>(v.begin() + 2, v.end()));
      } else if (kind == "bump") {
        if (v.size() != 2) throw ValidationError("bump needs lo,hi");
        chi = chi + TestFunction::bump(v[0], v[1]);
      } else if (kind == "poly") {
        chi = chi + TestFunction::polynomial(v);
      } else {
        throw ValidationError("unknown test function kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("chi ") + kind + ": " + e.what());
    }
  }
  return chi;
}

inline complex parse_complex(std::string_view text, std::string_view what) {
  const auto v = parse_doubles(text, what);
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() == 2) return {v[0], v[1]};
  throw ValidationError("complex value needs RE[,IM] in " + std::string(what));
}

inline ModelPoint parse_point(std::string_view text) {
  const std::string t = trim(text);
  if (t == "south") return ModelPoint::south_pole();
  if (t == "north") return ModelPoint::north_pole();
  const auto eq = t.find('=');
  if (eq == std::string::npos) throw ValidationError("unknown point '" + t + "'");
  const std::string kind = t.substr(0, eq);
  const std::string body = t.substr(eq + 1);
  if (kind == "z") return ModelPoint::from_z(parse_complex(body, "point z"));
  if (kind == "w") return ModelPoint::from_w(parse_complex(body, "point w"));
  if (kind == "lat") {
    const auto v = parse_doubles(body, "point lat");
    if (v.size() != 2) throw ValidationError("lat point needs u3,phi");
    if (!(v[0] >= -1.0 && v[0] <= 1.0)) throw ValidationError("lat point u3 outside [-1, 1]");
    return ModelPoint::from_latitude(v[0], v[1]);
  }
  throw ValidationError("unknown point kind '" + kind + "'");
}

inline std::vector<ModelPoint> parse_points(std::string_view text) {
  if (trim(text) == "grid9") return default_point_grid();
  std::vector<ModelPoint> out;
  for (const auto& p : split(text, ';')) out.push_back(parse_point(p));
  return out;
}

inline std::vector<int> parse_k_list(std::string_view text) {
  if (trim(text).empty()) throw ValidationError("k-grid is empty");
  std::vector<int> ks;
  for (const auto& piece : split(text, ',')) {
    const int k = parse_int(piece, "k-grid");
    if (k < 0) throw ValidationError("k values must be nonnegative");
    ks.push_back(k);
  }
  return ks;
}

/// Comma-free label such as z=0.5-0.25i, safe inside CSV fields.
inline std::string describe_point(const ModelPoint& m) {
  const auto w = m.coordinate();
  return std::string(m.chart() == Chart::South ? "z=" : "w=") + format_double(w.real()) +
         (std::signbit(w.imag()) ? "-" : "+") + format_double(std::abs(w.imag())) + "i";
}

}  // namespace berezin::cli

#endif  // BEREZIN_CLI_SPECS_HPP
