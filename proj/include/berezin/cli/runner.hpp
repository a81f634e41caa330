#ifndef BEREZIN_CLI_RUNNER_HPP
#define BEREZIN_CLI_RUNNER_HPP

// berezin-lab subcommands.  Exit codes: 0 success, 2 validation error,
// 3 numerical-contract violation.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "berezin/asymptotics.hpp"
#include "berezin/cli/cache.hpp"
#include "berezin/cli/specs.hpp"
#include "berezin/eigensolver.hpp"
#include "berezin/phase_lab.hpp"
#include "berezin/spectral_measures.hpp"
#include "berezin/toeplitz.hpp"

namespace berezin::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kValidation = 2, kViolation = 3 };

/// A numerical contract was broken; carries the machine-readable record.
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(Json record)
      : std::runtime_error(record.value("message", std::string("contract violation"))), record_(std::move(record)) {}
  const Json& record() const { return record_; }

 private:
  Json record_;
};

/// Every option the runner knows; the same names are the keys of a config file.
inline const std::vector<std::pair<std::string, std::string>>& option_table() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"observable", "u1 | u2 | u3 | const:C | linear:A1,A2,A3,B | poly:C,E1,E2,E3;..."},
      {"chi", "test function, components joined by ';'"},
      {"point", "single point: south | north | z=RE[,IM] | w=RE[,IM] | lat=U3,PHI"},
      {"points", "points joined by ';' or grid9"},
      {"k", "single level"},
      {"k-grid", "comma separated levels"},
      {"fit-order", "number of 1/k corrections in the fit"},
      {"cache-dir", "spectrum cache directory (default $BEREZIN_CACHE_DIR)"},
      {"out", "output file, or directory for report"},
      {"assembly", "auto | closed | quadrature"},
      {"radial-order", "quadrature radial nodes"},
      {"angular-order", "quadrature angular nodes"},
      {"omega0", "phase parameter omega0 > 0"},
      {"q", "phase parameter q"},
      {"c2", "phase remainder coefficient"},
      {"resolution", "grid nodes per axis for the stationary-point scan"},
      {"tol-residual", "eigen-residual tolerance relative to ||T||_F"},
      {"tol-mass", "local measure mass tolerance"},
      {"tol-szego", "Szego error tolerance at the largest k"},
      {"ratio-min", "lower bound of successive Szego error ratios"},
      {"ratio-max", "upper bound of successive Szego error ratios"},
      {"tol-gradient", "gradient tolerance at the stationary point"},
      {"tol-det", "Hessian determinant tolerance"},
  };
  return table;
}

/// Reads `key = value` lines; '#' starts a comment.  Unknown keys and lines
/// without '=' are rejected with the line number.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    bool known = false;
    for (const auto& [name, help] : option_table()) known = known || name == key;
    if (!known) throw ValidationError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

/// Validated experiment description.
struct ExperimentConfig {
  std::string command;
  std::map<std::string, std::string> raw;

  bool has(const std::string& key) const { return raw.count(key) != 0; }
  const std::string& get(const std::string& key) const {
    const auto it = raw.find(key);
    if (it == raw.end()) throw ValidationError("missing --" + key);
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw.at(key) : fallback;
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? parse_double(raw.at(key), key) : fallback;
  }
  double tolerance(const std::string& key, double fallback) const {
    const double t = number(key, fallback);
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError(key + " must be a positive number");
    return t;
  }
  int integer(const std::string& key, int fallback) const { return has(key) ? parse_int(raw.at(key), key) : fallback; }

  ObservableSpec observable() const { return parse_observable(get("observable")); }
  TestFunction chi(const std::string& fallback = "") const {
    if (!has("chi") && !fallback.empty()) return parse_chi(fallback);
    return parse_chi(get("chi"));
  }
  std::vector<int> levels(const std::vector<int>& fallback = {}) const {
    if (has("k") && has("k-grid")) throw ValidationError("give either --k or --k-grid, not both");
    if (has("k")) {
      const int k = parse_int(get("k"), "k");
      if (k < 0) throw ValidationError("k must be nonnegative");
      return {k};
    }
    if (has("k-grid")) return parse_k_list(get("k-grid"));
    if (fallback.empty()) throw ValidationError("missing --k or --k-grid");
    return fallback;
  }
  std::vector<ModelPoint> points(bool default_grid) const {
    if (has("point") && has("points")) throw ValidationError("give either --point or --points, not both");
    if (has("point")) return {parse_point(get("point"))};
    if (has("points")) return parse_points(get("points"));
    if (default_grid) return default_point_grid();
    throw ValidationError("missing --point or --points");
  }
};

/// Assembles and diagonalizes, going through the cache when one is configured.
class SpectrumEngine {
 public:
  SpectrumEngine(const ExperimentConfig& cfg, std::ostream& err) : err_(err), spec_(cfg.observable()) {
    mode_ = cfg.get_or("assembly", "auto");
    if (mode_ != "auto" && mode_ != "closed" && mode_ != "quadrature")
      throw ValidationError("assembly must be auto, closed or quadrature");
    if (mode_ == "closed" && !spec_.observable.exactly_integrable())
      throw ValidationError("closed-form assembly needs a linear or polynomial observable");
    if (cfg.has("radial-order") || cfg.has("angular-order")) {
      if (mode_ == "closed") throw ValidationError("quadrature orders given with closed assembly");
      mode_ = "quadrature";
      radial_ = cfg.integer("radial-order", 0);
      angular_ = cfg.integer("angular-order", 0);
      if ((cfg.has("radial-order") && radial_ < 1) || (cfg.has("angular-order") && angular_ < 1))
        throw ValidationError("quadrature orders must be positive");
    }
    if (mode_ == "auto") mode_ = spec_.observable.exactly_integrable() ? "closed" : "quadrature";
    tol_residual_ = cfg.tolerance("tol-residual", 1e-10);
    std::string dir = cfg.get_or("cache-dir", "");
    if (dir.empty()) {
      if (const char* env = std::getenv("BEREZIN_CACHE_DIR")) dir = env;
    }
    if (!dir.empty()) {
      try {
        cache_ = std::make_unique<SpectrumCache>(dir, &err_);
      } catch (const std::runtime_error& e) {
        throw ValidationError(e.what());
      }
    }
  }

  const ObservableSpec& spec() const { return spec_; }
  const Observable& observable() const { return spec_.observable; }
  const SpectrumCache* cache() const { return cache_.get(); }

  QuadratureScheme scheme(int k) const {
    auto s = QuadratureScheme::for_level(k, spec_.observable.bandwidth());
    if (radial_ > 0) s.radial_order = radial_;
    if (angular_ > 0) s.angular_order = angular_;
    return s;
  }

  std::string provenance(int k) const {
    if (mode_ == "closed") return "closed";
    const auto s = scheme(k);
    return "quadrature(" + std::to_string(s.radial_order) + "," + std::to_string(s.angular_order) + ")";
  }

  SpectralData operator()(int k) {
    CacheKey key{spec_.canonical, k, mode_, 0, 0};
    if (mode_ == "quadrature") {
      const auto s = scheme(k);
      key.radial_order = s.radial_order;
      key.angular_order = s.angular_order;
    }
    if (cache_) {
      if (auto hit = cache_->lookup(key)) return std::move(hit->spectrum);
    }
    const Level level(k);
    HermitianMatrix t = mode_ == "closed" ? assemble_closed(level, spec_.observable)
                                          : assemble_quadrature(level, spec_.observable, scheme(k));
    if (t.provenance().accuracy_warning)
      err_ << "warning: level " << k << ": quadrature does not resolve the symbol exactly\n";
    SpectralData s = eigh(t);
    const auto chk = check_spectral(t, s);
    const double scale = std::max(1.0, t.frobenius_norm());
    if (chk.residual > tol_residual_ * scale) {
      throw ContractViolation(Json{{"violation", "eigen-residual"},
                                   {"k", k},
                                   {"value", chk.residual},
                                   {"tolerance", tol_residual_ * scale},
                                   {"message", "eigen-residual above tolerance at level " + std::to_string(k)}});
    }
    if (cache_) cache_->store(key, {s, t.provenance().describe()});
    return s;
  }

 private:
  std::ostream& err_;
  ObservableSpec spec_;
  std::string mode_;
  int radial_ = 0;
  int angular_ = 0;
  double tol_residual_ = 1e-10;
  std::unique_ptr<SpectrumCache> cache_;
};

/// Writes text to `path`, or to `fallback` when path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
  if (!out) throw ValidationError("cannot write " + path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Binomial oracle for linear symbols f = a.u + b: with rho = |a| the local
/// measure at m is the binomial law on rho (2j - k)/(k + 2) + b with
/// p = (1 + a.u(m)/rho)/2.
struct LinearOracle {
  double rho = 0.0;
  double b = 0.0;
  std::array<double, 3> axis{0.0, 0.0, 1.0};

  static std::optional<LinearOracle> of(const Observable& f) {
    if (!f.is_linear()) return std::nullopt;
    const auto& lin = std::get<LinearU>(f.kind());
    LinearOracle o;
    o.rho = std::sqrt(lin.a[0] * lin.a[0] + lin.a[1] * lin.a[1] + lin.a[2] * lin.a[2]);
    o.b = lin.b;
    if (o.rho > 0.0)
      for (int i = 0; i < 3; ++i) o.axis[i] = lin.a[i] / o.rho;
    return o;
  }
  double axial(const ModelPoint& m) const {
    const auto u = m.sphere_coords();
    return axis[0] * u[0] + axis[1] * u[1] + axis[2] * u[2];
  }
  /// chi(rho s + b) as a function of s.
  TestFunction pulled_back(const TestFunction& chi) const { return chi.translated(-b).dilated(rho); }

  double value(int k, const ModelPoint& m, const TestFunction& chi) const {
    if (rho == 0.0) return (1.0 + 1.0 / k) * chi(b);
    const double p = std::clamp(0.5 * (1.0 + axial(m)), 0.0, 1.0);
    return binomial_oracle(k, p, pulled_back(chi));
  }
  std::optional<double> c1(const ModelPoint& m, const TestFunction& chi) const {
    if (rho == 0.0) return chi(b);
    return edgeworth_c1(pulled_back(chi), std::clamp(axial(m), -1.0, 1.0));
  }
};

inline std::string csv_header(const std::string& title, const ExperimentConfig& cfg, const SpectrumEngine& eng,
                              const std::vector<int>& ks, const std::string& units) {
  std::string h = "# berezin-lab " + title + "\n";
  h += "# observable: " + eng.spec().canonical + "\n";
  if (cfg.has("chi")) h += "# chi: " + cfg.get("chi") + "\n";
  h += "# units: " + units + "\n";
  h += "# provenance: model=" + std::string(kModelVersion);
  for (int k : ks) h += "; k=" + std::to_string(k) + ":" + eng.provenance(k);
  h += "\n";
  return h;
}

inline int cmd_spectrum(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  SpectrumEngine eng(cfg, err);
  const auto ks = cfg.levels();
  std::string text = csv_header("spectrum", cfg, eng, ks, "eigenvalues in symbol units") + "k,index,eigenvalue\n";
  for (int k : ks) {
    const auto s = eng(k);
    for (int j = 0; j < s.dim(); ++j)
      text += std::to_string(k) + "," + std::to_string(j) + "," + format_double(s.eigenvalues[j]) + "\n";
  }
  emit(cfg.get_or("out", ""), text, out);
  return kOk;
}

inline int cmd_local_measure(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  SpectrumEngine eng(cfg, err);
  const auto ks = cfg.levels();
  const auto pts = cfg.points(false);
  const double tol = cfg.tolerance("tol-mass", 1e-10);
  std::string text = csv_header("local-measure", cfg, eng, ks,
                                "atoms in symbol units; weights in 1/area (Fubini-Study area, total pi)") +
                     "k,point,index,atom,weight\n";
  for (int k : ks) {
    const auto s = eng(k);
    for (const auto& m : pts) {
      const auto mu = local_measure(s, m);
      const double expect = bergman_diagonal(k, m);
      if (std::abs(mu.total_mass() - expect) > tol * expect)
        throw ContractViolation(Json{{"violation", "local-mass"},
                                     {"k", k},
                                     {"point", describe_point(m)},
                                     {"value", mu.total_mass()},
                                     {"expected", expect},
                                     {"tolerance", tol},
                                     {"message", "local measure mass differs from the Bergman density"}});
      for (int j = 0; j < s.dim(); ++j)
        text += std::to_string(k) + "," + describe_point(m) + "," + std::to_string(j) + "," +
                format_double(mu.atoms[j]) + "," + format_double(mu.weights[j]) + "\n";
    }
  }
  emit(cfg.get_or("out", ""), text, out);
  return kOk;
}

inline int cmd_global_measure(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  SpectrumEngine eng(cfg, err);
  const auto ks = cfg.levels();
  std::string text = csv_header("global-measure", cfg, eng, ks, "atoms in symbol units; unit weights") +
                     "k,index,atom,weight\n";
  for (int k : ks) {
    const auto mu = global_measure(eng(k));
    for (std::size_t j = 0; j < mu.atoms.size(); ++j)
      text += std::to_string(k) + "," + std::to_string(j) + "," + format_double(mu.atoms[j]) + "," +
              format_double(mu.weights[j]) + "\n";
  }
  emit(cfg.get_or("out", ""), text, out);
  return kOk;
}

/// Pairing sequence, fit and oracle comparison at one point.
struct PointStudy {
  ModelPoint point;
  std::vector<double> a;
  std::vector<std::optional<double>> oracle;
  ExpansionFit fit;
  std::optional<RichardsonEstimate> richardson;
  std::optional<double> c1_expected;
};

inline std::vector<PointStudy> study(SpectrumEngine& eng, const std::vector<ModelPoint>& pts, const TestFunction& chi,
                                     const KGrid& grid, int order) {
  const auto& ks = grid.values();
  std::vector<SpectralData> spectra;
  spectra.reserve(ks.size());
  for (int k : ks) spectra.push_back(eng(k));
  const auto oracle = LinearOracle::of(eng.observable());
  std::vector<PointStudy> out;
  for (const auto& m : pts) {
    PointStudy ps{m, {}, {}, {}, std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < ks.size(); ++i) {
      ps.a.push_back(normalized_pairing(spectra[i], m, chi));
      ps.oracle.push_back(oracle ? std::optional<double>(oracle->value(ks[i], m, chi)) : std::nullopt);
    }
    try {
      ps.fit = fit_expansion(ps.a, grid, order);
    } catch (const ConditioningError& e) {
      throw ContractViolation(Json{{"violation", "fit-conditioning"},
                                   {"point", describe_point(m)},
                                   {"value", e.condition},
                                   {"message", e.what()}});
    }
    if (ks.size() >= 3) ps.richardson = richardson_extract(ps.a, ks);
    if (oracle) ps.c1_expected = oracle->c1(m, chi);
    out.push_back(std::move(ps));
  }
  return out;
}

inline Json fit_json(const PointStudy& ps, const Observable& f, const TestFunction& chi) {
  Json j;
  j["point"] = describe_point(ps.point);
  const double fval = f(ps.point);
  j["symbol_value"] = fval;
  j["chi_of_symbol"] = chi(fval);
  j["coefficients"] = ps.fit.coefficients;
  j["residual"] = ps.fit.residual;
  j["condition"] = ps.fit.condition;
  j["self_consistent"] = ps.fit.self_consistent();
  if (ps.richardson) j["richardson"] = Json{{"c0", ps.richardson->c0}, {"c1", ps.richardson->c1}};
  if (ps.c1_expected) j["expected_c1"] = *ps.c1_expected;
  return j;
}

inline int fit_order(const ExperimentConfig& cfg) {
  const int order = cfg.integer("fit-order", 2);
  if (order < 0) throw ValidationError("fit-order must be nonnegative");
  return order;
}

inline KGrid fit_grid(const ExperimentConfig& cfg) {
  const int order = fit_order(cfg);
  if (!cfg.has("k") && !cfg.has("k-grid")) return KGrid(KGrid::standard().values(), order);
  return KGrid(cfg.levels(), order);
}

inline int cmd_fit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = fit_grid(cfg);
  const auto chi = cfg.chi();
  const auto pts = cfg.points(false);
  if (pts.size() != 1) throw ValidationError("fit takes a single --point; use report for several");
  SpectrumEngine eng(cfg, err);
  const auto res = study(eng, pts, chi, grid, fit_order(cfg));
  Json j;
  j["observable"] = eng.spec().canonical;
  j["chi"] = cfg.get("chi");
  j["k_grid"] = grid.values();
  j["sequence"] = res[0].a;
  j["fit"] = fit_json(res[0], eng.observable(), chi);
  emit(cfg.get_or("out", ""), dump(j), out);
  return kOk;
}

inline int cmd_report(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = fit_grid(cfg);
  const auto chi = cfg.chi();
  const auto pts = cfg.points(true);
  const std::string dir = cfg.get("out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ValidationError("cannot create output directory " + dir);
  SpectrumEngine eng(cfg, err);
  const auto res = study(eng, pts, chi, grid, fit_order(cfg));
  const auto& ks = grid.values();

  const std::string header = csv_header("report", cfg, eng, ks, "a_k = (pi/k) <mu_k(m), chi>, dimensionless");
  std::string seq = header + "point,k,a_k,oracle,difference\n";
  std::string plot = header + "point,inv_k,a_k\n";
  Json fits = Json::array();
  for (const auto& ps : res) {
    const std::string name = describe_point(ps.point);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      seq += name + "," + std::to_string(ks[i]) + "," + format_double(ps.a[i]) + ",";
      if (ps.oracle[i]) seq += format_double(*ps.oracle[i]) + "," + format_double(ps.a[i] - *ps.oracle[i]);
      else seq += ",";
      seq += "\n";
      plot += name + "," + format_double(1.0 / ks[i]) + "," + format_double(ps.a[i]) + "\n";
    }
    fits.push_back(fit_json(ps, eng.observable(), chi));
  }
  Json j;
  j["observable"] = eng.spec().canonical;
  j["chi"] = cfg.get("chi");
  j["k_grid"] = ks;
  j["fit_order"] = fit_order(cfg);
  j["points"] = fits;
  const auto base = std::filesystem::path(dir);
  emit((base / "sequence.csv").string(), seq, out);
  emit((base / "plot.csv").string(), plot, out);
  emit((base / "fit.json").string(), dump(j), out);
  out << "wrote " << (base / "sequence.csv").string() << ", " << (base / "plot.csv").string() << ", "
      << (base / "fit.json").string() << "\n";
  return kOk;
}

inline int finish_verify(Json j, const ExperimentConfig& cfg, std::ostream& out) {
  const bool ok = j["violations"].empty();
  j["status"] = ok ? "pass" : "fail";
  emit(cfg.get_or("out", ""), dump(j), out);
  if (cfg.has("out") && !ok) out << dump(j["violations"]);
  return ok ? kOk : kViolation;
}

inline int cmd_verify_szego(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto chi = cfg.chi("gaussian:0,0.70710678118654752");
  const auto ks = cfg.levels({64, 128, 256, 512});
  for (int k : ks)
    if (k < 1) throw ValidationError("verify-szego needs k >= 1");
  const double tol = cfg.tolerance("tol-szego", 5e-3);
  const double rmin = cfg.tolerance("ratio-min", 0.4);
  const double rmax = cfg.tolerance("ratio-max", 0.6);
  SpectrumEngine eng(cfg, err);
  const auto chk = szego_limit_check(eng.observable(), chi, ks, [&](const Observable&, int k) { return eng(k); });

  Json j;
  j["observable"] = eng.spec().canonical;
  j["chi"] = cfg.get_or("chi", "gaussian:0,0.70710678118654752");
  j["target"] = chk.target;
  j["k_grid"] = chk.ks;
  j["values"] = chk.values;
  std::vector<double> errors;
  for (std::size_t i = 0; i < chk.ks.size(); ++i) errors.push_back(chk.error(i));
  j["errors"] = errors;
  Json ratios = Json::array();
  Json violations = Json::array();
  for (std::size_t i = 0; i + 1 < chk.ks.size(); ++i) {
    if (chk.ks[i + 1] != 2 * chk.ks[i]) continue;
    const double r = errors[i + 1] / errors[i];
    ratios.push_back(Json{{"k", chk.ks[i]}, {"k_next", chk.ks[i + 1]}, {"ratio", r}});
    if (!(r >= rmin && r <= rmax))
      violations.push_back(Json{{"check", "error-ratio"}, {"k", chk.ks[i]}, {"value", r}, {"min", rmin}, {"max", rmax}});
  }
  j["ratios"] = ratios;
  if (!(errors.back() <= tol))
    violations.push_back(Json{{"check", "error-at-largest-k"}, {"k", chk.ks.back()}, {"value", errors.back()}, {"tolerance", tol}});
  j["violations"] = violations;
  return finish_verify(std::move(j), cfg, out);
}

inline int cmd_verify_lemma(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const double w0 = cfg.number("omega0", 1.0);
  if (!(w0 > 0.0)) throw ValidationError("omega0 must be positive");
  const phase::PhaseParams p(w0, cfg.number("q", 1.0), cfg.number("c2", 0.0));
  const int res = cfg.integer("resolution", 7);
  if (res < 2) throw ValidationError("resolution must be at least 2");
  const double tol_grad = cfg.tolerance("tol-gradient", 1e-12);
  const double tol_det = cfg.tolerance("tol-det", 1e-8);

  const auto cp = phase::critical_point(p);
  const double gnorm = phase::gradient_norm(phase::phase_gradient(p, cp));
  const auto det = phase::hessian_det(p);
  const double expected = -w0 * w0;
  const auto scan = phase::scan_stationary(p, phase::ScanBox::around(p), res);

  Json j;
  j["omega0"] = p.omega0;
  j["q"] = p.qval;
  j["c2"] = p.c2;
  j["critical_point"] = Json{{"t", cp.t}, {"theta", cp.theta}, {"vartheta", cp.vartheta},
                             {"lambda", cp.lambda}, {"tau", cp.tau}, {"r", cp.r}};
  j["gradient_norm"] = gnorm;
  j["hessian_det"] = Json{{"re", det.value.real()}, {"im", det.value.imag()}};
  j["expected_det"] = expected;
  j["permutation_parity"] = det.permutation_parity;
  Json cands = Json::array();
  double worst_offset = 0.0;
  for (const auto& c : scan.candidates) {
    const auto a = c.refined.as_array();
    const auto b = cp.as_array();
    double off = 0.0;
    for (int d = 0; d < 6; ++d) off = std::max(off, std::abs(a[d] - b[d]));
    worst_offset = std::max(worst_offset, off);
    cands.push_back(Json{{"refined", a}, {"gradient_norm", c.refined_norm}, {"distance", off}});
  }
  j["scan"] = Json{{"resolution", res}, {"min_grid_gradient", scan.min_grid_norm}, {"candidates", cands}};
  Json violations = Json::array();
  if (!(gnorm <= tol_grad))
    violations.push_back(Json{{"check", "gradient-at-critical-point"}, {"value", gnorm}, {"tolerance", tol_grad}});
  const double det_err = std::abs(det.value - phase::complex(expected, 0.0));
  if (!(det_err <= tol_det))
    violations.push_back(Json{{"check", "hessian-determinant"}, {"value", det_err}, {"tolerance", tol_det}});
  if (scan.candidates.size() != 1 || worst_offset > 1e-8)
    violations.push_back(Json{{"check", "unique-stationary-point"},
                              {"candidates", scan.candidates.size()},
                              {"distance", worst_offset}});
  j["violations"] = violations;
  return finish_verify(std::move(j), cfg, out);
}

/// Entry point.  Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app("Berezin-Toeplitz spectral measures on CP^1", "berezin-lab");
  app.require_subcommand(1);
  std::map<std::string, std::string> cli_values;
  std::map<std::string, CLI::Option*> cli_options;
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; command-line options take precedence");
  for (const auto& [name, help] : option_table())
    cli_options[name] = app.add_option("--" + name, cli_values[name], help);
  static const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "eigenvalues of T_k(f)"},
      {"local-measure", "local spectral measures at points"},
      {"global-measure", "global counting measures"},
      {"fit", "1/k expansion of the normalized local pairing at a point"},
      {"report", "sequence, fit and plot files over a point grid"},
      {"verify-szego", "global Szego limit check"},
      {"verify-lemma", "stationary point and Hessian of the inner phase"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  ExperimentConfig cfg;
  try {
    app.parse(argc, argv);
    cfg.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) cfg.raw = read_config_file(config_path);
    for (const auto& [name, opt] : cli_options)
      if (opt->count() > 0) cfg.raw[name] = cli_values[name];
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (cfg.command == "spectrum") return cmd_spectrum(cfg, out, err);
    if (cfg.command == "local-measure") return cmd_local_measure(cfg, out, err);
    if (cfg.command == "global-measure") return cmd_global_measure(cfg, out, err);
    if (cfg.command == "fit") return cmd_fit(cfg, out, err);
    if (cfg.command == "report") return cmd_report(cfg, out, err);
    if (cfg.command == "verify-szego") return cmd_verify_szego(cfg, out, err);
    if (cfg.command == "verify-lemma") return cmd_verify_lemma(cfg, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ContractViolation& e) {
    err << dump(e.record());
    return kViolation;
  } catch (const ConvergenceError& e) {
    err << dump(Json{{"violation", "eigensolver-convergence"}, {"value", e.off_norm()}, {"message", e.what()}});
    return kViolation;
  } catch (const AssemblyError& e) {
    err << dump(Json{{"violation", "assembly"}, {"message", e.what()}});
    return kViolation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::runtime_error& e) {
    err << dump(Json{{"violation", "numerical"}, {"message", e.what()}});
    return kViolation;
  }
  err << "error: unknown command " << cfg.command << "\n";
  return kValidation;
}

}  // namespace berezin::cli

#endif  // BEREZIN_CLI_RUNNER_HPP
