#pragma once

// Experiment harness: the three pricing studies (vanilla put on a wide
// domain, vanilla put with a transparent boundary at the strike, two-asset
// max-put basket) and a self-check suite. Results come back as an
// ExperimentReport that can be written as CSV tables plus a JSON manifest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lapbs/analytic.hpp"
#include "lapbs/cn_baseline.hpp"
#include "lapbs/contour.hpp"
#include "lapbs/fem1d.hpp"
#include "lapbs/fem2d.hpp"
#include "lapbs/inversion.hpp"
#include "lapbs/parallel.hpp"
#include "lapbs/properties.hpp"
#include "lapbs/reference.hpp"

namespace lapbs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration

/// Contour rows for the vanilla put at t = 1, N = 3 ... 21.
inline std::vector<ContourParams> put_contour_rows() {
  return {{13.48, 12.42, 0.4213, 0.16500, 3},  {26.95, 24.84, 0.4213, 0.09385, 6},
          {40.43, 37.26, 0.4213, 0.06809, 9},  {53.90, 49.68, 0.4213, 0.05430, 12},
          {67.38, 62.09, 0.4213, 0.04556, 15}, {80.86, 74.51, 0.4213, 0.03947, 18},
          {94.33, 86.93, 0.4213, 0.03494, 21}};
}

inline ContourParams basket_contour() { return {35.94, 33.12, 0.4213, 0.07472, 15}; }

struct ExperimentConfig {
  std::string example{"ex1"};  // ex1 | ex2 | ex3 | oracle
  Market1D market{};
  Basket2D basket{};
  std::vector<ContourParams> contours{put_contour_rows()};
  int laplace_n{15};
  std::vector<int> meshes{10, 20, 40, 80, 160, 320, 640};
  int spectral_meshes{2560};
  int crosscheck_steps{640};
  double bc_study_L{150.0};
  std::vector<int> bc_study_meshes{16, 32, 64};
  ReferenceSpec reference{};
  int speedup_cells{128};
  std::vector<int> speedup_workers{1, 3, 5, 15};
  int workers{1};
  std::string out_dir{"out"};

  const ContourParams& pricing_contour() const {
    for (const auto& c : contours)
      if (c.n == laplace_n) return c;
    throw ConfigError("no contour row with n = " + std::to_string(laplace_n));
  }
};

inline ExperimentConfig default_config(const std::string& example) {
  ExperimentConfig c;
  c.example = example;
  if (example == "ex1" || example == "oracle") {
    c.market = Market1D{0.05, 0.3, 50.0, 1.0, 200.0};
  } else if (example == "ex2") {
    c.market = Market1D{0.05, 0.3, 50.0, 1.0, 50.0};
  } else if (example == "ex3") {
    c.basket = Basket2D{};
    c.contours = {basket_contour()};
    c.meshes = {16, 32, 64, 128};
  } else {
    throw ConfigError("unknown example '" + example + "'");
  }
  return c;
}

inline void to_json(nlohmann::json& j, const ContourParams& p) {
  j = {{"n", p.n}, {"gamma", p.gamma}, {"nu", p.nu}, {"s", p.s}, {"tau", p.tau}};
}
inline void from_json(const nlohmann::json& j, ContourParams& p) {
  p.n = j.at("n").get<int>();
  p.gamma = j.at("gamma").get<double>();
  p.nu = j.at("nu").get<double>();
  p.s = j.at("s").get<double>();
  p.tau = j.at("tau").get<double>();
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  const auto& b = c.basket;
  return {{"example", c.example},
          {"market",
           {{"r", c.market.r},
            {"sigma", c.market.sigma},
            {"strike", c.market.strike},
            {"maturity", c.market.maturity},
            {"L", c.market.L}}},
          {"basket",
           {{"r", b.r},
            {"a11", b.a[0][0]},
            {"a12", b.a[0][1]},
            {"a22", b.a[1][1]},
            {"strike", b.strike},
            {"maturity", b.maturity},
            {"L1", b.L1},
            {"L2", b.L2}}},
          {"contours", c.contours},
          {"laplace_n", c.laplace_n},
          {"meshes", c.meshes},
          {"spectral_meshes", c.spectral_meshes},
          {"crosscheck_steps", c.crosscheck_steps},
          {"bc_study", {{"L", c.bc_study_L}, {"meshes", c.bc_study_meshes}}},
          {"reference",
           {{"cells", c.reference.cells}, {"L", c.reference.L}, {"dt", c.reference.dt}, {"cache", c.reference.cache}}},
          {"speedup", {{"cells", c.speedup_cells}, {"workers", c.speedup_workers}}},
          {"workers", c.workers},
          {"out", c.out_dir}};
}

/// Overlay a JSON document on the defaults for its example. Absent keys keep
/// their default value.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& example_hint = "") {
  const std::string ex = j.value("example", example_hint.empty() ? std::string("ex1") : example_hint);
  ExperimentConfig c = default_config(ex);
  try {
    if (j.contains("market")) {
      const auto& m = j["market"];
      c.market.r = m.value("r", c.market.r);
      c.market.sigma = m.value("sigma", c.market.sigma);
      c.market.strike = m.value("strike", c.market.strike);
      c.market.maturity = m.value("maturity", c.market.maturity);
      c.market.L = m.value("L", c.market.L);
    }
    if (j.contains("basket")) {
      const auto& b = j["basket"];
      c.basket.r = b.value("r", c.basket.r);
      c.basket.a[0][0] = b.value("a11", c.basket.a[0][0]);
      c.basket.a[1][1] = b.value("a22", c.basket.a[1][1]);
      c.basket.a[0][1] = c.basket.a[1][0] = b.value("a12", c.basket.a[0][1]);
      c.basket.strike = b.value("strike", c.basket.strike);
      c.basket.maturity = b.value("maturity", c.basket.maturity);
      c.basket.L1 = b.value("L1", c.basket.L1);
      c.basket.L2 = b.value("L2", c.basket.L2);
    }
    if (j.contains("contours")) c.contours = j["contours"].get<std::vector<ContourParams>>();
    c.laplace_n = j.value("laplace_n", c.laplace_n);
    if (j.contains("meshes")) c.meshes = j["meshes"].get<std::vector<int>>();
    c.spectral_meshes = j.value("spectral_meshes", c.spectral_meshes);
    c.crosscheck_steps = j.value("crosscheck_steps", c.crosscheck_steps);
    if (j.contains("bc_study")) {
      c.bc_study_L = j["bc_study"].value("L", c.bc_study_L);
      if (j["bc_study"].contains("meshes")) c.bc_study_meshes = j["bc_study"]["meshes"].get<std::vector<int>>();
    }
    if (j.contains("reference")) {
      const auto& r = j["reference"];
      c.reference.cells = r.value("cells", c.reference.cells);
      c.reference.L = r.value("L", c.reference.L);
      c.reference.dt = r.value("dt", c.reference.dt);
      c.reference.cache = r.value("cache", c.reference.cache);
    }
    if (j.contains("speedup")) {
      c.speedup_cells = j["speedup"].value("cells", c.speedup_cells);
      if (j["speedup"].contains("workers")) c.speedup_workers = j["speedup"]["workers"].get<std::vector<int>>();
    }
    c.workers = j.value("workers", c.workers);
    c.out_dir = j.value("out", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& example_hint = "") {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return config_from_json(j, example_hint);
}

/// kappa for the one-asset problem with constant coefficients.
inline double put_kappa(const Market1D& m, double slope) {
  return kappa_bound(slope, mu(m.r, m.sigma, m.sigma, true));
}

/// The basket has no scalar sigma; take the larger of the per-axis bounds.
inline double basket_kappa(const Basket2D& b, double slope) {
  const double k1 = kappa_bound(slope, mu(b.r, std::sqrt(b.a[0][0]), std::sqrt(b.a[0][0]), true));
  const double k2 = kappa_bound(slope, mu(b.r, std::sqrt(b.a[1][1]), std::sqrt(b.a[1][1]), true));
  return std::max(k1, k2);
}

template <class KappaFn>
void validate_contours(const std::vector<ContourParams>& rows, KappaFn&& kappa) {
  std::string msg;
  for (const auto& p : rows) {
    const auto rep = validate(p, kappa(p.s));
    for (const auto& v : rep.violations) msg += "contour n=" + std::to_string(p.n) + ": " + v + "; ";
  }
  if (!msg.empty()) throw ConfigError("contour validation failed: " + msg);
}

// ---------------------------------------------------------------------------
// Report

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string to_csv(const CsvTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
inline std::string sci(double v) { return fmt("%.6e", v); }
inline std::string num(double v) { return fmt("%.10g", v); }
inline std::string rate_str(const std::optional<double>& r) { return r ? fmt("%.4f", *r) : std::string{}; }

struct ExperimentReport {
  std::string example;
  std::map<std::string, std::vector<ErrorRow>> sweeps;
  std::vector<ContourParams> contours;
  std::vector<SpeedupRow> speedup;
  std::vector<CsvTable> tables;
  std::map<std::string, double> wall_seconds;
  double max_imag_residual{0.0};        // max |Im| of any pricing inversion
  double max_imag_residual_ratio{0.0};  // same, over max |u| of that inversion
  nlohmann::json config;
  std::vector<std::string> notes;

  void note_residual(double imag, double scale) {
    max_imag_residual = std::max(max_imag_residual, imag);
    if (scale > 0.0) max_imag_residual_ratio = std::max(max_imag_residual_ratio, imag / scale);
  }

  const std::vector<ErrorRow>& sweep(const std::string& name) const {
    auto it = sweeps.find(name);
    if (it == sweeps.end()) throw std::out_of_range("no sweep named " + name);
    return it->second;
  }

  nlohmann::json manifest() const {
    nlohmann::json j;
    j["example"] = example;
    j["config"] = config;
    j["contours"] = contours;
    j["wall_seconds"] = wall_seconds;
    j["max_imag_residual"] = max_imag_residual;
    j["max_imag_residual_ratio"] = max_imag_residual_ratio;
    nlohmann::json sp = nlohmann::json::array();
    for (const auto& r : speedup) sp.push_back({{"workers", r.workers}, {"seconds", r.seconds}, {"speedup", r.speedup}});
    j["speedup"] = sp;
    std::vector<std::string> files;
    for (const auto& t : tables) files.push_back(t.file);
    j["tables"] = files;
    j["notes"] = notes;
    const std::time_t now = std::time(nullptr);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["written_at"] = ts;
    return j;
  }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& t : tables) {
      std::ofstream os(dir / t.file, std::ios::binary);
      os << to_csv(t);
      if (!os) throw std::runtime_error("cannot write " + (dir / t.file).string());
    }
    std::ofstream os(dir / ("manifest_" + example + ".json"));
    os << manifest().dump(2) << '\n';
  }
};

inline CsvTable error_table(const std::string& file, const std::string& count_header,
                            const std::vector<int>& counts, const std::vector<ErrorRow>& rows,
                            const std::string& error_header = "Error in L2") {
  CsvTable t{file, {count_header, "Number of space meshes", "Mesh size", error_header, "Reduction rate"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i)
    t.rows.push_back({std::to_string(counts[i]), std::to_string(rows[i].cells), num(rows[i].h), sci(rows[i].error),
                      rate_str(rows[i].rate)});
  return t;
}

// ---------------------------------------------------------------------------
// One-asset studies

namespace detail {
inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct PutPricing {
  RealField price;
  double imag_residual;
  double scale;  // max |u|
};

/// Laplace-method put price at maturity on [0, L].
inline PutPricing laplace_put(const Market1D& m, int cells, const ContourParams& contour, bool transparent,
                              int workers) {
  const Mesh1D mesh(m.L, cells);
  const auto ops = assemble_operators(mesh, m);
  const auto load = load_vector(mesh, PutPayoff{m.strike});
  const auto bc = put_boundary(m, transparent);
  auto solver = [&](cplx z) { return solve(assemble(ops, load, m, z, bc)).values; };
  const auto run = solve_ensemble(solver, contour, workers);
  auto inv = invert_at(run.ensemble, m.maturity);
  const double scale = norm_inf(inv.values);
  return {RealField{mesh, std::move(inv.values)}, inv.imag_residual, scale};
}

inline double put_error(const Market1D& m, const RealField& f) {
  return l2_error(f.values, 0.0, m.L, [&](double x) { return bs_put(x, m.maturity, m.strike, m.r, m.sigma); });
}
}  // namespace detail

inline ExperimentReport run_example1(const ExperimentConfig& cfg) {
  const Market1D& m = cfg.market;
  m.check();
  validate_contours(cfg.contours, [&](double s) { return put_kappa(m, s); });
  ExperimentReport rep;
  rep.example = "ex1";
  rep.config = config_to_json(cfg);
  const ContourParams& contour = cfg.pricing_contour();

  // Crank-Nicolson with as many steps as cells
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ErrorRow> cn;
  for (int M : cfg.meshes) {
    const auto f = march1d(Mesh1D(m.L, M), m, put_time_boundary(m), PutPayoff{m.strike}, MarchConfig{M});
    cn.push_back({m.L / M, M, detail::put_error(m, f), std::nullopt});
  }
  fill_rates(cn);
  rep.wall_seconds["cn_sweep"] = detail::elapsed(t0);

  // Crank-Nicolson with a fixed, fine step count at every mesh
  std::vector<ErrorRow> cn_fixed;
  for (int M : cfg.meshes) {
    const auto f =
        march1d(Mesh1D(m.L, M), m, put_time_boundary(m), PutPayoff{m.strike}, MarchConfig{cfg.crosscheck_steps});
    cn_fixed.push_back({m.L / M, M, detail::put_error(m, f), std::nullopt});
  }
  fill_rates(cn_fixed);

  // Laplace method, fixed contour
  t0 = std::chrono::steady_clock::now();
  std::vector<ErrorRow> lap;
  for (int M : cfg.meshes) {
    const auto p = detail::laplace_put(m, M, contour, false, cfg.workers);
    rep.note_residual(p.imag_residual, p.scale);
    lap.push_back({m.L / M, M, detail::put_error(m, p.price), std::nullopt});
  }
  fill_rates(lap);
  rep.wall_seconds["laplace_sweep"] = detail::elapsed(t0);

  // Node-count study on a fine mesh
  t0 = std::chrono::steady_clock::now();
  std::vector<ErrorRow> spectral;
  for (const auto& c : cfg.contours) {
    const auto p = detail::laplace_put(m, cfg.spectral_meshes, c, false, cfg.workers);
    rep.note_residual(p.imag_residual, p.scale);
    spectral.push_back({m.L / cfg.spectral_meshes, cfg.spectral_meshes, detail::put_error(m, p.price), std::nullopt});
  }
  fill_rates(spectral);
  rep.wall_seconds["spectral_sweep"] = detail::elapsed(t0);

  rep.contours = cfg.contours;
  rep.tables.push_back(error_table("table1_cn.csv", "Time steps", cfg.meshes, cn));
  rep.tables.push_back(error_table("table2_laplace.csv", "Number of z", std::vector<int>(cn.size(), contour.n), lap));
  {
    std::vector<int> steps(cfg.meshes.size(), cfg.crosscheck_steps);
    rep.tables.push_back(error_table("crosscheck_cn_fixed_steps.csv", "Time steps", steps, cn_fixed));
  }
  CsvTable t3{"table3_contours.csv",
              {"Number of z", "Number of space meshes", "L2-Error", "Reduction rate", "gamma", "nu", "s", "tau"},
              {}};
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    const auto& c = cfg.contours[i];
    t3.rows.push_back({std::to_string(c.n), std::to_string(cfg.spectral_meshes), sci(spectral[i].error),
                       rate_str(spectral[i].rate), num(c.gamma), num(c.nu), num(c.s), num(c.tau)});
  }
  rep.tables.push_back(t3);
  rep.sweeps["table1_cn"] = std::move(cn);
  rep.sweeps["cn_fixed_steps"] = std::move(cn_fixed);
  rep.sweeps["table2_laplace"] = std::move(lap);
  rep.sweeps["table3_spectral"] = std::move(spectral);
  return rep;
}

inline ExperimentReport run_example2(const ExperimentConfig& cfg) {
  const Market1D& m = cfg.market;
  m.check();
  validate_contours(cfg.contours, [&](double s) { return put_kappa(m, s); });
  ExperimentReport rep;
  rep.example = "ex2";
  rep.config = config_to_json(cfg);
  const ContourParams& contour = cfg.pricing_contour();
  rep.contours = {contour};

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ErrorRow> dir, tbc;
  RealField last_dir, last_tbc;
  for (int M : cfg.meshes) {
    auto pd = detail::laplace_put(m, M, contour, false, cfg.workers);
    auto pt = detail::laplace_put(m, M, contour, true, cfg.workers);
    rep.note_residual(pd.imag_residual, pd.scale);
    rep.note_residual(pt.imag_residual, pt.scale);
    dir.push_back({m.L / M, M, detail::put_error(m, pd.price), std::nullopt});
    tbc.push_back({m.L / M, M, detail::put_error(m, pt.price), std::nullopt});
    last_dir = std::move(pd.price);
    last_tbc = std::move(pt.price);
  }
  fill_rates(dir);
  fill_rates(tbc);
  rep.wall_seconds["sweeps"] = detail::elapsed(t0);

  const std::vector<int> nz(cfg.meshes.size(), contour.n);
  rep.tables.push_back(error_table("table4_dirichlet.csv", "Number of z", nz, dir));
  rep.tables.push_back(error_table("table5_transparent.csv", "Number of z", nz, tbc));
  CsvTable fig{"fig1_solution.csv", {"x", "exact", "dirichlet", "transparent"}, {}};
  for (int i = 0; i < last_dir.mesh.nodes(); ++i) {
    const double x = last_dir.mesh.x(i);
    fig.rows.push_back({num(x), sci(bs_put(x, m.maturity, m.strike, m.r, m.sigma)), sci(last_dir.values[i]),
                        sci(last_tbc.values[i])});
  }
  rep.tables.push_back(fig);
  rep.sweeps["table4_dirichlet"] = std::move(dir);
  rep.sweeps["table5_transparent"] = std::move(tbc);
  return rep;
}

// ---------------------------------------------------------------------------
// Basket study

namespace detail {
struct BasketPricing {
  RealField2D price;
  double imag_residual;
  double scale;
  SpeedupRow timing;
};

inline BasketPricing laplace_basket(const Basket2D& b, int cells, const EdgeSpec& edges,
                                    const ContourParams& contour, int workers) {
  const Mesh2D mesh(b.L1, b.L2, cells, cells);
  const auto ops = assemble_operators2d(mesh, b);
  const Eigen::VectorXd load = load_vector2d(mesh, MaxPutPayoff{b.strike});
  auto solver = [&](cplx z) { return solve2d(assemble2d(ops, load, b, z, edges)).values; };
  auto run = solve_ensemble(solver, contour, workers);
  auto inv = invert_at(run.ensemble, b.maturity);
  const double scale = norm_inf(inv.values);
  return {RealField2D{mesh, std::move(inv.values)}, inv.imag_residual, scale, run.timing};
}
}  // namespace detail

/// Build (or load) the basket reference described by the config.
inline RealField2D basket_reference(const ExperimentConfig& cfg, bool rebuild = false, bool* built = nullptr) {
  return obtain_reference(cfg.basket, cfg.reference, rebuild, built);
}

inline ExperimentReport run_example3(const ExperimentConfig& cfg) {
  const Basket2D& b = cfg.basket;
  b.check();
  validate_contours(cfg.contours, [&](double s) { return basket_kappa(b, s); });
  ExperimentReport rep;
  rep.example = "ex3";
  rep.config = config_to_json(cfg);
  const ContourParams& contour = cfg.pricing_contour();
  rep.contours = {contour};

  auto t0 = std::chrono::steady_clock::now();
  bool built = false;
  const RealField2D ref = basket_reference(cfg, false, &built);
  rep.wall_seconds[built ? "reference_build" : "reference_load"] = detail::elapsed(t0);
  rep.notes.push_back(built ? "reference built and cached at " + cfg.reference.cache
                            : "reference loaded from " + cfg.reference.cache);

  t0 = std::chrono::steady_clock::now();
  std::vector<ErrorRow> t6;
  RealField2D finest;
  for (int M : cfg.meshes) {
    auto p = detail::laplace_basket(b, M, EdgeSpec::dirichlet_far(), contour, cfg.workers);
    rep.note_residual(p.imag_residual, p.scale);
    t6.push_back({b.L1 / M, M, relative_l2_error(p.price, ref), std::nullopt});
    finest = std::move(p.price);
  }
  fill_rates(t6);
  rep.wall_seconds["table6"] = detail::elapsed(t0);

  t0 = std::chrono::steady_clock::now();
  Basket2D small = b;
  small.L1 = small.L2 = cfg.bc_study_L;
  std::vector<ErrorRow> t7d, t7t;
  for (int M : cfg.bc_study_meshes) {
    auto pd = detail::laplace_basket(small, M, EdgeSpec::dirichlet_far(), contour, cfg.workers);
    auto pt = detail::laplace_basket(small, M, EdgeSpec::transparent_far(), contour, cfg.workers);
    rep.note_residual(pd.imag_residual, pd.scale);
    rep.note_residual(pt.imag_residual, pt.scale);
    t7d.push_back({small.L1 / M, M, relative_l2_error(pd.price, ref), std::nullopt});
    t7t.push_back({small.L1 / M, M, relative_l2_error(pt.price, ref), std::nullopt});
  }
  fill_rates(t7d);
  fill_rates(t7t);
  rep.wall_seconds["table7"] = detail::elapsed(t0);

  // Parallel timing on the speedup workload
  {
    const Mesh2D mesh(b.L1, b.L2, cfg.speedup_cells, cfg.speedup_cells);
    const auto ops = assemble_operators2d(mesh, b);
    const Eigen::VectorXd load = load_vector2d(mesh, MaxPutPayoff{b.strike});
    const auto edges = EdgeSpec::dirichlet_far();
    auto solver = [&](cplx z) { return solve2d(assemble2d(ops, load, b, z, edges)).values; };
    rep.speedup = speedup_table(solver, contour, cfg.speedup_workers);
  }

  const std::vector<int> nz(t6.size(), contour.n);
  rep.tables.push_back(error_table("table6_basket.csv", "Number of z", nz, t6, "Relative error in L2"));
  {
    CsvTable t{"table7_boundary.csv",
               {"Number of z", "Number of space meshes", "Mesh size", "Relative error in L2(Dirichlet)",
                "Relative error in L2(Transparent)"},
               {}};
    for (std::size_t i = 0; i < t7d.size(); ++i)
      t.rows.push_back({std::to_string(contour.n), std::to_string(t7d[i].cells) + "x" + std::to_string(t7d[i].cells),
                        num(t7d[i].h), sci(t7d[i].error), sci(t7t[i].error)});
    rep.tables.push_back(t);
  }
  {
    CsvTable t{"table8_speedup.csv", {"Number of CPUs", "Time(sec)", "Speedup"}, {}};
    for (const auto& r : rep.speedup) t.rows.push_back({std::to_string(r.workers), fmt("%.4f", r.seconds), fmt("%.3f", r.speedup)});
    rep.tables.push_back(t);
  }
  {
    CsvTable fig{"fig2_basket_surface.csv", {"x1", "x2", "price"}, {}};
    const Mesh2D& mesh = finest.mesh;
    for (int j = 0; j <= mesh.M2; ++j)
      for (int i = 0; i <= mesh.M1; ++i)
        fig.rows.push_back({num(mesh.x1(i)), num(mesh.x2(j)), sci(finest.values[mesh.node(i, j)])});
    rep.tables.push_back(fig);
  }
  rep.sweeps["table6_basket"] = std::move(t6);
  rep.sweeps["table7_dirichlet"] = std::move(t7d);
  rep.sweeps["table7_transparent"] = std::move(t7t);
  return rep;
}

// ---------------------------------------------------------------------------
// Self-checks

struct OracleCheck {
  std::string name;
  bool passed{false};
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
  }
};

/// Largest relative deviation of a random-field inequality lhs <= rhs over
/// `trials` draws (negative means every draw satisfied it with margin).
struct InequalityStats {
  int trials{0};
  int violations{0};
  double worst_ratio{0.0};  // max lhs / rhs
};

/// ||v|| <= 2 |v|_V for random complex P1 fields with v(L) = 0.
inline InequalityStats poincare_suite(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cells(2, 200);
  std::uniform_real_distribution<double> length(1.0, 400.0);
  std::normal_distribution<double> gauss;
  InequalityStats st{trials, 0, 0.0};
  for (int k = 0; k < trials; ++k) {
    const Mesh1D mesh(length(rng), cells(rng));
    std::vector<cplx> v(mesh.nodes());
    for (auto& x : v) x = {gauss(rng), gauss(rng)};
    v.back() = 0.0;
    const double lhs = std::sqrt(l2_norm_sq(mesh, v));
    const double rhs = 2.0 * std::sqrt(weighted_seminorm_sq(mesh, v));
    st.worst_ratio = std::max(st.worst_ratio, lhs / rhs);
    if (lhs > rhs) ++st.violations;
  }
  return st;
}

/// Re B(v, v) >= sigma^2/4 |v|_V^2 - mu ||v||^2 for random complex P1 fields
/// with v(L) = 0. worst_ratio tracks (sigma^2/4 |v|^2 - mu ||v||^2) / Re B.
inline InequalityStats coercivity_suite(const Market1D& m, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cells(2, 200);
  std::normal_distribution<double> gauss;
  const double mu_value = mu(m.r, m.sigma, m.sigma, true);
  InequalityStats st{trials, 0, -1e300};
  for (int k = 0; k < trials; ++k) {
    const Mesh1D mesh(m.L, cells(rng));
    const auto ops = assemble_operators(mesh, m);
    std::vector<cplx> v(mesh.nodes());
    for (auto& x : v) x = {gauss(rng), gauss(rng)};
    v.back() = 0.0;
    const double reB = bilinear_form(ops.spatial, v).real();
    const double bound = 0.25 * m.sigma * m.sigma * weighted_seminorm_sq(mesh, v) - mu_value * l2_norm_sq(mesh, v);
    st.worst_ratio = std::max(st.worst_ratio, bound / reB);
    if (reB < bound) ++st.violations;
  }
  return st;
}

/// Smallest Re sqrt(radicand) of the transparent condition over all nodes of
/// the given contours.
inline double min_robin_root_real(const std::vector<ContourParams>& contours, double r, double sigma) {
  const double s2 = sigma * sigma, drift = r - 0.5 * s2;
  double lo = 1e300;
  for (const auto& c : contours)
    for (const auto& nd : quadrature_nodes(c)) lo = std::min(lo, std::sqrt(drift * drift + 2.0 * s2 * (r + nd.z)).real());
  return lo;
}

inline OracleReport run_oracles() {
  OracleReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const auto rows = put_contour_rows();
  const ContourParams& c15 = rows[4];

  for (double a : {0.05, 1.0, 5.0}) {
    const auto ens = make_ensemble(c15, [a](cplx z) { return std::vector<cplx>{1.0 / (z + a)}; });
    const double v = invert_at(ens, 1.0).values[0];
    const double err = std::abs(v - std::exp(-a)) / std::exp(-a);
    add("invert 1/(z+" + num(a) + ") at t=1, N=15", err <= 1e-6, "relative error " + sci(err));
  }
  {
    const auto ens = make_ensemble(c15, [](cplx z) { return std::vector<cplx>{1.0 / (z * z)}; });
    const double err = std::abs(invert_at(ens, 1.0).values[0] - 1.0);
    add("invert 1/z^2 at t=1, N=15", err <= 1e-6, "relative error " + sci(err));
  }
  {
    const double k = kappa_bound(0.4, mu(0.05, 0.3, 0.3, true));
    add("kappa(s=0.4, r=0.05, sigma=0.3)", fmt("%.4g", k) == "0.01811", "kappa " + fmt("%.6g", k));
    bool all_ok = true;
    for (const auto& p : rows) all_ok = all_ok && validate(p, k).ok();
    add("contour rows clear kappa", all_ok, "gamma - nu > " + fmt("%.6g", k));
  }
  {
    const auto st = poincare_suite(1000, 20240601);
    add("weighted Poincare on 1000 random fields", st.violations == 0,
        "worst ||v|| / (2|v|_V) = " + fmt("%.6f", st.worst_ratio));
  }
  {
    const auto st = coercivity_suite(Market1D{0.05, 0.3, 50.0, 1.0, 200.0}, 1000, 20240602);
    add("coercivity bound on 1000 random fields", st.violations == 0,
        "worst bound / Re B = " + fmt("%.6f", st.worst_ratio));
  }
  {
    auto all = rows;
    all.push_back(basket_contour());
    const double lo = min_robin_root_real(all, 0.05, 0.3);
    add("transparent condition root has positive real part", lo > 0.0, "min Re sqrt = " + sci(lo));
  }
  {
    double worst = 0.0;
    for (const auto& p : rows) {
      const auto nodes = quadrature_nodes(p);
      const std::size_t n = nodes.size();
      for (std::size_t k = 0; k < n; ++k) {
        worst = std::max(worst, std::abs(nodes[k].z - std::conj(nodes[n - 1 - k].z)));
        worst = std::max(worst, std::abs(nodes[k].weight - std::conj(nodes[n - 1 - k].weight)));
      }
    }
    add("contour nodes and weights are conjugate-symmetric", worst <= 1e-12, "max deviation " + sci(worst));
  }
  return rep;
}

}  // namespace lapbs
