#include "tqr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tqr/gfunction.hpp"
#include "tqr/kernels.hpp"
#include "tqr/meanfield.hpp"
#include "tqr/spectra.hpp"

namespace tqr {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> make_grid(double lo, double hi, double step,
                              const char* who) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw Error(ErrorCode::InvalidArgument,
                std::string(who) + ": malformed grid specification");
  std::vector<double> grid;
  const long count = std::lround(std::floor((hi - lo) / step + 1e-6));
  grid.reserve(count + 1);
  for (long i = 0; i <= count; ++i) grid.push_back(lo + step * i);
  return grid;
}

struct CsvTable {
  std::vector<std::string> header;  // column names with units
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  for (std::size_t c = 0; c < table.header.size(); ++c)
    out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

// Minimal line chart: fixed 800x600 canvas, one polyline per series,
// axis box with corner labels.
void write_svg_lines(const std::string& path,
                     const std::vector<double>& xs,
                     const std::vector<std::vector<double>>& series,
                     const std::string& x_label,
                     const std::string& y_label) {
  if (xs.empty() || series.empty()) return;
  double x0 = xs.front(), x1 = xs.back();
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& s : series)
    for (double v : s)
      if (std::isfinite(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  if (!(y1 > y0)) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  const double W = 800, H = 600, L = 70, R = 20, T = 20, B = 50;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) {
    return H - B - (y - y0) / (y1 - y0) * (H - T - B);
  };
  const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                            "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H << "' viewBox='0 0 " << W << " " << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<rect x='" << L << "' y='" << T << "' width='" << W - L - R
      << "' height='" << H - T - B
      << "' fill='none' stroke='#444' stroke-width='1'/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill='none' stroke='" << palette[s % 6]
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < xs.size() && i < series[s].size(); ++i) {
      if (!std::isfinite(series[s][i])) continue;
      out << px(xs[i]) << "," << py(series[s][i]) << " ";
    }
    out << "'/>\n";
  }
  out << "<text x='" << W / 2 << "' y='" << H - 12
      << "' font-size='14' text-anchor='middle'>" << x_label << "</text>\n"
      << "<text x='16' y='" << H / 2
      << "' font-size='14' text-anchor='middle' transform='rotate(-90 16 "
      << H / 2 << ")'>" << y_label << "</text>\n"
      << "<text x='" << L - 6 << "' y='" << py(y0)
      << "' font-size='11' text-anchor='end'>" << fmt(y0) << "</text>\n"
      << "<text x='" << L - 6 << "' y='" << py(y1) + 10
      << "' font-size='11' text-anchor='end'>" << fmt(y1) << "</text>\n"
      << "<text x='" << px(x0) << "' y='" << H - B + 16
      << "' font-size='11' text-anchor='middle'>" << fmt(x0) << "</text>\n"
      << "<text x='" << px(x1) << "' y='" << H - B + 16
      << "' font-size='11' text-anchor='middle'>" << fmt(x1) << "</text>\n"
      << "</svg>\n";
}

// Diverging heatmap: blue for negative, white at zero, red for positive,
// linear in the value; one rect per grid cell.
void write_svg_heatmap(const std::string& path, const WignerResult& w) {
  const int cell = 4;
  const double lim = std::max(std::fabs(w.min_value),
                              *std::max_element(w.values.begin(),
                                                w.values.end()));
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='"
      << w.grid.nx * cell << "' height='" << w.grid.np * cell << "'>\n";
  for (int ip = 0; ip < w.grid.np; ++ip)
    for (int ix = 0; ix < w.grid.nx; ++ix) {
      const double t = lim > 0.0 ? w.at(ip, ix) / lim : 0.0;
      int r = 255, g = 255, b = 255;
      if (t > 0) {
        g = b = static_cast<int>(std::lround(255 * (1.0 - t)));
      } else if (t < 0) {
        r = g = static_cast<int>(std::lround(255 * (1.0 + t)));
      }
      out << "<rect x='" << ix * cell << "' y='"
          << (w.grid.np - 1 - ip) * cell << "' width='" << cell
          << "' height='" << cell << "' fill='rgb(" << r << "," << g << ","
          << b << ")'/>\n";
    }
  out << "</svg>\n";
}

json params_json(const ModelParams& p) {
  return json{{"omega", p.omega},
              {"Omega", p.Omega},
              {"epsilon", p.epsilon},
              {"g", p.g}};
}

json physical_json(const PhysicalIonParams& p) {
  return json{{"mass_amu", p.mass_amu},
              {"net_charge", p.net_charge},
              {"nu_rad_s", p.nu},
              {"Omega_drive_rad_s", p.Omega_drive},
              {"Vd_slope_rad_s_per_m", p.Vd_slope},
              {"lb_convention",
               p.lb_convention == LbConvention::BreathingMode ? "breathing"
                                                              : "trap"}};
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::Gfun: return "gfun";
    case Command::Roots: return "roots";
    case Command::Meanfield: return "meanfield";
    case Command::Ground: return "ground";
    case Command::Density: return "density";
    case Command::Wigner: return "wigner";
    case Command::Fidelity: return "fidelity";
    case Command::Physical: return "physical";
    case Command::Verify: return "verify";
  }
  return "?";
}

// Energies leave the library in units of omega; with --si they are
// rescaled to angular frequency through the trap mapping.
double si_scale(const RunConfig& cfg) {
  if (!cfg.si_units) return 1.0;
  if (!(cfg.physical.nu > 0.0))
    throw Error(ErrorCode::InvalidArgument,
                "--si needs the trap parameters (--nu-hz and friends)");
  return model_params_from_physical(cfg.physical, cfg.detuning).scale;
}

std::string unit_tag(const RunConfig& cfg) {
  return cfg.si_units ? "[rad/s]" : "[omega]";
}

// The ground state lives in the exchange-symmetric sector; at resonance
// the middle triplet row decouples as well. Sector::Full requests are
// routed accordingly, explicit sector choices are honored.
Sector ground_sector(const RunConfig& cfg) {
  if (cfg.sector != Sector::Full) return cfg.sector;
  return cfg.params.epsilon == 0.0 ? Sector::ResonantCollective
                                   : Sector::TripletRotated;
}

struct GroundSolution {
  GroundState state;
  PhononDensityMatrix rho;
};

GroundSolution solve_ground(const RunConfig& cfg, const ModelParams& params) {
  const Sector sector = ground_sector(cfg);
  GroundSolution sol;
  sol.state = converged_ground_state(params, cfg.trunc, sector);
  FockTruncation used = cfg.trunc;
  used.n_max = sol.state.n_max_used;
  const std::vector<double> embedded =
      embed_parity_vector(sol.state.vector, sector);
  sol.rho = partial_trace_phonon(embedded, used);
  return sol;
}

ModelParams with_g(const ModelParams& base, double g) {
  ModelParams p = base;
  p.g = g;
  return p;
}

// ---- command handlers -------------------------------------------------

CsvTable cmd_spectrum(const RunConfig& cfg, json& sidecar,
                      std::vector<double>& plot_x,
                      std::vector<std::vector<double>>& plot_series) {
  const auto grid = make_grid(cfg.grids.g_min, cfg.grids.g_max,
                              cfg.grids.g_step, "spectrum");
  const double scale = si_scale(cfg);
  const auto rows = spectrum_sweep(cfg.params, grid, cfg.trunc, cfg.sector,
                                   cfg.k_levels, cfg.threads);
  CsvTable t;
  t.header.push_back("g" + unit_tag(cfg));
  for (int k = 0; k < cfg.k_levels; ++k)
    t.header.push_back("E" + std::to_string(k) + unit_tag(cfg));
  plot_series.resize(cfg.k_levels);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    cells.push_back(fmt(row.g * scale));
    plot_x.push_back(row.g);
    for (int k = 0; k < cfg.k_levels; ++k) {
      const double v = k < static_cast<int>(row.values.size())
                           ? row.values[k] * scale
                           : std::numeric_limits<double>::quiet_NaN();
      cells.push_back(fmt(v));
      plot_series[k].push_back(v);
    }
    t.rows.push_back(std::move(cells));
  }
  sidecar["sector"] = sector_name(cfg.sector);
  sidecar["n_max_used"] = cfg.trunc.n_max;
  sidecar["columns"] = {
      {"g", "coupling strength"},
      {"Ek", "k-th lowest eigenvalue of the requested sector"}};
  return t;
}

CsvTable cmd_gfun(const RunConfig& cfg, json& sidecar,
                  std::vector<double>& plot_x,
                  std::vector<std::vector<double>>& plot_series) {
  const auto grid = make_grid(cfg.grids.e_min, cfg.grids.e_max,
                              cfg.grids.e_step, "gfun");
  const double scale = si_scale(cfg);
  std::vector<double> values(grid.size(), 0.0);
  std::vector<char> ok(grid.size(), 0);
  GPolicy policy;
  auto eval = [&](std::size_t i) {
    try {
      values[i] = g_function(grid[i], cfg.params, policy).value;
      ok[i] = 1;
    } catch (const Error&) {
      values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  };
  const int workers =
      std::max(1, std::min<int>(cfg.threads, static_cast<int>(grid.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) eval(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < grid.size(); i += workers) eval(i);
      });
    for (auto& th : pool) th.join();
  }
  CsvTable t;
  t.header = {"E" + unit_tag(cfg), "G[arb]", "valid_flag"};
  plot_series.resize(1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({fmt(grid[i] * scale), fmt(values[i]),
                      std::string(ok[i] ? "1" : "0")});
    plot_x.push_back(grid[i]);
    plot_series[0].push_back(values[i]);
  }
  sidecar["columns"] = {
      {"E", "trial energy"},
      {"G", "cross-ratio function value (arbitrary overall scale)"},
      {"valid_flag", "1 when the evaluation converged away from poles"}};
  sidecar["pole_count_in_window"] =
      pole_locations(cfg.params, cfg.grids.e_min, cfg.grids.e_max).size();
  return t;
}

CsvTable cmd_roots(const RunConfig& cfg, json& sidecar,
                   std::vector<double>& plot_x,
                   std::vector<std::vector<double>>& plot_series) {
  const double scale = si_scale(cfg);
  std::optional<FockTruncation> oracle;
  if (cfg.ed_check) oracle = cfg.trunc;
  const auto roots =
      find_roots(cfg.params, cfg.grids.e_min, cfg.grids.e_max, cfg.scan_step,
                 cfg.root_tol, oracle, GPolicy{}, cfg.threads);
  CsvTable t;
  t.header = {"E_root" + unit_tag(cfg), "residual_G[arb]",
              "ed_match" + unit_tag(cfg)};
  for (const auto& r : roots) {
    const double ed = r.ed_match ? *r.ed_match * scale
                                 : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({fmt(r.E * scale), fmt(r.residual_G), fmt(ed)});
    plot_x.push_back(r.E);
  }
  plot_series.assign(1, std::vector<double>(plot_x.size(), 0.0));
  sidecar["columns"] = {
      {"E_root", "accepted eigenenergy (cross-ratio zero)"},
      {"residual_G", "absolute cross-ratio value at the root"},
      {"ed_match", "distance to the nearest dense-diagonalization level"}};
  int exceptional = 0;
  for (const auto& r : roots)
    if (r.status == RootStatus::ExceptionalCandidate) ++exceptional;
  sidecar["exceptional_candidates"] = exceptional;
  sidecar["ed_truncation"] = cfg.ed_check ? cfg.trunc.n_max : -1;
  return t;
}

CsvTable cmd_meanfield(const RunConfig& cfg, json& sidecar,
                       std::vector<double>& plot_x,
                       std::vector<std::vector<double>>& plot_series) {
  const auto grid = make_grid(cfg.grids.g_min, cfg.grids.g_max,
                              cfg.grids.g_step, "meanfield");
  const double scale = si_scale(cfg);
  const GroundCurve curve = ground_energy_curve(cfg.params, grid);
  CsvTable t;
  t.header = {"g" + unit_tag(cfg), "alpha_star", "E_G" + unit_tag(cfg),
              "dE_dg", "d2E_dg2"};
  plot_series.resize(2);
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& pt = curve.points[i];
    const MeanFieldResult mf = minimize_alpha(with_g(cfg.params, pt.g));
    t.rows.push_back({fmt(pt.g * scale), fmt(mf.alpha_star),
                      fmt(pt.energy * scale), fmt(pt.dE_dg),
                      fmt(pt.d2E_dg2)});
    plot_x.push_back(pt.g);
    plot_series[0].push_back(pt.energy);
    plot_series[1].push_back(mf.alpha_star);
  }
  sidecar["columns"] = {{"g", "coupling strength"},
                        {"alpha_star", "mean-field coherent amplitude"},
                        {"E_G", "mean-field ground energy"},
                        {"dE_dg", "central-difference first derivative"},
                        {"d2E_dg2", "central-difference second derivative"}};
  sidecar["kink_index"] = curve.kink_index;
  sidecar["kink_jump"] = curve.kink_jump;
  if (curve.kink_index >= 0)
    sidecar["kink_cell"] = {curve.points[curve.kink_index].g,
                            curve.points[curve.kink_index + 1].g};
  return t;
}

CsvTable cmd_ground(const RunConfig& cfg, json& sidecar,
                    std::vector<double>& plot_x,
                    std::vector<std::vector<double>>& plot_series,
                    const std::string& observable) {
  const auto grid = make_grid(cfg.grids.g_min, cfg.grids.g_max,
                              cfg.grids.g_step, "ground");
  const double scale = si_scale(cfg);
  struct Row {
    double g, energy, nb, purity, var_x, var_p, mean_x;
    int n_used;
  };
  std::vector<Row> rows;
  int max_n_used = 0;
  for (double g : grid) {
    const GroundSolution sol = solve_ground(cfg, with_g(cfg.params, g));
    Row r;
    r.g = g;
    r.energy = sol.state.energy;
    double nb = 0.0;
    const std::size_t dim = sol.rho.n_max + 1;
    for (std::size_t n = 0; n < dim; ++n)
      nb += n * sol.rho.entries[n * dim + n];
    r.nb = nb;
    r.purity = purity(sol.rho);
    const QuadratureStats q = quadrature_variances(sol.rho);
    r.var_x = q.var_x;
    r.var_p = q.var_p;
    r.mean_x = q.mean_x;
    r.n_used = sol.state.n_max_used;
    max_n_used = std::max(max_n_used, r.n_used);
    rows.push_back(r);
  }

  struct Col {
    const char* name;
    const char* doc;
    double Row::*field;
    bool energy_like;
  };
  const Col all_cols[] = {
      {"E0", "converged ground energy", &Row::energy, true},
      {"nb", "mean phonon number <a'a>", &Row::nb, false},
      {"purity", "tr rho_b^2", &Row::purity, false},
      {"var_x", "position quadrature variance", &Row::var_x, false},
      {"var_p", "momentum quadrature variance", &Row::var_p, false},
      {"mean_x", "position quadrature mean", &Row::mean_x, false},
  };
  std::vector<Col> cols;
  for (const Col& c : all_cols) {
    const std::string name = c.name;
    if (observable == "all" || observable == name ||
        (observable == "energy" && name == "E0"))
      cols.push_back(c);
  }
  if (cols.empty())
    throw Error(ErrorCode::InvalidArgument,
                "unknown observable '" + observable +
                    "' (want all, energy, nb, purity, var_x, var_p, mean_x)");

  CsvTable t;
  t.header.push_back("g" + unit_tag(cfg));
  for (const Col& c : cols)
    t.header.push_back(std::string(c.name) +
                       (c.energy_like ? unit_tag(cfg) : ""));
  plot_series.resize(cols.size());
  for (const Row& r : rows) {
    std::vector<std::string> cells{fmt(r.g * scale)};
    plot_x.push_back(r.g);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = r.*(cols[c].field) * (cols[c].energy_like ? scale : 1.0);
      cells.push_back(fmt(v));
      plot_series[c].push_back(v);
    }
    t.rows.push_back(std::move(cells));
  }
  json coldoc;
  coldoc["g"] = "coupling strength";
  for (const Col& c : cols) coldoc[c.name] = c.doc;
  sidecar["columns"] = coldoc;
  sidecar["sector"] = sector_name(ground_sector(cfg));
  sidecar["n_max_used"] = max_n_used;
  return t;
}

CsvTable cmd_density(const RunConfig& cfg, json& sidecar,
                     std::vector<double>& plot_x,
                     std::vector<std::vector<double>>& plot_series) {
  if (cfg.grids.x_points < 2)
    throw Error(ErrorCode::InvalidArgument, "density wants >= 2 grid points");
  const GroundSolution sol = solve_ground(cfg, cfg.params);
  const auto xs = make_grid(cfg.grids.x_min, cfg.grids.x_max,
                            (cfg.grids.x_max - cfg.grids.x_min) /
                                (cfg.grids.x_points - 1),
                            "density");
  const auto rho_x = position_density(sol.rho, xs);
  CsvTable t;
  t.header = {"x[quadrature]", "rho_b[1/quadrature]"};
  plot_series.resize(1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    t.rows.push_back({fmt(xs[i]), fmt(rho_x[i])});
    plot_x.push_back(xs[i]);
    plot_series[0].push_back(rho_x[i]);
  }
  sidecar["columns"] = {
      {"x", "dimensionless position, X = (a + a')/sqrt(2)"},
      {"rho_b", "diagonal of the phonon density matrix in x"}};
  sidecar["n_max_used"] = sol.state.n_max_used;
  sidecar["ground_energy"] = sol.state.energy;
  return t;
}

CsvTable cmd_wigner(const RunConfig& cfg, json& sidecar, bool plot,
                    const std::string& svg_path) {
  const GroundSolution sol = solve_ground(cfg, cfg.params);
  const WignerResult w = wigner(sol.rho, cfg.grids.phase_space, cfg.threads);
  CsvTable t;
  t.header = {"x[quadrature]", "p[quadrature]", "W"};
  const auto& g = w.grid;
  const double dx = (g.x_max - g.x_min) / (g.nx - 1);
  const double dp = (g.p_max - g.p_min) / (g.np - 1);
  for (int ip = 0; ip < g.np; ++ip)
    for (int ix = 0; ix < g.nx; ++ix)
      t.rows.push_back({fmt(g.x_min + dx * ix), fmt(g.p_min + dp * ip),
                        fmt(w.at(ip, ix))});
  sidecar["columns"] = {{"x", "dimensionless position"},
                        {"p", "dimensionless momentum"},
                        {"W", "Wigner quasiprobability"}};
  sidecar["integral"] = w.integral;
  sidecar["min_value"] = w.min_value;
  sidecar["coarse_grid"] = w.coarse_grid;
  sidecar["n_max_used"] = sol.state.n_max_used;
  if (plot) write_svg_heatmap(svg_path, w);
  return t;
}

CsvTable cmd_fidelity(const RunConfig& cfg, json& sidecar,
                      std::vector<double>& plot_x,
                      std::vector<std::vector<double>>& plot_series) {
  const auto grid = make_grid(cfg.grids.g_min, cfg.grids.g_max,
                              cfg.grids.g_step, "fidelity");
  CsvTable t;
  t.header = {"g[omega]",   "alpha_ref", "F_coherent", "F_cat_plus",
              "F_cat_minus", "F_mixture", "purity"};
  plot_series.resize(4);
  int max_n_used = 0;
  for (double g : grid) {
    const ModelParams p = with_g(cfg.params, g);
    const GroundSolution sol = solve_ground(cfg, p);
    const MeanFieldResult mf = minimize_alpha(p);
    const double a_ref = std::fabs(mf.alpha_star);
    const int n_used = sol.state.n_max_used;
    max_n_used = std::max(max_n_used, n_used);
    auto ref = [&](ReferenceState::Kind kind, double alpha) {
      ReferenceState r;
      r.kind = kind;
      r.alpha = alpha;
      r.n_max = n_used;
      return fidelity(sol.rho, reference_density(r));
    };
    const double f_coh = ref(ReferenceState::Kind::Coherent, -a_ref);
    double f_cp = 0.0, f_cm = 0.0;
    f_cp = ref(ReferenceState::Kind::CatPlus, a_ref);
    f_cm = a_ref > 1e-8 ? ref(ReferenceState::Kind::CatMinus, a_ref) : 0.0;
    const double f_mix = ref(ReferenceState::Kind::Mixture, a_ref);
    const double pur = purity(sol.rho);
    t.rows.push_back({fmt(g), fmt(mf.alpha_star), fmt(f_coh), fmt(f_cp),
                      fmt(f_cm), fmt(f_mix), fmt(pur)});
    plot_x.push_back(g);
    plot_series[0].push_back(f_coh);
    plot_series[1].push_back(f_cp);
    plot_series[2].push_back(f_mix);
    plot_series[3].push_back(pur);
  }
  sidecar["columns"] = {
      {"g", "coupling strength"},
      {"alpha_ref", "mean-field amplitude used for the references"},
      {"F_coherent", "fidelity against |-alpha_ref>"},
      {"F_cat_plus", "fidelity against the even cat"},
      {"F_cat_minus", "fidelity against the odd cat (0 when undefined)"},
      {"F_mixture", "fidelity against the +-alpha_ref classical mixture"},
      {"purity", "tr rho_b^2"}};
  sidecar["n_max_used"] = max_n_used;
  return t;
}

CsvTable cmd_physical(const RunConfig& cfg, json& sidecar) {
  PhysicalIonParams p = cfg.physical;
  p.lb_convention = LbConvention::BreathingMode;
  const DerivedTrapQuantities breathing = derive_trap(p);
  p.lb_convention = LbConvention::TrapMode;
  const DerivedTrapQuantities trap = derive_trap(p);
  const NormalizedModel model =
      model_params_from_physical(cfg.physical, cfg.detuning);

  CsvTable t;
  t.header = {"quantity", "value", "unit"};
  auto row = [&](const char* q, double v, const char* u) {
    t.rows.push_back({q, fmt(v), u});
  };
  row("l0", breathing.l0, "m");
  row("omega_breathing", breathing.omega_breathing, "rad/s");
  row("l_b_breathing", breathing.l_b, "m");
  row("l_b_trap", trap.l_b, "m");
  row("g_breathing", breathing.g, "rad/s");
  row("g_trap", trap.g, "rad/s");
  row("g_c_breathing", breathing.g_c, "rad/s");
  row("g_c_trap", trap.g_c, "rad/s");
  row("ratio_breathing", breathing.ratio, "1");
  row("ratio_trap", trap.ratio, "1");
  sidecar["columns"] = {{"quantity", "derived trap quantity, both "
                                     "oscillator-length conventions"},
                        {"value", "numeric value"},
                        {"unit", "SI unit"}};
  sidecar["normalized_model"] = params_json(model.params);
  sidecar["scale_rad_s"] = model.scale;
  return t;
}

CsvTable cmd_verify(const RunConfig& cfg, json& sidecar, int& exit_code) {
  CsvTable t;
  t.header = {"check", "residual", "bound"};
  bool all_ok = true;
  const bool want_tri =
      cfg.verify_what == "all" || cfg.verify_what == "tripartite";
  const bool want_app =
      cfg.verify_what == "all" || cfg.verify_what == "appendix";
  if (!want_tri && !want_app)
    throw Error(ErrorCode::InvalidArgument,
                "verify target must be tripartite, appendix, or all");
  if (want_tri) {
    const double bound = 1e-14 * std::max(1.0, std::fabs(cfg.verify_g));
    const double res = verify_tripartite_reduction(cfg.verify_g, cfg.trunc);
    std::printf("tripartite residual %.3e (bound %.3e)\n", res, bound);
    t.rows.push_back({"tripartite", fmt(res), fmt(bound)});
    all_ok = all_ok && res <= bound;
  }
  if (want_app) {
    FockTruncation small = cfg.trunc;
    small.n_max = std::min(small.n_max, 24);  // product space is squared
    AppendixReport rep;
    const double res =
        verify_appendix_assembly(cfg.verify_g, cfg.verify_eta, small, &rep);
    const double bound = 1e-13 * std::max(1.0, std::fabs(cfg.verify_g));
    std::printf("appendix residual %.3e (bound %.3e)\n", res, bound);
    t.rows.push_back({"appendix", fmt(res), fmt(bound)});
    sidecar["appendix_report"] = {
        {"breathing_residual", rep.breathing_residual},
        {"cm_residual", rep.cm_residual},
        {"single_spin_derived_residual", rep.single_spin_derived_residual},
        {"single_spin_printed_residual", rep.single_spin_printed_residual},
        {"constant_term_max", rep.constant_term_max}};
    all_ok = all_ok && res <= bound;
  }
  sidecar["columns"] = {{"check", "operator identity"},
                        {"residual", "max-norm deviation"},
                        {"bound", "contract bound"}};
  exit_code = all_ok ? 0 : 3;
  if (!all_ok)
    std::fprintf(stderr,
                 "{\"error\":\"NonConvergence\",\"message\":\"operator "
                 "identity residual above bound\"}\n");
  return t;
}

}  // namespace

int run(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.threads < 1)
    throw Error(ErrorCode::InvalidArgument, "thread count must be >= 1");
  std::filesystem::create_directories(config.output_dir);
  const std::string base =
      config.basename.empty() ? command_name(config.command) : config.basename;
  const std::string stem = config.output_dir + "/" + base;

  json sidecar;
  CsvTable table;
  std::vector<double> plot_x;
  std::vector<std::vector<double>> plot_series;
  std::string x_label = "g", y_label = "value";
  int exit_code = 0;

  switch (config.command) {
    case Command::Spectrum:
      table = cmd_spectrum(config, sidecar, plot_x, plot_series);
      y_label = "E";
      break;
    case Command::Gfun:
      table = cmd_gfun(config, sidecar, plot_x, plot_series);
      x_label = "E";
      y_label = "G";
      break;
    case Command::Roots:
      table = cmd_roots(config, sidecar, plot_x, plot_series);
      x_label = "E_root";
      y_label = "";
      break;
    case Command::Meanfield:
      table = cmd_meanfield(config, sidecar, plot_x, plot_series);
      y_label = "E_G";
      break;
    case Command::Ground:
      table = cmd_ground(config, sidecar, plot_x, plot_series,
                         config.observable);
      y_label = "observable";
      break;
    case Command::Density:
      table = cmd_density(config, sidecar, plot_x, plot_series);
      x_label = "x";
      y_label = "rho_b";
      break;
    case Command::Wigner:
      table = cmd_wigner(config, sidecar, config.plot, stem + ".svg");
      break;
    case Command::Fidelity:
      table = cmd_fidelity(config, sidecar, plot_x, plot_series);
      y_label = "F";
      break;
    case Command::Physical:
      table = cmd_physical(config, sidecar);
      break;
    case Command::Verify:
      table = cmd_verify(config, sidecar, exit_code);
      break;
  }

  write_csv(stem + ".csv", table);
  if (config.plot && config.command != Command::Wigner && !plot_x.empty())
    write_svg_lines(stem + ".svg", plot_x, plot_series, x_label, y_label);

  const auto t1 = std::chrono::steady_clock::now();
  sidecar["command"] = command_name(config.command);
  sidecar["version"] = kVersion;
  sidecar["wall_time_s"] =
      std::chrono::duration<double>(t1 - t0).count();
  sidecar["kernel_backend"] =
      kernels::backend_name(kernels::active_backend());
  sidecar["config"] = {
      {"params", params_json(config.params)},
      {"physical", physical_json(config.physical)},
      {"detuning_rad_s", config.detuning},
      {"n_max", config.trunc.n_max},
      {"growth_factor", config.trunc.growth_factor},
      {"tol", config.trunc.tol},
      {"sector", sector_name(config.sector)},
      {"g_grid",
       {config.grids.g_min, config.grids.g_max, config.grids.g_step}},
      {"e_grid",
       {config.grids.e_min, config.grids.e_max, config.grids.e_step}},
      {"x_grid",
       {config.grids.x_min, config.grids.x_max, config.grids.x_points}},
      {"phase_space",
       {config.grids.phase_space.x_min, config.grids.phase_space.x_max,
        config.grids.phase_space.nx}},
      {"k_levels", config.k_levels},
      {"n_count", config.n_count},
      {"root_tol", config.root_tol},
      {"scan_step", config.scan_step},
      {"seed", config.seed},
      {"threads", config.threads},
      {"plot", config.plot},
      {"si_units", config.si_units},
      {"ed_check", config.ed_check},
      {"output_dir", config.output_dir},
      {"basename", base}};
  std::ofstream meta(stem + ".json", std::ios::binary);
  if (!meta)
    throw Error(ErrorCode::InvalidArgument, "cannot write " + stem + ".json");
  meta << sidecar.dump(2) << '\n';
  return exit_code;
}

int cli_main(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string command, sector = "full", observable = "all",
              lb_convention = "breathing", gscan, escan;
  double nu_hz = 0.0, rabi_hz = 0.0, vd_hz_per_um = 0.0, detuning_hz = 0.0;

  CLI::App app{
      "Two-spin quantum Rabi model toolkit: spectra, cross-ratio roots, "
      "mean-field analysis, phonon tomography, and trap-parameter mapping"};
  app.set_config("--config", "",
                 "configuration file with key=value lines (flags win)");
  app.add_option("command", command,
                 "one of: spectrum gfun roots meanfield ground density "
                 "wigner fidelity physical verify")
      ->required();
  app.add_option("what", cfg.verify_what,
                 "verify target (tripartite, appendix, all) or ground "
                 "observable");

  app.add_option("--omega", cfg.params.omega, "phonon frequency (energy unit)");
  app.add_option("--Omega", cfg.params.Omega, "Rabi frequency, units of omega");
  app.add_option("--eps", cfg.params.epsilon, "half detuning, units of omega");
  app.add_option("--g", cfg.params.g, "coupling, units of omega");
  app.add_option("--nmax", cfg.trunc.n_max, "initial Fock-space cutoff");
  app.add_option("--growth", cfg.trunc.growth_factor,
                 "cutoff growth factor for convergence doubling");
  app.add_option("--tol", cfg.trunc.tol, "ground-energy convergence, omega");
  app.add_option("--sector", sector,
                 "full | triplet | singlet | collective | plus | minus");
  app.add_option("--gscan", gscan, "g sweep as min:max:step");
  app.add_option("--emin", cfg.grids.e_min, "energy window lower edge");
  app.add_option("--emax", cfg.grids.e_max, "energy window upper edge");
  app.add_option("--estep", cfg.grids.e_step, "gfun scan spacing");
  app.add_option("--xmin", cfg.grids.x_min, "position grid lower edge");
  app.add_option("--xmax", cfg.grids.x_max, "position grid upper edge");
  app.add_option("--xpoints", cfg.grids.x_points, "position grid points");
  app.add_option("--ps-points", cfg.grids.phase_space.nx,
                 "phase-space points per axis (wigner)");
  app.add_option("--k", cfg.k_levels, "levels per spectrum row");
  app.add_option("--ncount", cfg.n_count, "singlet ladder rows");
  app.add_option("--root-tol", cfg.root_tol, "root bisection tolerance");
  app.add_option("--scan-step", cfg.scan_step, "root scan spacing");
  app.add_option("--observable", observable,
                 "ground columns: all energy nb purity var_x var_p mean_x");
  app.add_flag("--no-ed-check", "skip the dense cross-check in roots");
  app.add_option("--eta", cfg.verify_eta, "Lamb-Dicke parameter (verify)");

  app.add_option("--mass-amu", cfg.physical.mass_amu, "ion mass, amu");
  app.add_option("--charge", cfg.physical.net_charge, "net charge, units of e");
  app.add_option("--nu-hz", nu_hz, "axial trap frequency, linear Hz");
  app.add_option("--rabi-hz", rabi_hz, "Rabi frequency, linear Hz");
  app.add_option("--vd-hz-per-um", vd_hz_per_um,
                 "dipolar slope, linear Hz per micrometer");
  app.add_option("--detuning-hz", detuning_hz,
                 "two-photon detuning, linear Hz");
  app.add_option("--lb-convention", lb_convention, "breathing | trap");

  app.add_option("--outdir", cfg.output_dir, "output directory");
  app.add_option("--basename", cfg.basename,
                 "output file stem (default: command name)");
  app.add_option("--seed", cfg.seed, "recorded in the sidecar");
  app.add_option("--threads", cfg.threads,
                 "worker threads (TQRM_THREADS overrides)");
  app.add_flag("--plot", cfg.plot, "emit an SVG next to the CSV");
  app.add_flag("--si", cfg.si_units,
               "report energies in rad/s via the trap mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    static const std::pair<const char*, Command> commands[] = {
        {"spectrum", Command::Spectrum}, {"gfun", Command::Gfun},
        {"roots", Command::Roots},       {"meanfield", Command::Meanfield},
        {"ground", Command::Ground},     {"density", Command::Density},
        {"wigner", Command::Wigner},     {"fidelity", Command::Fidelity},
        {"physical", Command::Physical}, {"verify", Command::Verify}};
    bool found = false;
    for (const auto& [name, value] : commands)
      if (command == name) {
        cfg.command = value;
        found = true;
      }
    if (!found)
      throw Error(ErrorCode::InvalidArgument,
                  "unknown command '" + command + "'");

    static const std::pair<const char*, Sector> sectors[] = {
        {"full", Sector::Full},
        {"triplet", Sector::TripletRotated},
        {"singlet", Sector::SingletRotated},
        {"collective", Sector::ResonantCollective},
        {"plus", Sector::ResonantPlus},
        {"minus", Sector::ResonantMinus}};
    found = false;
    for (const auto& [name, value] : sectors)
      if (sector == name) {
        cfg.sector = value;
        found = true;
      }
    if (!found)
      throw Error(ErrorCode::InvalidArgument,
                  "unknown sector '" + sector + "'");

    if (!gscan.empty()) {
      double a = 0, b = 0, c = 0;
      if (std::sscanf(gscan.c_str(), "%lf:%lf:%lf", &a, &b, &c) != 3)
        throw Error(ErrorCode::InvalidArgument,
                    "--gscan wants min:max:step");
      cfg.grids.g_min = a;
      cfg.grids.g_max = b;
      cfg.grids.g_step = c;
    }
    cfg.grids.phase_space.np = cfg.grids.phase_space.nx;
    cfg.grids.phase_space.x_min = cfg.grids.phase_space.p_min = cfg.grids.x_min;
    cfg.grids.phase_space.x_max = cfg.grids.phase_space.p_max = cfg.grids.x_max;

    const double two_pi = 2.0 * M_PI;
    cfg.physical.nu = nu_hz * two_pi;
    cfg.physical.Omega_drive = rabi_hz * two_pi;
    cfg.physical.Vd_slope = vd_hz_per_um * two_pi * 1e6;  // per um -> per m
    cfg.detuning = detuning_hz * two_pi;
    cfg.physical.lb_convention = lb_convention == "trap"
                                     ? LbConvention::TrapMode
                                     : LbConvention::BreathingMode;
    if (lb_convention != "trap" && lb_convention != "breathing")
      throw Error(ErrorCode::InvalidArgument,
                  "unknown lb convention '" + lb_convention + "'");

    cfg.ed_check = app.count("--no-ed-check") == 0;
    // The bare positional doubles as the observable for `ground nb`;
    // an explicit --observable wins.
    cfg.observable = observable;
    if (cfg.command == Command::Ground && app.count("--observable") == 0 &&
        app.count("what") == 1)
      cfg.observable = cfg.verify_what;
    if (cfg.command == Command::Verify && cfg.verify_what != "tripartite" &&
        cfg.verify_what != "appendix" && cfg.verify_what != "all")
      throw Error(ErrorCode::InvalidArgument,
                  "verify target must be tripartite, appendix, or all");
    cfg.verify_g = cfg.params.g;
    if (cfg.command == Command::Verify && app.count("--g") == 0)
      cfg.verify_g = 1.0;

    if (const char* env = std::getenv("TQRM_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end && *end == '\0' && v >= 1 && v <= 1024)
        cfg.threads = static_cast<int>(v);
    }

    validate(cfg.params);
    validate(cfg.trunc);
    return run(cfg);
  } catch (const Error& e) {
    json err{{"error", error_code_name(e.code())}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return (e.code() == ErrorCode::InvalidArgument ||
            e.code() == ErrorCode::SectorUnavailable)
               ? 2
               : 3;
  } catch (const std::exception& e) {
    json err{{"error", "Unexpected"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
  }
}

}  // namespace tqr
