// swexp: rate functions, excess-rate exponents, grid oracles and random-binning
// simulation for variable-rate Slepian-Wolf coding.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swexp/swexp.hpp"

using namespace swexp;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string source;
  std::string qx;
  std::optional<double> ee;
  std::string ee_grid;
  std::optional<double> r;
  std::string r_grid;
  std::optional<double> er;
  std::optional<double> t;
  double eta = 1.0;
  int n = 12;
  long long trials = 100000;
  unsigned long long seed = 1;
  int resolution = 0;
  std::string decoder = "ml";
  std::string out;
  std::string format = "csv";
  bool bits = false;
};

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, std::string(flag) + ": cannot parse '" + cell + "'");
    }
  }
  return v;
}

/// A:B:STEP, inclusive of B up to rounding.
std::vector<double> parse_grid(const std::string& s, const char* flag) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ':')) parts.push_back(parse_list(cell, flag).at(0));
  if (parts.size() != 3) throw Error(ErrorKind::InvalidInput, std::string(flag) + ": expected A:B:STEP");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || !(b > a)) throw Error(ErrorKind::InvalidInput, std::string(flag) + ": grid must be strictly increasing");
  std::vector<double> g;
  const long count = std::lround(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= count; ++i) g.push_back(a + static_cast<double>(i) * step);
  return g;
}

int default_resolution(const Source& src) { return src.nx() == 2 ? 2000 : 100; }

double to_unit(double v, bool bits) { return bits ? v / std::log(2.0) : v; }

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "--out: cannot write " + o.out);
  f << text;
}

std::string table(const Options& o, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                  const ordered_json& extra = ordered_json()) {
  std::ostringstream ss;
  if (o.format == "csv") {
    CsvWriter w(ss, header);
    for (const auto& r : rows) w.row(r);
    return ss.str();
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json obj;
    for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = number(r[i]);
    arr.push_back(obj);
  }
  ordered_json doc = extra.is_null() ? ordered_json::object() : extra;
  doc["rows"] = arr;
  return doc.dump(2) + "\n";
}

SolverConfig solver_config() {
  SolverConfig c;
  c.lenient = true;
  return c;
}

int cmd_rate_fn(const Options& o) {
  const Source src = load_source(o.source);
  const SolverConfig cfg = solver_config();
  std::vector<std::vector<double>> rows;
  const bool b = o.bits;
  if (!o.qx.empty()) {
    Pmf qx(parse_list(o.qx, "--qx"), "qx");
    if (qx.size() != src.nx()) throw Error(ErrorKind::InvalidInput, "qx: size does not match the source");
    std::vector<double> grid;
    if (!o.ee_grid.empty())
      grid = parse_grid(o.ee_grid, "--ee-grid");
    else if (o.ee)
      grid = {*o.ee};
    else
      throw Error(ErrorKind::InvalidInput, "rate-fn: give --ee or --ee-grid");
    const double h = entropy(qx), hc = backward_cond_entropy(qx, src.pygx);
    auto pts = rho_curve(src, qx, grid, cfg);
    for (const auto& p : pts)
      rows.push_back({p.ee, to_unit(p.rho_rb, b), to_unit(p.rho_ex, b), to_unit(p.rho_sp, b), to_unit(p.rho_ub, b),
                      to_unit(h, b), to_unit(hc, b)});
    emit(o, table(o, {"ee", "rho_rb", "rho_ex", "rho_sp", "rho_ub", "h_qx", "h_x_given_y"}, rows));
    return 0;
  }
  if (src.nx() != 2) throw Error(ErrorKind::InvalidInput, "rate-fn: the qx sweep needs binary X; give --qx otherwise");
  if (!o.ee) throw Error(ErrorKind::InvalidInput, "rate-fn: the qx sweep needs --ee");
  const int res = o.resolution > 0 ? o.resolution : 200;
  rows.resize(res + 1);
  parallel_for(rows.size(), [&](std::size_t i) {
    const double q0 = static_cast<double>(i) / res;
    Pmf qx(std::vector<double>{q0, 1.0 - q0});
    auto p = rate_point(src, qx, *o.ee, breakpoints(src, qx, cfg), cfg);
    rows[i] = {q0, to_unit(p.rho_rb, b), to_unit(p.rho_ex, b), to_unit(p.rho_sp, b), to_unit(p.rho_ub, b),
               to_unit(entropy(qx), b), to_unit(backward_cond_entropy(qx, src.pygx), b)};
  });
  emit(o, table(o, {"qx0", "rho_rb", "rho_ex", "rho_sp", "rho_ub", "h_qx", "h_x_given_y"}, rows));
  return 0;
}

int cmd_excess_rate(const Options& o) {
  const Source src = load_source(o.source);
  if (!o.ee) throw Error(ErrorKind::InvalidInput, "excess-rate: --ee is required");
  std::vector<double> rs;
  if (!o.r_grid.empty())
    rs = parse_grid(o.r_grid, "--r-grid");
  else if (o.r)
    rs = {*o.r};
  else
    throw Error(ErrorKind::InvalidInput, "excess-rate: give --r or --r-grid");
  const double ee = *o.ee;
  ExcessConfig cfg;
  cfg.solver = solver_config();
  const double scale = o.bits ? std::log(2.0) : 1.0;
  const int res = o.resolution > 0 ? o.resolution : default_resolution(src);
  const bool grids = src.nx() <= 3;
  std::optional<FixedRateCurve> fixed;
  if (grids) fixed = fixed_rate_comparison(src, ee, res, cfg.solver);

  std::vector<std::vector<double>> rows(rs.size());
  parallel_for(rs.size(), [&](std::size_t i) {
    const double r = rs[i] * scale;  // rates given in the reporting unit
    auto p = excess_rate_point(src, r, ee, cfg);
    double fx = fixed ? fixed->exponent_at(r) : std::nan("");
    double av = grids ? average_rate_comparison(src, ee, r, res, cfg.solver) : std::nan("");
    rows[i] = {rs[i], p.er_lower, p.er_upper, fx, av};
  });
  ordered_json extra;
  if (fixed) {
    extra["r0"] = to_unit(fixed->peak.r0, o.bits);
    extra["peak_qx"] = fixed->peak.qx.values();
    extra["peak_rate"] = to_unit(fixed->peak.r0, o.bits);
  }
  emit(o, table(o, {"r", "er_lower", "er_upper", "er_fixed", "er_average"}, rows, extra));
  return 0;
}

ordered_json sim_json(const Options& o, const SWCode& c, const Source& src, const SimStats& s) {
  double mean = 0.0, mx = 0.0;
  for (std::size_t t = 0; t < c.types.size(); ++t) {
    mean += std::exp(log_type_probability(src.px, c.types[t])) * c.rate_per_type[t];
    mx = std::max(mx, c.rate_per_type[t]);
  }
  ordered_json j;
  j["n"] = c.n;
  j["decoder"] = to_string(s.decoder);
  j["trials"] = s.trials;
  j["errors"] = s.errors;
  j["p_hat"] = s.p_hat;
  j["ci95"] = s.ci95;
  j["rate_summary"] = {{"mean_rate", to_unit(mean, o.bits)},
                       {"max_rate", to_unit(mx, o.bits)},
                       {"header_rate", to_unit(c.header_nats(), o.bits)},
                       {"mean_rate_with_header", to_unit(mean + c.header_nats(), o.bits)}};
  j["seed"] = c.seed;
  return j;
}

int cmd_simulate(const Options& o) {
  const Source src = load_source(o.source);
  if (o.trials <= 0) throw Error(ErrorKind::InvalidInput, "--trials: must be positive");
  if (!o.ee) throw Error(ErrorKind::InvalidInput, "simulate: --ee selects the rate function and is required");
  std::vector<Decoder> decs;
  if (o.decoder == "ml" || o.decoder == "both") decs.push_back(Decoder::ML);
  if (o.decoder == "mce" || o.decoder == "both") decs.push_back(Decoder::MCE);
  const SolverConfig cfg = solver_config();
  const double ee = *o.ee;
  auto code = build_code(src, o.n, [&](const Pmf& q) { return rho_ub(src, q, ee, cfg); }, o.seed);
  ordered_json out = ordered_json::array();
  for (Decoder d : decs) out.push_back(sim_json(o, code, src, estimate_error(src, code, d, o.trials, o.seed)));
  emit(o, (out.size() == 1 ? out[0] : out).dump(2) + "\n");
  return 0;
}

int cmd_oracle(const Options& o) {
  const Source src = load_source(o.source);
  const SolverConfig cfg = solver_config();
  const int res = o.resolution > 0 ? o.resolution : 200;
  GridSpec gs{res};
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;  // algorithm, grid, coarse grid, slack
  auto add = [&](const std::string& name, double alg, double fine, double coarse, double slack) {
    names.push_back(name);
    rows.push_back({alg, fine, coarse, slack});
  };
  if (!o.qx.empty() && o.ee) {
    Pmf qx(parse_list(o.qx, "--qx"), "qx");
    const double ee = *o.ee;
    GridSpec half{res / 2};
    double g = grid_v_rb(src, qx, ee, o.eta, gs), gc = grid_v_rb(src, qx, ee, o.eta, half);
    add("v_rb", v_rb(src, qx, ee, o.eta, cfg).value, g, gc, std::max(0.0, gc - g));
    try {
      auto band = grid_v_ex(src, qx, ee, gs);
      auto bc = grid_v_ex(src, qx, ee, half);
      add("v_ex", v_ex(src, qx, ee, cfg).value, band.value, bc.value, band.slack);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Infeasible && e.kind() != ErrorKind::TooLarge) throw;
      std::cerr << "v_ex skipped: " << e.what() << "\n";
    }
  }
  if (o.r && o.er && o.t) {
    const double r = *o.r, er = *o.er, t = *o.t;
    GridSpec half{res / 2};
    double g = grid_e_rb(src, r, er, t, gs), gc = grid_e_rb(src, r, er, t, half);
    add("e_rb", e_rb(src, r, er, t, cfg).value, g, gc, std::max(0.0, gc - g));
    if (src.nx() == 2 && t > 0.0) {
      double ge = grid_e_ex(src, r, er, t, gs), gec = grid_e_ex(src, r, er, t, half);
      add("e_ex", e_ex(src, r, er, t, cfg).value, ge, gec, std::max(0.0, gec - ge));
    }
  }
  if (names.empty()) throw Error(ErrorKind::InvalidInput, "oracle: give --qx and --ee, and/or --r, --er and --t");
  std::ostringstream ss;
  if (o.format == "csv") {
    CsvWriter w(ss, {"quantity", "algorithm", "grid", "grid_half_resolution", "slack", "resolution"});
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::vector<std::string> cells{names[i]};
      for (double v : rows[i]) cells.push_back(format_number(v));
      cells.push_back(std::to_string(res));
      w.row_strings(cells);
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < names.size(); ++i)
      arr.push_back({{"quantity", names[i]},
                     {"algorithm", number(rows[i][0])},
                     {"grid", number(rows[i][1])},
                     {"grid_half_resolution", number(rows[i][2])},
                     {"slack", number(rows[i][3])},
                     {"resolution", res}});
    ss << arr.dump(2) << "\n";
  }
  emit(o, ss.str());
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::TooLarge: return 3;
    case ErrorKind::Infeasible:
    case ErrorKind::NotConverged:
    case ErrorKind::BracketFailure: return 2;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-rate Slepian-Wolf coding: rate functions, excess-rate exponents, oracles, simulation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--source", o.source, "source JSON {\"px\": [...], \"pygx\": [[...], ...]}")->required();
    c->add_option("--out", o.out, "output path (default stdout)");
    c->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->add_flag("--bits", o.bits, "report rates in bits instead of nats");
    c->add_option("--resolution", o.resolution, "grid resolution")->check(CLI::Range(2, 1000000));
  };

  auto* rate = app.add_subcommand("rate-fn", "rate functions over an ee grid, or over qx(0) at fixed ee");
  common(rate);
  rate->add_option("--qx", o.qx, "comma-separated Q_X");
  rate->add_option("--ee", o.ee, "error exponent (nats)");
  rate->add_option("--ee-grid", o.ee_grid, "A:B:STEP");

  auto* excess = app.add_subcommand("excess-rate", "excess-rate exponent bounds over a rate grid");
  common(excess);
  excess->add_option("--ee", o.ee, "error exponent (nats)");
  excess->add_option("--r", o.r, "rate");
  excess->add_option("--r-grid", o.r_grid, "A:B:STEP");

  auto* sim = app.add_subcommand("simulate", "random-binning simulation with rate rho_ub(., ee)");
  common(sim);
  sim->add_option("--ee", o.ee, "error exponent selecting the rate function");
  sim->add_option("--n", o.n, "blocklength")->check(CLI::Range(1, 64));
  sim->add_option("--trials", o.trials, "Monte Carlo trials");
  sim->add_option("--seed", o.seed, "seed");
  sim->add_option("--decoder", o.decoder, "ml, mce or both")->check(CLI::IsMember({"ml", "mce", "both"}));

  auto* orc = app.add_subcommand("oracle", "grid oracle values next to the iterative solvers");
  common(orc);
  orc->add_option("--qx", o.qx, "comma-separated Q_X (v_rb, v_ex)");
  orc->add_option("--ee", o.ee, "error exponent (v_rb, v_ex)");
  orc->add_option("--eta", o.eta, "weight of the divergence term in v_rb");
  orc->add_option("--r", o.r, "rate (e_rb, e_ex)");
  orc->add_option("--er", o.er, "excess-rate exponent (e_rb, e_ex)");
  orc->add_option("--t", o.t, "Lagrange parameter t (e_rb, e_ex)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    int rc = 0;
    if (*rate) rc = cmd_rate_fn(o);
    if (*excess) rc = cmd_excess_rate(o);
    if (*sim) rc = cmd_simulate(o);
    if (*orc) rc = cmd_oracle(o);
    if (detail::lenient_accepts > 0)
      std::cerr << "warning: " << detail::lenient_accepts << " solver call(s) stopped at the iteration cap with a final"
                << " decrease below 100 x obj_tol; their values were kept\n";
    return rc;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
