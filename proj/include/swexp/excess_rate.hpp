#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "swexp/parallel.hpp"
#include "swexp/rate_functions.hpp"
#include "swexp/root_finding.hpp"
#include "swexp/solvers.hpp"

namespace swexp {

struct ExcessConfig {
  SolverConfig solver;
  double t_max = 64.0;
  double t_cap = 1048576.0;  // give up doubling t_max beyond this
  double t_tol = 1e-7;
  double er_tol = 1e-5;
};

struct TMax {
  double t = 0.0;
  double value = -kInf;
  bool reached = false;
};

/// Derivative in t of e_rb at the minimizer: r - H(Q_{X|Y}|Q_Y).
inline double e_rb_slope(const SolveResult& s, double r) {
  return r - backward_cond_entropy(s.input, s.conditional);
}

/// max over t in [lo, hi] of e_rb(t); with `extend`, hi is doubled while the
/// maximizer sits at hi with positive slope.
inline TMax max_e_rb(const Source& src, double r, double er, double lo, double hi, double stop_at,
                     const ExcessConfig& cfg, bool extend = false) {
  TMax out;
  for (;;) {
    auto m = golden_section_max([&](double t) { return e_rb(src, r, er, t, cfg.solver).value; }, lo, hi, cfg.t_tol,
                                stop_at);
    if (m.fx > out.value) out = {m.x, m.fx, m.reached};
    if (m.reached || !extend || m.x < hi * (1.0 - 1e-6) || hi >= cfg.t_cap) return out;
    if (e_rb_slope(e_rb(src, r, er, hi, cfg.solver), r) <= 0.0) return out;
    lo = hi;
    hi *= 2.0;
  }
}

inline double e_ex_slope(const SolveResult& s, double r) {
  return r - entropy(s.input) + cond_divergence(s.conditional, std::span<const double>(s.input), s.input);
}

inline TMax max_e_ex(const Source& src, double r, double er, double lo, double hi, double stop_at,
                     const ExcessConfig& cfg) {
  TMax out;
  for (;;) {
    auto m = golden_section_max([&](double t) { return e_ex(src, r, er, t, cfg.solver).value; }, lo, hi, cfg.t_tol,
                                stop_at);
    if (m.fx > out.value) out = {m.x, m.fx, m.reached};
    if (m.reached || m.x < hi * (1.0 - 1e-6) || hi >= cfg.t_cap) return out;
    if (e_ex_slope(e_ex(src, r, er, hi, cfg.solver), r) <= 0.0) return out;
    lo = hi;
    hi *= 2.0;
  }
}

/// True when (r, er) is achievable with error exponent ee.
inline bool achievable(const Source& src, double r, double er, double ee, const ExcessConfig& cfg = {}) {
  if (!(r >= 0.0) || !(er >= 0.0) || !(ee >= 0.0)) throw Error(ErrorKind::InvalidInput, "achievable: negative argument");
  if (ee == 0.0) return true;
  if (max_e_rb(src, r, er, 0.0, 1.0, ee, cfg).value >= ee) return true;
  return max_e_ex(src, r, er, 1.0, cfg.t_max, ee, cfg).value >= ee;
}

/// True when no code reaches (r, er) with error exponent ee.
inline bool not_achievable(const Source& src, double r, double er, double ee, const ExcessConfig& cfg = {}) {
  if (!(r >= 0.0) || !(er >= 0.0) || !(ee >= 0.0)) throw Error(ErrorKind::InvalidInput, "not_achievable: negative argument");
  if (ee == 0.0) return false;
  return max_e_rb(src, r, er, 0.0, cfg.t_max, ee, cfg, true).value < ee;
}

/// Largest possible divergence from px; bounds every useful excess-rate exponent.
inline double er_search_cap(const Source& src) {
  double m = 0.0;
  for (double p : src.px) m = std::max(m, -std::log(p));
  return m + 1.0;
}

/// sup{er : achievable(r, er, ee)}; 0 if not even er = 0 works, +inf if the cap works.
inline double excess_rate_lower(const Source& src, double r, double ee, const ExcessConfig& cfg = {}) {
  auto ok = [&](double er) { return achievable(src, r, er, ee, cfg); };
  if (!ok(0.0)) return 0.0;
  double hi = er_search_cap(src);
  if (ok(hi)) return kInf;
  double lo = 0.0;
  while (hi - lo > cfg.er_tol) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// inf{er : not_achievable(r, er, ee)}; the converse-side bound.
inline double excess_rate_upper(const Source& src, double r, double ee, const ExcessConfig& cfg = {}) {
  auto ruled_out = [&](double er) { return not_achievable(src, r, er, ee, cfg); };
  if (ruled_out(0.0)) return 0.0;
  double hi = er_search_cap(src);
  if (!ruled_out(hi)) return kInf;
  double lo = 0.0;
  while (hi - lo > cfg.er_tol) {
    double mid = 0.5 * (lo + hi);
    (ruled_out(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct ExcessRatePoint {
  double r = 0.0;
  double er_lower = 0.0;
  double er_upper = 0.0;
};

inline ExcessRatePoint excess_rate_point(const Source& src, double r, double ee, const ExcessConfig& cfg = {}) {
  return {r, excess_rate_lower(src, r, ee, cfg), excess_rate_upper(src, r, ee, cfg)};
}

enum class RateKind { Rb, Ex, Sp, Ub };

inline double rho_of(RateKind which, const Source& src, const Pmf& qx, double ee, const Breakpoints& bp,
                     const SolverConfig& cfg) {
  switch (which) {
    case RateKind::Rb: return rho_rb(src, qx, ee, bp, cfg);
    case RateKind::Ex: return rho_ex(src, qx, ee, bp, cfg);
    case RateKind::Sp: return rho_sp(src, qx, ee, bp, cfg);
    case RateKind::Ub: return rho_ub(src, qx, ee, bp, cfg);
  }
  return 0.0;
}

/// Points of the simplex over |X| letters with coordinates in multiples of 1/res.
inline std::vector<Pmf> simplex_grid(std::size_t k, int res, std::size_t max_points = 5000000) {
  if (res < 2) throw Error(ErrorKind::InvalidInput, "simplex_grid: resolution must be >= 2");
  double count = std::exp(std::lgamma(res + static_cast<double>(k)) - std::lgamma(res + 1.0) -
                          std::lgamma(static_cast<double>(k)));
  if (count > static_cast<double>(max_points)) throw Error(ErrorKind::TooLarge, "simplex_grid: too many points");
  std::vector<Pmf> out;
  for (const auto& t : enumerate_types(res, k)) out.push_back(t.pmf());
  return out;
}

inline void require_small_alphabet(const Source& src, const char* who) {
  if (src.nx() > 3) throw Error(ErrorKind::TooLarge, std::string(who) + ": grid search needs |X| <= 3");
}

/// min D(Q_X||P_X) over grid points with rho(Q_X, ee) >= r; +inf when none qualifies.
inline double excess_rate_direct(const Source& src, double ee, double r, RateKind which, int grid_res,
                                 const SolverConfig& cfg = {}) {
  require_small_alphabet(src, "excess_rate_direct");
  auto grid = simplex_grid(src.nx(), grid_res);
  std::vector<double> div(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) div[i] = kl_divergence(grid[i], src.px);
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return div[a] < div[b]; });
  for (std::size_t i : order) {
    const Pmf& q = grid[i];
    if (rho_of(which, src, q, ee, breakpoints(src, q, cfg), cfg) >= r) return div[i];
  }
  return kInf;
}

struct RatePeak {
  double r0 = 0.0;
  Pmf qx;
};

/// max over the grid of rho_ub(., ee); ties go to the first grid point.
inline RatePeak rate_function_peak(const Source& src, double ee, int grid_res, const SolverConfig& cfg = {}) {
  require_small_alphabet(src, "rate_function_peak");
  auto grid = simplex_grid(src.nx(), grid_res);
  std::vector<double> vals(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { vals[i] = rho_ub(src, grid[i], ee, cfg); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[best]) best = i;
  return {vals[best], grid[best]};
}

/// Fixed-rate coding must operate at r0 = max rho; the excess-rate exponent is
/// 0 below r0 and +inf above.
struct FixedRateCurve {
  RatePeak peak;
  double exponent_at(double r) const { return r < peak.r0 ? 0.0 : kInf; }
};

inline FixedRateCurve fixed_rate_comparison(const Source& src, double ee, int grid_res, const SolverConfig& cfg = {}) {
  return {rate_function_peak(src, ee, grid_res, cfg)};
}

/// Largest ee whose rate-function maximum does not exceed r.
inline double fixed_rate_max_exponent(const Source& src, double r, int grid_res, double tol = 1e-5,
                                      const SolverConfig& cfg = {}) {
  auto fits = [&](double ee) { return rate_function_peak(src, ee, grid_res, cfg).r0 <= r; };
  double lo = 0.0, hi = 0.05;
  while (fits(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) return kInf;
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Variable-rate coding with rate H(Q_X) per type beyond the typical rate:
/// 0 for r <= rho_ub(px, ee), else min D(Q||px) over grid points with H(Q) >= r.
inline double average_rate_comparison(const Source& src, double ee, double r, int grid_res,
                                      const SolverConfig& cfg = {}) {
  require_small_alphabet(src, "average_rate_comparison");
  if (r <= rho_ub(src, src.px, ee, cfg)) return 0.0;
  double best = kInf;
  for (const auto& q : simplex_grid(src.nx(), grid_res))
    if (entropy(q) >= r) best = std::min(best, kl_divergence(q, src.px));
  return best;
}

}  // namespace swexp
