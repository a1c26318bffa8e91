#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "swexp/prob.hpp"
#include "swexp/solvers.hpp"

namespace swexp {

struct Breakpoints {
  double ee0 = 0.0;
  double ee_a_rb = 0.0;
  double ee_max_rb = 0.0;
  double ee_a_ex = 0.0;
  double ee_max_ex = 0.0;
  double ee_max_sp = 0.0;
  CondPmf q_prime_ygx;   // argmin of I + D(.||P_{Y|X}|Q_X)
  CondPmf q_prime_xtgx;  // argmin of B + I over couplings with marginals Q_X
  double i_prime_rb = 0.0;
  double i_prime_ex = 0.0;
};

inline Breakpoints breakpoints(const Source& src, const Pmf& qx, const SolverConfig& cfg = {}) {
  Breakpoints bp;
  const double d0 = kl_divergence(qx, src.px);
  bp.ee0 = d0;

  auto rb = v_rb(src, qx, kInf, 1.0, cfg);
  const double dprime = cond_divergence(rb.conditional, src.pygx, qx);
  bp.i_prime_rb = mutual_information(qx, rb.conditional);
  bp.q_prime_ygx = rb.conditional;
  bp.ee_a_rb = d0 + dprime;
  bp.ee_max_rb = bp.ee_a_rb + bp.i_prime_rb;

  const auto dmat = bhattacharyya_matrix(src.pygx);
  auto ex = min_bhatt_plus_info(src, qx, cfg);
  bp.q_prime_xtgx = ex.conditional;
  bp.i_prime_ex = cond_divergence(ex.conditional, std::span<const double>(qx), qx);
  bp.ee_a_ex = d0 + bhattacharyya_avg(qx, ex.conditional, dmat);
  bp.ee_max_ex = d0 + bhattacharyya_avg(JointPmf::product(qx, qx), dmat);

  auto qy = output_marginal(qx, src.pygx);
  const JointPmf indep = JointPmf::product(qx, qy);
  const JointPmf pxy = src.joint();
  bp.ee_max_sp = d0 + detail::kl_or_inf(indep.values(), pxy.values());
  return bp;
}

inline double rho_rb(const Source& src, const Pmf& qx, double ee, const Breakpoints& bp, const SolverConfig& cfg = {}) {
  if (ee <= bp.ee0) return 0.0;
  const double h = entropy(qx);
  if (ee <= bp.ee_a_rb) return ee + h - bp.ee0 - v_rb(src, qx, ee, 1.0, cfg).value;
  if (ee <= bp.ee_max_rb) return ee - bp.ee_a_rb + h - bp.i_prime_rb;
  return h;
}

inline double rho_ex(const Source& src, const Pmf& qx, double ee, const Breakpoints& bp, const SolverConfig& cfg = {}) {
  if (ee <= bp.ee0) return 0.0;
  const double h = entropy(qx);
  if (ee <= bp.ee_a_ex) return ee - bp.ee_a_ex + h - bp.i_prime_ex;
  if (ee <= bp.ee_max_ex) return h - v_ex(src, qx, ee, cfg).value;
  return h;
}

inline double rho_sp(const Source& src, const Pmf& qx, double ee, const Breakpoints& bp, const SolverConfig& cfg = {}) {
  if (ee <= bp.ee0) return 0.0;
  const double h = entropy(qx);
  if (ee <= bp.ee_max_sp) return h - v_rb(src, qx, ee, 0.0, cfg).value;
  return h;
}

inline double rho_ub(const Source& src, const Pmf& qx, double ee, const Breakpoints& bp, const SolverConfig& cfg = {}) {
  return std::min(rho_rb(src, qx, ee, bp, cfg), rho_ex(src, qx, ee, bp, cfg));
}

inline double rho_rb(const Source& src, const Pmf& qx, double ee, const SolverConfig& cfg = {}) {
  return rho_rb(src, qx, ee, breakpoints(src, qx, cfg), cfg);
}
inline double rho_ex(const Source& src, const Pmf& qx, double ee, const SolverConfig& cfg = {}) {
  return rho_ex(src, qx, ee, breakpoints(src, qx, cfg), cfg);
}
inline double rho_sp(const Source& src, const Pmf& qx, double ee, const SolverConfig& cfg = {}) {
  return rho_sp(src, qx, ee, breakpoints(src, qx, cfg), cfg);
}
inline double rho_ub(const Source& src, const Pmf& qx, double ee, const SolverConfig& cfg = {}) {
  return rho_ub(src, qx, ee, breakpoints(src, qx, cfg), cfg);
}

struct RateCurvePoint {
  double ee = 0.0;
  double rho_rb = 0.0;
  double rho_ex = 0.0;
  double rho_sp = 0.0;
  double rho_ub = 0.0;
};

inline RateCurvePoint rate_point(const Source& src, const Pmf& qx, double ee, const Breakpoints& bp,
                                 const SolverConfig& cfg = {}) {
  RateCurvePoint p;
  p.ee = ee;
  p.rho_rb = rho_rb(src, qx, ee, bp, cfg);
  p.rho_ex = rho_ex(src, qx, ee, bp, cfg);
  p.rho_sp = rho_sp(src, qx, ee, bp, cfg);
  p.rho_ub = std::min(p.rho_rb, p.rho_ex);
  return p;
}

inline std::vector<RateCurvePoint> rho_curve(const Source& src, const Pmf& qx, const std::vector<double>& ee_grid,
                                             const SolverConfig& cfg = {}) {
  if (!std::is_sorted(ee_grid.begin(), ee_grid.end()))
    throw Error(ErrorKind::InvalidInput, "rho_curve: ee grid must be sorted");
  const Breakpoints bp = breakpoints(src, qx, cfg);
  std::vector<RateCurvePoint> out;
  out.reserve(ee_grid.size());
  for (double ee : ee_grid) out.push_back(rate_point(src, qx, ee, bp, cfg));
  return out;
}

struct SweepPoint {
  double lambda = 0.0;
  double alpha = 0.0;
  double ee = 0.0;
  double rho = 0.0;
};

/// Traces the curved part of the random-binning rate function parametrically:
/// eta = lambda + 1 with the constraint released.
inline std::vector<SweepPoint> rho_rb_sweep(const Source& src, const Pmf& qx, const std::vector<double>& lambdas,
                                            const SolverConfig& cfg = {}) {
  const double d0 = kl_divergence(qx, src.px);
  const double h = entropy(qx);
  std::vector<SweepPoint> out;
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw Error(ErrorKind::InvalidInput, "rho_rb_sweep: lambda must be >= 0");
    auto s = v_rb(src, qx, kInf, l + 1.0, cfg);
    SweepPoint p;
    p.lambda = l;
    p.alpha = s.multiplier;
    p.ee = d0 + cond_divergence(s.conditional, src.pygx, qx);
    p.rho = h - mutual_information(qx, s.conditional);
    out.push_back(p);
  }
  return out;
}

struct WeakApprox {
  double rho = 0.0;
  double alpha_bar = 0.0;
};

/// Closed-form approximation of the random-binning rate function for weakly
/// correlated sources.
inline WeakApprox rho_rb_weak_approx(const Source& src, const Pmf& qx, double ee) {
  const double d0 = kl_divergence(qx, src.px);
  if (ee < d0) throw Error(ErrorKind::InvalidInput, "rho_rb_weak_approx: ee below D(qx||px)");
  const double tt = mutual_information(qx, src.pygx);
  const double s = ee - d0;
  WeakApprox w;
  w.rho = entropy(qx) - s - tt + 2.0 * std::sqrt(s * tt);
  w.alpha_bar = tt > 0.0 ? 1.0 - std::sqrt(s / tt) : 1.0;
  return w;
}

}  // namespace swexp
