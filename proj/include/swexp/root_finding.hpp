#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "swexp/error.hpp"

namespace swexp {

/// Stopping rules shared by the iterative solvers.
struct SolverConfig {
  double obj_tol = 1e-10;
  int max_outer_iters = 10000;
  double bisect_tol = 1e-12;
  double bracket_growth = 2.0;
  int max_bisect_iters = 200;
  double bracket_limit = 1099511627776.0;  // 2^40
  // accept an unconverged result whose last decrease is below 100 * obj_tol
  bool lenient = false;

  void validate() const {
    if (!(obj_tol > 0.0) || !(bisect_tol > 0.0)) throw Error(ErrorKind::InvalidInput, "config: tolerances must be > 0");
    if (max_outer_iters < 1 || max_bisect_iters < 1)
      throw Error(ErrorKind::InvalidInput, "config: iteration caps must be >= 1");
    if (!(bracket_growth > 1.0)) throw Error(ErrorKind::InvalidInput, "config: bracket_growth must exceed 1");
  }
};

struct Bracket {
  double lo = 0.0;
  double hi = 1.0;
};

enum class Expand { None, Upper, Both };

/// Root of f(x) = target for monotone f. The bracket is widened geometrically
/// (upper end only, or both ends) until it straddles the target.
template <class F>
double bisect_monotone(F&& f, double target, Bracket b, const SolverConfig& cfg, Expand expand = Expand::None) {
  auto g = [&](double x) {
    double v = f(x) - target;
    if (std::isnan(v)) throw Error(ErrorKind::InvalidInput, "bisect_monotone: f returned NaN");
    return v;
  };
  double glo = g(b.lo), ghi = g(b.hi);
  while (glo * ghi > 0.0) {
    if (expand == Expand::None) throw Error(ErrorKind::BracketFailure, "bisect_monotone: bracket does not straddle target");
    double nhi = b.hi > 0.0 ? b.hi * cfg.bracket_growth : 1.0;
    double nlo = b.lo;
    if (expand == Expand::Both) nlo = b.lo < 0.0 ? b.lo * cfg.bracket_growth : -1.0;
    if (std::abs(nhi) > cfg.bracket_limit || std::abs(nlo) > cfg.bracket_limit)
      throw Error(ErrorKind::BracketFailure, "bisect_monotone: bracket exhausted");
    if (expand == Expand::Both) {
      b.lo = nlo;
      glo = g(b.lo);
    }
    b.hi = nhi;
    ghi = g(b.hi);
  }
  if (glo == 0.0) return b.lo;
  if (ghi == 0.0) return b.hi;
  const bool rising = ghi > glo;
  for (int it = 0; it < cfg.max_bisect_iters; ++it) {
    double mid = 0.5 * (b.lo + b.hi);
    if (b.hi - b.lo <= cfg.bisect_tol * std::max(1.0, std::abs(mid))) break;
    double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == rising)
      b.lo = mid;
    else
      b.hi = mid;
  }
  return 0.5 * (b.lo + b.hi);
}

struct ScalarMax {
  double x = 0.0;
  double fx = -std::numeric_limits<double>::infinity();
  int evals = 0;
  bool reached = false;  // stop_at threshold met
};

/// Golden-section maximization of a concave function on [lo, hi].
/// Returns early once a value >= stop_at is observed.
template <class F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double tol = 1e-9,
                             double stop_at = std::numeric_limits<double>::infinity()) {
  constexpr double kInvPhi = 0.6180339887498949;
  ScalarMax best;
  auto eval = [&](double x) {
    double v = f(x);
    ++best.evals;
    if (v > best.fx || (v == best.fx && x < best.x)) {
      best.fx = v;
      best.x = x;
    }
    if (v >= stop_at) best.reached = true;
    return v;
  };
  eval(lo);
  if (best.reached) return best;
  eval(hi);
  if (best.reached || hi <= lo) return best;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = eval(c);
  if (best.reached) return best;
  double fd = eval(d);
  while (!best.reached && b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  return best;
}

}  // namespace swexp
