#pragma once

#include <atomic>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "swexp/mappings.hpp"
#include "swexp/prob.hpp"
#include "swexp/root_finding.hpp"

namespace swexp {

struct SolveResult {
  double value = 0.0;
  CondPmf conditional;  // Q*_{Y|X} or Q*_{X~|X}
  Pmf input;            // optimal Q_X for the excess-rate problems, else the given qx
  double multiplier = 0.0;
  int iters = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after every outer iteration
};

namespace detail {

inline std::atomic<long> lenient_accepts{0};

/// Throws NotConverged unless the config is lenient and the last decrease was small.
inline void not_converged(const std::string& who, const SolveResult& r, const SolverConfig& cfg) {
  if (cfg.lenient && r.trace.size() >= 2 && std::abs(r.trace[r.trace.size() - 2] - r.trace.back()) < 100.0 * cfg.obj_tol) {
    ++lenient_accepts;
    return;
  }
  throw Error(ErrorKind::NotConverged, who + ": no convergence after " + std::to_string(cfg.max_outer_iters) +
                                           " iterations (last objective " + std::to_string(r.value) + ")");
}

/// Decrease-based stopping rule; a tiny increase from rounding also stops.
inline bool settled(double prev, double cur, double tol) { return prev - cur < tol; }

inline double divergence_or_inf(const CondPmf& q, const CondPmf& p, std::span<const double> a) {
  double d = 0.0;
  for (std::size_t x = 0; x < q.rows(); ++x) {
    if (!(a[x] > 0.0)) continue;
    double t = kl_or_inf(q.row(x), p.row(x));
    if (t == kInf) return kInf;
    d += a[x] * t;
  }
  return d;
}

}  // namespace detail

/// min over Q_{Y|X} of I(Q_X x Q_{Y|X}) + eta D(Q_{Y|X}||P_{Y|X}|Q_X)
/// subject to D(Q_X x Q_{Y|X}||P_XY) <= ee, by alternating minimization.
inline SolveResult v_rb(const Source& src, const Pmf& qx, double ee, double eta, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (qx.size() != src.nx()) throw Error(ErrorKind::InvalidInput, "v_rb: qx size mismatch");
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidInput, "v_rb: eta must be >= 0");
  const double d0 = detail::kl_or_inf(qx, src.px);
  const double c = ee - d0;
  if (std::isnan(c) || c < 0.0)
    throw Error(ErrorKind::Infeasible, "v_rb: ee below D(qx||px)");
  const CondPmf& w = src.pygx;
  const double alpha0 = eta / (1.0 + eta);

  SolveResult res;
  res.input = qx;
  std::vector<double> qy = output_marginal(qx, w);
  double prev = kInf;
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    auto dcond = [&](double a) { return cond_divergence(map_geometric(w, qy, a, qx), w, qx); };
    double alpha = alpha0;
    if (dcond(alpha0) > c) alpha = bisect_monotone(dcond, c, {alpha0, 1.0}, cfg);
    CondPmf q = map_geometric(w, qy, alpha, qx);
    qy = output_marginal(qx, q);
    double obj = cond_divergence(q, qy, qx) + (eta > 0.0 ? eta * cond_divergence(q, w, qx) : 0.0);
    res.value = obj;
    res.conditional = std::move(q);
    res.multiplier = alpha;
    res.iters = it;
    res.trace.push_back(obj);
    if (detail::settled(prev, obj, cfg.obj_tol)) {
      res.converged = true;
      return res;
    }
    prev = obj;
  }
  detail::not_converged("v_rb", res, cfg);
  return res;
}

namespace detail {

/// Alternates a Bhattacharyya tilt with marginal rescaling. When `target_b` is
/// finite the tilt multiplier is chosen so that the average distance equals it;
/// otherwise a single lambda = 1 tilt is followed by pure rescaling.
inline SolveResult iterative_scaling(const Source& src, const Pmf& qx, double target_b, const SolverConfig& cfg,
                                     const char* who) {
  const std::size_t k = src.nx();
  const auto d = bhattacharyya_matrix(src.pygx);
  std::vector<double> init(k * k, 0.0);
  for (std::size_t x = 0; x < k; ++x) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) {
      init[x * k + z] = d[x * k + z] == kInf ? 0.0 : qx[z];
      s += init[x * k + z];
    }
    for (std::size_t z = 0; z < k; ++z) init[x * k + z] = s > 0.0 ? init[x * k + z] / s : 1.0 / k;
  }
  CondPmf q = CondPmf::raw(k, k, std::move(init));
  const bool constrained = std::isfinite(target_b);

  auto avg_b = [&](const CondPmf& c) { return bhattacharyya_avg(qx, c, d); };
  auto marginal_err = [&](const CondPmf& c) {
    auto m = output_marginal(qx, c);
    double e = 0.0;
    for (std::size_t z = 0; z < k; ++z) e += std::abs(m[z] - qx[z]);
    return e;
  };
  auto objective = [&](const CondPmf& c) {
    double v = cond_divergence(c, std::span<const double>(qx), qx);
    return constrained ? v : v + avg_b(c);
  };

  SolveResult res;
  res.input = qx;
  double prev = kInf;
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    double lambda = it == 1 ? 1.0 : 0.0;
    if (constrained) {
      try {
        lambda = bisect_monotone([&](double l) { return avg_b(map_bhatt(q, d, l, qx)); }, target_b, {-1.0, 1.0}, cfg,
                                 Expand::Both);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BracketFailure) throw;
        throw Error(ErrorKind::Infeasible, std::string(who) + ": average Bhattacharyya distance target unattainable");
      }
    }
    CondPmf tilted = map_bhatt(q, d, lambda, qx);
    double obj = objective(tilted);
    double merr = marginal_err(tilted);
    res.value = obj;
    res.conditional = tilted;
    res.multiplier = lambda;
    res.iters = it;
    res.trace.push_back(obj);
    if (std::abs(prev - obj) < cfg.obj_tol && merr < 1e-9) {
      res.converged = true;
      return res;
    }
    prev = obj;
    // rescale columns toward qx, then rows back to qx
    std::vector<double> joint = JointPmf::product(qx, tilted).values();
    std::vector<double> col(k, 0.0);
    for (std::size_t x = 0; x < k; ++x)
      for (std::size_t z = 0; z < k; ++z) col[z] += joint[x * k + z];
    for (std::size_t x = 0; x < k; ++x) {
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        double f = qx[z] > 0.0 ? qx[z] / col[z] : 0.0;
        joint[x * k + z] *= f;
        s += joint[x * k + z];
      }
      for (std::size_t z = 0; z < k; ++z)
        joint[x * k + z] = qx[x] > 0.0 && s > 0.0 ? joint[x * k + z] / s : 1.0 / static_cast<double>(k);
    }
    q = CondPmf::raw(k, k, std::move(joint));
  }
  not_converged(who, res, cfg);
  return res;
}

}  // namespace detail

/// min over couplings Q_{XX~} with both marginals qx and B(Q) = ee - D(qx||px)
/// of D(Q_{X~|X}||qx|qx), by iterative scaling.
inline SolveResult v_ex(const Source& src, const Pmf& qx, double ee, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (qx.size() != src.nx()) throw Error(ErrorKind::InvalidInput, "v_ex: qx size mismatch");
  const double c = ee - detail::kl_or_inf(qx, src.px);
  if (std::isnan(c) || c < 0.0) throw Error(ErrorKind::Infeasible, "v_ex: ee below D(qx||px)");
  if (c == kInf) throw Error(ErrorKind::Infeasible, "v_ex: ee must be finite");
  return detail::iterative_scaling(src, qx, c, cfg, "v_ex");
}

/// Unconstrained minimizer of B(Q) + I(Q) over couplings with both marginals qx.
inline SolveResult min_bhatt_plus_info(const Source& src, const Pmf& qx, const SolverConfig& cfg = {}) {
  cfg.validate();
  return detail::iterative_scaling(src, qx, kInf, cfg, "min_bhatt_plus_info");
}

/// min over D(Q_X||P_X) <= er and Q_{Y|X} of
/// D(Q_X||P_X) + D(Q_{Y|X}||P_{Y|X}|Q_X) + t [r - H(Q_{X|Y}|Q_Y)].
inline SolveResult e_rb(const Source& src, double r, double er, double t, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!(er >= 0.0) || !(t >= 0.0)) throw Error(ErrorKind::InvalidInput, "e_rb: er and t must be >= 0");
  const CondPmf& w = src.pygx;
  const std::size_t nx = src.nx();
  const double alpha = 1.0 / (1.0 + t);
  std::vector<double> qy = output_marginal(src.px, w);
  std::vector<double> h1(nx), h2(nx);

  SolveResult res;
  double prev = kInf;
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    CondPmf qbar = map_geometric(w, qy, alpha);
    for (std::size_t x = 0; x < nx; ++x) {
      h1[x] = detail::kl_or_inf(qbar.row(x), w.row(x));
      h2[x] = detail::kl_or_inf(qbar.row(x), qy);
    }
    Pmf a = src.px;
    double lambda = 0.0;
    if (er == 0.0) {
      a = src.px;
    } else if (er < kInf) {
      a = map_h(src.px, h1, h2, 0.0, t);
      if (kl_divergence(a, src.px) > er) {
        auto f = [&](double l) { return kl_divergence(map_h(src.px, h1, h2, l, t), src.px); };
        lambda = bisect_monotone(f, er, {0.0, 1.0}, cfg, Expand::Upper);
        a = map_h(src.px, h1, h2, lambda, t);
      }
    } else {
      a = map_h(src.px, h1, h2, 0.0, t);
    }
    qy = output_marginal(a, qbar);
    double obj = kl_divergence(a, src.px) + cond_divergence(qbar, w, a) +
                 t * (r - entropy(a) + cond_divergence(qbar, qy, a));
    res.value = obj;
    res.conditional = qbar;
    res.input = a;
    res.multiplier = lambda;
    res.iters = it;
    res.trace.push_back(obj);
    if (detail::settled(prev, obj, cfg.obj_tol)) {
      res.converged = true;
      return res;
    }
    prev = obj;
  }
  detail::not_converged("e_rb", res, cfg);
  return res;
}

/// The sphere-packing function coincides with e_rb.
inline SolveResult e_sp(const Source& src, double r, double er, double t, const SolverConfig& cfg = {}) {
  return e_rb(src, r, er, t, cfg);
}

namespace detail {

/// min over couplings with both marginals a of <d,Q> - t H(Q), via Sinkhorn.
struct EntropicCoupling {
  std::vector<double> u, v, q;
  double value = 0.0;
};

inline void sinkhorn(std::span<const double> a, std::span<const double> kmat, EntropicCoupling& ec, double t,
                     std::span<const double> d) {
  const std::size_t k = a.size();
  if (ec.v.size() != k) ec.v.assign(k, 1.0);
  ec.u.assign(k, 0.0);
  ec.q.assign(k * k, 0.0);
  std::vector<double> kv(k), ku(k);
  for (int it = 0; it < 100000; ++it) {
    for (std::size_t x = 0; x < k; ++x) {
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) s += kmat[x * k + z] * ec.v[z];
      ec.u[x] = a[x] / s;
    }
    double err = 0.0;
    for (std::size_t z = 0; z < k; ++z) {
      double s = 0.0;
      for (std::size_t x = 0; x < k; ++x) s += kmat[x * k + z] * ec.u[x];
      double nv = a[z] / s;
      err += std::abs(ec.v[z] * s - a[z]);
      ec.v[z] = nv;
    }
    if (err < 1e-14) break;
  }
  double val = 0.0;
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t z = 0; z < k; ++z) {
      double qv = ec.u[x] * kmat[x * k + z] * ec.v[z];
      ec.q[x * k + z] = qv;
      if (qv > 0.0) val += qv * (d[x * k + z] + t * std::log(qv));
    }
  ec.value = val;
}

struct ExState {
  std::vector<double> a;
  EntropicCoupling ec;
  double phi = 0.0;
  std::vector<double> grad;
};

}  // namespace detail

/// min over D(Q_X||P_X) <= er and couplings Q_{XX~} with both marginals Q_X of
/// D(Q_X||P_X) + B(Q) + t [r - H(Q_X) + I(Q)].
/// The coupling block is an entropic transport problem solved by Sinkhorn
/// scaling; the marginal block is solved by exponentiated-gradient descent with
/// Armijo backtracking, and the divergence constraint by a multiplier search.
inline SolveResult e_ex(const Source& src, double r, double er, double t, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!(er >= 0.0) || !(t > 0.0)) throw Error(ErrorKind::InvalidInput, "e_ex: need er >= 0 and t > 0");
  const std::size_t k = src.nx();
  const auto d = bhattacharyya_matrix(src.pygx);
  std::vector<double> kmat(k * k);
  for (std::size_t i = 0; i < k * k; ++i) kmat[i] = d[i] == kInf ? 0.0 : std::exp(-d[i] / t);
  const auto& p = src.px.values();

  auto evaluate = [&](detail::ExState& s, double mu) {
    detail::sinkhorn(s.a, kmat, s.ec, t, d);
    s.phi = (1.0 + mu) * detail::kl_or_inf(s.a, p) + t * entropy(s.a) + s.ec.value;
    s.grad.resize(k);
    for (std::size_t x = 0; x < k; ++x)
      s.grad[x] = (1.0 + mu) * std::log(s.a[x] / p[x]) - t * std::log(s.a[x]) + t * std::log(s.ec.u[x] * s.ec.v[x]);
  };

  int total_iters = 0;
  auto solve = [&](double mu, std::vector<double> start) {
    detail::ExState s;
    s.a = std::move(start);
    evaluate(s, mu);
    const double step0 = 1.0 / (1.0 + mu + t);
    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
      ++total_iters;
      double gmin = kInf, gavg = 0.0;
      for (std::size_t x = 0; x < k; ++x) {
        gmin = std::min(gmin, s.grad[x]);
        gavg += s.a[x] * s.grad[x];
      }
      if (gavg - gmin < cfg.obj_tol) return s;
      bool accepted = false;
      double step = step0;
      for (int bt = 0; bt < 60 && !accepted; ++bt, step *= 0.5) {
        detail::ExState n;
        n.a.resize(k);
        n.ec.v = s.ec.v;
        double z = 0.0;
        for (std::size_t x = 0; x < k; ++x) {
          n.a[x] = s.a[x] * std::exp(-step * (s.grad[x] - gmin));
          z += n.a[x];
        }
        double dir = 0.0;
        for (std::size_t x = 0; x < k; ++x) {
          n.a[x] /= z;
          dir += s.grad[x] * (n.a[x] - s.a[x]);
        }
        evaluate(n, mu);
        if (n.phi <= s.phi + 1e-4 * dir) {
          const bool stalled = !(n.phi < s.phi);
          s = std::move(n);
          if (stalled) return s;
          accepted = true;
        }
      }
      if (!accepted) return s;
    }
    throw Error(ErrorKind::NotConverged, "e_ex: marginal descent did not converge");
  };

  detail::ExState best;
  double mu = 0.0;
  if (er == 0.0) {
    best.a = p;
    evaluate(best, 0.0);
  } else {
    best = solve(0.0, p);
    if (detail::kl_or_inf(best.a, p) > er) {
      std::vector<double> warm = best.a;
      auto f = [&](double m) {
        auto s = solve(m, warm);
        return detail::kl_or_inf(s.a, p);
      };
      mu = bisect_monotone(f, er, {0.0, 1.0}, cfg, Expand::Upper);
      best = solve(mu, warm);
    }
  }

  SolveResult res;
  res.value = detail::kl_or_inf(best.a, p) + t * (r + entropy(best.a)) + best.ec.value;
  res.input = Pmf::proportional(best.a);
  std::vector<double> cond(k * k);
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t z = 0; z < k; ++z) cond[x * k + z] = best.ec.q[x * k + z] / best.a[x];
  for (std::size_t x = 0; x < k; ++x) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) s += cond[x * k + z];
    for (std::size_t z = 0; z < k; ++z) cond[x * k + z] /= s;
  }
  res.conditional = CondPmf::raw(k, k, std::move(cond));
  res.multiplier = mu;
  res.iters = total_iters;
  res.converged = true;
  res.trace.push_back(res.value);
  return res;
}

}  // namespace swexp
