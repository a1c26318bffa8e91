#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "swexp/excess_rate.hpp"
#include "swexp/parallel.hpp"
#include "swexp/prob.hpp"

namespace swexp {

struct GridSpec {
  int resolution = 200;
  double max_points = 2e9;

  void validate() const {
    if (resolution < 2) throw Error(ErrorKind::InvalidInput, "grid: resolution must be >= 2");
  }
};

namespace detail {

inline void guard(double points, const GridSpec& gs, const char* who) {
  if (points > gs.max_points) throw Error(ErrorKind::TooLarge, std::string(who) + ": projected grid too large");
}

inline double simplex_count(std::size_t k, int res) {
  return std::exp(std::lgamma(res + static_cast<double>(k)) - std::lgamma(res + 1.0) -
                  std::lgamma(static_cast<double>(k)));
}

inline double index_min(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return m;
}

}  // namespace detail

/// Brute-force v_rb: every row of Q_{Y|X} ranges over the simplex grid; rows
/// violating the divergence budget are pruned before the product search.
inline double grid_v_rb(const Source& src, const Pmf& qx, double ee, double eta, const GridSpec& gs) {
  gs.validate();
  const std::size_t nx = src.nx(), ny = src.ny();
  const double c = ee - detail::kl_or_inf(qx, src.px);
  if (c < 0.0) throw Error(ErrorKind::Infeasible, "grid_v_rb: ee below D(qx||px)");
  auto rows = simplex_grid(ny, gs.resolution, static_cast<std::size_t>(std::min(gs.max_points, 5e7)));

  struct Cand {
    double cost;  // qx(x) D(row||W_x)
    double neg_h;  // -qx(x) H(row)
    std::vector<double> mass;  // qx(x) row
  };
  std::vector<std::vector<Cand>> cands;
  std::vector<std::size_t> act;
  for (std::size_t x = 0; x < nx; ++x) {
    if (!(qx[x] > 0.0)) continue;
    act.push_back(x);
    std::vector<Cand> cx;
    for (const auto& r : rows) {
      double dv = detail::kl_or_inf(r, src.pygx.row(x));
      if (dv == kInf || qx[x] * dv > c + 1e-15) continue;
      Cand cd{qx[x] * dv, -qx[x] * entropy(r), {}};
      cd.mass.resize(ny);
      for (std::size_t y = 0; y < ny; ++y) cd.mass[y] = qx[x] * r[y];
      cx.push_back(std::move(cd));
    }
    std::sort(cx.begin(), cx.end(), [](const Cand& a, const Cand& b) { return a.cost < b.cost; });
    cands.push_back(std::move(cx));
  }
  double total = 1.0;
  for (const auto& cx : cands) total *= static_cast<double>(cx.size());
  detail::guard(total, gs, "grid_v_rb");
  if (cands.empty() || cands[0].empty()) return kInf;

  std::vector<double> best(cands[0].size(), kInf);
  parallel_for(cands[0].size(), [&](std::size_t i0) {
    std::vector<double> qy(ny);
    double local = kInf;
    auto rec = [&](auto&& self, std::size_t level, double cost, double neg_h) -> void {
      if (level == cands.size()) {
        double v = neg_h + entropy(qy) + eta * cost;
        local = std::min(local, v);
        return;
      }
      for (const auto& cd : cands[level]) {
        if (cost + cd.cost > c + 1e-15) break;
        for (std::size_t y = 0; y < ny; ++y) qy[y] += cd.mass[y];
        self(self, level + 1, cost + cd.cost, neg_h + cd.neg_h);
        for (std::size_t y = 0; y < ny; ++y) qy[y] -= cd.mass[y];
      }
    };
    const Cand& first = cands[0][i0];
    for (std::size_t y = 0; y < ny; ++y) qy[y] = first.mass[y];
    rec(rec, 1, first.cost, first.neg_h);
    best[i0] = local;
  });
  return std::max(0.0, detail::index_min(best));
}

struct GridBand {
  double value = kInf;  // minimum over the band
  double slack = 0.0;   // spread of the objective over band points
  std::size_t points = 0;
};

/// Brute-force v_ex over couplings with both marginals qx; the constraint
/// B + D = ee is relaxed to a band of half-width 1/resolution. Free entries are
/// the leading (k-1) x (k-1) block on the 1/resolution grid.
inline GridBand grid_v_ex(const Source& src, const Pmf& qx, double ee, const GridSpec& gs) {
  gs.validate();
  const std::size_t k = src.nx();
  const std::size_t free = (k - 1) * (k - 1);
  const int n = gs.resolution;
  detail::guard(std::pow(n + 1.0, static_cast<double>(free)), gs, "grid_v_ex");
  const auto d = bhattacharyya_matrix(src.pygx);
  const double d0 = detail::kl_or_inf(qx, src.px);
  const double band = 1.0 / n;

  GridBand out;
  double worst = -kInf;
  std::vector<int> idx(free, 0);
  std::vector<double> q(k * k);
  for (;;) {
    bool ok = true;
    for (std::size_t x = 0; x + 1 < k && ok; ++x) {
      double s = 0.0;
      for (std::size_t z = 0; z + 1 < k; ++z) {
        q[x * k + z] = idx[x * (k - 1) + z] / static_cast<double>(n);
        s += q[x * k + z];
      }
      q[x * k + k - 1] = qx[x] - s;
      if (q[x * k + k - 1] < -1e-15) ok = false;
    }
    for (std::size_t z = 0; z < k && ok; ++z) {
      double s = 0.0;
      for (std::size_t x = 0; x + 1 < k; ++x) s += q[x * k + z];
      q[(k - 1) * k + z] = qx[z] - s;
      if (q[(k - 1) * k + z] < -1e-15) ok = false;
    }
    if (ok) {
      double b = 0.0, info = 0.0;
      for (std::size_t x = 0; x < k; ++x)
        for (std::size_t z = 0; z < k; ++z) {
          double v = std::max(0.0, q[x * k + z]);
          if (v <= 0.0) continue;
          b += v * d[x * k + z];
          info += v * std::log(v / (qx[x] * qx[z]));
        }
      if (std::abs(b + d0 - ee) <= band) {
        info = std::max(0.0, info);
        out.value = std::min(out.value, info);
        worst = std::max(worst, info);
        ++out.points;
      }
    }
    std::size_t p = 0;
    while (p < free && ++idx[p] > n) idx[p++] = 0;
    if (p == free) break;
  }
  if (out.points == 0) throw Error(ErrorKind::Infeasible, "grid_v_ex: no grid coupling inside the band");
  out.slack = worst - out.value;
  return out;
}

namespace detail {

/// Candidate input distributions: the simplex grid plus px itself.
inline std::vector<Pmf> input_candidates(const Source& src, double er, int res) {
  std::vector<Pmf> out;
  for (auto& q : simplex_grid(src.nx(), res))
    if (kl_or_inf(q, src.px) <= er) out.push_back(std::move(q));
  out.push_back(src.px);
  return out;
}

}  // namespace detail

/// Brute-force e_rb using I(Q) = min over q~ of D(Q_{Y|X}||q~|Q_X):
/// for each grid q~, every row is minimized separately over the row grid, then
/// Q_X ranges over its own grid.
inline double grid_e_rb(const Source& src, double r, double er, double t, const GridSpec& gs) {
  gs.validate();
  const std::size_t nx = src.nx(), ny = src.ny();
  auto rows = simplex_grid(ny, gs.resolution, static_cast<std::size_t>(std::min(gs.max_points, 5e7)));
  const auto& refs = rows;
  auto inputs = detail::input_candidates(src, er, gs.resolution);
  detail::guard(static_cast<double>(refs.size()) * (rows.size() * nx + inputs.size()), gs, "grid_e_rb");

  std::vector<std::vector<double>> logw(nx, std::vector<double>(ny));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) logw[x][y] = src.pygx(x, y) > 0.0 ? std::log(src.pygx(x, y)) : -kInf;
  std::vector<double> neg_h_rows(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) neg_h_rows[i] = -entropy(rows[i]);
  std::vector<double> base(inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j)
    base[j] = detail::kl_or_inf(inputs[j], src.px) + t * (r - entropy(inputs[j]));

  std::vector<double> best(refs.size(), kInf);
  parallel_for(refs.size(), [&](std::size_t iq) {
    const auto& ref = refs[iq];
    std::vector<double> logr(ny);
    for (std::size_t y = 0; y < ny; ++y) logr[y] = ref[y] > 0.0 ? std::log(ref[y]) : -kInf;
    std::vector<double> m(nx, kInf);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      for (std::size_t x = 0; x < nx; ++x) {
        // D(row||W_x) + t D(row||q~) = -(1+t)H(row) - sum row (log W_x + t log q~)
        double v = (1.0 + t) * neg_h_rows[i];
        for (std::size_t y = 0; y < ny; ++y) {
          if (row[y] <= 0.0) continue;
          v -= row[y] * (logw[x][y] + t * logr[y]);
        }
        if (v < m[x]) m[x] = v;
      }
    }
    double local = kInf;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      double v = base[j];
      for (std::size_t x = 0; x < nx; ++x)
        if (inputs[j][x] > 0.0) v += inputs[j][x] * m[x];
      local = std::min(local, v);
    }
    best[iq] = local;
  });
  return detail::index_min(best);
}

/// Brute-force e_ex for binary X: Q_X on the grid and the single free coupling
/// entry Q(0,1) = Q(1,0) = s on the grid.
inline double grid_e_ex(const Source& src, double r, double er, double t, const GridSpec& gs) {
  gs.validate();
  if (src.nx() != 2) throw Error(ErrorKind::TooLarge, "grid_e_ex: only binary X is supported");
  const int n = gs.resolution;
  detail::guard((n + 1.0) * (n + 1.0), gs, "grid_e_ex");
  const auto d = bhattacharyya_matrix(src.pygx);
  const double d01 = d[1];
  auto inputs = detail::input_candidates(src, er, n);
  std::vector<double> best(inputs.size(), kInf);
  parallel_for(inputs.size(), [&](std::size_t j) {
    const Pmf& a = inputs[j];
    const double base = detail::kl_or_inf(a, src.px) + t * (r + entropy(a));
    const double smax = std::min(a[0], a[1]);
    double local = kInf;
    for (int i = 0; i <= n; ++i) {
      double s = static_cast<double>(i) / n;
      if (s > smax) break;
      if (s > 0.0 && d01 == kInf) break;
      double hq = 0.0;
      for (double v : {a[0] - s, a[1] - s, s, s})
        if (v > 0.0) hq -= v * std::log(v);
      double b = s > 0.0 ? 2.0 * s * d01 : 0.0;
      local = std::min(local, base + b - t * hq);
    }
    best[j] = local;
  });
  return detail::index_min(best);
}

/// min over the joint grid of D(Q_XY||P_XY) + [rho(Q_X) - H(Q_{X|Y}|Q_Y)]_+.
/// `rho` is sampled once per distinct grid marginal.
inline double grid_error_exponent_rb(const Source& src, const std::function<double(const Pmf&)>& rho,
                                     const GridSpec& gs) {
  gs.validate();
  const std::size_t nx = src.nx(), ny = src.ny();
  const std::size_t cells = nx * ny;
  detail::guard(detail::simplex_count(cells, gs.resolution), gs, "grid_error_exponent_rb");
  const auto pj = src.joint().values();

  std::map<std::vector<int>, double> rho_cache;
  for (const auto& t : enumerate_types(gs.resolution, nx)) rho_cache[t.counts] = rho(t.pmf());

  auto joints = enumerate_types(gs.resolution, cells);
  std::vector<double> best(joints.size(), kInf);
  parallel_for(joints.size(), [&](std::size_t i) {
    const auto& c = joints[i].counts;
    std::vector<int> mx(nx, 0);
    std::vector<double> qy(ny, 0.0);
    double div = 0.0, hxy = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        int v = c[x * ny + y];
        mx[x] += v;
        if (v == 0) continue;
        double q = static_cast<double>(v) / gs.resolution;
        qy[y] += q;
        if (!(pj[x * ny + y] > 0.0)) {
          div = kInf;
        } else {
          div += q * std::log(q / pj[x * ny + y]);
        }
        hxy -= q * std::log(q);
      }
    if (div == kInf) return;
    double hx_given_y = hxy - entropy(qy);
    double rate = rho_cache.at(mx);
    best[i] = div + std::max(0.0, rate - hx_given_y);
  });
  return std::max(0.0, detail::index_min(best));
}

/// Grid slack estimate: how much the oracle value moves when the resolution is halved.
template <class Oracle>
double grid_slack(Oracle&& oracle, const GridSpec& gs) {
  if (gs.resolution % 2 != 0) throw Error(ErrorKind::InvalidInput, "grid_slack: resolution must be even");
  GridSpec coarse = gs;
  coarse.resolution = gs.resolution / 2;
  double fine = oracle(gs), crude = oracle(coarse);
  if (!std::isfinite(fine) || !std::isfinite(crude)) return 0.0;
  return std::max(0.0, crude - fine);
}

}  // namespace swexp
