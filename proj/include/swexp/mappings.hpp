#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "swexp/prob.hpp"

namespace swexp {

namespace detail {

inline bool active(std::span<const double> a, std::size_t x) { return a.empty() || a[x] > 0.0; }

/// Normalizes a row of log-weights in place (entries equal to -inf become 0).
inline bool normalize_log_row(std::span<double> lw) {
  double m = -kInf;
  for (double v : lw) m = std::max(m, v);
  if (m == -kInf || std::isnan(m)) return false;
  double s = 0.0;
  for (double& v : lw) {
    v = v == -kInf ? 0.0 : std::exp(v - m);
    s += v;
  }
  for (double& v : lw) v /= s;
  return true;
}

inline void fill_uniform(std::span<double> row) {
  for (double& v : row) v = 1.0 / static_cast<double>(row.size());
}

}  // namespace detail

/// Q(y|x) proportional to W(y|x)^alpha qy(y)^(1-alpha), with 0^0 = 1.
/// Rows where `active` is zero are set to a uniform placeholder.
inline CondPmf map_geometric(const CondPmf& w, std::span<const double> qy, double alpha,
                             std::span<const double> active = {}) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidInput, "map_geometric: alpha outside [0,1]");
  const std::size_t nx = w.rows(), ny = w.cols();
  std::vector<double> out(nx * ny);
  for (std::size_t x = 0; x < nx; ++x) {
    std::span<double> row(out.data() + x * ny, ny);
    if (!detail::active(active, x)) {
      detail::fill_uniform(row);
      continue;
    }
    for (std::size_t y = 0; y < ny; ++y) {
      double a = w(x, y), b = qy[y];
      double lw = 0.0;
      if (alpha > 0.0) lw += a > 0.0 ? alpha * std::log(a) : -kInf;
      if (alpha < 1.0) lw += b > 0.0 ? (1.0 - alpha) * std::log(b) : -kInf;
      row[y] = lw;
    }
    if (!detail::normalize_log_row(row))
      throw Error(ErrorKind::DegenerateRow, "map_geometric: row " + std::to_string(x) + " has zero normalizer");
  }
  return CondPmf::raw(nx, ny, std::move(out));
}

/// Q'(x~|x) proportional to Q(x~|x) exp(-lambda d(x, x~)); infinite d is excluded.
inline CondPmf map_bhatt(const CondPmf& q, std::span<const double> d, double lambda,
                         std::span<const double> active = {}) {
  const std::size_t k = q.rows();
  std::vector<double> out(k * k);
  for (std::size_t x = 0; x < k; ++x) {
    std::span<double> row(out.data() + x * k, k);
    if (!detail::active(active, x)) {
      detail::fill_uniform(row);
      continue;
    }
    for (std::size_t z = 0; z < k; ++z) {
      double qv = q(x, z), dv = d[x * k + z];
      row[z] = (qv > 0.0 && dv != kInf) ? std::log(qv) - (lambda == 0.0 ? 0.0 : lambda * dv) : -kInf;
    }
    if (!detail::normalize_log_row(row))
      throw Error(ErrorKind::DegenerateRow, "map_bhatt: row " + std::to_string(x) + " has zero normalizer");
  }
  return CondPmf::raw(k, k, std::move(out));
}

inline CondPmf map_bhatt(const CondPmf& q, const CondPmf& w, double lambda, std::span<const double> active = {}) {
  return map_bhatt(q, bhattacharyya_matrix(w), lambda, active);
}

/// Rescales the columns of a joint so that its column marginal equals `target`.
inline JointPmf map_lumping(const JointPmf& qxx, std::span<const double> target) {
  const std::size_t r = qxx.rows(), c = qxx.cols();
  if (target.size() != c) throw Error(ErrorKind::InvalidInput, "map_lumping: target size mismatch");
  auto col = qxx.col_marginal();
  std::vector<double> out(qxx.values());
  for (std::size_t z = 0; z < c; ++z) {
    if (target[z] > 0.0 && !(col[z] > 0.0))
      throw Error(ErrorKind::DegenerateColumn, "map_lumping: column " + std::to_string(z) + " has zero mass");
    double f = target[z] > 0.0 ? target[z] / col[z] : 0.0;
    for (std::size_t x = 0; x < r; ++x) out[x * c + z] *= f;
  }
  return JointPmf(r, c, std::move(out));
}

/// Q(x) proportional to P(x)^((1+lambda)/(1+lambda+t)) exp(-(h1(x) + t h2(x)) / (1+t+lambda)).
inline Pmf map_h(std::span<const double> px, std::span<const double> h1, std::span<const double> h2, double lambda,
                 double t) {
  if (!(lambda >= 0.0) || !(t >= 0.0)) throw Error(ErrorKind::InvalidInput, "map_h: lambda and t must be >= 0");
  const double den = 1.0 + lambda + t;
  std::vector<double> lw(px.size());
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (!(px[x] > 0.0)) {
      lw[x] = -kInf;
      continue;
    }
    double pen = h1[x] + (t > 0.0 ? t * h2[x] : 0.0);
    if (!std::isfinite(pen)) throw Error(ErrorKind::InvalidInput, "map_h: h1/h2 must be finite on the support");
    lw[x] = (1.0 + lambda) / den * std::log(px[x]) - pen / den;
  }
  if (!detail::normalize_log_row(lw)) throw Error(ErrorKind::InvalidInput, "map_h: empty support");
  return Pmf::proportional(std::move(lw));
}

}  // namespace swexp
