#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "swexp/error.hpp"

namespace swexp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSumTol = 1e-12;

namespace detail {

inline void check_pmf(std::span<const double> p, const std::string& what) {
  if (p.size() < 2) throw Error(ErrorKind::InvalidInput, what + ": alphabet size must be at least 2");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0)
      throw Error(ErrorKind::InvalidInput, what + "[" + std::to_string(i) + "]: entries must be finite and >= 0");
    s += p[i];
  }
  if (std::abs(s - 1.0) > kSumTol)
    throw Error(ErrorKind::InvalidInput, what + ": entries sum to " + std::to_string(s) + ", expected 1");
}

inline double xlogx_over(double q, double p) {
  if (q <= 0.0) return 0.0;
  if (p <= 0.0) return kInf;
  return q * std::log(q / p);
}

}  // namespace detail

/// Probability vector over a finite alphabet {0, ..., k-1}.
class Pmf {
 public:
  Pmf() = default;

  /// Validates and renormalizes away rounding residue.
  explicit Pmf(std::vector<double> p, const std::string& what = "pmf") : p_(std::move(p)) {
    detail::check_pmf(p_, what);
    renormalize();
  }

  /// Builds a pmf proportional to nonnegative weights.
  static Pmf proportional(std::vector<double> w, const std::string& what = "pmf") {
    double s = 0.0;
    for (double v : w) {
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidInput, what + ": invalid weight");
      s += v;
    }
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidInput, what + ": weights sum to zero");
    for (double& v : w) v /= s;
    Pmf out;
    out.p_ = std::move(w);
    if (out.p_.size() < 2) throw Error(ErrorKind::InvalidInput, what + ": alphabet size must be at least 2");
    return out;
  }

  static Pmf uniform(std::size_t k) { return Pmf(std::vector<double>(k, 1.0 / static_cast<double>(k))); }

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const noexcept { return p_; }
  operator std::span<const double>() const noexcept { return p_; }
  auto begin() const noexcept { return p_.begin(); }
  auto end() const noexcept { return p_.end(); }

  bool operator==(const Pmf&) const = default;

 private:
  void renormalize() {
    double s = std::accumulate(p_.begin(), p_.end(), 0.0);
    for (double& v : p_) v /= s;
  }

  std::vector<double> p_;
};

/// Row-stochastic matrix W(y|x), stored row-major.
class CondPmf {
 public:
  CondPmf() = default;

  CondPmf(std::size_t rows, std::size_t cols, std::vector<double> w, const std::string& what = "cond")
      : rows_(rows), cols_(cols), w_(std::move(w)) {
    if (w_.size() != rows * cols) throw Error(ErrorKind::InvalidInput, what + ": shape mismatch");
    if (cols < 2) throw Error(ErrorKind::InvalidInput, what + ": output alphabet size must be at least 2");
    for (std::size_t x = 0; x < rows; ++x) {
      detail::check_pmf(row(x), what + "[" + std::to_string(x) + "]");
      double s = 0.0;
      for (double v : row(x)) s += v;
      for (std::size_t y = 0; y < cols; ++y) w_[x * cols + y] /= s;
    }
  }

  explicit CondPmf(const std::vector<std::vector<double>>& rows, const std::string& what = "cond")
      : CondPmf(rows.size(), rows.empty() ? 0 : rows[0].size(), flatten(rows, what), what) {}

  /// Unchecked construction; rows must already be stochastic.
  static CondPmf raw(std::size_t rows, std::size_t cols, std::vector<double> w) {
    CondPmf c;
    c.rows_ = rows;
    c.cols_ = cols;
    c.w_ = std::move(w);
    return c;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t x, std::size_t y) const { return w_[x * cols_ + y]; }
  std::span<const double> row(std::size_t x) const { return {w_.data() + x * cols_, cols_}; }
  const std::vector<double>& values() const noexcept { return w_; }

 private:
  static std::vector<double> flatten(const std::vector<std::vector<double>>& rows, const std::string& what) {
    std::vector<double> out;
    for (std::size_t x = 0; x < rows.size(); ++x) {
      if (rows[x].size() != rows[0].size())
        throw Error(ErrorKind::InvalidInput, what + "[" + std::to_string(x) + "]: ragged row");
      out.insert(out.end(), rows[x].begin(), rows[x].end());
    }
    return out;
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> w_;
};

/// Joint pmf Q(a, b) stored row-major.
class JointPmf {
 public:
  JointPmf() = default;
  JointPmf(std::size_t rows, std::size_t cols, std::vector<double> q) : rows_(rows), cols_(cols), q_(std::move(q)) {
    if (q_.size() != rows * cols) throw Error(ErrorKind::InvalidInput, "joint: shape mismatch");
    double s = 0.0;
    for (double v : q_) {
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidInput, "joint: invalid entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kSumTol) throw Error(ErrorKind::InvalidInput, "joint: entries do not sum to 1");
  }

  static JointPmf product(std::span<const double> a, const CondPmf& w) {
    JointPmf j;
    j.rows_ = w.rows();
    j.cols_ = w.cols();
    j.q_.resize(j.rows_ * j.cols_);
    for (std::size_t x = 0; x < j.rows_; ++x)
      for (std::size_t y = 0; y < j.cols_; ++y) j.q_[x * j.cols_ + y] = a[x] * w(x, y);
    return j;
  }

  static JointPmf product(std::span<const double> a, std::span<const double> b) {
    JointPmf j;
    j.rows_ = a.size();
    j.cols_ = b.size();
    j.q_.resize(j.rows_ * j.cols_);
    for (std::size_t x = 0; x < j.rows_; ++x)
      for (std::size_t y = 0; y < j.cols_; ++y) j.q_[x * j.cols_ + y] = a[x] * b[y];
    return j;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t x, std::size_t y) const { return q_[x * cols_ + y]; }
  const std::vector<double>& values() const noexcept { return q_; }

  std::vector<double> row_marginal() const {
    std::vector<double> m(rows_, 0.0);
    for (std::size_t x = 0; x < rows_; ++x)
      for (std::size_t y = 0; y < cols_; ++y) m[x] += q_[x * cols_ + y];
    return m;
  }
  std::vector<double> col_marginal() const {
    std::vector<double> m(cols_, 0.0);
    for (std::size_t x = 0; x < rows_; ++x)
      for (std::size_t y = 0; y < cols_; ++y) m[y] += q_[x * cols_ + y];
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> q_;
};

/// Correlated source pair: P_X and the channel P_{Y|X}.
/// Every symbol of X has positive probability and the channel is not noiseless.
struct Source {
  Pmf px;
  CondPmf pygx;

  Source() = default;
  Source(Pmf p, CondPmf w) : px(std::move(p)), pygx(std::move(w)) {
    if (pygx.rows() != px.size())
      throw Error(ErrorKind::InvalidInput, "pygx: row count does not match px");
    for (std::size_t x = 0; x < px.size(); ++x)
      if (!(px[x] > 0.0))
        throw Error(ErrorKind::DegenerateRow, "px[" + std::to_string(x) + "]: symbol has zero probability");
    bool overlap = false;
    for (std::size_t x = 0; x < px.size() && !overlap; ++x)
      for (std::size_t z = x + 1; z < px.size() && !overlap; ++z)
        for (std::size_t y = 0; y < pygx.cols(); ++y)
          if (pygx(x, y) * pygx(z, y) > 0.0) {
            overlap = true;
            break;
          }
    if (!overlap) throw Error(ErrorKind::InvalidInput, "pygx: channel is noiseless");
  }

  std::size_t nx() const noexcept { return px.size(); }
  JointPmf joint() const { return JointPmf::product(px, pygx); }
  std::size_t ny() const noexcept { return pygx.cols(); }
};

// ---- information measures (nats, 0 ln 0 = 0) ----

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

namespace detail {

/// D(q||p) returning +inf on support mismatch; internal use.
inline double kl_or_inf(std::span<const double> q, std::span<const double> p) {
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    double t = xlogx_over(q[i], p[i]);
    if (t == kInf) return kInf;
    d += t;
  }
  return std::max(d, 0.0);
}

}  // namespace detail

/// D(q||p). Throws SupportMismatch when q puts mass where p has none.
inline double kl_divergence(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw Error(ErrorKind::InvalidInput, "kl_divergence: size mismatch");
  double d = detail::kl_or_inf(q, p);
  if (d == kInf) throw Error(ErrorKind::SupportMismatch, "kl_divergence: q not absolutely continuous w.r.t. p");
  return d;
}

/// D(Q||P|a) = sum_x a(x) D(Q(.|x)||P(.|x)).
inline double cond_divergence(const CondPmf& q, const CondPmf& p, std::span<const double> a) {
  double d = 0.0;
  for (std::size_t x = 0; x < q.rows(); ++x) {
    if (!(a[x] > 0.0)) continue;
    d += a[x] * kl_divergence(q.row(x), p.row(x));
  }
  return d;
}

/// Sum_x a(x) D(Q(.|x)||r) against a single reference row.
inline double cond_divergence(const CondPmf& q, std::span<const double> r, std::span<const double> a) {
  double d = 0.0;
  for (std::size_t x = 0; x < q.rows(); ++x) {
    if (!(a[x] > 0.0)) continue;
    d += a[x] * kl_divergence(q.row(x), r);
  }
  return d;
}

inline std::vector<double> output_marginal(std::span<const double> a, const CondPmf& w) {
  std::vector<double> m(w.cols(), 0.0);
  for (std::size_t x = 0; x < w.rows(); ++x) {
    if (!(a[x] > 0.0)) continue;
    for (std::size_t y = 0; y < w.cols(); ++y) m[y] += a[x] * w(x, y);
  }
  return m;
}

inline double mutual_information(std::span<const double> a, const CondPmf& w) {
  return cond_divergence(w, output_marginal(a, w), a);
}

inline double mutual_information(const JointPmf& q) {
  auto a = q.row_marginal();
  auto b = q.col_marginal();
  double s = 0.0;
  for (std::size_t x = 0; x < q.rows(); ++x)
    for (std::size_t y = 0; y < q.cols(); ++y) s += detail::xlogx_over(q(x, y), a[x] * b[y]);
  return std::max(s, 0.0);
}

/// H(X|Y) under a x w.
inline double backward_cond_entropy(std::span<const double> a, const CondPmf& w) {
  return std::max(entropy(a) - mutual_information(a, w), 0.0);
}

/// d(x, x~) = -ln sum_y sqrt(W(y|x) W(y|x~)); +inf when rows have disjoint support.
inline std::vector<double> bhattacharyya_matrix(const CondPmf& w) {
  const std::size_t k = w.rows();
  std::vector<double> d(k * k, 0.0);
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t z = 0; z < k; ++z) {
      if (x == z) continue;
      double s = 0.0;
      for (std::size_t y = 0; y < w.cols(); ++y) s += std::sqrt(w(x, y) * w(z, y));
      d[x * k + z] = s > 0.0 ? std::max(0.0, -std::log(s)) : kInf;
    }
  return d;
}

/// Expected distance under a joint on X x X; 0 * inf = 0.
inline double bhattacharyya_avg(const JointPmf& q, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.values().size(); ++i) {
    double v = q.values()[i];
    if (v > 0.0) s += v * d[i];
  }
  return s;
}

inline double bhattacharyya_avg(std::span<const double> a, const CondPmf& c, std::span<const double> d) {
  return bhattacharyya_avg(JointPmf::product(a, c), d);
}

// ---- types ----

/// Empirical distribution of a length-n sequence.
struct TypeDescriptor {
  int n = 0;
  std::vector<int> counts;

  TypeDescriptor() = default;
  TypeDescriptor(int n_, std::vector<int> c) : n(n_), counts(std::move(c)) {
    if (n_ <= 0) throw Error(ErrorKind::InvalidInput, "type: n must be positive");
    if (counts.size() < 2) throw Error(ErrorKind::InvalidInput, "type: alphabet size must be at least 2");
    long s = 0;
    for (int v : counts) {
      if (v < 0) throw Error(ErrorKind::InvalidInput, "type: negative count");
      s += v;
    }
    if (s != n) throw Error(ErrorKind::InvalidInput, "type: counts do not sum to n");
  }

  Pmf pmf() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts[i]) / n;
    return Pmf(std::move(p), "type");
  }

  bool operator==(const TypeDescriptor&) const = default;
};

/// All types of length n over an alphabet of size k; first coordinate descending.
inline std::vector<TypeDescriptor> enumerate_types(int n, std::size_t k) {
  if (n <= 0 || k < 2) throw Error(ErrorKind::InvalidInput, "enumerate_types: need n >= 1 and k >= 2");
  double count = std::exp(std::lgamma(n + static_cast<double>(k)) - std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(k)));
  if (count > 1e7) throw Error(ErrorKind::TooLarge, "enumerate_types: more than 1e7 types");
  std::vector<TypeDescriptor> out;
  std::vector<int> c(k, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == k) {
      c[i] = left;
      out.emplace_back(n, c);
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[i] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, n);
  return out;
}

inline double log_type_class_size(const TypeDescriptor& t) {
  double s = std::lgamma(t.n + 1.0);
  for (int c : t.counts) s -= std::lgamma(c + 1.0);
  return s;
}

/// ln P^n(T) for the type class T under i.i.d. draws from p.
inline double log_type_probability(std::span<const double> p, const TypeDescriptor& t) {
  if (p.size() != t.counts.size()) throw Error(ErrorKind::InvalidInput, "type: alphabet mismatch");
  double s = log_type_class_size(t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (t.counts[i] == 0) continue;
    if (!(p[i] > 0.0)) throw Error(ErrorKind::SupportMismatch, "type uses a symbol outside the support");
    s += t.counts[i] * std::log(p[i]);
  }
  return s;
}

}  // namespace swexp
