#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "swexp/parallel.hpp"
#include "swexp/prob.hpp"

namespace swexp {

/// Type-dependent random binning code over all |X|^n source blocks.
/// Blocks are indexed in base |X| with the first symbol most significant, so
/// index order is lexicographic order.
struct SWCode {
  int n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<TypeDescriptor> types;
  std::vector<double> rate_per_type;          // rho(type) in nats, header excluded
  std::vector<std::uint64_t> bins_per_type;   // ceil(exp(n rho))
  std::vector<std::uint32_t> type_of;         // block -> type index
  std::vector<std::uint64_t> bin_of;          // block -> bin index
  std::vector<std::uint8_t> symbols;          // block -> n symbols, row-major
  // per type: (bin, block) pairs sorted, for bin lookup
  std::vector<std::vector<std::pair<std::uint64_t, std::uint32_t>>> members;

  std::size_t blocks() const { return type_of.size(); }
  const std::uint8_t* block(std::uint32_t b) const { return symbols.data() + static_cast<std::size_t>(b) * n; }

  /// Blocks sharing the given type and bin, in lexicographic order.
  std::pair<const std::pair<std::uint64_t, std::uint32_t>*, const std::pair<std::uint64_t, std::uint32_t>*>
  bin_members(std::uint32_t type, std::uint64_t bin) const {
    const auto& m = members[type];
    auto lo = std::lower_bound(m.begin(), m.end(), std::make_pair(bin, std::uint32_t{0}));
    auto hi = std::lower_bound(m.begin(), m.end(), std::make_pair(bin + 1, std::uint32_t{0}));
    return {m.data() + (lo - m.begin()), m.data() + (hi - m.begin())};
  }

  double header_nats() const { return std::log(static_cast<double>(types.size())) / n; }
};

inline constexpr std::uint64_t kMaxBins = std::uint64_t{1} << 40;
inline constexpr std::size_t kMaxBlocks = std::size_t{1} << 20;

/// Generator for stream `stream` of a seed; streams are statistically independent.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(sub),
                    static_cast<std::uint32_t>(sub >> 32)};
  return std::mt19937_64(seq);
}

inline SWCode build_code(const Source& src, int n, const std::function<double(const Pmf&)>& rate_fn,
                         std::uint64_t seed) {
  const std::size_t k = src.nx();
  if (n < 1) throw Error(ErrorKind::InvalidInput, "build_code: n must be >= 1");
  if (std::pow(static_cast<double>(k), n) > static_cast<double>(kMaxBlocks))
    throw Error(ErrorKind::TooLarge, "build_code: |X|^n exceeds 2^20");
  SWCode c;
  c.n = n;
  c.k = k;
  c.seed = seed;
  c.types = enumerate_types(n, k);
  std::map<std::vector<int>, std::uint32_t> index;
  for (std::uint32_t i = 0; i < c.types.size(); ++i) index[c.types[i].counts] = i;
  for (const auto& t : c.types) {
    double r = rate_fn(t.pmf());
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidInput, "build_code: rate function must be >= 0");
    c.rate_per_type.push_back(r);
    double e = n * r;
    c.bins_per_type.push_back(e >= std::log(static_cast<double>(kMaxBins))
                                  ? kMaxBins
                                  : static_cast<std::uint64_t>(std::ceil(std::exp(e) - 1e-9)));
  }
  std::size_t nb = 1;
  for (int i = 0; i < n; ++i) nb *= k;
  c.type_of.resize(nb);
  c.bin_of.resize(nb);
  c.symbols.resize(nb * n);
  c.members.resize(c.types.size());
  auto rng = make_stream(seed, 0);
  std::vector<int> counts(k);
  for (std::size_t b = 0; b < nb; ++b) {
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t v = b;
    for (int i = n - 1; i >= 0; --i) {
      auto s = static_cast<std::uint8_t>(v % k);
      v /= k;
      c.symbols[b * n + i] = s;
      ++counts[s];
    }
    std::uint32_t t = index.at(counts);
    c.type_of[b] = t;
    std::uniform_int_distribution<std::uint64_t> pick(0, c.bins_per_type[t] - 1);
    c.bin_of[b] = pick(rng);
    c.members[t].emplace_back(c.bin_of[b], static_cast<std::uint32_t>(b));
  }
  for (auto& m : c.members) std::sort(m.begin(), m.end());
  return c;
}

inline std::uint32_t block_index(const SWCode& c, const std::vector<int>& x) {
  if (x.size() != static_cast<std::size_t>(c.n)) throw Error(ErrorKind::InvalidInput, "block: wrong length");
  std::uint64_t b = 0;
  for (int s : x) {
    if (s < 0 || static_cast<std::size_t>(s) >= c.k) throw Error(ErrorKind::InvalidInput, "block: symbol out of range");
    b = b * c.k + static_cast<std::uint64_t>(s);
  }
  return static_cast<std::uint32_t>(b);
}

struct Encoded {
  std::uint32_t type = 0;
  std::uint64_t bin = 0;
  double rate = 0.0;  // nats per symbol, header excluded
};

inline Encoded encode(const SWCode& c, const std::vector<int>& x) {
  auto b = block_index(c, x);
  auto t = c.type_of[b];
  return {t, c.bin_of[b], c.rate_per_type[t]};
}

enum class Decoder { ML, MCE };

inline std::string to_string(Decoder d) { return d == Decoder::ML ? "ml" : "mce"; }

inline constexpr double kTieTol = 1e-12;

namespace detail {

inline double log_likelihood(const SWCode& c, const std::vector<double>& logw, std::size_t ny, std::uint32_t b,
                             const std::uint8_t* y) {
  const std::uint8_t* x = c.block(b);
  double s = 0.0;
  for (int i = 0; i < c.n; ++i) s += logw[x[i] * ny + y[i]];
  return s;
}

/// n times the empirical joint entropy of (x~, y); minimizing it minimizes H(x~|y).
inline double joint_entropy_n(const SWCode& c, std::size_t ny, std::uint32_t b, const std::uint8_t* y,
                              std::vector<int>& scratch) {
  const std::uint8_t* x = c.block(b);
  std::fill(scratch.begin(), scratch.end(), 0);
  for (int i = 0; i < c.n; ++i) ++scratch[x[i] * ny + y[i]];
  double h = 0.0;
  for (int v : scratch)
    if (v > 0) h -= v * std::log(static_cast<double>(v) / c.n);
  return h;
}

inline std::vector<double> log_channel(const Source& src) {
  std::vector<double> lw(src.nx() * src.ny());
  for (std::size_t x = 0; x < src.nx(); ++x)
    for (std::size_t y = 0; y < src.ny(); ++y) lw[x * src.ny() + y] = src.pygx(x, y) > 0.0 ? std::log(src.pygx(x, y)) : -kInf;
  return lw;
}

/// Winner among the members of one bin; ties go to the lexicographically smallest block.
template <class Score>
std::uint32_t best_member(const std::pair<std::uint64_t, std::uint32_t>* lo,
                          const std::pair<std::uint64_t, std::uint32_t>* hi, Score&& score) {
  std::uint32_t best = lo->second;
  double bs = score(best);
  for (auto p = lo + 1; p < hi; ++p) {
    double s = score(p->second);
    if (s > bs + kTieTol) {
      bs = s;
      best = p->second;
    }
  }
  return best;
}

}  // namespace detail

inline std::uint32_t decode_ml_index(const SWCode& c, const std::vector<double>& logw, std::size_t ny,
                                     std::uint32_t type, std::uint64_t bin, const std::uint8_t* y) {
  auto [lo, hi] = c.bin_members(type, bin);
  if (lo == hi) throw Error(ErrorKind::InvalidInput, "decode: empty bin");
  return detail::best_member(lo, hi, [&](std::uint32_t b) { return detail::log_likelihood(c, logw, ny, b, y); });
}

inline std::uint32_t decode_mce_index(const SWCode& c, std::size_t ny, std::uint32_t type, std::uint64_t bin,
                                      const std::uint8_t* y, std::vector<int>& scratch) {
  auto [lo, hi] = c.bin_members(type, bin);
  if (lo == hi) throw Error(ErrorKind::InvalidInput, "decode: empty bin");
  return detail::best_member(lo, hi, [&](std::uint32_t b) { return -detail::joint_entropy_n(c, ny, b, y, scratch); });
}

namespace detail {

inline std::vector<std::uint8_t> to_symbols(const std::vector<int>& y, std::size_t ny) {
  std::vector<std::uint8_t> out;
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= ny) throw Error(ErrorKind::InvalidInput, "decode: y symbol out of range");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

inline std::vector<int> block_symbols(const SWCode& c, std::uint32_t b) {
  const std::uint8_t* x = c.block(b);
  return std::vector<int>(x, x + c.n);
}

}  // namespace detail

/// Maximum-likelihood decoding within the announced type and bin.
inline std::vector<int> decode_ml(const SWCode& c, const Source& src, std::uint32_t type, std::uint64_t bin,
                                  const std::vector<int>& y) {
  auto ys = detail::to_symbols(y, src.ny());
  return detail::block_symbols(c, decode_ml_index(c, detail::log_channel(src), src.ny(), type, bin, ys.data()));
}

/// Minimum empirical conditional entropy decoding; uses no source statistics.
inline std::vector<int> decode_mce(const SWCode& c, std::size_t ny, std::uint32_t type, std::uint64_t bin,
                                   const std::vector<int>& y) {
  auto ys = detail::to_symbols(y, ny);
  std::vector<int> scratch(c.k * ny);
  return detail::block_symbols(c, decode_mce_index(c, ny, type, bin, ys.data(), scratch));
}

struct SimStats {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double p_hat = 0.0;
  double ci95 = 0.0;  // Wilson half-width
  Decoder decoder = Decoder::ML;
};

inline double wilson_half_width(std::uint64_t errors, std::uint64_t trials, double z = 1.96) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials), p = static_cast<double>(errors) / n;
  return z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

inline constexpr std::uint64_t kTrialChunk = 4096;

/// Monte Carlo error probability; trials are split into fixed chunks with their
/// own streams so the estimate does not depend on the worker count.
inline SimStats estimate_error(const Source& src, const SWCode& c, Decoder dec, std::uint64_t trials,
                               std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorKind::InvalidInput, "estimate_error: trials must be >= 1");
  if (c.k != src.nx()) throw Error(ErrorKind::InvalidInput, "estimate_error: code/source mismatch");
  const std::size_t ny = src.ny();
  const auto logw = detail::log_channel(src);
  const std::uint64_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<std::uint64_t> errs(chunks, 0);
  parallel_for(chunks, [&](std::size_t ch) {
    auto rng = make_stream(seed, 1, ch);
    std::discrete_distribution<int> px(src.px.begin(), src.px.end());
    std::vector<std::discrete_distribution<int>> w;
    for (std::size_t x = 0; x < src.nx(); ++x) w.emplace_back(src.pygx.row(x).begin(), src.pygx.row(x).end());
    std::vector<std::uint8_t> y(c.n);
    std::vector<int> scratch(c.k * ny);
    const std::uint64_t begin = ch * kTrialChunk, end = std::min(trials, begin + kTrialChunk);
    std::uint64_t e = 0;
    for (std::uint64_t t = begin; t < end; ++t) {
      std::uint64_t b = 0;
      for (int i = 0; i < c.n; ++i) {
        int xs = px(rng);
        y[i] = static_cast<std::uint8_t>(w[xs](rng));
        b = b * c.k + static_cast<std::uint64_t>(xs);
      }
      auto blk = static_cast<std::uint32_t>(b);
      std::uint32_t got = dec == Decoder::ML
                              ? decode_ml_index(c, logw, ny, c.type_of[blk], c.bin_of[blk], y.data())
                              : decode_mce_index(c, ny, c.type_of[blk], c.bin_of[blk], y.data(), scratch);
      if (got != blk) ++e;
    }
    errs[ch] = e;
  });
  SimStats s;
  s.trials = trials;
  for (auto e : errs) s.errors += e;
  s.p_hat = static_cast<double>(s.errors) / static_cast<double>(trials);
  s.ci95 = wilson_half_width(s.errors, trials);
  s.decoder = dec;
  return s;
}

/// Exact error probability of a fixed code, summing over every (x, y) pair.
/// Within a bin the decoder output depends only on y, so the error is
/// sum over bins of sum over y of [P(bin, y) - P(winner(y), y)].
inline double exact_error(const Source& src, const SWCode& c, Decoder dec) {
  const std::size_t ny = src.ny();
  double ny_n = std::pow(static_cast<double>(ny), c.n);
  if (ny_n * static_cast<double>(c.blocks()) > 1e9) throw Error(ErrorKind::TooLarge, "exact_error: too many (x, y) pairs");
  const auto logw = detail::log_channel(src);
  std::vector<double> logpx(src.nx());
  for (std::size_t x = 0; x < src.nx(); ++x) logpx[x] = std::log(src.px[x]);
  const auto nys = static_cast<std::size_t>(ny_n);

  // collect groups of size >= 2
  std::vector<std::vector<std::uint32_t>> group_blocks;
  for (std::uint32_t t = 0; t < c.types.size(); ++t) {
    const auto& m = c.members[t];
    for (std::size_t i = 0; i < m.size();) {
      std::size_t j = i;
      while (j < m.size() && m[j].first == m[i].first) ++j;
      if (j - i > 1) {
        std::vector<std::uint32_t> g;
        for (std::size_t q = i; q < j; ++q) g.push_back(m[q].second);
        group_blocks.push_back(std::move(g));
      }
      i = j;
    }
  }
  std::vector<double> part(group_blocks.size(), 0.0);
  parallel_for(group_blocks.size(), [&](std::size_t gi) {
    const auto& g = group_blocks[gi];
    std::vector<double> logp_x(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::uint8_t* x = c.block(g[i]);
      double s = 0.0;
      for (int q = 0; q < c.n; ++q) s += logpx[x[q]];
      logp_x[i] = s;
    }
    std::vector<std::uint8_t> y(c.n);
    std::vector<int> scratch(c.k * ny);
    std::vector<double> ll(g.size());
    double acc = 0.0;
    for (std::size_t yi = 0; yi < nys; ++yi) {
      std::size_t v = yi;
      for (int q = c.n - 1; q >= 0; --q) {
        y[q] = static_cast<std::uint8_t>(v % ny);
        v /= ny;
      }
      double total = 0.0;
      std::size_t win = 0;
      double best = -kInf;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ll[i] = detail::log_likelihood(c, logw, ny, g[i], y.data());
        total += std::exp(logp_x[i] + ll[i]);
        double score = dec == Decoder::ML ? ll[i] : -detail::joint_entropy_n(c, ny, g[i], y.data(), scratch);
        if (i == 0 || score > best + kTieTol) {
          best = score;
          win = i;
        }
      }
      acc += total - std::exp(logp_x[win] + ll[win]);
    }
    part[gi] = acc;
  });
  double s = 0.0;
  for (double v : part) s += v;
  return std::max(0.0, s);
}

/// P{r(X) >= r} computed exactly from type probabilities.
inline double exact_excess_rate(const Source& src, const SWCode& c, double r, bool with_header = false) {
  const double extra = with_header ? c.header_nats() : 0.0;
  double p = 0.0;
  for (std::size_t t = 0; t < c.types.size(); ++t)
    if (c.rate_per_type[t] + extra >= r) p += std::exp(log_type_probability(src.px, c.types[t]));
  return std::min(1.0, p);
}

}  // namespace swexp
