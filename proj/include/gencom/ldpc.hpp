#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gencom/bits.hpp"
#include "gencom/error.hpp"
#include "gencom/rng.hpp"

namespace gencom {

struct MinSumOptions {
  int max_iterations = 50;
  double normalization = 0.75;
};

struct LdpcDecodeResult {
  BitVec codeword;
  int iterations = 0;
  bool parity_satisfied = false;
};

// Regular (3,6) LDPC code: N variables, N/2 checks, built from a seeded random
// bipartite graph. Edges are placed greedily, preferring checks that close no
// 4-cycle and have the most free sockets; for very short codes 4-cycles may be
// unavoidable and are then accepted. Parallel edges are never produced.
class LdpcCode {
 public:
  static constexpr std::size_t kColumnWeight = 3;
  static constexpr std::size_t kRowWeight = 6;

  LdpcCode(std::size_t n, std::uint64_t seed) : n_(n), m_(n / 2) {
    if (n < 12 || n % 2 != 0) throw ContractViolation("LDPC length must be even and >= 12");
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt > 1000) throw Error("LDPC construction did not converge");
      if (try_build(derive_seed(seed, {n, attempt}))) break;
    }
    build_encoder();
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t k() const noexcept { return info_cols_.size(); }
  std::size_t rank() const noexcept { return pivot_cols_.size(); }
  double rate() const noexcept { return static_cast<double>(k()) / static_cast<double>(n_); }

  const std::vector<std::vector<std::uint32_t>>& check_neighbors() const noexcept { return check_adj_; }
  const std::vector<std::vector<std::uint32_t>>& variable_neighbors() const noexcept { return var_adj_; }
  const std::vector<std::uint32_t>& info_columns() const noexcept { return info_cols_; }

  std::size_t four_cycle_count() const {
    std::size_t cycles = 0;
    std::vector<std::uint32_t> shared(m_);
    for (std::size_t c = 0; c < m_; ++c) {
      std::fill(shared.begin(), shared.end(), 0);
      for (auto v : check_adj_[c])
        for (auto c2 : var_adj_[v])
          if (c2 > c) ++shared[c2];
      for (std::size_t c2 = c + 1; c2 < m_; ++c2) cycles += shared[c2] * (shared[c2] - 1) / 2;
    }
    return cycles;
  }

  // Mean number of information bits XORed into each parity bit by the systematic encoder.
  double mean_generator_row_weight() const {
    if (parity_terms_.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& row : parity_terms_) total += row.size();
    return static_cast<double>(total) / static_cast<double>(parity_terms_.size());
  }

  BitVec encode(std::span<const std::uint8_t> info) const {
    if (info.size() != k()) throw ContractViolation("LDPC encode expects exactly K information bits");
    BitVec cw(n_, 0);
    for (std::size_t i = 0; i < info_cols_.size(); ++i) cw[info_cols_[i]] = info[i] & 1u;
    for (std::size_t r = 0; r < pivot_cols_.size(); ++r) {
      std::uint8_t p = 0;
      for (auto j : parity_terms_[r]) p ^= info[j] & 1u;
      cw[pivot_cols_[r]] = p;
    }
    return cw;
  }

  BitVec extract_info(std::span<const std::uint8_t> codeword) const {
    BitVec info(k());
    for (std::size_t i = 0; i < info_cols_.size(); ++i) info[i] = codeword[info_cols_[i]];
    return info;
  }

  bool parity_ok(std::span<const std::uint8_t> codeword) const {
    for (const auto& row : check_adj_) {
      std::uint8_t s = 0;
      for (auto v : row) s ^= codeword[v] & 1u;
      if (s) return false;
    }
    return true;
  }

  // Normalized min-sum with flooding schedule and early exit on a zero syndrome.
  LdpcDecodeResult decode(std::span<const double> llr, const MinSumOptions& opt = {}) const {
    if (llr.size() != n_) throw ContractViolation("LDPC decode expects N LLRs");
    LdpcDecodeResult res;
    res.codeword = hard_decisions(llr);
    if (parity_ok(res.codeword)) {
      res.parity_satisfied = true;
      return res;
    }
    const std::size_t edges = edge_var_.size();
    std::vector<double> v2c(edges), c2v(edges, 0.0), total(llr.begin(), llr.end());
    for (std::size_t e = 0; e < edges; ++e) v2c[e] = llr[edge_var_[e]];
    for (int it = 1; it <= opt.max_iterations; ++it) {
      for (std::size_t c = 0; c < m_; ++c) {
        const std::size_t begin = check_edge_begin_[c], end = check_edge_begin_[c + 1];
        double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
        std::size_t min_at = begin;
        bool negative = false;
        for (std::size_t e = begin; e < end; ++e) {
          const double a = std::fabs(v2c[e]);
          negative ^= v2c[e] < 0.0;
          if (a < min1) {
            min2 = min1;
            min1 = a;
            min_at = e;
          } else if (a < min2) {
            min2 = a;
          }
        }
        for (std::size_t e = begin; e < end; ++e) {
          const double mag = opt.normalization * (e == min_at ? min2 : min1);
          const bool neg = negative ^ (v2c[e] < 0.0);
          c2v[e] = neg ? -mag : mag;
        }
      }
      std::copy(llr.begin(), llr.end(), total.begin());
      for (std::size_t e = 0; e < edges; ++e) total[edge_var_[e]] += c2v[e];
      for (std::size_t e = 0; e < edges; ++e) v2c[e] = total[edge_var_[e]] - c2v[e];
      for (std::size_t v = 0; v < n_; ++v) res.codeword[v] = total[v] < 0.0 ? 1 : 0;
      res.iterations = it;
      if (parity_ok(res.codeword)) {
        res.parity_satisfied = true;
        break;
      }
    }
    return res;
  }

  // MacKay alist text format, 1-based indices, zero padding to the maximum weight.
  std::string to_alist() const {
    std::ostringstream os;
    std::size_t max_col = 0, max_row = 0;
    for (const auto& c : var_adj_) max_col = std::max(max_col, c.size());
    for (const auto& r : check_adj_) max_row = std::max(max_row, r.size());
    os << n_ << ' ' << m_ << '\n' << max_col << ' ' << max_row << '\n';
    auto weights = [&os](const auto& lists) {
      for (std::size_t i = 0; i < lists.size(); ++i) os << (i ? " " : "") << lists[i].size();
      os << '\n';
    };
    weights(var_adj_);
    weights(check_adj_);
    auto entries = [&os](const auto& lists, std::size_t width) {
      for (const auto& l : lists) {
        auto sorted = l;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < width; ++i) os << (i ? " " : "") << (i < sorted.size() ? sorted[i] + 1 : 0);
        os << '\n';
      }
    };
    entries(var_adj_, max_col);
    entries(check_adj_, max_row);
    return os.str();
  }

 private:
  bool try_build(std::uint64_t seed) {
    CounterRng rng(seed);
    check_adj_.assign(m_, {});
    var_adj_.assign(n_, {});
    std::vector<std::size_t> free(m_, kRowWeight);
    std::vector<std::size_t> two_hop_stamp(n_, 0);
    std::vector<std::uint32_t> order(n_);
    for (std::uint32_t i = 0; i < n_; ++i) order[i] = i;
    for (std::size_t i = n_; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::size_t stamp = 0;
    for (auto v : order) {
      for (std::size_t e = 0; e < kColumnWeight; ++e) {
        ++stamp;
        for (auto c : var_adj_[v])
          for (auto u : check_adj_[c]) two_hop_stamp[u] = stamp;
        std::size_t best = m_;
        int best_key0 = 0;
        std::size_t best_free = 0;
        std::uint64_t best_tie = 0;
        for (std::size_t c = 0; c < m_; ++c) {
          if (free[c] == 0) continue;
          if (std::find(var_adj_[v].begin(), var_adj_[v].end(), c) != var_adj_[v].end()) continue;
          bool closes_cycle = false;
          for (auto u : check_adj_[c])
            if (two_hop_stamp[u] == stamp) {
              closes_cycle = true;
              break;
            }
          const int key0 = closes_cycle ? 0 : 1;
          const std::uint64_t tie = counter_u64(seed ^ 0xA5A5A5A5ULL, (static_cast<std::uint64_t>(v) << 24) ^ (e << 20) ^ c);
          if (best == m_ || key0 > best_key0 || (key0 == best_key0 && free[c] > best_free) ||
              (key0 == best_key0 && free[c] == best_free && tie > best_tie)) {
            best = c;
            best_key0 = key0;
            best_free = free[c];
            best_tie = tie;
          }
        }
        if (best == m_) return false;
        --free[best];
        check_adj_[best].push_back(v);
        var_adj_[v].push_back(static_cast<std::uint32_t>(best));
      }
    }
    edge_var_.clear();
    check_edge_begin_.assign(m_ + 1, 0);
    for (std::size_t c = 0; c < m_; ++c) {
      check_edge_begin_[c] = edge_var_.size();
      for (auto v : check_adj_[c]) edge_var_.push_back(v);
    }
    check_edge_begin_[m_] = edge_var_.size();
    return true;
  }

  // Gauss-Jordan elimination over GF(2). Pivot columns carry parity, the
  // remaining columns carry information bits in increasing column order.
  void build_encoder() {
    const std::size_t words = (n_ + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(m_, std::vector<std::uint64_t>(words, 0));
    for (std::size_t c = 0; c < m_; ++c)
      for (auto v : check_adj_[c]) rows[c][v / 64] ^= std::uint64_t{1} << (v % 64);
    std::size_t r = 0;
    std::vector<std::uint32_t> pivots;
    std::vector<bool> is_pivot(n_, false);
    for (std::size_t col = 0; col < n_ && r < m_; ++col) {
      const std::size_t w = col / 64;
      const std::uint64_t bit = std::uint64_t{1} << (col % 64);
      std::size_t p = r;
      while (p < m_ && !(rows[p][w] & bit)) ++p;
      if (p == m_) continue;
      std::swap(rows[p], rows[r]);
      for (std::size_t i = 0; i < m_; ++i)
        if (i != r && (rows[i][w] & bit))
          for (std::size_t j = 0; j < words; ++j) rows[i][j] ^= rows[r][j];
      pivots.push_back(static_cast<std::uint32_t>(col));
      is_pivot[col] = true;
      ++r;
    }
    pivot_cols_ = pivots;
    info_cols_.clear();
    std::vector<std::uint32_t> info_index(n_, 0);
    for (std::uint32_t col = 0; col < n_; ++col)
      if (!is_pivot[col]) {
        info_index[col] = static_cast<std::uint32_t>(info_cols_.size());
        info_cols_.push_back(col);
      }
    parity_terms_.assign(pivot_cols_.size(), {});
    for (std::size_t i = 0; i < pivot_cols_.size(); ++i)
      for (auto col : info_cols_)
        if (rows[i][col / 64] & (std::uint64_t{1} << (col % 64))) parity_terms_[i].push_back(info_index[col]);
  }

  std::size_t n_;
  std::size_t m_;
  std::vector<std::vector<std::uint32_t>> check_adj_;
  std::vector<std::vector<std::uint32_t>> var_adj_;
  std::vector<std::uint32_t> edge_var_;
  std::vector<std::size_t> check_edge_begin_;
  std::vector<std::uint32_t> pivot_cols_;
  std::vector<std::uint32_t> info_cols_;
  std::vector<std::vector<std::uint32_t>> parity_terms_;
};

}  // namespace gencom
