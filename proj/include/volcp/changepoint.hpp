#pragma once

#include <cstddef>
#include <vector>

#include "volcp/residuals.hpp"

namespace volcp {

// Cumulative statistics of the squared residuals. Index convention: k is
// the paper-style count of leading residuals, k = 1..n. Array slot k-1
// holds the value for k, so d/v/u2 have n-1 entries (k = 1..n-1) and
// s_cum has n (k = 1..n).
//
//   S_k  = sum of the first k squared residuals
//   D_k  = k/n - S_k/S_n
//   V_k  = S_n D_k / sqrt(k (n-k))
//   U_k^2 = sum_i (z_i^2 - Zbar_n)^2 - n V_k^2
struct CusumTrace {
  std::size_t n = 0;
  std::vector<double> s_cum;  // S_1..S_n
  std::vector<double> d;      // D_1..D_{n-1}
  std::vector<double> v;      // V_1..V_{n-1}
  std::vector<double> u2;     // U_1^2..U_{n-1}^2
  double z_bar = 0.0;         // S_n / n

  double s_n() const { return s_cum.back(); }
  double s_at(std::size_t k) const { return s_cum[k - 1]; }
  double d_at(std::size_t k) const { return d[k - 1]; }
  double v_at(std::size_t k) const { return v[k - 1]; }
  double u2_at(std::size_t k) const { return u2[k - 1]; }
};

// One pass of prefix sums; throws on n < 2 or an all-zero series.
CusumTrace cusum_stats(const ResidualSeries& res);

// Inclusive search range [lo, hi] for the change index under trimming
// delta: lo = max(1, ceil(delta n)), hi = min(n-1, floor((1-delta) n)).
struct TrimRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

TrimRange trimmed_range(std::size_t n, double trim_delta);

struct ChangePointFit {
  std::size_t n = 0;
  std::size_t k_hat = 0;      // argmax_k |D_k| over the trimmed range
  double tau_hat = 0.0;       // k_hat / n
  double theta1_hat = 0.0;    // S_{k_hat} / k_hat
  double theta2_hat = 0.0;    // (S_n - S_{k_hat}) / (n - k_hat)
  double vartheta_hat = 0.0;  // theta2_hat - theta1_hat
  double trim_delta = 0.0;
  ResidualMode residual_mode = ResidualMode::KnownCoefficients;

  // Global mean of squared residuals, equal to
  // tau_hat theta1_hat + (1 - tau_hat) theta2_hat by complementarity.
  double z_bar = 0.0;
};

// Ties in |D_k| break toward the smallest k, which keeps the result
// deterministic and reversal-consistent.
ChangePointFit estimate_changepoint(const CusumTrace& trace, double trim_delta,
                                    ResidualMode mode = ResidualMode::KnownCoefficients);

// Brute-force least-squares objective
//   U_k^2 = sum_{i<=k} (z_i^2 - mean_front)^2 + sum_{i>k} (z_i^2 - mean_back)^2
// evaluated directly from the residuals; the independent route against
// which the O(n) identity in cusum_stats is checked. k = 1..n-1.
double objective_u2(const ResidualSeries& res, std::size_t k);

}  // namespace volcp
