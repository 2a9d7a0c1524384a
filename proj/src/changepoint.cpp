#include "volcp/changepoint.hpp"

#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"

namespace volcp {

CusumTrace cusum_stats(const ResidualSeries& res) {
  const std::size_t n = res.size();
  if (n < 2) throw input_error("cusum: need at least 2 residuals");

  CusumTrace trace;
  trace.n = n;
  trace.s_cum.resize(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += res.z[i] * res.z[i];
    trace.s_cum[i] = running;
  }
  const double s_n = running;
  if (!(s_n > 0.0))
    throw numeric_error("cusum: all residuals are zero (S_n = 0)");
  trace.z_bar = s_n / static_cast<double>(n);

  double centered_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = res.z[i] * res.z[i] - trace.z_bar;
    centered_ss += c * c;
  }

  trace.d.resize(n - 1);
  trace.v.resize(n - 1);
  trace.u2.resize(n - 1);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    const double d_k = kd / nd - trace.s_cum[k - 1] / s_n;
    const double v_k = s_n * d_k / std::sqrt(kd * (nd - kd));
    trace.d[k - 1] = d_k;
    trace.v[k - 1] = v_k;
    trace.u2[k - 1] = centered_ss - nd * v_k * v_k;
  }
  return trace;
}

TrimRange trimmed_range(std::size_t n, double trim_delta) {
  if (!(trim_delta >= 0.0 && trim_delta < 0.5))
    throw input_error("trim delta must lie in [0, 1/2)");
  const double nd = static_cast<double>(n);
  // Small slack so an exactly-integer delta*n stays inclusive despite
  // floating point rounding.
  auto lo_d = std::ceil(trim_delta * nd - 1e-9);
  auto hi_d = std::floor((1.0 - trim_delta) * nd + 1e-9);
  TrimRange range;
  range.lo = std::max<std::size_t>(1, static_cast<std::size_t>(lo_d));
  range.hi = std::min<std::size_t>(n - 1, static_cast<std::size_t>(hi_d));
  if (range.lo > range.hi) {
    std::ostringstream msg;
    msg << "trimmed search range is empty (n = " << n
        << ", delta = " << trim_delta << ")";
    throw input_error(msg.str());
  }
  return range;
}

ChangePointFit estimate_changepoint(const CusumTrace& trace, double trim_delta,
                                    ResidualMode mode) {
  const std::size_t n = trace.n;
  const TrimRange range = trimmed_range(n, trim_delta);

  std::size_t best_k = range.lo;
  double best = -1.0;
  for (std::size_t k = range.lo; k <= range.hi; ++k) {
    const double cand = std::fabs(trace.d_at(k));
    if (cand > best) {
      best = cand;
      best_k = k;
    }
  }

  ChangePointFit fit;
  fit.n = n;
  fit.k_hat = best_k;
  fit.tau_hat = static_cast<double>(best_k) / static_cast<double>(n);
  fit.theta1_hat = trace.s_at(best_k) / static_cast<double>(best_k);
  fit.theta2_hat =
      (trace.s_n() - trace.s_at(best_k)) / static_cast<double>(n - best_k);
  fit.vartheta_hat = fit.theta2_hat - fit.theta1_hat;
  fit.trim_delta = trim_delta;
  fit.residual_mode = mode;
  fit.z_bar = trace.z_bar;
  return fit;
}

double objective_u2(const ResidualSeries& res, std::size_t k) {
  const std::size_t n = res.size();
  if (k < 1 || k >= n) {
    std::ostringstream msg;
    msg << "objective: k = " << k << " out of range [1, " << n - 1 << "]";
    throw input_error(msg.str());
  }
  double front_mean = 0.0;
  double back_mean = 0.0;
  for (std::size_t i = 0; i < k; ++i) front_mean += res.z[i] * res.z[i];
  for (std::size_t i = k; i < n; ++i) back_mean += res.z[i] * res.z[i];
  front_mean /= static_cast<double>(k);
  back_mean /= static_cast<double>(n - k);

  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = res.z[i] * res.z[i] - front_mean;
    total += c * c;
  }
  for (std::size_t i = k; i < n; ++i) {
    const double c = res.z[i] * res.z[i] - back_mean;
    total += c * c;
  }
  return total;
}

}  // namespace volcp
