#pragma once

#include <vector>

#include "volcp/drift.hpp"
#include "volcp/model.hpp"

namespace volcp {

enum class ResidualMode { KnownCoefficients, EstimatedDrift };

// Standardized residuals, one per increment: residual j covers the
// increment X_j -> X_{j+1}, j = 0..n-1. Cumulative sums over the first k
// residuals then match the paper-style index k = 1..n-1.
struct ResidualSeries {
  std::vector<double> z;
  ResidualMode mode = ResidualMode::KnownCoefficients;
  double delta = 0.0;

  std::size_t size() const { return z.size(); }
};

// Z_j = (X_{j+1} - X_j - b(X_j) dt) / (sqrt(dt) sigma(X_j)).
// Guards |sigma(X_j)| > sigma_floor rather than clamping: a clamped value
// would silently corrupt the CUSUM statistic.
ResidualSeries residuals_known(const SamplePath& path, const ScalarFn& drift,
                               const ScalarFn& diffusion,
                               double sigma_floor = 1e-12);

// Zhat_j = (X_{j+1} - X_j - bhat(X_j) dt) / sqrt(dt), for the reduced model
// with unit diffusion and estimated drift.
ResidualSeries residuals_estimated(const SamplePath& path,
                                   const DriftEstimate& drift_estimate);

}  // namespace volcp
