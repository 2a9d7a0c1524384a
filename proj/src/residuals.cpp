#include "volcp/residuals.hpp"

#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"

namespace volcp {

namespace {

void check_path(const SamplePath& path) {
  if (path.values.size() < 2)
    throw input_error("residuals: path must hold at least 2 observations");
  if (!(path.delta > 0.0))
    throw input_error("residuals: path step size must be positive");
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    if (!std::isfinite(path.values[i])) {
      std::ostringstream msg;
      msg << "residuals: non-finite observation at index " << i;
      throw numeric_error(msg.str());
    }
  }
}

}  // namespace

ResidualSeries residuals_known(const SamplePath& path, const ScalarFn& drift,
                               const ScalarFn& diffusion, double sigma_floor) {
  check_path(path);
  if (!drift || !diffusion)
    throw input_error("residuals: drift and diffusion must be set");

  const std::size_t n = path.steps();
  const double dt = path.delta;
  const double sqrt_dt = std::sqrt(dt);

  ResidualSeries res;
  res.mode = ResidualMode::KnownCoefficients;
  res.delta = dt;
  res.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = path.values[i];
    const double sig = diffusion(x);
    if (!std::isfinite(sig) || std::fabs(sig) <= sigma_floor) {
      std::ostringstream msg;
      msg << "residuals: sigma(X_" << i << ") = " << sig
          << " below floor " << sigma_floor;
      throw numeric_error(msg.str());
    }
    res.z[i] =
        (path.values[i + 1] - x - drift(x) * dt) / (sqrt_dt * sig);
    if (!std::isfinite(res.z[i])) {
      std::ostringstream msg;
      msg << "residuals: non-finite residual at index " << i;
      throw numeric_error(msg.str());
    }
  }
  return res;
}

ResidualSeries residuals_estimated(const SamplePath& path,
                                   const DriftEstimate& drift_estimate) {
  check_path(path);
  const std::size_t n = path.steps();
  const double dt = path.delta;
  const double sqrt_dt = std::sqrt(dt);

  ResidualSeries res;
  res.mode = ResidualMode::EstimatedDrift;
  res.delta = dt;
  res.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = path.values[i];
    const double bhat = drift_estimate(x);  // throws if undefined at x
    res.z[i] = (path.values[i + 1] - x - bhat * dt) / sqrt_dt;
    if (!std::isfinite(res.z[i])) {
      std::ostringstream msg;
      msg << "residuals: non-finite residual at index " << i;
      throw numeric_error(msg.str());
    }
  }
  return res;
}

}  // namespace volcp
