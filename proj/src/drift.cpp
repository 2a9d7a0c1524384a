#include "volcp/drift.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"
#include "volcp/model.hpp"
#include "volcp/stats.hpp"

namespace volcp {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double Kernel::operator()(double u) const {
  switch (id) {
    case KernelId::Gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case KernelId::Epanechnikov:
      return (std::fabs(u) <= 1.0) ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

std::string Kernel::name() const {
  return id == KernelId::Gaussian ? "gaussian" : "epanechnikov";
}

Kernel kernel_from_name(const std::string& name) {
  if (name == "gaussian") return Kernel{KernelId::Gaussian};
  if (name == "epanechnikov") return Kernel{KernelId::Epanechnikov};
  throw input_error("unknown kernel '" + name +
                    "' (expected gaussian or epanechnikov)");
}

double kernel_eval(const Kernel& kernel, double u) { return kernel(u); }

double silverman_bandwidth(const std::vector<double>& states) {
  const std::size_t n = states.size();
  if (n < 2) throw input_error("bandwidth: need at least 2 states");

  double mean = 0.0;
  for (double x : states) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : states) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(states);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd;  // IQR can vanish on clumped data
  if (!(spread > 0.0))
    throw input_error("bandwidth: states have zero dispersion");

  return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

double DriftEstimate::operator()(double x) const {
  const double h = bandwidth;
  double weight_sum = 0.0;
  double weighted_slopes = 0.0;
  for (std::size_t j = 0; j < sample_states.size(); ++j) {
    const double w = kernel((sample_states[j] - x) / h);
    weight_sum += w;
    weighted_slopes += w * sample_slopes[j];
  }
  if (weight_sum <= 0.0) {
    std::ostringstream msg;
    msg << "drift estimate undefined at x = " << x
        << " (kernel weight sum is zero)";
    throw numeric_error(msg.str());
  }
  return weighted_slopes / weight_sum;
}

DriftEstimate nw_drift(const SamplePath& path, const Kernel& kernel,
                       double bandwidth) {
  if (path.values.size() < 2)
    throw input_error("nw_drift: path must hold at least 2 observations");
  if (!(bandwidth > 0.0))
    throw input_error("nw_drift: bandwidth must be positive");
  if (!(path.delta > 0.0))
    throw input_error("nw_drift: path step size must be positive");

  const std::size_t n = path.steps();
  DriftEstimate est;
  est.kernel = kernel;
  est.bandwidth = bandwidth;
  est.sample_states.resize(n);
  est.sample_slopes.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    est.sample_states[j] = path.values[j];
    est.sample_slopes[j] = (path.values[j + 1] - path.values[j]) / path.delta;
  }
  return est;
}

}  // namespace volcp
