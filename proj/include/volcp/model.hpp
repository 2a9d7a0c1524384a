#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace volcp {

using ScalarFn = std::function<double(double)>;

// Diffusion model dX = b(X) dt + sqrt(theta) sigma(X) dW observed on an
// equispaced grid of n steps over [0, T]; theta switches from theta1 to
// theta2 at the change fraction tau0.
struct ModelSpec {
  ScalarFn drift;      // b(x)
  ScalarFn diffusion;  // sigma(x) > 0 on the state interval
  double theta1 = 1.0;
  double theta2 = 1.0;
  double tau0 = 0.5;
  double x0 = 0.0;
  std::size_t n = 0;       // number of Euler steps; n+1 observations
  double t_horizon = 1.0;  // T; step size is T/n
  double state_lo = -std::numeric_limits<double>::infinity();
  double state_hi = std::numeric_limits<double>::infinity();

  // Textual coefficient forms, carried into reports for reproducibility.
  std::string drift_spec;
  std::string diffusion_spec;

  double delta() const { return t_horizon / static_cast<double>(n); }

  // k0 = floor(n * tau0). Increment i uses theta1 iff i < k0, so the first
  // theta2 increment starts at t_{k0}.
  std::size_t change_index() const;

  // Throws input_error on violated invariants; probes sigma > 0 on a
  // sampled grid of the state interval.
  void validate() const;
};

struct SamplePath {
  double delta = 0.0;
  std::vector<double> values;  // X_0 .. X_n
  std::optional<std::size_t> change_index_true;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
};

// Euler scheme with one standard normal draw per step, consumed in step
// order. Identical (model, seed) give a bit-identical path.
SamplePath simulate_path(const ModelSpec& model, std::uint64_t seed);

struct QuadratureConfig {
  double initial_step = 1e-3;   // scale of the first step away from x_ref
  double growth = 1.25;         // geometric growth factor of the grid
  std::size_t max_points = 400;
  double divergence_threshold = 1e8;
  double stabilization_rtol = 1e-10;
};

struct BoundaryTrace {
  std::vector<double> grid;          // points walked from x_ref outward
  std::vector<double> partial_sums;  // cumulative integral of s(u)
  bool diverges = false;
  bool stabilized = false;
};

// Numerical probe of the non-explosion condition: the scale function
// s(x) = exp(-int_{x_ref}^{x} 2 b(u)/sigma^2(u) du) is integrated toward
// each boundary of the state interval on an expanding grid. A boundary is
// flagged divergent once the partial integral exceeds the configured
// threshold. Divergence cannot be proven numerically; the report carries
// the full trace so the call is auditable.
struct DiagnosticReport {
  bool left_integral_diverges = false;
  bool right_integral_diverges = false;
  BoundaryTrace left;
  BoundaryTrace right;
};

DiagnosticReport check_nonexplosion(const ModelSpec& model, double x_ref,
                                    const QuadratureConfig& quad = {});

// --- coefficient mini-language -------------------------------------------
//
// Scalar coefficient functions are named forms so that reports can record
// exactly what was run:
//   "zero"                      f(x) = 0
//   "one"                       f(x) = 1
//   "identity"                  f(x) = x
//   "const:c=<v>"               f(x) = v
//   "ou:kappa=<k>,mu=<m>"       f(x) = k (m - x)
//   "affine:a=<a>,b=<b>"        f(x) = a + b x
ScalarFn make_coefficient(const std::string& spec);

// Built-in model templates: "bm" (zero drift, unit diffusion),
// "ou" (mean reversion, unit diffusion), "geometric" (sigma(x) = x on
// (0, inf)). The caller still sets thetas, tau0, n, T and may override x0.
ModelSpec registry_model(const std::string& name);

}  // namespace volcp
