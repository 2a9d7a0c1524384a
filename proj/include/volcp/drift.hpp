#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace volcp {

struct SamplePath;

enum class KernelId { Gaussian, Epanechnikov };

struct Kernel {
  KernelId id = KernelId::Gaussian;

  double operator()(double u) const;
  std::string name() const;
};

Kernel kernel_from_name(const std::string& name);

// K(u) evaluated for the given kernel.
double kernel_eval(const Kernel& kernel, double u);

// Normal-reference rule h = 1.06 min(s, IQR/1.34) n^{-1/5}, with s the
// sample standard deviation. Throws on zero dispersion.
double silverman_bandwidth(const std::vector<double>& states);

// Nadaraya-Watson drift estimate over the full sample: for each state X_j
// the local slope is (X_{j+1} - X_j) / dt, and
//   bhat(x) = sum_j K((X_j - x)/h) slope_j / sum_j K((X_j - x)/h).
// The sum includes j with X_j = x (no leave-one-out).
struct DriftEstimate {
  std::vector<double> sample_states;  // X_0 .. X_{n-1}
  std::vector<double> sample_slopes;  // (X_{j+1} - X_j) / dt
  double bandwidth = 0.0;
  Kernel kernel;

  // Throws numeric_error when the kernel weight sum vanishes at x
  // (possible for compact-support kernels).
  double operator()(double x) const;
};

DriftEstimate nw_drift(const SamplePath& path, const Kernel& kernel,
                       double bandwidth);

}  // namespace volcp
