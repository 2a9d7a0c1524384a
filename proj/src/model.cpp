#include "volcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"
#include "volcp/rng.hpp"

namespace volcp {

std::size_t ModelSpec::change_index() const {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * tau0));
}

void ModelSpec::validate() const {
  if (!drift) throw input_error("model: drift function not set");
  if (!diffusion) throw input_error("model: diffusion function not set");
  if (!(tau0 > 0.0 && tau0 < 1.0))
    throw input_error("model: tau0 must lie in (0,1)");
  // theta = 0 is accepted: the zero-noise scheme degenerates to forward
  // Euler for the ODE, which is useful for exact tests.
  if (!(theta1 >= 0.0) || !(theta2 >= 0.0))
    throw input_error("model: theta1 and theta2 must be nonnegative");
  if (n < 2) throw input_error("model: n must be at least 2");
  if (!(t_horizon > 0.0)) throw input_error("model: T must be positive");
  if (!(state_lo < state_hi))
    throw input_error("model: state interval is empty");
  if (!(x0 > state_lo && x0 < state_hi))
    throw input_error("model: x0 must lie inside the state interval");

  // Probe sigma on a grid spanning the (clipped) state interval.
  const double window = 50.0 * (1.0 + std::fabs(x0));
  const double lo = std::max(state_lo, x0 - window);
  const double hi = std::min(state_hi, x0 + window);
  const int probes = 65;
  for (int j = 0; j < probes; ++j) {
    const double x = lo + (hi - lo) * (j + 0.5) / probes;
    const double s = diffusion(x);
    if (!std::isfinite(s) || s <= 0.0) {
      std::ostringstream msg;
      msg << "model: sigma(x) must be positive; sigma(" << x << ") = " << s;
      throw input_error(msg.str());
    }
  }
}

SamplePath simulate_path(const ModelSpec& model, std::uint64_t seed) {
  model.validate();
  const std::size_t n = model.n;
  const double dt = model.delta();
  const double sqrt_dt = std::sqrt(dt);
  const std::size_t k0 = model.change_index();
  const double scale1 = std::sqrt(model.theta1);
  const double scale2 = std::sqrt(model.theta2);

  Xoshiro256pp rng(seed);
  SamplePath path;
  path.delta = dt;
  path.change_index_true = k0;
  path.values.resize(n + 1);
  path.values[0] = model.x0;

  double x = model.x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vol_scale = (i < k0) ? scale1 : scale2;
    const double g = rng.gaussian();
    x = x + model.drift(x) * dt + vol_scale * model.diffusion(x) * sqrt_dt * g;
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << "simulation produced a non-finite value at index " << (i + 1)
          << " (explosion at this discretization)";
      throw simulation_error(msg.str(), i + 1);
    }
    path.values[i + 1] = x;
  }
  return path;
}

namespace {

// Walks from x_ref toward one boundary, integrating the scale function
// s(u) = exp(-I(u)), I(u) = int_{x_ref}^{u} 2 b/sigma^2, by trapezoid on an
// expanding grid. direction is +1 toward the upper boundary, -1 toward the
// lower one.
BoundaryTrace integrate_toward(const ModelSpec& model, double x_ref,
                               double boundary, int direction,
                               const QuadratureConfig& quad) {
  BoundaryTrace trace;
  const bool finite_boundary = std::isfinite(boundary);

  auto integrand = [&](double u) {
    const double sig = model.diffusion(u);
    if (!std::isfinite(sig) || sig == 0.0) {
      std::ostringstream msg;
      msg << "nonexplosion check: sigma(" << u << ") = " << sig;
      throw numeric_error(msg.str());
    }
    return 2.0 * model.drift(u) / (sig * sig);
  };

  double x_prev = x_ref;
  double phi_prev = integrand(x_ref);
  double inner = 0.0;   // I(x)
  double s_prev = 1.0;  // s(x_ref)
  double partial = 0.0;
  double step = quad.initial_step * (1.0 + std::fabs(x_ref));
  double gap = finite_boundary ? std::fabs(boundary - x_ref) : 0.0;

  trace.grid.push_back(x_ref);
  trace.partial_sums.push_back(0.0);

  for (std::size_t j = 0; j < quad.max_points; ++j) {
    double x_next;
    if (finite_boundary) {
      gap /= quad.growth;
      x_next = boundary - direction * gap;
      if (std::fabs(x_next - x_prev) <
          1e-14 * (1.0 + std::fabs(boundary))) {
        break;
      }
    } else {
      x_next = x_prev + direction * step;
      step *= quad.growth;
    }

    const double phi_next = integrand(x_next);
    inner += 0.5 * (phi_prev + phi_next) * (x_next - x_prev);
    const double s_next = std::exp(-inner);
    if (!std::isfinite(s_next)) {
      std::ostringstream msg;
      msg << "nonexplosion check: scale function non-finite at x = " << x_next;
      throw numeric_error(msg.str());
    }

    const double increment = 0.5 * (s_prev + s_next) * std::fabs(x_next - x_prev);
    partial += increment;
    trace.grid.push_back(x_next);
    trace.partial_sums.push_back(partial);

    if (partial > quad.divergence_threshold) {
      trace.diverges = true;
      return trace;
    }
    if (increment <= quad.stabilization_rtol * partial && j > 8) {
      trace.stabilized = true;
      return trace;
    }

    x_prev = x_next;
    phi_prev = phi_next;
    s_prev = s_next;
  }
  return trace;
}

}  // namespace

DiagnosticReport check_nonexplosion(const ModelSpec& model, double x_ref,
                                    const QuadratureConfig& quad) {
  if (!model.drift || !model.diffusion)
    throw input_error("nonexplosion check: model coefficients not set");
  if (!(x_ref > model.state_lo && x_ref < model.state_hi))
    throw input_error("nonexplosion check: x_ref must lie inside (l, r)");
  if (!(quad.growth > 1.0))
    throw input_error("nonexplosion check: grid growth factor must exceed 1");
  if (!(quad.divergence_threshold > 0.0))
    throw input_error("nonexplosion check: divergence threshold must be positive");

  DiagnosticReport report;
  report.left = integrate_toward(model, x_ref, model.state_lo, -1, quad);
  report.right = integrate_toward(model, x_ref, model.state_hi, +1, quad);
  report.left_integral_diverges = report.left.diverges;
  report.right_integral_diverges = report.right.diverges;
  return report;
}

namespace {

double parse_number(const std::string& spec, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw input_error("coefficient '" + spec + "': bad number '" + text + "'");
  }
}

// Parses "name" or "name:key=val,key=val" into (name, params).
std::pair<std::string, std::vector<std::pair<std::string, double>>>
parse_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::vector<std::pair<std::string, double>> params;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    std::istringstream items(rest);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw input_error("coefficient '" + spec + "': expected key=value, got '" +
                          item + "'");
      params.emplace_back(item.substr(0, eq),
                          parse_number(spec, item.substr(eq + 1)));
    }
  }
  return {name, params};
}

double require_param(const std::string& spec,
                     const std::vector<std::pair<std::string, double>>& params,
                     const std::string& key) {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  throw input_error("coefficient '" + spec + "': missing parameter '" + key + "'");
}

}  // namespace

ScalarFn make_coefficient(const std::string& spec) {
  const auto [name, params] = parse_spec(spec);
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "identity") return [](double x) { return x; };
  if (name == "const") {
    const double c = require_param(spec, params, "c");
    return [c](double) { return c; };
  }
  if (name == "ou") {
    const double kappa = require_param(spec, params, "kappa");
    const double mu = require_param(spec, params, "mu");
    return [kappa, mu](double x) { return kappa * (mu - x); };
  }
  if (name == "affine") {
    const double a = require_param(spec, params, "a");
    const double b = require_param(spec, params, "b");
    return [a, b](double x) { return a + b * x; };
  }
  throw input_error("unknown coefficient form '" + spec + "'");
}

ModelSpec registry_model(const std::string& name) {
  ModelSpec model;
  if (name == "bm") {
    model.drift_spec = "zero";
    model.diffusion_spec = "one";
  } else if (name == "ou") {
    model.drift_spec = "ou:kappa=1,mu=0";
    model.diffusion_spec = "one";
  } else if (name == "geometric") {
    model.drift_spec = "affine:a=0,b=0.1";
    model.diffusion_spec = "identity";
    model.state_lo = 0.0;
    model.x0 = 1.0;
  } else {
    throw input_error("unknown model '" + name + "' (expected bm, ou or geometric)");
  }
  model.drift = make_coefficient(model.drift_spec);
  model.diffusion = make_coefficient(model.diffusion_spec);
  return model;
}

}  // namespace volcp
