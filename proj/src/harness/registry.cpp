// Copyright 2026 The emfluct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emfluct/harness/registry.hpp"

#include <cmath>

#include "emfluct/error.hpp"

namespace emfluct::harness {

namespace {

constexpr std::uint64_t kPhiSalt = 0x7068'6900'0000'0001ull;

// int f(x) p(x) dx / int p(x) dx with p the double-well invariant density
// exp(2 U(x) / sigma^2), U(x) = x^2/2 - x^4/4, by composite Simpson on
// [-6, 6]; the density is below e^-250 outside for sigma <= 2.
double double_well_expectation(double sigma, double (*f)(double)) {
  const int n = 24000;
  const double lo = -6.0, hi = 6.0, h = (hi - lo) / n;
  const double beta = 2.0 / (sigma * sigma);
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double p = std::exp(beta * (0.5 * x * x - 0.25 * x * x * x * x));
    num += w * p * f(x);
    den += w * p;
  }
  return num / den;
}

OuObservableKind ou_kind(const std::string& observable) {
  if (observable == "identity") return OuObservableKind::linear;
  if (observable == "square") return OuObservableKind::quadratic;
  return OuObservableKind::tanh_numeric;
}

}  // namespace

SdeModel build_model(const ExperimentConfig& c) {
  if (c.model == "ou") return make_ou(c.model_a, c.model_sigma, c.model_dim);
  if (c.model == "double_well") {
    if (c.model_dim != 1) throw ConfigError("config key 'model.dim': double_well is one-dimensional");
    return make_double_well(c.model_sigma);
  }
  if (c.model == "zero") return make_zero_drift(c.model_sigma, c.model_dim);
  throw ConfigError("config key 'model': unknown model '" + c.model + "'");
}

Observable build_observable(const ExperimentConfig& c) {
  if (c.observable == "identity") return identity_observable();
  if (c.observable == "square") return square_observable();
  if (c.observable == "tanh") return tanh_observable();
  if (c.observable == "const") return constant_observable(c.observable_value);
  throw ConfigError("config key 'observable': unknown observable '" + c.observable + "'");
}

std::optional<double> stationary_expectation(const ExperimentConfig& c) {
  if (c.observable == "const") return c.observable_value;
  if (c.model == "ou") {
    if (c.observable == "square")
      return ou_pi(c.model_a, c.model_sigma, OuObservableKind::quadratic, c.model_dim);
    return 0.0;  // odd observables, symmetric law
  }
  if (c.model == "double_well") {
    if (c.observable == "square")
      return double_well_expectation(c.model_sigma, [](double x) { return x * x; });
    return 0.0;
  }
  return std::nullopt;  // zero drift has no invariant law
}

SteinBundle build_bundle(const ExperimentConfig& c, int required_order) {
  const std::string pair = c.model + "/" + c.observable;
  if (c.observable == "const") {
    // h - pi(h) = 0, so phi = 0 solves the equation for every model.
    return zero_bundle(c.model_dim);
  }
  if (c.model != "ou")
    throw CapabilityError("no Stein solution registered for " + pair);
  const auto kind = ou_kind(c.observable);
  if (kind != OuObservableKind::tanh_numeric)
    return stein_solution_ou(c.model_a, c.model_sigma, kind, c.model_dim);
  if (required_order > 2)
    throw CapabilityError("Stein solution for " + pair +
                          " is Monte Carlo with derivatives up to order 2 only; order " +
                          std::to_string(required_order) + " was requested");
  NumericPhiSettings settings;
  settings.stream = NoiseStream(c.master_seed).fork(kPhiSalt);
  settings.options.replicas = c.phi_replicas;
  settings.options.dt = c.phi_dt;
  settings.options.t_max = c.phi_t_max ? *c.phi_t_max : 15.0 / c.model_a;
  return stein_solution_ou(c.model_a, c.model_sigma, kind, c.model_dim, settings);
}

std::optional<double> limiting_variance(const ExperimentConfig& c) {
  if (c.model != "ou") return std::nullopt;
  const double a = c.model_a, s = c.model_sigma;
  if (c.observable == "identity") return s * s / (a * a);
  // sigma^2/a^2 E|X|^2 with E|X|^2 = d sigma^2 / (2a).
  if (c.observable == "square")
    return s * s / (a * a) * static_cast<double>(c.model_dim) * s * s / (2.0 * a);
  return std::nullopt;
}

}  // namespace emfluct::harness
