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

#include "emfluct/stein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "emfluct/error.hpp"
#include "emfluct/stats.hpp"

namespace emfluct {

const char* to_string(Provenance provenance) noexcept {
  switch (provenance) {
    case Provenance::analytic: return "analytic";
    case Provenance::monte_carlo_fd: return "monte_carlo_fd";
  }
  return "unknown";
}

Vector SteinBundle::grad_at(std::span<const double> x) const {
  Vector out(dim);
  grad(x, out);
  return out;
}

Vector SteinBundle::hess_at(std::span<const double> x) const {
  Vector out(dim * dim);
  hess(x, out);
  return out;
}

Vector SteinBundle::third_at(std::span<const double> x) const {
  if (!third) throw CapabilityError("bundle '" + description + "' has no third-derivative evaluator");
  Vector out(dim * dim * dim);
  third(x, out);
  return out;
}

double generator_apply(const SdeModel& model, const SteinBundle& bundle,
                       std::span<const double> x) {
  require(bundle.dim == model.dim() && x.size() == model.dim(),
          "generator_apply: dimension mismatch");
  const std::size_t d = model.dim();
  const Vector g = model.drift_at(x);
  const Vector grad = bundle.grad_at(x);
  const Vector hess = bundle.hess_at(x);
  const auto a = model.sigma_sigma_t().data();
  double hs = 0.0;
  for (std::size_t i = 0; i < d * d; ++i) hs += a[i] * hess[i];
  const double value = dot(g, grad) + 0.5 * hs;
  if (!std::isfinite(value)) throw NonFiniteDrift(Vector(x.begin(), x.end()), -1);
  return value;
}

SteinBundle zero_bundle(std::size_t dim) {
  SteinBundle b;
  b.dim = dim;
  b.phi = [](std::span<const double>) { return 0.0; };
  auto zeros = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  b.grad = zeros;
  b.hess = zeros;
  b.third = zeros;
  b.derivative_bounds = std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
  b.description = "zero";
  return b;
}

double default_t_max(const SdeModel& model) {
  const auto diss = model.dissipativity();
  return diss ? 15.0 / diss->k1 : 15.0;
}

PhiEstimate estimate_phi(const SdeModel& model, const Observable& h, double pi_h,
                         std::span<const double> x, const PhiEstimateOptions& options,
                         const NoiseStream& stream, const Executor& executor) {
  require(x.size() == model.dim(), "estimate_phi: point dimension mismatch");
  require(options.t_max > 0.0 && options.dt > 0.0 && options.dt < 1.0,
          "estimate_phi: need t_max > 0 and dt in (0,1)");
  require(options.replicas >= 1, "estimate_phi: need replicas");
  const auto steps = static_cast<std::size_t>(std::llround(options.t_max / options.dt));
  require(steps >= 1, "estimate_phi: t_max shorter than one step");
  const double dt = options.dt;
  const double h0 = h(x) - pi_h;

  std::vector<double> integral(options.replicas), terminal(options.replicas);
  executor.for_ranges(options.replicas, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      EmChain chain(model, dt, x, stream.for_replica(r));
      double acc = 0.5 * h0;
      double last = h0;
      for (std::size_t j = 1; j <= steps; ++j) {
        chain.advance();
        last = h(chain.state()) - pi_h;
        if (!std::isfinite(last)) throw NonFiniteObservable(j);
        if (j < steps) acc += last;
      }
      acc += 0.5 * last;
      integral[r] = -dt * acc;
      terminal[r] = last;
    }
  });

  const auto mom = stats::moments(integral);
  const auto tail = stats::moments(terminal);
  const auto diss = model.dissipativity();
  const double rate = diss ? diss->k1 : 1.0;
  PhiEstimate est;
  est.value = mom.mean;
  est.std_err = mom.std_err;
  est.t_max = options.t_max;
  est.dt = dt;
  est.replicas = options.replicas;
  est.tail_estimate = std::abs(tail.mean) / rate;
  est.truncation_warning =
      est.tail_estimate > options.tail_tolerance && std::abs(tail.mean) > 3.0 * tail.std_err;
  est.seed = {stream.master_seed(), stream.replica_index()};
  return est;
}

double default_fd_step(Provenance provenance, double coordinate) noexcept {
  if (provenance == Provenance::monte_carlo_fd) return 0.05;
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(coordinate));
}

Vector grad_phi_fd(const ScalarField& phi_eval, std::span<const double> x, double step) {
  require(step > 0.0, "grad_phi_fd: step must be positive");
  Vector grad(x.size());
  Vector probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = phi_eval(probe);
    probe[i] = x[i] - step;
    const double down = phi_eval(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

namespace {

void fd_hessian(const ScalarField& phi, std::span<const double> x, double s,
                std::span<double> out) {
  const std::size_t d = x.size();
  Vector p(x.begin(), x.end());
  const double centre = phi(p);
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = x[i] + s;
    const double up = phi(p);
    p[i] = x[i] - s;
    const double down = phi(p);
    p[i] = x[i];
    out[i * d + i] = (up - 2.0 * centre + down) / (s * s);
    for (std::size_t j = i + 1; j < d; ++j) {
      auto eval = [&](double si, double sj) {
        p[i] = x[i] + si;
        p[j] = x[j] + sj;
        const double v = phi(p);
        p[i] = x[i];
        p[j] = x[j];
        return v;
      };
      const double v = (eval(s, s) - eval(s, -s) - eval(-s, s) + eval(-s, -s)) / (4.0 * s * s);
      out[i * d + j] = v;
      out[j * d + i] = v;
    }
  }
}

void fd_third(const ScalarField& phi, std::span<const double> x, double s,
              std::span<double> out) {
  const std::size_t d = x.size();
  Vector p(x.begin(), x.end());
  Vector h_up(d * d), h_down(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = x[i] + s;
    fd_hessian(phi, p, s, h_up);
    p[i] = x[i] - s;
    fd_hessian(phi, p, s, h_down);
    p[i] = x[i];
    for (std::size_t j = i; j < d; ++j)
      for (std::size_t k = j; k < d; ++k) {
        const double v = (h_up[j * d + k] - h_down[j * d + k]) / (2.0 * s);
        const std::size_t idx[3] = {i, j, k};
        // Fill every permutation of (i, j, k) with the same value.
        static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                            {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& pm : perms)
          out[(idx[pm[0]] * d + idx[pm[1]]) * d + idx[pm[2]]] = v;
      }
  }
}

}  // namespace

SteinBundle numeric_bundle(ScalarField phi_eval, std::size_t dim, double step, int max_order) {
  require(step > 0.0, "numeric_bundle: step must be positive");
  require(max_order >= 1 && max_order <= 3, "numeric_bundle: max_order must be 1, 2 or 3");
  SteinBundle b;
  b.dim = dim;
  b.provenance = Provenance::monte_carlo_fd;
  b.low_trust_higher_order = true;
  b.phi = phi_eval;
  b.grad = [phi_eval, step](std::span<const double> x, std::span<double> out) {
    const Vector g = grad_phi_fd(phi_eval, x, step);
    std::copy(g.begin(), g.end(), out.begin());
  };
  if (max_order >= 2)
    b.hess = [phi_eval, step](std::span<const double> x, std::span<double> out) {
      fd_hessian(phi_eval, x, step, out);
    };
  if (max_order >= 3)
    b.third = [phi_eval, step](std::span<const double> x, std::span<double> out) {
      fd_third(phi_eval, x, step, out);
    };
  b.description = "finite differences of a numeric phi";
  return b;
}

double ou_pi(double a, double sigma, OuObservableKind kind, std::size_t dim) {
  switch (kind) {
    case OuObservableKind::linear: return 0.0;
    case OuObservableKind::quadratic: return static_cast<double>(dim) * sigma * sigma / (2.0 * a);
    case OuObservableKind::tanh_numeric: return 0.0;  // odd h, symmetric pi
  }
  return 0.0;
}

SteinBundle stein_solution_ou(double a, double sigma, OuObservableKind kind, std::size_t dim,
                              std::optional<NumericPhiSettings> numeric) {
  require(a > 0.0 && sigma > 0.0, "stein_solution_ou: a and sigma must be positive");
  require(dim >= 1, "stein_solution_ou: dimension must be positive");
  SteinBundle b;
  b.dim = dim;
  auto zeros = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  switch (kind) {
    case OuObservableKind::linear: {
      b.phi = [a](std::span<const double> x) { return -x[0] / a; };
      b.grad = [a](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[0] = -1.0 / a;
      };
      b.hess = zeros;
      b.third = zeros;
      b.derivative_bounds = std::array<double, 4>{std::numeric_limits<double>::infinity(),
                                                    1.0 / a, 0.0, 0.0};
      b.description = "ou linear";
      return b;
    }
    case OuObservableKind::quadratic: {
      const double centre = static_cast<double>(dim) * sigma * sigma / (2.0 * a);
      b.phi = [a, centre](std::span<const double> x) {
        return -(norm_squared(x) - centre) / (2.0 * a);
      };
      b.grad = [a](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i] / a;
      };
      b.hess = [a, dim](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) out[i * dim + i] = -1.0 / a;
      };
      b.third = zeros;
      b.derivative_bounds = std::array<double, 4>{std::numeric_limits<double>::infinity(),
                                                    std::numeric_limits<double>::infinity(),
                                                    1.0 / a, 0.0};
      b.description = "ou quadratic";
      return b;
    }
    case OuObservableKind::tanh_numeric: {
      if (!numeric)
        throw CapabilityError("stein_solution_ou: tanh_numeric needs Monte Carlo settings");
      auto model = std::make_shared<SdeModel>(make_ou(a, sigma, dim));
      auto settings = std::make_shared<NumericPhiSettings>(*numeric);
      const Observable h = tanh_observable();
      ScalarField phi = [model, settings, h](std::span<const double> x) {
        return estimate_phi(*model, h, 0.0, x, settings->options, settings->stream).value;
      };
      b = numeric_bundle(std::move(phi), dim, settings->fd_step, 2);
      b.description = "ou tanh (monte carlo)";
      return b;
    }
  }
  return b;
}

SteinResidualReport stein_residual(const SdeModel& model, const SteinBundle& bundle,
                                   const Observable& h, double pi_h,
                                   std::span<const Vector> grid) {
  require(bundle.grad && bundle.hess, "stein_residual: bundle must provide grad and hess");
  SteinResidualReport report;
  for (const Vector& x : grid) {
    const double r = std::abs(generator_apply(model, bundle, x) - (h(x) - pi_h));
    report.max_residual = std::max(report.max_residual, r);
    report.points.push_back({x, r});
  }
  return report;
}

}  // namespace emfluct
