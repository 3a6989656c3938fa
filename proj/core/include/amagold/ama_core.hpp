#pragma once

// Amortized Metropolis-Hastings over T-step proposal chains.
//
// A proposal kernel moves x -> y given a stochastic sample ζ drawn up front
// (e.g. the minibatch used for that step) and exposes its transition log
// density log P(x, y; ζ). Running the kernel T times and applying a single
// accept/reject at the end gives a chain that is reversible (identity
// involution) or skew-reversible (e.g. momentum flip) with respect to π.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "amagold/errors.hpp"
#include "amagold/phase_state.hpp"
#include "amagold/random.hpp"

namespace amagold {

template <class K>
concept ProposalKernel = requires(const K& kernel, const typename K::State& x,
                                  const typename K::Noise& zeta, RandomStream& rng) {
  typename K::State;
  typename K::Noise;
  { kernel.draw_noise(x, rng) } -> std::same_as<typename K::Noise>;
  { kernel.sample(x, zeta, rng) } -> std::same_as<typename K::State>;
  { kernel.log_density(x, x, zeta) } -> std::convertible_to<double>;
  { K::is_finite(x) } -> std::convertible_to<bool>;
};

// States x_0..x_T and the stochastic samples ζ_0..ζ_{T-1} that drove them.
template <class State, class Noise>
struct PathRecord {
  std::vector<State> states;
  std::vector<Noise> samples;

  std::size_t steps() const noexcept { return samples.size(); }
  const State& initial() const { return states.front(); }
  const State& proposal() const { return states.back(); }

  // length(states) == T + 1, length(samples) == T, T >= 1.
  bool well_formed() const noexcept {
    return !samples.empty() && states.size() == samples.size() + 1;
  }

  // Same path walked backwards, ζ order reversed with it.
  PathRecord reversed() const {
    return {std::vector<State>(states.rbegin(), states.rend()),
            std::vector<Noise>(samples.rbegin(), samples.rend())};
  }
};

template <ProposalKernel K>
using PathOf = PathRecord<typename K::State, typename K::Noise>;

template <ProposalKernel K>
PathOf<K> run_amortized_proposal(const K& kernel, typename K::State x0, std::size_t steps,
                                 RandomStream& rng) {
  if (steps == 0) throw ContractViolation("amortized proposal needs at least one step");
  PathOf<K> path;
  path.states.reserve(steps + 1);
  path.samples.reserve(steps);
  path.states.push_back(std::move(x0));
  for (std::size_t t = 0; t < steps; ++t) {
    auto zeta = kernel.draw_noise(path.states.back(), rng);
    auto next = kernel.sample(path.states.back(), zeta, rng);
    if (!K::is_finite(next)) {
      throw NumericalError("proposal kernel produced a non-finite state", static_cast<std::ptrdiff_t>(t));
    }
    path.samples.push_back(std::move(zeta));
    path.states.push_back(std::move(next));
  }
  return path;
}

namespace detail {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

template <class Path>
void require_well_formed(const Path& path) {
  if (!path.well_formed()) throw ContractViolation("malformed path record");
}

inline void require_finite_forward(double log_forward, std::size_t t) {
  if (!std::isfinite(log_forward)) {
    throw NumericalError("forward transition density is not finite along the path",
                         static_cast<std::ptrdiff_t>(t));
  }
}

}  // namespace detail

/// log of  π(y)/π(x) · Π_t P(x_{t+1}, x_t; ζ_t) / P(x_t, x_{t+1}; ζ_t).
///
/// `log_target` is log π up to an additive constant. The caller takes
/// min(0, ·). An impossible reverse move yields -inf (certain rejection).
template <ProposalKernel K, class LogTarget>
double log_accept_reversible(const PathOf<K>& path, const K& kernel, LogTarget&& log_target) {
  detail::require_well_formed(path);
  double log_ratio = log_target(path.proposal()) - log_target(path.initial());
  for (std::size_t t = 0; t < path.steps(); ++t) {
    const double forward = kernel.log_density(path.states[t], path.states[t + 1], path.samples[t]);
    detail::require_finite_forward(forward, t);
    const double backward = kernel.log_density(path.states[t + 1], path.states[t], path.samples[t]);
    if (!std::isfinite(backward)) return detail::kMinusInfinity;
    log_ratio += backward - forward;
  }
  return std::isnan(log_ratio) ? detail::kMinusInfinity : log_ratio;
}

// Same quantity arranged as the product of per-step factors
// π(x_{t+1}) P(x_{t+1}, x_t; ζ_t) / (π(x_t) P(x_t, x_{t+1}; ζ_t)).
template <ProposalKernel K, class LogTarget>
double log_accept_reversible_stepwise(const PathOf<K>& path, const K& kernel,
                                      LogTarget&& log_target) {
  detail::require_well_formed(path);
  double log_ratio = 0.0;
  for (std::size_t t = 0; t < path.steps(); ++t) {
    const auto& from = path.states[t];
    const auto& to = path.states[t + 1];
    const double forward = kernel.log_density(from, to, path.samples[t]);
    detail::require_finite_forward(forward, t);
    const double backward = kernel.log_density(to, from, path.samples[t]);
    if (!std::isfinite(backward)) return detail::kMinusInfinity;
    log_ratio += (log_target(to) + backward) - (log_target(from) + forward);
  }
  return std::isnan(log_ratio) ? detail::kMinusInfinity : log_ratio;
}

/// log of  π(y^⊥)/π(x) · Π_t P(x_{t+1}^⊥, x_t^⊥; ζ_t) / P(x_t, x_{t+1}; ζ_t).
///
/// Requires π(x) = π(x^⊥); `involution` must be self-inverse.
template <ProposalKernel K, class LogTarget, class Involution>
double log_accept_skew(const PathOf<K>& path, const K& kernel, LogTarget&& log_target,
                       Involution&& involution) {
  detail::require_well_formed(path);
  double log_ratio = log_target(involution(path.proposal())) - log_target(path.initial());
  for (std::size_t t = 0; t < path.steps(); ++t) {
    const double forward = kernel.log_density(path.states[t], path.states[t + 1], path.samples[t]);
    detail::require_finite_forward(forward, t);
    const double backward = kernel.log_density(involution(path.states[t + 1]),
                                               involution(path.states[t]), path.samples[t]);
    if (!std::isfinite(backward)) return detail::kMinusInfinity;
    log_ratio += backward - forward;
  }
  return std::isnan(log_ratio) ? detail::kMinusInfinity : log_ratio;
}

// Accept iff log(u) < min(0, log_ratio), u ~ U[0, 1).
inline bool metropolis_accept(double log_ratio, double uniform) noexcept {
  if (std::isnan(log_ratio)) return false;
  return std::log(uniform) < std::min(0.0, log_ratio);
}

// min(1, exp(log_ratio)), with NaN treated as zero.
inline double acceptance_probability(double log_ratio) noexcept {
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

struct IdentityInvolution {
  template <class State>
  const State& operator()(const State& x) const noexcept {
    return x;
  }
};

/// Gaussian random walk y = x + N(0, s^2 I) on R^d. Symmetric, so it carries
/// no stochastic sample of its own.
class GaussianRandomWalkKernel {
 public:
  using State = Eigen::VectorXd;
  struct Noise {};

  explicit GaussianRandomWalkKernel(double stddev) : stddev_(stddev) {
    if (!(stddev > 0.0)) throw ConfigurationError("random-walk stddev must be positive");
  }

  Noise draw_noise(const State&, RandomStream&) const { return {}; }

  State sample(const State& x, const Noise&, RandomStream& rng) const {
    return x + rng.normal_vector(x.size(), stddev_);
  }

  double log_density(const State& from, const State& to, const Noise&) const {
    const double var = stddev_ * stddev_;
    return -0.5 * (to - from).squaredNorm() / var -
           0.5 * static_cast<double>(from.size()) * std::log(2.0 * std::numbers::pi * var);
  }

  static bool is_finite(const State& x) { return x.allFinite(); }

  double stddev() const noexcept { return stddev_; }

 private:
  double stddev_;
};

}  // namespace amagold
