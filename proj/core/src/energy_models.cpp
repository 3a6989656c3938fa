#include "amagold/energy_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/LU>

#include "amagold/errors.hpp"

namespace amagold {

// ---------------------------------------------------------------------------
// EnergyModel

void EnergyModel::check_position(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dimension()) {
    throw ContractViolation(name() + ": expected position of dimension " +
                            std::to_string(dimension()) + ", got " + std::to_string(theta.size()));
  }
  if (!theta.allFinite()) throw DomainError(name() + ": non-finite position");
}

double EnergyModel::potential(const Vector& theta) const {
  check_position(theta);
  return do_potential(theta);
}

Vector EnergyModel::gradient(const Vector& theta) const {
  check_position(theta);
  return do_gradient(theta);
}

StochasticGradient EnergyModel::stochastic_gradient(const Vector& theta, RandomStream& rng) const {
  check_position(theta);
  return do_stochastic_gradient(theta, rng);
}

Vector EnergyModel::replay_stochastic_gradient(const Vector& theta,
                                               const GradientNoiseRecord& record) const {
  check_position(theta);
  return do_replay(theta, record);
}

StochasticGradient EnergyModel::do_stochastic_gradient(const Vector& theta, RandomStream&) const {
  return {do_gradient(theta), std::monostate{}};
}

Vector EnergyModel::do_replay(const Vector& theta, const GradientNoiseRecord& record) const {
  if (!std::holds_alternative<std::monostate>(record)) {
    throw ContractViolation(name() + ": model has no stochastic gradient; cannot replay record");
  }
  return do_gradient(theta);
}

// ---------------------------------------------------------------------------
// DoubleWell

double DoubleWell::do_potential(const Vector& theta) const {
  const double x = theta[0];
  return (x + 4.0) * (x + 1.0) * (x - 1.0) * (x - 3.0) / 14.0 + 0.5;
}

Vector DoubleWell::do_gradient(const Vector& theta) const {
  // d/dx of (x^4 + x^3 - 13x^2 - x + 12) / 14
  const double x = theta[0];
  Vector g(1);
  g[0] = (((4.0 * x + 3.0) * x - 26.0) * x - 1.0) / 14.0;
  return g;
}

// ---------------------------------------------------------------------------
// BananaDist1

BananaDist1::BananaDist1(double z2_variance) : z2_variance_(z2_variance) {
  if (!(z2_variance > 0.0) || !std::isfinite(z2_variance)) {
    throw ConfigurationError("dist1: z2 variance must be positive");
  }
}

double BananaDist1::do_potential(const Vector& z) const {
  const double resid = z[0] - 0.25 * z[1] * z[1];
  return 0.5 * resid * resid + 0.5 * z[1] * z[1] / z2_variance_;
}

Vector BananaDist1::do_gradient(const Vector& z) const {
  const double resid = z[0] - 0.25 * z[1] * z[1];
  Vector g(2);
  g[0] = resid;
  g[1] = -0.5 * z[1] * resid + z[1] / z2_variance_;
  return g;
}

// ---------------------------------------------------------------------------
// CrossMixtureDist2

CrossMixtureDist2::CrossMixtureDist2(double variance, double covariance) {
  const double det = variance * variance - covariance * covariance;
  if (!(variance > 0.0) || !(det > 0.0)) {
    throw ConfigurationError("dist2: component covariances must be positive definite");
  }
  Eigen::Matrix2d cov_plus;
  cov_plus << variance, covariance, covariance, variance;
  Eigen::Matrix2d cov_minus;
  cov_minus << variance, -covariance, -covariance, variance;
  precision_plus_ = cov_plus.inverse();
  precision_minus_ = cov_minus.inverse();
  // Both components share |Σ|; fold the 0.5 weights in as well.
  log_normalizer_ = std::log(2.0 * std::numbers::pi) + 0.5 * std::log(det) + std::log(2.0);
}

double CrossMixtureDist2::do_potential(const Vector& z) const {
  const Eigen::Vector2d v = z.head<2>();
  const double a = -0.5 * v.dot(precision_plus_ * v);
  const double b = -0.5 * v.dot(precision_minus_ * v);
  const double hi = std::max(a, b);
  const double log_sum = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  return log_normalizer_ - log_sum;
}

Vector CrossMixtureDist2::do_gradient(const Vector& z) const {
  const Eigen::Vector2d v = z.head<2>();
  const Eigen::Vector2d grad_plus = precision_plus_ * v;
  const Eigen::Vector2d grad_minus = precision_minus_ * v;
  const double a = -0.5 * v.dot(grad_plus);
  const double b = -0.5 * v.dot(grad_minus);
  // Posterior responsibility of the "+" component.
  const double w_plus = 1.0 / (1.0 + std::exp(b - a));
  return w_plus * grad_plus + (1.0 - w_plus) * grad_minus;
}

// ---------------------------------------------------------------------------
// IsotropicGaussian

IsotropicGaussian::IsotropicGaussian(std::size_t dimension, double variance)
    : IsotropicGaussian(Vector::Zero(static_cast<Eigen::Index>(dimension)), variance) {}

IsotropicGaussian::IsotropicGaussian(Vector mean, double variance)
    : mean_(std::move(mean)), variance_(variance) {
  if (mean_.size() == 0) throw ConfigurationError("gaussian: dimension must be positive");
  if (!(variance > 0.0)) throw ConfigurationError("gaussian: variance must be positive");
}

double IsotropicGaussian::do_potential(const Vector& theta) const {
  return 0.5 * (theta - mean_).squaredNorm() / variance_;
}

Vector IsotropicGaussian::do_gradient(const Vector& theta) const {
  return (theta - mean_) / variance_;
}

// ---------------------------------------------------------------------------
// GaussianNoiseGradient

GaussianNoiseGradient::GaussianNoiseGradient(ModelPtr base, double noise_stddev)
    : base_(std::move(base)), noise_stddev_(noise_stddev) {
  if (!base_) throw ConfigurationError("gradient-noise wrapper needs a base model");
  if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev)) {
    throw ConfigurationError("gradient noise stddev must be finite and non-negative");
  }
}

StochasticGradient GaussianNoiseGradient::do_stochastic_gradient(const Vector& theta,
                                                                 RandomStream& rng) const {
  GaussianPerturbation perturbation{
      rng.normal_vector(static_cast<Eigen::Index>(dimension()), noise_stddev_)};
  Vector g = base_->gradient(theta) + perturbation.noise;
  return {std::move(g), std::move(perturbation)};
}

Vector GaussianNoiseGradient::do_replay(const Vector& theta,
                                        const GradientNoiseRecord& record) const {
  if (std::holds_alternative<std::monostate>(record)) return base_->gradient(theta);
  const auto* perturbation = std::get_if<GaussianPerturbation>(&record);
  if (perturbation == nullptr) {
    throw ContractViolation("gradient-noise wrapper cannot replay a minibatch record");
  }
  if (perturbation->noise.size() != theta.size()) {
    throw ContractViolation("gradient-noise record has the wrong dimension");
  }
  return base_->gradient(theta) + perturbation->noise;
}

// ---------------------------------------------------------------------------
// ExactGradientView

ExactGradientView::ExactGradientView(ModelPtr base) : base_(std::move(base)) {
  if (!base_) throw ConfigurationError("exact-gradient view needs a base model");
}

// ---------------------------------------------------------------------------
// Dataset / LogisticRegression

void Dataset::validate() const {
  if (features.rows() < 1) throw ContractViolation("dataset: need at least one example");
  if (labels.size() != features.rows()) {
    throw ContractViolation("dataset: label count does not match example count");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw ContractViolation("dataset: label at row " + std::to_string(i) + " is not ±1");
    }
  }
  if (!features.allFinite()) throw ContractViolation("dataset: non-finite feature value");
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

namespace {

// 1 / (1 + exp(-x)), evaluated on the non-overflowing branch.
double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

template <class IndexFn>
Vector LogisticRegression::likelihood_gradient(const Vector& theta, std::size_t count,
                                               IndexFn index) const {
  // Shared by the exact and minibatch paths so that a full, in-order batch
  // reproduces the exact gradient bit for bit.
  const auto& x = data_->features;
  const auto& y = data_->labels;
  Vector g = Vector::Zero(theta.size());
  for (std::size_t k = 0; k < count; ++k) {
    const auto i = static_cast<Eigen::Index>(index(k));
    const double margin = y[i] * x.row(i).dot(theta);
    g.noalias() -= (y[i] * logistic(-margin)) * x.row(i).transpose();
  }
  const double scale = static_cast<double>(data_->size()) / static_cast<double>(count);
  return scale * g + theta / prior_variance_;
}

LogisticRegression::LogisticRegression(std::shared_ptr<const Dataset> data,
                                       std::size_t minibatch_size, double prior_variance)
    : data_(std::move(data)), minibatch_size_(minibatch_size), prior_variance_(prior_variance) {
  if (!data_) throw ConfigurationError("logreg: dataset is required");
  data_->validate();
  if (minibatch_size_ == 0) minibatch_size_ = data_->size();
  if (minibatch_size_ > data_->size()) {
    throw ConfigurationError("logreg: minibatch size " + std::to_string(minibatch_size_) +
                             " exceeds dataset size " + std::to_string(data_->size()));
  }
  if (!(prior_variance_ > 0.0)) throw ConfigurationError("logreg: prior variance must be positive");
}

double LogisticRegression::do_potential(const Vector& theta) const {
  const Vector margins = (data_->features * theta).cwiseProduct(data_->labels);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) nll += softplus(-margins[i]);
  return nll + 0.5 * theta.squaredNorm() / prior_variance_;
}

Vector LogisticRegression::do_gradient(const Vector& theta) const {
  return likelihood_gradient(theta, data_->size(), [](std::size_t k) { return k; });
}

Vector LogisticRegression::minibatch_gradient(const Vector& theta,
                                              const std::vector<std::size_t>& batch) const {
  return likelihood_gradient(theta, batch.size(), [&batch](std::size_t k) { return batch[k]; });
}

StochasticGradient LogisticRegression::do_stochastic_gradient(const Vector& theta,
                                                              RandomStream& rng) const {
  std::vector<std::size_t> all(data_->size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  MinibatchIndices batch;
  batch.indices.reserve(minibatch_size_);
  std::sample(all.begin(), all.end(), std::back_inserter(batch.indices), minibatch_size_, rng);
  Vector g = minibatch_gradient(theta, batch.indices);
  return {std::move(g), std::move(batch)};
}

Vector LogisticRegression::do_replay(const Vector& theta, const GradientNoiseRecord& record) const {
  if (std::holds_alternative<std::monostate>(record)) return do_gradient(theta);
  const auto* batch = std::get_if<MinibatchIndices>(&record);
  if (batch == nullptr) throw ContractViolation("logreg cannot replay a Gaussian-noise record");
  if (batch->indices.empty()) throw ContractViolation("logreg: empty minibatch record");
  for (const std::size_t i : batch->indices) {
    if (i >= data_->size()) throw ContractViolation("logreg: minibatch index out of range");
  }
  return minibatch_gradient(theta, batch->indices);
}

}  // namespace amagold
