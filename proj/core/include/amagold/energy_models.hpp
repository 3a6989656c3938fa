#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "amagold/random.hpp"

namespace amagold {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Additive N(0, s^2 I) perturbation applied to an exact gradient.
struct GaussianPerturbation {
  Vector noise;
};

// Example indices of one minibatch draw.
struct MinibatchIndices {
  std::vector<std::size_t> indices;
};

// The stochastic sample behind one gradient estimate. `std::monostate` marks
// an exact (noise-free) gradient.
using GradientNoiseRecord = std::variant<std::monostate, GaussianPerturbation, MinibatchIndices>;

struct StochasticGradient {
  Vector gradient;
  GradientNoiseRecord record;
};

/// Energy U(theta) of a target density pi(theta) ∝ exp(-U(theta)).
///
/// Public entry points validate their input and forward to the protected
/// hooks. Models are immutable after construction; randomness comes in
/// through the caller's stream, so one model may back many chains at once.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
  virtual bool has_stochastic_gradient() const { return false; }

  double potential(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;

  // Draws an estimate of the gradient together with the randomness that
  // produced it. Models without a stochastic estimator return the exact
  // gradient and an empty record.
  StochasticGradient stochastic_gradient(const Vector& theta, RandomStream& rng) const;

  // Recomputes the estimate for a previously drawn record. Bit-identical to
  // the original draw when evaluated at the same theta.
  Vector replay_stochastic_gradient(const Vector& theta, const GradientNoiseRecord& record) const;

 protected:
  virtual double do_potential(const Vector& theta) const = 0;
  virtual Vector do_gradient(const Vector& theta) const = 0;
  virtual StochasticGradient do_stochastic_gradient(const Vector& theta, RandomStream& rng) const;
  virtual Vector do_replay(const Vector& theta, const GradientNoiseRecord& record) const;

 private:
  void check_position(const Vector& theta) const;
};

using ModelPtr = std::shared_ptr<const EnergyModel>;

// U(θ) = (θ+4)(θ+1)(θ−1)(θ−3)/14 + 0.5
class DoubleWell final : public EnergyModel {
 public:
  std::size_t dimension() const override { return 1; }
  std::string name() const override { return "doublewell"; }

 protected:
  double do_potential(const Vector& theta) const override;
  Vector do_gradient(const Vector& theta) const override;
};

// Banana-shaped target: z1 | z2 ~ N(z2^2/4, 1), z2 ~ N(0, v) with v = 4 by default.
class BananaDist1 final : public EnergyModel {
 public:
  explicit BananaDist1(double z2_variance = 4.0);

  std::size_t dimension() const override { return 2; }
  std::string name() const override { return "dist1"; }
  double z2_variance() const noexcept { return z2_variance_; }

 protected:
  double do_potential(const Vector& z) const override;
  Vector do_gradient(const Vector& z) const override;

 private:
  double z2_variance_;
};

// Equal-weight mixture of two zero-mean Gaussians with covariances
// [[2, ±c], [±c, 2]], c = 1.8 by default.
class CrossMixtureDist2 final : public EnergyModel {
 public:
  explicit CrossMixtureDist2(double variance = 2.0, double covariance = 1.8);

  std::size_t dimension() const override { return 2; }
  std::string name() const override { return "dist2"; }

 protected:
  double do_potential(const Vector& z) const override;
  Vector do_gradient(const Vector& z) const override;

 private:
  // Quadratic forms z' Σ±^{-1} z and the shared log normalizer.
  Eigen::Matrix2d precision_plus_;
  Eigen::Matrix2d precision_minus_;
  double log_normalizer_;
};

// Isotropic Gaussian U(θ) = ||θ - mean||^2 / (2 s^2).
class IsotropicGaussian final : public EnergyModel {
 public:
  IsotropicGaussian(std::size_t dimension, double variance = 1.0);
  IsotropicGaussian(Vector mean, double variance);

  std::size_t dimension() const override { return static_cast<std::size_t>(mean_.size()); }
  std::string name() const override { return "gaussian"; }

 protected:
  double do_potential(const Vector& theta) const override;
  Vector do_gradient(const Vector& theta) const override;

 private:
  Vector mean_;
  double variance_;
};

// Simulated stochastic gradients: ∇Ũ = ∇U + N(0, s^2 I).
class GaussianNoiseGradient final : public EnergyModel {
 public:
  explicit GaussianNoiseGradient(ModelPtr base, double noise_stddev = 1.0);

  std::size_t dimension() const override { return base_->dimension(); }
  std::string name() const override { return base_->name(); }
  bool has_stochastic_gradient() const override { return true; }

  const EnergyModel& base() const noexcept { return *base_; }
  double noise_stddev() const noexcept { return noise_stddev_; }

 protected:
  double do_potential(const Vector& theta) const override { return base_->potential(theta); }
  Vector do_gradient(const Vector& theta) const override { return base_->gradient(theta); }
  StochasticGradient do_stochastic_gradient(const Vector& theta, RandomStream& rng) const override;
  Vector do_replay(const Vector& theta, const GradientNoiseRecord& record) const override;

 private:
  ModelPtr base_;
  double noise_stddev_;
};

// Forwards everything to `base` but answers stochastic-gradient requests with
// the exact gradient. Turns a minibatched model into its full-batch chain.
class ExactGradientView final : public EnergyModel {
 public:
  explicit ExactGradientView(ModelPtr base);

  std::size_t dimension() const override { return base_->dimension(); }
  std::string name() const override { return base_->name(); }

 protected:
  double do_potential(const Vector& theta) const override { return base_->potential(theta); }
  Vector do_gradient(const Vector& theta) const override { return base_->gradient(theta); }

 private:
  ModelPtr base_;
};

// Binary classification data with labels in {-1, +1}.
struct Dataset {
  RowMatrix features;  // n x p, one example per row
  Vector labels;       // n entries, each ±1

  // Preprocessing applied at load time (empty when not standardized).
  Vector column_means;
  Vector column_scales;
  bool standardized = false;
  bool has_intercept = false;
  bool constant_column_warning = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t num_features() const noexcept { return static_cast<std::size_t>(features.cols()); }

  // Throws ContractViolation unless n >= 1, rows agree and labels are ±1.
  void validate() const;
};

/// Bayesian logistic regression with an isotropic Gaussian prior:
///   U(θ) = Σ_i log(1 + exp(-y_i θ'x_i)) + ||θ||^2 / (2 τ²).
/// Stochastic gradients subsample `minibatch_size` examples uniformly without
/// replacement and rescale the likelihood part by n / |batch|.
class LogisticRegression final : public EnergyModel {
 public:
  static constexpr double kDefaultPriorVariance = 10.0;

  LogisticRegression(std::shared_ptr<const Dataset> data, std::size_t minibatch_size,
                     double prior_variance = kDefaultPriorVariance);

  std::size_t dimension() const override { return data_->num_features(); }
  std::string name() const override { return "logreg"; }
  bool has_stochastic_gradient() const override { return true; }

  const Dataset& data() const noexcept { return *data_; }
  std::size_t minibatch_size() const noexcept { return minibatch_size_; }
  double prior_variance() const noexcept { return prior_variance_; }

 protected:
  double do_potential(const Vector& theta) const override;
  Vector do_gradient(const Vector& theta) const override;
  StochasticGradient do_stochastic_gradient(const Vector& theta, RandomStream& rng) const override;
  Vector do_replay(const Vector& theta, const GradientNoiseRecord& record) const override;

 private:
  Vector minibatch_gradient(const Vector& theta, const std::vector<std::size_t>& batch) const;
  template <class IndexFn>
  Vector likelihood_gradient(const Vector& theta, std::size_t count, IndexFn index) const;

  std::shared_ptr<const Dataset> data_;
  std::size_t minibatch_size_;
  double prior_variance_;
};

// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

}  // namespace amagold
