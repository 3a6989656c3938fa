#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "amagold/energy_models.hpp"
#include "amagold/random.hpp"
#include "amagold/samplers.hpp"

namespace amagold {

// Regular grid of 1 or 2 dimensions with one probability mass per cell.
// Cells are stored with the first dimension varying slowest.
class GridDensity {
 public:
  GridDensity(Box bounds, std::vector<std::size_t> bins);

  std::size_t dimension() const noexcept { return bins_.size(); }
  const Box& bounds() const noexcept { return bounds_; }
  const std::vector<std::size_t>& bins() const noexcept { return bins_; }
  std::size_t size() const noexcept { return mass_.size(); }
  double cell_width(std::size_t dim) const;
  double cell_volume() const noexcept;

  const std::vector<double>& masses() const noexcept { return mass_; }
  double mass(std::size_t cell) const { return mass_.at(cell); }

  // Cell index of the point, clamped to the edge cells. Sets `clamped` when
  // the point lies outside the bounds.
  std::size_t locate(const Vector& point, bool* clamped = nullptr) const;
  Vector center(std::size_t cell) const;

  bool same_grid(const GridDensity& other) const noexcept;

  // Replaces the masses; they must be non-negative and sum to 1 within 1e-9.
  void set_masses(std::vector<double> masses);

  // Grid-based mean and covariance, each cell at its center.
  Vector mean() const;
  Matrix covariance() const;

  // Coordinates of the cell center followed by the mass, one row per cell.
  void write_csv(const std::string& path) const;

 private:
  Box bounds_;
  std::vector<std::size_t> bins_;
  std::vector<double> mass_;
};

struct HistogramResult {
  GridDensity density;
  std::size_t spilled = 0;  // samples outside the bounds, clamped to edge cells
};

HistogramResult histogram_density(const Matrix& samples, const Box& bounds,
                                  const std::vector<std::size_t>& bins);

using PotentialFn = std::function<double(const Vector&)>;

// Masses ∝ exp(-U(center)) normalized over the grid.
GridDensity analytic_density(const PotentialFn& potential, const Box& bounds,
                             const std::vector<std::size_t>& resolution);
GridDensity analytic_density(const EnergyModel& model, const Box& bounds,
                             const std::vector<std::size_t>& resolution);

inline constexpr double kKlMassFloor = 1e-10;

// KL(p||q) + KL(q||p) after flooring masses at `floor` and renormalizing.
double symmetric_kl(const GridDensity& p, const GridDensity& q, double floor = kKlMassFloor);

struct Moments {
  Vector mean;
  Matrix covariance;  // n-1 denominator
};

Moments moments(const Matrix& samples);

// (1/p) Σ (a_i - b_i)²
double parameter_mse(const Vector& estimate, const Vector& reference);

// Draws from a 1D or 2D grid density: a cell by inverse CDF, then a uniform
// position inside the cell.
Matrix sample_grid_density(const GridDensity& density, std::size_t count, RandomStream& rng);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic rejection threshold c(α) sqrt((n + m) / (n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

struct KsResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha);

// Acceptance summary of a chain's round statistics.
struct AcceptanceSummary {
  double acceptance_rate = 0.0;
  double mean_acceptance_probability = 0.0;
  std::uint64_t rounds = 0;
  std::uint64_t out_of_domain = 0;
  std::uint64_t numerical_failures = 0;
};

AcceptanceSummary summarize_acceptance(const RoundStats& stats);

}  // namespace amagold
