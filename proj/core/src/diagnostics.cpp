#include "amagold/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "amagold/errors.hpp"
#include "text_format.hpp"

namespace amagold {

// ---------------------------------------------------------------------------
// GridDensity

GridDensity::GridDensity(Box bounds, std::vector<std::size_t> bins)
    : bounds_(std::move(bounds)), bins_(std::move(bins)) {
  if (bins_.empty() || bins_.size() > 2) {
    throw ContractViolation("grid density supports 1 or 2 dimensions");
  }
  if (static_cast<std::size_t>(bounds_.lower.size()) != bins_.size() ||
      bounds_.upper.size() != bounds_.lower.size()) {
    throw ContractViolation("grid bounds do not match the number of dimensions");
  }
  for (std::size_t d = 0; d < bins_.size(); ++d) {
    if (bins_[d] < 2) throw ContractViolation("grid needs at least 2 bins per dimension");
    const auto i = static_cast<Eigen::Index>(d);
    if (!(bounds_.lower[i] < bounds_.upper[i]) || !std::isfinite(bounds_.upper[i] - bounds_.lower[i])) {
      throw ContractViolation("grid bounds are degenerate");
    }
  }
  const std::size_t cells =
      std::accumulate(bins_.begin(), bins_.end(), std::size_t{1}, std::multiplies<>());
  mass_.assign(cells, 1.0 / static_cast<double>(cells));
}

double GridDensity::cell_width(std::size_t dim) const {
  const auto i = static_cast<Eigen::Index>(dim);
  return (bounds_.upper[i] - bounds_.lower[i]) / static_cast<double>(bins_.at(dim));
}

double GridDensity::cell_volume() const noexcept {
  double v = 1.0;
  for (std::size_t d = 0; d < bins_.size(); ++d) v *= cell_width(d);
  return v;
}

std::size_t GridDensity::locate(const Vector& point, bool* clamped) const {
  if (static_cast<std::size_t>(point.size()) != dimension()) {
    throw ContractViolation("point dimension does not match the grid");
  }
  bool outside = false;
  std::size_t cell = 0;
  for (std::size_t d = 0; d < bins_.size(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    const double x = point[i];
    if (!(x >= bounds_.lower[i] && x <= bounds_.upper[i])) outside = true;
    const double pos = std::floor((x - bounds_.lower[i]) / cell_width(d));
    std::size_t k = 0;
    if (pos >= static_cast<double>(bins_[d] - 1)) {
      k = bins_[d] - 1;
    } else if (pos > 0.0) {
      k = static_cast<std::size_t>(pos);
    }
    cell = cell * bins_[d] + k;
  }
  if (clamped != nullptr) *clamped = outside;
  return cell;
}

Vector GridDensity::center(std::size_t cell) const {
  if (cell >= mass_.size()) throw ContractViolation("cell index out of range");
  Vector c(static_cast<Eigen::Index>(dimension()));
  for (std::size_t d = dimension(); d-- > 0;) {
    const std::size_t k = cell % bins_[d];
    cell /= bins_[d];
    const auto i = static_cast<Eigen::Index>(d);
    c[i] = bounds_.lower[i] + (static_cast<double>(k) + 0.5) * cell_width(d);
  }
  return c;
}

bool GridDensity::same_grid(const GridDensity& other) const noexcept {
  return bins_ == other.bins_ && bounds_.lower == other.bounds_.lower &&
         bounds_.upper == other.bounds_.upper;
}

void GridDensity::set_masses(std::vector<double> masses) {
  if (masses.size() != mass_.size()) throw ContractViolation("mass vector has the wrong length");
  double total = 0.0;
  for (const double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ContractViolation("cell masses must be non-negative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("cell masses must sum to 1");
  mass_ = std::move(masses);
}

Vector GridDensity::mean() const {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(dimension()));
  for (std::size_t c = 0; c < mass_.size(); ++c) m += mass_[c] * center(c);
  return m;
}

Matrix GridDensity::covariance() const {
  const Vector mu = mean();
  Matrix cov = Matrix::Zero(mu.size(), mu.size());
  for (std::size_t c = 0; c < mass_.size(); ++c) {
    const Vector d = center(c) - mu;
    cov += mass_[c] * d * d.transpose();
  }
  return cov;
}

void GridDensity::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open density file for writing", path);
  out << (dimension() == 1 ? "x,mass\n" : "x,y,mass\n");
  for (std::size_t c = 0; c < mass_.size(); ++c) {
    const Vector xy = center(c);
    for (Eigen::Index i = 0; i < xy.size(); ++i) out << detail::format_double(xy[i]) << ',';
    out << detail::format_double(mass_[c]) << '\n';
  }
  if (!out) throw IoError("failed writing density file", path);
}

// ---------------------------------------------------------------------------
// Density estimates

HistogramResult histogram_density(const Matrix& samples, const Box& bounds,
                                  const std::vector<std::size_t>& bins) {
  GridDensity grid(bounds, bins);
  if (samples.rows() == 0) throw ContractViolation("histogram needs at least one sample");
  if (static_cast<std::size_t>(samples.cols()) != grid.dimension()) {
    throw ContractViolation("sample dimension does not match the grid");
  }
  std::vector<double> counts(grid.size(), 0.0);
  std::size_t spilled = 0;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    bool clamped = false;
    const Vector row = samples.row(r).transpose();
    counts[grid.locate(row, &clamped)] += 1.0;
    if (clamped) ++spilled;
  }
  const double n = static_cast<double>(samples.rows());
  for (double& c : counts) c /= n;
  grid.set_masses(std::move(counts));
  return {std::move(grid), spilled};
}

GridDensity analytic_density(const PotentialFn& potential, const Box& bounds,
                             const std::vector<std::size_t>& resolution) {
  GridDensity grid(bounds, resolution);
  std::vector<double> log_w(grid.size());
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double u = potential(grid.center(c));
    if (std::isnan(u)) throw ContractViolation("potential is NaN on the grid");
    log_w[c] = -u;
    hi = std::max(hi, log_w[c]);
  }
  if (!std::isfinite(hi)) throw ContractViolation("potential is infinite everywhere on the grid");
  std::vector<double> mass(grid.size());
  double total = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    mass[c] = std::exp(log_w[c] - hi);
    total += mass[c];
  }
  for (double& m : mass) m /= total;
  grid.set_masses(std::move(mass));
  return grid;
}

GridDensity analytic_density(const EnergyModel& model, const Box& bounds,
                             const std::vector<std::size_t>& resolution) {
  return analytic_density([&model](const Vector& x) { return model.potential(x); }, bounds,
                          resolution);
}

namespace {

std::vector<double> floored(const std::vector<double>& mass, double floor) {
  std::vector<double> out(mass.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    out[i] = std::max(mass[i], floor);
    total += out[i];
  }
  for (double& m : out) m /= total;
  return out;
}

}  // namespace

double symmetric_kl(const GridDensity& p, const GridDensity& q, double floor) {
  if (!p.same_grid(q)) throw ContractViolation("symmetric KL needs identical grids");
  if (!(floor > 0.0)) throw ContractViolation("KL mass floor must be positive");
  const std::vector<double> a = floored(p.masses(), floor);
  const std::vector<double> b = floored(q.masses(), floor);
  double kl = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) kl += (a[i] - b[i]) * std::log(a[i] / b[i]);
  return std::max(kl, 0.0);
}

// ---------------------------------------------------------------------------
// Summaries

Moments moments(const Matrix& samples) {
  if (samples.rows() < 2) throw ContractViolation("moments need at least 2 samples");
  const Vector mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
  return {mean, std::move(cov)};
}

double parameter_mse(const Vector& estimate, const Vector& reference) {
  if (estimate.size() != reference.size() || estimate.size() == 0) {
    throw ContractViolation("parameter vectors must be non-empty and of equal length");
  }
  return (estimate - reference).squaredNorm() / static_cast<double>(estimate.size());
}

Matrix sample_grid_density(const GridDensity& density, std::size_t count, RandomStream& rng) {
  std::vector<double> cdf(density.size());
  std::partial_sum(density.masses().begin(), density.masses().end(), cdf.begin());
  const double total = cdf.back();
  const auto dim = static_cast<Eigen::Index>(density.dimension());
  Matrix out(static_cast<Eigen::Index>(count), dim);
  for (std::size_t n = 0; n < count; ++n) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto cell = static_cast<std::size_t>(it - cdf.begin());
    const Vector c = density.center(cell);
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double w = density.cell_width(static_cast<std::size_t>(d));
      out(static_cast<Eigen::Index>(n), d) = c[d] + (rng.uniform() - 0.5) * w;
    }
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0) throw ContractViolation("KS critical value needs non-empty samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("significance must be in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  KsResult r;
  r.critical_value = ks_critical_value(a.size(), b.size(), alpha);
  r.statistic = ks_statistic(std::move(a), std::move(b));
  r.reject = r.statistic > r.critical_value;
  return r;
}

AcceptanceSummary summarize_acceptance(const RoundStats& stats) {
  AcceptanceSummary s;
  s.rounds = stats.total();
  s.acceptance_rate = stats.acceptance_rate();
  s.mean_acceptance_probability =
      s.rounds == 0 ? 0.0 : stats.acceptance_probability_sum / static_cast<double>(s.rounds);
  s.out_of_domain = stats.out_of_domain;
  s.numerical_failures = stats.numerical_failures;
  return s;
}

}  // namespace amagold
