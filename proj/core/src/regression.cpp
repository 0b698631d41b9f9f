#include "coachrl/regression.hpp"

#include <cmath>

#include "coachrl/error.hpp"

namespace coachrl {

std::vector<double> spd_solve(std::vector<double> a, std::vector<double> b,
                              std::size_t n) {
  if (a.size() != n * n || b.size() != n)
    throw ValidationError("spd_solve: dimension mismatch");

  // In-place Cholesky, lower triangle of a.
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::abs(a[i * n + i]));
  const double tol = 1e-12 * std::max(1.0, max_diag);

  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > tol))
      throw SingularSystemError(
          "normal equations not positive definite (column " +
          std::to_string(j) + ")");
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }

  // Forward then backward substitution.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * y[k];
    y[i] = s / a[i * n + i];
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * x[k];
    x[ii] = s / a[ii * n + ii];
  }
  return x;
}

ModelState fit(std::span<const DesignRow> rows, double ridge_lambda,
               std::vector<std::string> manifest,
               const Standardization& standardization, int fitted_on) {
  if (rows.empty()) throw ValidationError("fit: no training rows");
  if (ridge_lambda < 0.0) throw ValidationError("fit: negative ridge lambda");
  const std::size_t p = rows.front().values.size();
  if (manifest.size() != p)
    throw ValidationError("fit: manifest length does not match row length");

  std::vector<double> xtx(p * p, 0.0);
  std::vector<double> xty(p, 0.0);
  double y_sum = 0.0, y_sq = 0.0;
  for (const DesignRow& r : rows) {
    if (r.values.size() != p)
      throw ValidationError("fit: ragged design rows");
    if (!r.target.has_value()) throw ValidationError("fit: row without target");
    const double y = *r.target;
    if (!std::isfinite(y)) throw ValidationError("fit: non-finite target");
    for (std::size_t i = 0; i < p; ++i) {
      xty[i] += r.values[i] * y;
      for (std::size_t j = 0; j <= i; ++j)
        xtx[i * p + j] += r.values[i] * r.values[j];
    }
    y_sum += y;
    y_sq += y * y;
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) xtx[i * p + j] = xtx[j * p + i];
  // Penalize everything but the intercept.
  for (std::size_t i = 1; i < p; ++i) xtx[i * p + i] += ridge_lambda;

  ModelState m;
  m.coefficients = spd_solve(std::move(xtx), std::move(xty), p);
  m.manifest = std::move(manifest);
  m.standardization = standardization;
  m.ridge_lambda = ridge_lambda;
  m.n_rows = rows.size();
  m.fitted_on = fitted_on;

  const std::size_t n = rows.size();
  const double y_mean = y_sum / static_cast<double>(n);
  double rss = 0.0;
  for (const DesignRow& r : rows) {
    double pred = 0.0;
    for (std::size_t i = 0; i < p; ++i) pred += m.coefficients[i] * r.values[i];
    const double e = *r.target - pred;
    rss += e * e;
  }
  const double tss = y_sq - static_cast<double>(n) * y_mean * y_mean;
  const std::size_t predictors = p - 1;  // intercept excluded
  if (n > predictors + 1) {
    m.adjusted_r2 = tss > 0.0 ? adjusted_r2(std::max(0.0, rss), tss, n, predictors)
                              : 0.0;
  }
  return m;
}

double predict(const ModelState& model, std::span<const double> row) {
  if (row.size() != model.coefficients.size())
    throw ValidationError("predict: row length does not match model");
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i)
    s += model.coefficients[i] * row[i];
  return s;
}

double adjusted_r2(double residual_ss, double total_ss, std::size_t n,
                   std::size_t p) {
  if (n <= p + 1)
    throw ValidationError("adjusted_r2: undefined for n <= p + 1");
  if (!(total_ss > 0.0))
    throw ValidationError("adjusted_r2: total_ss must be > 0");
  const double num = residual_ss / static_cast<double>(n - p - 1);
  const double den = total_ss / static_cast<double>(n - 1);
  return 1.0 - num / den;
}

double stability(const ModelState& prev, const ModelState& curr) {
  if (prev.manifest != curr.manifest)
    throw ValidationError("stability: column manifests differ");
  double s = 0.0;
  for (std::size_t i = 0; i < prev.coefficients.size(); ++i)
    s += std::abs(std::abs(curr.coefficients[i]) - std::abs(prev.coefficients[i]));
  return s;
}

}  // namespace coachrl
