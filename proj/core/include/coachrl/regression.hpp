#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coachrl/features.hpp"

namespace coachrl {

// Fitted coefficient vector plus everything needed to reproduce its
// predictions: the column manifest and the frozen standardization.
struct ModelState {
  std::vector<double> coefficients;
  std::vector<std::string> manifest;
  Standardization standardization = Standardization::identity();
  double ridge_lambda = 0.0;
  std::size_t n_rows = 0;
  std::optional<double> adjusted_r2;  // absent when n <= p + 1
  int fitted_on = 0;                  // day index
};

// Ridge-regularized least squares via the normal equations and a symmetric
// positive-definite (Cholesky) factorization. The intercept column is never
// penalized. Throws SingularSystemError when the system is rank deficient
// (possible only at lambda = 0).
ModelState fit(std::span<const DesignRow> rows, double ridge_lambda,
               std::vector<std::string> manifest,
               const Standardization& standardization, int fitted_on);

double predict(const ModelState& model, std::span<const double> row);

// 1 - (rss/(n-p-1)) / (tss/(n-1)); p counts predictors excluding the
// intercept. Undefined for n <= p + 1 or tss <= 0.
double adjusted_r2(double residual_ss, double total_ss, std::size_t n,
                   std::size_t p);

// Day-over-day parameter movement: sum_j | |b_j_curr| - |b_j_prev| |.
double stability(const ModelState& prev, const ModelState& curr);

// Solves A x = b for symmetric positive definite A (row-major n*n).
// Exposed for reuse by the analysis module's small OLS fits.
std::vector<double> spd_solve(std::vector<double> a, std::vector<double> b,
                              std::size_t n);

}  // namespace coachrl
