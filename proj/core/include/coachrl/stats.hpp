#pragma once

#include <span>
#include <vector>

namespace coachrl {

// Regularized incomplete beta I_x(a,b) by the Lentz continued fraction,
// accurate to ~1e-10 for the moderate degrees of freedom used here.
double regularized_incomplete_beta(double a, double b, double x);

// Upper tail P(F >= f) of the F distribution with d1, d2 degrees of freedom.
double f_distribution_sf(double f, double d1, double d2);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  int df_between = 0;
  int df_within = 0;
};

// One-way F-test. Requires >= 2 groups with >= 2 observations each.
AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n = 0;
};

// Simple least-squares line. r2 is defined as 1 when the ys are constant
// (a flat series is fit exactly).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace coachrl
