#pragma once

#include <vector>

namespace squintlab {

struct SampleStats {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

SampleStats sample_stats(const std::vector<double>& values);

/// Quantile of Student's t distribution with `dof` degrees of freedom.
double student_t_quantile(double probability, int dof);

/// Half width of the two-sided 95% confidence interval of the mean.
double ci95_half_width(const std::vector<double>& values);

/// t statistic of the paired one-sided test that mean(a - b) > 0.
double paired_t_statistic(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace squintlab
