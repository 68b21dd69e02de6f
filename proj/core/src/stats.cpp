#include "squintlab/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace squintlab {

SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats stats;
  stats.count = static_cast<int>(values.size());
  if (stats.count == 0) return stats;
  double sum = 0.0;
  for (const double v : values) sum += v;
  stats.mean = sum / stats.count;
  if (stats.count > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / (stats.count - 1));
  }
  return stats;
}

double student_t_quantile(double probability, int dof) {
  if (dof < 1) throw std::invalid_argument("student_t_quantile: dof must be >= 1");
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, probability);
}

double ci95_half_width(const std::vector<double>& values) {
  const SampleStats stats = sample_stats(values);
  if (stats.count < 2) return 0.0;
  return student_t_quantile(0.975, stats.count - 1) * stats.stddev /
         std::sqrt(static_cast<double>(stats.count));
}

double paired_t_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("paired_t_statistic: needs two equal-length samples, n >= 2");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const SampleStats stats = sample_stats(diff);
  if (stats.stddev == 0.0) {
    if (stats.mean > 0.0) return std::numeric_limits<double>::infinity();
    if (stats.mean < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return stats.mean / (stats.stddev / std::sqrt(static_cast<double>(stats.count)));
}

}  // namespace squintlab
