#include "squintlab/digital.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace squintlab {

CVec effective_channel(const CVec& h, const AnalogPrecoder& analog) {
  const int n_rf = analog.num_panels();
  const int n_sub = analog.elements_per_panel;
  if (h.size() != static_cast<long>(n_rf) * n_sub) {
    throw std::invalid_argument("effective_channel: channel length mismatch");
  }
  CVec out(n_rf);
  for (int p = 0; p < n_rf; ++p) {
    out[p] = analog.columns[p].dot(h.segment(p * n_sub, n_sub));  // dot conjugates the column
  }
  return out;
}

Eigen::VectorXd sinr(const CMat& h_eff, const CMat& precoder, double noise_power) {
  if (noise_power <= 0.0) throw std::invalid_argument("sinr: noise power must be > 0");
  const int k = static_cast<int>(h_eff.cols());
  // products(k, i) = h_k^H d_i
  const CMat products = h_eff.adjoint() * precoder;
  Eigen::VectorXd gamma(k);
  for (int user = 0; user < k; ++user) {
    double signal = 0.0;
    double interference = 0.0;
    for (int i = 0; i < k; ++i) {
      const double power = std::norm(products(user, i));
      if (i == user) {
        signal = power;
      } else {
        interference += power;
      }
    }
    gamma[user] = signal / (interference + noise_power);
  }
  return gamma;
}

namespace {

double sum_rate_bits(const CMat& h_eff, const CMat& precoder, double noise_power) {
  const Eigen::VectorXd gamma = sinr(h_eff, precoder, noise_power);
  double rate = 0.0;
  for (int k = 0; k < gamma.size(); ++k) rate += std::log2(1.0 + gamma[k]);
  return rate;
}

// Matched-filter start at full power, split evenly over users.
CMat matched_filter_start(const CMat& h_eff, double power_budget) {
  const int n_rf = static_cast<int>(h_eff.rows());
  const int k = static_cast<int>(h_eff.cols());
  CMat d = CMat::Zero(n_rf, k);
  int active = 0;
  for (int user = 0; user < k; ++user) {
    if (h_eff.col(user).norm() > 0.0) ++active;
  }
  if (active == 0) return d;
  const double per_user = std::sqrt(power_budget / active);
  for (int user = 0; user < k; ++user) {
    const double norm = h_eff.col(user).norm();
    if (norm > 0.0) d.col(user) = per_user / norm * h_eff.col(user);
  }
  return d;
}

// Zero-forcing directions with water-filled powers; empty when the channel
// set is rank deficient.
CMat zero_forcing_start(const CMat& h_eff, double power_budget, double noise_power) {
  const int n_rf = static_cast<int>(h_eff.rows());
  const int k = static_cast<int>(h_eff.cols());
  if (k > n_rf) return CMat();
  const CMat gram = h_eff.adjoint() * h_eff;
  Eigen::FullPivLU<CMat> lu(gram);
  if (!lu.isInvertible()) return CMat();
  const CMat pseudo = h_eff * lu.inverse();  // h_k^H pseudo.col(i) = delta_{ki}

  std::vector<double> channel_gain(k);  // effective gain of each decoupled stream
  for (int user = 0; user < k; ++user) {
    const double norm2 = pseudo.col(user).squaredNorm();
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) return CMat();
    channel_gain[user] = 1.0 / (noise_power * norm2);
  }

  // Water-filling: p_u = max(0, level - 1/g_u), sum p = budget.
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return channel_gain[a] > channel_gain[b]; });
  std::vector<double> powers(k, 0.0);
  for (int active = k; active >= 1; --active) {
    double inv_sum = 0.0;
    for (int i = 0; i < active; ++i) inv_sum += 1.0 / channel_gain[order[i]];
    const double level = (power_budget + inv_sum) / active;
    if (level - 1.0 / channel_gain[order[active - 1]] >= 0.0) {
      for (int i = 0; i < active; ++i) powers[order[i]] = level - 1.0 / channel_gain[order[i]];
      break;
    }
  }

  CMat d = CMat::Zero(n_rf, k);
  for (int user = 0; user < k; ++user) {
    const double norm = pseudo.col(user).norm();
    if (powers[user] > 0.0) d.col(user) = std::sqrt(powers[user]) / norm * pseudo.col(user);
  }
  return d;
}

struct AlternationResult {
  CMat precoder;
  std::vector<double> trajectory;
  int iterations = 0;
};

AlternationResult alternate(const CMat& h_eff, CMat d, double power_budget, double noise_power,
                            const WmmseOptions& options) {
  const int n_rf = static_cast<int>(h_eff.rows());
  const int k = static_cast<int>(h_eff.cols());

  AlternationResult out;
  out.trajectory.push_back(sum_rate_bits(h_eff, d, noise_power));

  CVec receivers(k);
  Eigen::VectorXd weights(k);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // MMSE receivers and rate weights for the current precoder.
    const CMat products = h_eff.adjoint() * d;  // (k, i) = h_k^H d_i
    for (int user = 0; user < k; ++user) {
      double received = noise_power;
      for (int i = 0; i < k; ++i) received += std::norm(products(user, i));
      const cd direct = products(user, user);
      receivers[user] = std::conj(direct) / received;
      const double mse = 1.0 - std::norm(direct) / received;
      weights[user] = 1.0 / std::max(mse, 1e-300);
    }

    // Precoder update with the power multiplier found by bisection on the
    // eigenbasis of the quadratic term.
    CMat quad = CMat::Zero(n_rf, n_rf);
    CMat rhs(n_rf, k);
    for (int user = 0; user < k; ++user) {
      quad += weights[user] * std::norm(receivers[user]) * h_eff.col(user) *
              h_eff.col(user).adjoint();
      rhs.col(user) = weights[user] * std::conj(receivers[user]) * h_eff.col(user);
    }
    Eigen::SelfAdjointEigenSolver<CMat> eig(quad);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
    const CMat basis = eig.eigenvectors();
    const CMat rhs_t = basis.adjoint() * rhs;

    const auto power_at = [&](double mu) {
      double power = 0.0;
      for (int j = 0; j < n_rf; ++j) {
        const double denom = lambda[j] + mu;
        if (denom <= 0.0) return std::numeric_limits<double>::infinity();
        power += rhs_t.row(j).squaredNorm() / (denom * denom);
      }
      return power;
    };

    double mu = 0.0;
    const double tiny = 1e-14 * std::max(1.0, lambda.maxCoeff());
    bool zero_ok = true;
    for (int j = 0; j < n_rf && zero_ok; ++j) {
      if (lambda[j] <= tiny && rhs_t.row(j).squaredNorm() > 0.0) zero_ok = false;
    }
    if (zero_ok && power_at(std::max(0.0, tiny)) <= power_budget) {
      mu = lambda.minCoeff() <= tiny ? tiny : 0.0;
    } else {
      double lo = tiny;
      double hi = std::sqrt(rhs_t.squaredNorm() / power_budget) + tiny;
      while (power_at(hi) > power_budget) hi *= 2.0;
      for (int step = 0; step < 200 && (hi - lo) > 1e-15 * hi; ++step) {
        const double mid = 0.5 * (lo + hi);
        (power_at(mid) > power_budget ? lo : hi) = mid;
      }
      mu = hi;
    }

    // D = basis * diag(1/(lambda + mu)) * rhs_t.
    CMat scaled = rhs_t;
    for (int j = 0; j < n_rf; ++j) scaled.row(j) /= (lambda[j] + mu);
    d = basis * scaled;

    const double excess = d.squaredNorm() / power_budget;
    if (excess > 1.0) d /= std::sqrt(excess);  // absorb bisection residue

    out.iterations = iter;
    const double rate = sum_rate_bits(h_eff, d, noise_power);
    out.trajectory.push_back(rate);
    const double prev = out.trajectory[out.trajectory.size() - 2];
    if (std::abs(rate - prev) <= options.tolerance * std::max(1.0, std::abs(rate))) break;
  }
  out.precoder = std::move(d);
  return out;
}

}  // namespace

WmmseResult wmmse(const CMat& h_eff, double total_power, int elements_per_panel,
                  double noise_power, const WmmseOptions& options) {
  if (total_power <= 0.0) throw std::invalid_argument("wmmse: total power must be > 0");
  if (elements_per_panel < 1) throw std::invalid_argument("wmmse: elements_per_panel must be >= 1");
  if (noise_power <= 0.0) throw std::invalid_argument("wmmse: noise power must be > 0");

  const double power_budget = total_power / elements_per_panel;
  const int n_rf = static_cast<int>(h_eff.rows());
  const int k = static_cast<int>(h_eff.cols());

  WmmseResult result;
  if (h_eff.norm() == 0.0) {
    result.precoder = CMat::Zero(n_rf, k);
    result.rate_trajectory = {0.0};
    return result;
  }

  AlternationResult best =
      alternate(h_eff, matched_filter_start(h_eff, power_budget), power_budget, noise_power,
                options);
  const CMat zf = zero_forcing_start(h_eff, power_budget, noise_power);
  if (zf.size() > 0) {
    AlternationResult alt = alternate(h_eff, zf, power_budget, noise_power, options);
    if (alt.trajectory.back() > best.trajectory.back()) best = std::move(alt);
  }

  result.precoder = std::move(best.precoder);
  result.rate_trajectory = std::move(best.trajectory);
  result.iterations = best.iterations;
  return result;
}

RateReport spectral_efficiency(const Eigen::MatrixXd& sinr_per_subcarrier, int cyclic_prefix) {
  if (cyclic_prefix < 0) throw std::invalid_argument("spectral_efficiency: negative prefix");
  const int subcarriers = static_cast<int>(sinr_per_subcarrier.rows());
  const int users = static_cast<int>(sinr_per_subcarrier.cols());
  RateReport report;
  report.sinr = sinr_per_subcarrier;
  report.per_user.assign(users, 0.0);
  const double prefactor = 1.0 / (subcarriers + cyclic_prefix);
  for (int k = 0; k < users; ++k) {
    double sum = 0.0;
    for (int l = 0; l < subcarriers; ++l) sum += std::log2(1.0 + sinr_per_subcarrier(l, k));
    report.objective += sum;
    report.per_user[k] = prefactor * sum;
    report.total += report.per_user[k];
  }
  return report;
}

BandPrecodingResult precode_band(const ChannelSet& channels,
                                 const std::vector<AnalogPrecoder>& analog, double total_power,
                                 double noise_power, int cyclic_prefix,
                                 const WmmseOptions& options) {
  if (analog.empty()) throw std::invalid_argument("precode_band: no analog precoder");
  if (analog.size() != 1 && static_cast<int>(analog.size()) != channels.subcarriers) {
    throw std::invalid_argument("precode_band: analog precoder count must be 1 or L");
  }
  const int subcarriers = channels.subcarriers;
  const int users = channels.users;
  const int n_rf = analog.front().num_panels();
  const int n_sub = analog.front().elements_per_panel;

  BandPrecodingResult out;
  out.precoders.resize(subcarriers);
  Eigen::MatrixXd gamma(subcarriers, users);
  for (int l = 0; l < subcarriers; ++l) {
    const AnalogPrecoder& a = analog.size() == 1 ? analog.front() : analog[l];
    CMat h_eff(n_rf, users);
    for (int k = 0; k < users; ++k) h_eff.col(k) = effective_channel(channels.at(l, k), a);
    const WmmseResult solved = wmmse(h_eff, total_power, n_sub, noise_power, options);
    gamma.row(l) = sinr(h_eff, solved.precoder, noise_power).transpose();
    out.precoders[l] = solved.precoder;
  }
  out.report = spectral_efficiency(gamma, cyclic_prefix);
  return out;
}

}  // namespace squintlab
