#pragma once

#include <vector>

#include "squintlab/analog.hpp"

namespace squintlab {

struct WmmseOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // relative sum-rate change between iterations
};

struct WmmseResult {
  CMat precoder;                        // N_RF x K
  std::vector<double> rate_trajectory;  // CP-free sum rate after each iteration
  int iterations = 0;
};

/// Effective channel seen by the digital stage: h_eff = A^H h.
CVec effective_channel(const CVec& h, const AnalogPrecoder& analog);

/// Per-user SINR |h_k^H d_k|^2 / (sum_{i != k} |h_k^H d_i|^2 + sigma^2) for
/// one subcarrier. `h_eff` holds the effective channels as columns.
Eigen::VectorXd sinr(const CMat& h_eff, const CMat& precoder, double noise_power);

/// Weighted-MMSE sum-rate precoder for one subcarrier. The per-subcarrier
/// power budget ||A D||_F^2 <= total_power becomes a Frobenius bound
/// ||D||_F^2 <= total_power / elements_per_panel because A^H A is
/// elements_per_panel times the identity. Deterministic: matched-filter and
/// zero-forcing starts are both refined and the higher-rate result returned,
/// so the output never falls below either classical baseline.
WmmseResult wmmse(const CMat& h_eff, double total_power, int elements_per_panel,
                  double noise_power, const WmmseOptions& options = {});

struct RateReport {
  Eigen::MatrixXd sinr;          // L x K, linear scale
  std::vector<double> per_user;  // bits/s/Hz including the cyclic-prefix factor
  double total = 0.0;            // sum over users
  double objective = 0.0;        // prefactor-free sum over (l, k) of log2(1 + sinr)
};

/// Spectral efficiency from per-subcarrier SINRs:
/// R_tot = (1 / (L + L_CP)) sum_{k,l} log2(1 + gamma_{l,k}).
RateReport spectral_efficiency(const Eigen::MatrixXd& sinr_per_subcarrier, int cyclic_prefix);

struct BandPrecodingResult {
  std::vector<CMat> precoders;  // one D_l per subcarrier
  RateReport report;
};

/// Runs WMMSE independently on every subcarrier. `analog` holds either a
/// single frequency-flat precoder or one per subcarrier.
BandPrecodingResult precode_band(const ChannelSet& channels,
                                 const std::vector<AnalogPrecoder>& analog, double total_power,
                                 double noise_power, int cyclic_prefix,
                                 const WmmseOptions& options = {});

}  // namespace squintlab
