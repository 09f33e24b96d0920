#pragma once

#include <hdqkd/channel.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace hdqkd {

/// @brief Mode confusion probabilities over the eight codebook modes.
///
/// Row i: mode i prepared; column j: probability that the analyser matching
/// mode j's codebook reports mode j. Each half-row over one analyser's four
/// columns sums to 1, so a full row sums to 2.
struct CrosstalkMatrix {
  int subspace_l = 0;
  std::int64_t trials_per_mode = 0;  // 0 marks an exact computation
  Eigen::Matrix<double, 8, 8> p = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 8> se = Eigen::Matrix<double, 8, 8>::Zero();
};

// Monte Carlo estimate with the bench's full imperfection model. Every trial
// perturbs one prepared mode and shows the same state to both analysers.
// Standard errors are per-entry binomial.
CrosstalkMatrix estimate_crosstalk(const Bench& bench, std::int64_t trials_per_mode, std::uint64_t seed,
                                   int threads = 1);

// Exact probabilities for the unperturbed bench.
CrosstalkMatrix born_crosstalk(const Bench& bench);

// Mean of the eight diagonal entries.
double fidelity_from_matrix(const CrosstalkMatrix& m);

// How the symbol error mass is split in the channel model behind the
// information estimates: over all d symbols, or over the d-1 wrong ones.
enum class InfoVariant : std::uint8_t { spread_all, spread_others };

const char* to_string(InfoVariant v);
InfoVariant parse_info_variant(const std::string& name);

double mutual_info_ab(double fidelity, int dimension, InfoVariant variant = InfoVariant::spread_all);

// Optimal universal-cloning fidelity available to an eavesdropper when the
// channel shows the given sift fidelity.
double cloning_fidelity(double fidelity, int dimension);

double mutual_info_ae(double fidelity, double eve_fidelity, int dimension);

struct KeyRate {
  double rate = 0.0;
  bool clamped = false;  // the raw difference was negative
};

KeyRate secret_key_rate(double info_ab, double info_ae);

// Symbol error rate above which no secret key survives one-way
// post-processing, tabulated per dimension.
double qber_security_bound(int dimension);

struct SecurityMetrics {
  double fidelity = 1.0;
  double qber = 0.0;
  double mutual_info_ab = 0.0;
  double cloning_fidelity = 0.0;
  double mutual_info_ae = 0.0;
  double key_rate = 0.0;
  double capacity_per_dimension = 0.0;
  bool clamped = false;
};

SecurityMetrics metrics_from_fidelity(double fidelity, int dimension, InfoVariant variant = InfoVariant::spread_all);

/// @brief Measured metrics next to the ideal-bench reference.
struct SecurityReport {
  CrosstalkMatrix matrix;
  SecurityMetrics measured;
  SecurityMetrics ideal;
  InfoVariant variant = InfoVariant::spread_all;
  int dimension = 4;
  double qber_bound = 0.0;
  bool secure = false;
};

SecurityReport build_report(const CrosstalkMatrix& matrix, InfoVariant variant = InfoVariant::spread_all,
                            int dimension = 4);

}  // namespace hdqkd
