#pragma once

#include <hdqkd/detection.hpp>
#include <hdqkd/rng.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hdqkd {

enum class SourceKind : std::uint8_t { deterministic, poisson };

/// @brief Photon statistics of the transmitter, per pulse.
struct SourceModel {
  SourceKind kind = SourceKind::deterministic;
  double mean_photons = 0.008;  // used by the poisson source only
};

int emit(const SourceModel& source, RandomStream& rng);

/// @brief Stochastic hardware error model applied per pulse.
///
/// depolarizing_p lumps everything that scrambles the state isotropically;
/// misdetection_p is electronic and acts on the click record, not the state.
/// Preset files quote the sigmas in multiples of pi; here they are radians.
struct ImperfectionModel {
  double waveplate_angle_sigma = 0.0;  // preparation plate axis jitter, radians
  double delta_phase_sigma = 0.0;      // interferometer phase jitter on path b, radians
  double pg_leakage = 0.0;             // power fraction crossing to the wrong gate output
  double depolarizing_p = 0.0;         // chance the state is replaced by a uniform random one
  double misdetection_p = 0.0;         // chance a click is re-routed to a uniform random port
};

// Applies angle jitter, phase jitter and gate leakage as one polarisation
// unitary, then the depolarizing replacement. Consumes a fixed number of
// uniform and normal draws per call so streams stay reproducible.
StateXd perturb(const StateXd& s, const ImperfectionModel& m, RandomStream& rng);

struct RunSettings {
  std::string name = "ideal";
  int subspace_l = 10;
  double delta_pi = 0.5;  // interferometer phase, multiples of pi
  SourceModel source;
  ImperfectionModel imperfections;
};

/// @brief Everything on the table: prepared modes, analysers, wiring.
struct Bench {
  RunSettings settings;
  PortMap ports;
  std::array<StateXd, 8> modes;  // codebook order, produced by the recipes
  OperatorXd vector_analyser;
  OperatorXd scalar_analyser;
  std::vector<PortProjector> vector_projectors;
  std::vector<PortProjector> scalar_projectors;
};

Bench make_bench(const RunSettings& settings, const RecipeTable& recipes, const PortMap& ports = PortMap{});
Bench make_bench(const RunSettings& settings);

// One detection with the bench's deterministic analyser of the given basis,
// including the misdetection re-route.
MeasurementOutcome analyse_with_model(const Bench& bench, const StateXd& s, MubBasis analyser, RandomStream& rng);

// Same contract for the filter-bank receiver; no-clicks pass through
// untouched.
MeasurementOutcome filter_analyse_with_model(const Bench& bench, const StateXd& s, MubBasis analyser,
                                             RandomStream& rng);

// Mean same-basis diagonal probability with the depolarizing channel off,
// averaged over all eight modes. The ceiling any depolarizing weight is
// calibrated against.
double mechanical_fidelity(const Bench& bench, int trials_per_mode, std::uint64_t seed);

// Solves (1-p) * F_mech + p/4 = target for p. Throws if the target is above
// the mechanical ceiling or below the fully mixed floor.
double calibrate_depolarizing(const Bench& bench, double target_fidelity, int trials_per_mode, std::uint64_t seed);

}  // namespace hdqkd
