#pragma once

#include <hdqkd/optics.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace hdqkd {

/// @brief One single-photon detector position behind an analyser.
///
/// The vector analyser resolves ports on the interferometer outputs c and d,
/// the scalar analyser on the gate outputs a and b. Each port also selects an
/// OAM sign through the mode sorter, so four detectors cover one analyser.
struct DetectorPort {
  MubBasis analyser = MubBasis::vector;
  Path path = Path::c;
  int oam_bin = 1;  // sorter bin: +1 for +l, -1 for -l

  friend bool operator==(const DetectorPort&, const DetectorPort&) = default;
};

std::string to_string(const DetectorPort& port);

// Canonical detector order per analyser: (first path, +), (first path, -),
// (second path, +), (second path, -); vector uses paths (c, d), scalar (a, b).
std::array<DetectorPort, 4> analyser_ports(MubBasis analyser);
int canonical_port_index(const DetectorPort& port);

/// @brief Wiring between detector ports and two-bit symbol values.
///
/// Kept separate from the optics so a rewired bench is a data change. The
/// default wiring matches data/port_map.json.
class PortMap {
 public:
  struct Entry {
    DetectorPort port;
    std::uint8_t bits = 0;
  };

  PortMap();
  explicit PortMap(const std::vector<Entry>& entries);

  std::uint8_t bits_for(const DetectorPort& port) const;
  DetectorPort port_for(MubBasis analyser, std::uint8_t bits) const;

 private:
  std::array<std::uint8_t, 8> bits_by_port_{};
  std::array<DetectorPort, 8> port_by_bits_{};
};

struct MeasurementOutcome {
  bool click = false;
  std::optional<DetectorPort> port;
  std::optional<std::uint8_t> bits;
};

// Analyser chains as single isometries from the codebook subspace.
OperatorXd vector_analyser_operator(double delta, int subspace_l);
OperatorXd scalar_analyser_operator(int subspace_l);

// Projectors onto the four detector ports, in canonical order, over the
// codomain of the matching analyser operator. A port gathers both
// polarisations of its (path, oam) pair.
std::vector<PortProjector> vector_port_projectors(int subspace_l);
std::vector<PortProjector> scalar_port_projectors(int subspace_l);

std::array<double, 4> port_distribution(const OperatorXd& analyser, const std::vector<PortProjector>& ports,
                                        const StateXd& s);
std::array<double, 4> vector_port_distribution(const StateXd& s, double delta);
std::array<double, 4> scalar_port_distribution(const StateXd& s);

// Picks the port whose cumulative probability bracket contains u. Any
// probability deficit (lossy chains) falls through to the last port, so
// callers must pass a distribution summing to 1.
int sample_port(const std::array<double, 4>& probs, double u);

MeasurementOutcome vector_analyse(const StateXd& s, double delta, double u, const PortMap& map);
MeasurementOutcome scalar_analyse(const StateXd& s, double u, const PortMap& map);

// Single-mode filter: a click heralds the target mode with probability
// |<target|s>|^2 / 2. The 1/2 is the filter's intrinsic pass fraction.
double filter_click_probability(const StateXd& s, const StateXd& target);
MeasurementOutcome filter_analyse(const StateXd& s, ModeId target_id, const StateXd& target, double u);

// Four filters in parallel, one per mode of the chosen codebook. At most one
// fires; the remaining probability mass is a no-click.
MeasurementOutcome filter_bank_analyse(const StateXd& s, MubBasis analyser, const std::array<StateXd, 8>& codebook,
                                       double u);

/// @brief Refractive sorter geometry mapping OAM index to detector-plane offset.
struct SorterGeometry {
  double wavelength = 700e-9;   // m
  double focal_length = 0.3;    // m
  double aperture_d = 0.008;    // unwrapped azimuthal period, m
  double scale_b = 0.008;       // radial reference, m
};

// Lateral spot offset of OAM index m in the sorter's Fourier plane.
double sorter_position(const SorterGeometry& geom, int oam);

// Log-polar transform (x, y) -> (u, v) that unwraps azimuth onto a line.
// The optical axis itself has no image.
std::array<double, 2> conformal_map(const SorterGeometry& geom, double x, double y);

}  // namespace hdqkd
