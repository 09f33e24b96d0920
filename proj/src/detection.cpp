#include <hdqkd/detection.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace hdqkd {

std::string to_string(const DetectorPort& port) {
  return std::string(to_string(port.analyser)) + ":" + to_string(port.path) + (port.oam_bin > 0 ? "+" : "-");
}

std::array<DetectorPort, 4> analyser_ports(MubBasis analyser) {
  const Path first = analyser == MubBasis::vector ? Path::c : Path::a;
  const Path second = analyser == MubBasis::vector ? Path::d : Path::b;
  return {{{analyser, first, 1}, {analyser, first, -1}, {analyser, second, 1}, {analyser, second, -1}}};
}

int canonical_port_index(const DetectorPort& port) {
  const auto ports = analyser_ports(port.analyser);
  for (int i = 0; i < 4; ++i) {
    if (ports[static_cast<std::size_t>(i)] == port) return i;
  }
  throw std::invalid_argument("port " + to_string(port) + " is not wired to the " +
                              std::string(to_string(port.analyser)) + " analyser");
}

namespace {

constexpr int port_key(MubBasis analyser, int i) { return static_cast<int>(analyser) * 4 + i; }

std::vector<PortMap::Entry> standard_wiring() {
  return {
      {{MubBasis::vector, Path::c, 1}, 1},  {{MubBasis::vector, Path::c, -1}, 3},
      {{MubBasis::vector, Path::d, 1}, 2},  {{MubBasis::vector, Path::d, -1}, 0},
      {{MubBasis::scalar, Path::a, 1}, 3},  {{MubBasis::scalar, Path::a, -1}, 2},
      {{MubBasis::scalar, Path::b, 1}, 1},  {{MubBasis::scalar, Path::b, -1}, 0},
  };
}

}  // namespace

PortMap::PortMap() : PortMap(standard_wiring()) {}

PortMap::PortMap(const std::vector<Entry>& entries) {
  if (entries.size() != 8) {
    throw std::invalid_argument("port map needs exactly 8 entries, got " + std::to_string(entries.size()));
  }
  std::array<bool, 8> seen_port{};
  std::array<bool, 8> seen_bits{};
  for (const auto& e : entries) {
    if (e.bits > 3) {
      throw std::invalid_argument("port map symbol " + std::to_string(e.bits) + " is out of range 0..3");
    }
    const int p = port_key(e.port.analyser, canonical_port_index(e.port));
    const int b = port_key(e.port.analyser, e.bits);
    if (seen_port[static_cast<std::size_t>(p)]) {
      throw std::invalid_argument("port map repeats port " + to_string(e.port));
    }
    if (seen_bits[static_cast<std::size_t>(b)]) {
      throw std::invalid_argument("port map repeats symbol " + std::to_string(e.bits) + " on the " +
                                  std::string(to_string(e.port.analyser)) + " analyser");
    }
    seen_port[static_cast<std::size_t>(p)] = true;
    seen_bits[static_cast<std::size_t>(b)] = true;
    bits_by_port_[static_cast<std::size_t>(p)] = e.bits;
    port_by_bits_[static_cast<std::size_t>(b)] = e.port;
  }
}

std::uint8_t PortMap::bits_for(const DetectorPort& port) const {
  return bits_by_port_[static_cast<std::size_t>(port_key(port.analyser, canonical_port_index(port)))];
}

DetectorPort PortMap::port_for(MubBasis analyser, std::uint8_t bits) const {
  if (bits > 3) {
    throw std::invalid_argument("symbol " + std::to_string(bits) + " is out of range 0..3");
  }
  return port_by_bits_[static_cast<std::size_t>(port_key(analyser, bits))];
}

OperatorXd vector_analyser_operator(double delta, int subspace_l) {
  return compose(bs_operator<double>(delta, subspace_l), pg_split_operator<double>(subspace_l));
}

OperatorXd scalar_analyser_operator(int subspace_l) {
  const auto qwp = waveplate_operator<double>({WavePlateKind::quarter, 0.0}, ModeBasis::codebook(subspace_l));
  return compose(pg_split_operator<double>(subspace_l), qwp);
}

namespace {

std::vector<PortProjector> make_projectors(MubBasis analyser, const ModeBasis& basis) {
  std::vector<PortProjector> out;
  out.reserve(4);
  for (const auto& port : analyser_ports(analyser)) {
    PortProjector proj;
    proj.label = to_string(port);
    const int oam = port.oam_bin * basis.subspace_l();
    for (int i = 0; i < basis.dim(); ++i) {
      const auto& e = basis.entry(i);
      if (e.path == port.path && e.oam == oam) proj.indices.push_back(i);
    }
    out.push_back(std::move(proj));
  }
  return out;
}

}  // namespace

std::vector<PortProjector> vector_port_projectors(int subspace_l) {
  return make_projectors(MubBasis::vector, ModeBasis::split_cd(subspace_l));
}

std::vector<PortProjector> scalar_port_projectors(int subspace_l) {
  return make_projectors(MubBasis::scalar, ModeBasis::split_ab(subspace_l));
}

std::array<double, 4> port_distribution(const OperatorXd& analyser, const std::vector<PortProjector>& ports,
                                        const StateXd& s) {
  if (ports.size() != 4) {
    throw std::invalid_argument("expected 4 detector ports, got " + std::to_string(ports.size()));
  }
  const auto probs = outcome_distribution(apply(analyser, s), ports);
  return {probs[0], probs[1], probs[2], probs[3]};
}

std::array<double, 4> vector_port_distribution(const StateXd& s, double delta) {
  const int l = s.basis.subspace_l();
  return port_distribution(vector_analyser_operator(delta, l), vector_port_projectors(l), s);
}

std::array<double, 4> scalar_port_distribution(const StateXd& s) {
  const int l = s.basis.subspace_l();
  return port_distribution(scalar_analyser_operator(l), scalar_port_projectors(l), s);
}

int sample_port(const std::array<double, 4>& probs, double u) {
  double acc = 0;
  for (int i = 0; i < 3; ++i) {
    acc += probs[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  return 3;
}

MeasurementOutcome vector_analyse(const StateXd& s, double delta, double u, const PortMap& map) {
  const int i = sample_port(vector_port_distribution(s, delta), u);
  const DetectorPort port = analyser_ports(MubBasis::vector)[static_cast<std::size_t>(i)];
  return {true, port, map.bits_for(port)};
}

MeasurementOutcome scalar_analyse(const StateXd& s, double u, const PortMap& map) {
  const int i = sample_port(scalar_port_distribution(s), u);
  const DetectorPort port = analyser_ports(MubBasis::scalar)[static_cast<std::size_t>(i)];
  return {true, port, map.bits_for(port)};
}

double filter_click_probability(const StateXd& s, const StateXd& target) { return 0.5 * fidelity(s, target); }

MeasurementOutcome filter_analyse(const StateXd& s, ModeId target_id, const StateXd& target, double u) {
  if (u < filter_click_probability(s, target)) {
    return {true, std::nullopt, target_id.bits};
  }
  return {};
}

MeasurementOutcome filter_bank_analyse(const StateXd& s, MubBasis analyser, const std::array<StateXd, 8>& codebook,
                                       double u) {
  const int base = analyser == MubBasis::vector ? 0 : 4;
  double acc = 0;
  for (int b = 0; b < 4; ++b) {
    acc += filter_click_probability(s, codebook[static_cast<std::size_t>(base + b)]);
    if (u < acc) {
      return {true, std::nullopt, static_cast<std::uint8_t>(b)};
    }
  }
  return {};
}

double sorter_position(const SorterGeometry& geom, int oam) {
  return geom.wavelength * geom.focal_length * static_cast<double>(oam) / geom.aperture_d;
}

std::array<double, 2> conformal_map(const SorterGeometry& geom, double x, double y) {
  const double r = std::hypot(x, y);
  if (r <= 0) {
    throw std::domain_error("conformal map is singular on the optical axis");
  }
  const double scale = geom.aperture_d / (2.0 * std::numbers::pi);
  return {scale * std::atan2(y, x), -scale * std::log(r / geom.scale_b)};
}

}  // namespace hdqkd
