#include <hdqkd/channel.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace hdqkd {

int emit(const SourceModel& source, RandomStream& rng) {
  if (source.kind == SourceKind::deterministic) return 1;
  if (source.mean_photons <= 0.0) {
    throw std::invalid_argument("poisson source needs a positive mean photon number");
  }
  return rng.poisson(source.mean_photons);
}

StateXd perturb(const StateXd& s, const ImperfectionModel& m, RandomStream& rng) {
  using C = std::complex<double>;
  constexpr double pi = std::numbers::pi;

  // Fixed draw order regardless of which effects are enabled.
  const double angle = rng.normal(m.waveplate_angle_sigma);
  const double phase = rng.normal(m.delta_phase_sigma);
  const double leak_phi = 2.0 * pi * rng.uniform();
  const double u_dep = rng.uniform();

  if (u_dep < m.depolarizing_p) {
    auto out = zero_state<double>(s.basis);
    for (int i = 0; i < out.basis.dim(); ++i) {
      out.amps[i] = C(rng.normal(), rng.normal());
    }
    return normalized(out);
  }

  // Misaligning a plate by eps rotates its output polarisation by 2 eps.
  Eigen::Matrix2<C> total = rotation_jones<double>(2.0 * angle);
  Eigen::Matrix2<C> dphase = Eigen::Matrix2<C>::Identity();
  dphase(1, 1) = std::exp(C(0, phase));
  total = dphase * total;
  if (m.pg_leakage > 0.0) {
    const double cross = std::sqrt(m.pg_leakage);
    const double keep = std::sqrt(1.0 - m.pg_leakage);
    Eigen::Matrix2<C> leak;
    leak << C(keep), -std::exp(C(0, leak_phi)) * cross, std::exp(C(0, -leak_phi)) * cross, C(keep);
    total = leak * total;
  }
  return normalized(apply(pol_operator<double>("channel", total, s.basis), s));
}

Bench make_bench(const RunSettings& settings, const RecipeTable& recipes, const PortMap& ports) {
  const int l = settings.subspace_l;
  std::array<StateXd, 8> modes;
  std::array<bool, 8> seen{};
  for (const auto& recipe : recipes) {
    const int idx = codebook_index(recipe.target);
    if (seen[static_cast<std::size_t>(idx)]) {
      throw std::invalid_argument("recipe table lists " + mode_label(recipe.target) + " twice");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    modes[static_cast<std::size_t>(idx)] = generate_mode<double>(recipe, l);
  }
  const double delta = settings.delta_pi * std::numbers::pi;
  return Bench{settings,
               ports,
               std::move(modes),
               vector_analyser_operator(delta, l),
               scalar_analyser_operator(l),
               vector_port_projectors(l),
               scalar_port_projectors(l)};
}

Bench make_bench(const RunSettings& settings) { return make_bench(settings, default_recipe_table(), PortMap{}); }

MeasurementOutcome analyse_with_model(const Bench& bench, const StateXd& s, MubBasis analyser, RandomStream& rng) {
  const bool vec = analyser == MubBasis::vector;
  const auto probs = port_distribution(vec ? bench.vector_analyser : bench.scalar_analyser,
                                       vec ? bench.vector_projectors : bench.scalar_projectors, s);
  int i = sample_port(probs, rng.uniform());
  const double u_mis = rng.uniform();
  if (u_mis < bench.settings.imperfections.misdetection_p) {
    i = static_cast<int>(rng.uniform_index(4));
  }
  const DetectorPort port = analyser_ports(analyser)[static_cast<std::size_t>(i)];
  return {true, port, bench.ports.bits_for(port)};
}

MeasurementOutcome filter_analyse_with_model(const Bench& bench, const StateXd& s, MubBasis analyser,
                                             RandomStream& rng) {
  MeasurementOutcome out = filter_bank_analyse(s, analyser, bench.modes, rng.uniform());
  const double u_mis = rng.uniform();
  if (out.click && u_mis < bench.settings.imperfections.misdetection_p) {
    out.bits = static_cast<std::uint8_t>(rng.uniform_index(4));
  }
  return out;
}

double mechanical_fidelity(const Bench& bench, int trials_per_mode, std::uint64_t seed) {
  if (trials_per_mode <= 0) {
    throw std::invalid_argument("trials_per_mode must be positive");
  }
  ImperfectionModel m = bench.settings.imperfections;
  m.depolarizing_p = 0.0;
  const double mis = m.misdetection_p;
  RandomStream rng(seed, 0);
  double sum = 0.0;
  for (int t = 0; t < trials_per_mode; ++t) {
    for (int i = 0; i < 8; ++i) {
      const StateXd s = perturb(bench.modes[static_cast<std::size_t>(i)], m, rng);
      const bool vec = i < 4;
      const auto probs = port_distribution(vec ? bench.vector_analyser : bench.scalar_analyser,
                                           vec ? bench.vector_projectors : bench.scalar_projectors, s);
      const MubBasis basis = vec ? MubBasis::vector : MubBasis::scalar;
      const DetectorPort target = bench.ports.port_for(basis, static_cast<std::uint8_t>(i & 3));
      const double p_diag = probs[static_cast<std::size_t>(canonical_port_index(target))];
      sum += (1.0 - mis) * p_diag + mis * 0.25;
    }
  }
  return sum / (8.0 * static_cast<double>(trials_per_mode));
}

double calibrate_depolarizing(const Bench& bench, double target_fidelity, int trials_per_mode, std::uint64_t seed) {
  const double ceiling = mechanical_fidelity(bench, trials_per_mode, seed);
  if (ceiling <= 0.25 + 1e-9) {
    throw std::invalid_argument("mechanical fidelity is already at the fully mixed floor");
  }
  if (target_fidelity > ceiling) {
    throw std::invalid_argument("target fidelity " + std::to_string(target_fidelity) +
                                " exceeds the mechanical ceiling " + std::to_string(ceiling));
  }
  if (target_fidelity < 0.25) {
    throw std::invalid_argument("target fidelity below 1/4 is not reachable by depolarizing");
  }
  return (ceiling - target_fidelity) / (ceiling - 0.25);
}

}  // namespace hdqkd
