#pragma once

#include <hdqkd/hilbert.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdqkd {

// The two mutually unbiased codebooks of the protocol.
enum class MubBasis : std::uint8_t { vector = 0, scalar = 1 };

inline const char* to_string(MubBasis b) { return b == MubBasis::vector ? "vector" : "scalar"; }

// One protocol mode: a codebook plus a two-bit symbol (msb first).
struct ModeId {
  MubBasis mub = MubBasis::vector;
  std::uint8_t bits = 0;

  friend bool operator==(const ModeId&, const ModeId&) = default;
};

// Codebook order: the four vector modes, then the four scalar modes,
// each by ascending bit value.
inline int codebook_index(ModeId id) { return (id.mub == MubBasis::vector ? 0 : 4) + id.bits; }

inline ModeId mode_from_index(int index) {
  if (index < 0 || index > 7) {
    throw std::invalid_argument("codebook index must be in 0..7");
  }
  return {index < 4 ? MubBasis::vector : MubBasis::scalar, static_cast<std::uint8_t>(index & 3)};
}

inline std::string mode_label(ModeId id) {
  std::string s(1, id.mub == MubBasis::vector ? 'v' : 's');
  s += static_cast<char>('0' + ((id.bits >> 1) & 1));
  s += static_cast<char>('0' + (id.bits & 1));
  return s;
}

inline ModeId parse_mode_label(const std::string& label) {
  const bool ok = label.size() == 3 && (label[0] == 'v' || label[0] == 's') && (label[1] == '0' || label[1] == '1') &&
                  (label[2] == '0' || label[2] == '1');
  if (!ok) {
    throw std::invalid_argument("bad mode label '" + label + "', expected v00..v11 or s00..s11");
  }
  return {label[0] == 'v' ? MubBasis::vector : MubBasis::scalar,
          static_cast<std::uint8_t>(((label[1] - '0') << 1) | (label[2] - '0'))};
}

// Polarisation conventions, fixed once for the whole simulator:
//   |H> = (|R> + |L>)/sqrt2          |V> = i(|R> - |L>)/sqrt2
//   |D> = (|R> - i|L>)/sqrt2         |A> = (|R> + i|L>)/sqrt2
// Retarders advance the slow axis by e^{+i phi}; a rotation of the
// polarisation plane by rho maps R -> e^{+i rho} R.

// Codebook states. Vector modes entangle polarisation with the OAM sign,
//   bits 0x: (|R,+l> + e^{i theta}|L,-l>)/sqrt2, theta = 0 for x=0, pi for x=1,
//   bits 1x: (|L,+l> + e^{i theta}|R,-l>)/sqrt2,
// while scalar modes put D/A polarisation on a single OAM index:
//   bits b1 b0 -> (b1 ? A : D) on OAM (b0 ? +l : -l).
template <typename Scalar = double>
HybridState<Scalar> codebook_state(ModeId id, int subspace_l) {
  using C = std::complex<Scalar>;
  const Scalar rsqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  auto s = zero_state<Scalar>(ModeBasis::codebook(subspace_l));
  const bool phase_pi = (id.bits & 1) != 0;
  if (id.mub == MubBasis::vector) {
    const bool swapped = (id.bits & 2) != 0;
    const Pol plus_pol = swapped ? Pol::l : Pol::r;
    const Pol minus_pol = swapped ? Pol::r : Pol::l;
    s.amps[s.basis.find({plus_pol, subspace_l, Path::none})] = C(rsqrt2);
    s.amps[s.basis.find({minus_pol, -subspace_l, Path::none})] = C(phase_pi ? -rsqrt2 : rsqrt2);
  } else {
    const bool anti = (id.bits & 2) != 0;
    const int oam = phase_pi ? subspace_l : -subspace_l;
    s.amps[s.basis.find({Pol::r, oam, Path::none})] = C(rsqrt2);
    s.amps[s.basis.find({Pol::l, oam, Path::none})] = anti ? C(0, rsqrt2) : C(0, -rsqrt2);
  }
  return s;
}

template <typename Scalar = double>
std::array<HybridState<Scalar>, 8> codebook_states(int subspace_l) {
  std::array<HybridState<Scalar>, 8> out;
  for (int i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = codebook_state<Scalar>(mode_from_index(i), subspace_l);
  return out;
}

enum class WavePlateKind : std::uint8_t { half, quarter };

struct WavePlateSpec {
  WavePlateKind kind = WavePlateKind::half;
  double axis_pi = 0.0;  // fast-axis angle from horizontal, in multiples of pi
};

// Topological charge of a q-plate; half-integer values allowed.
struct QPlateSpec {
  double q = 0.5;
};

// Jones matrix of a retarder in the circular (R,L) amplitude basis.
template <typename Scalar = double>
Eigen::Matrix2<std::complex<Scalar>> waveplate_jones(const WavePlateSpec& spec) {
  using C = std::complex<Scalar>;
  const Scalar chi = static_cast<Scalar>(spec.axis_pi * std::numbers::pi);
  const Scalar phi = static_cast<Scalar>(spec.kind == WavePlateKind::half ? std::numbers::pi : std::numbers::pi / 2);
  const Scalar c = std::cos(chi), s = std::sin(chi);
  const C e = std::exp(C(0, phi));
  // R(chi) diag(1, e^{i phi}) R(-chi) in H/V, conjugated into R/L.
  Eigen::Matrix2<C> hv;
  hv << c * c + e * s * s, c * s * (Scalar(1) - e),
        c * s * (Scalar(1) - e), s * s + e * c * c;
  Eigen::Matrix2<C> t;  // circular amplitudes -> H/V amplitudes
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  t << C(r), C(r), C(0, -r), C(0, r);
  return t.adjoint() * hv * t;
}

// Rotation of the polarisation plane by rho: diag(e^{+i rho}, e^{-i rho}).
template <typename Scalar = double>
Eigen::Matrix2<std::complex<Scalar>> rotation_jones(Scalar rho) {
  using C = std::complex<Scalar>;
  Eigen::Matrix2<C> m = Eigen::Matrix2<C>::Zero();
  m(0, 0) = std::exp(C(0, rho));
  m(1, 1) = std::exp(C(0, -rho));
  return m;
}

// Lift a polarisation-only Jones matrix to the full space, acting as the
// identity on OAM and path. The basis must pair every (oam, path) across
// both polarisations.
template <typename Scalar = double>
ElementOperator<Scalar> pol_operator(std::string label, const Eigen::Matrix2<std::complex<Scalar>>& jones,
                                     const ModeBasis& basis) {
  typename ElementOperator<Scalar>::Matrix m =
      ElementOperator<Scalar>::Matrix::Zero(basis.dim(), basis.dim());
  for (int col = 0; col < basis.dim(); ++col) {
    const BasisIndex& in = basis.entry(col);
    for (Pol out_pol : {Pol::r, Pol::l}) {
      const int row = basis.find({out_pol, in.oam, in.path});
      if (row < 0) {
        throw std::invalid_argument("basis is not closed under polarisation flips at " + to_string(in));
      }
      m(row, col) = jones(static_cast<int>(out_pol), static_cast<int>(in.pol));
    }
  }
  return ElementOperator<Scalar>(std::move(label), basis, basis, std::move(m));
}

template <typename Scalar = double>
ElementOperator<Scalar> waveplate_operator(const WavePlateSpec& spec, const ModeBasis& basis) {
  const char* name = spec.kind == WavePlateKind::half ? "hwp" : "qwp";
  return pol_operator<Scalar>(name + ("(" + std::to_string(spec.axis_pi) + "pi)"), waveplate_jones<Scalar>(spec),
                              basis);
}

// Q-plate: |m, L> -> |m + 2q, R> and |m, R> -> |m - 2q, L>. The domain is
// the part of the generation basis whose image stays inside the modeled
// OAM set {+l, -l, 0}; feeding it anything else is a domain error.
template <typename Scalar = double>
ElementOperator<Scalar> qplate_operator(const QPlateSpec& spec, int subspace_l) {
  const double shift = 2.0 * spec.q;
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) > 1e-12) {
    throw std::invalid_argument("q-plate charge must be a multiple of 1/2");
  }
  const int two_q = static_cast<int>(rounded);
  if (two_q != subspace_l && two_q != -subspace_l) {
    throw std::invalid_argument("domain error: q-plate OAM shift " + std::to_string(two_q) +
                                " does not match subspace +-" + std::to_string(subspace_l));
  }
  const ModeBasis full = ModeBasis::generation(subspace_l);
  std::vector<BasisIndex> domain_entries;
  std::vector<BasisIndex> images;
  for (const auto& e : full.entries()) {
    const int out_oam = e.oam + (e.pol == Pol::l ? two_q : -two_q);
    const BasisIndex image{flip(e.pol), out_oam, e.path};
    if (full.contains(image)) {
      domain_entries.push_back(e);
      images.push_back(image);
    }
  }
  const ModeBasis domain(subspace_l, domain_entries);
  typename ElementOperator<Scalar>::Matrix m =
      ElementOperator<Scalar>::Matrix::Zero(full.dim(), domain.dim());
  for (int col = 0; col < domain.dim(); ++col) {
    m(full.find(images[static_cast<std::size_t>(col)]), col) = std::complex<Scalar>(1);
  }
  return ElementOperator<Scalar>("qplate(q=" + std::to_string(spec.q) + ")", domain, full, std::move(m));
}

// Polarising gate: routes R to path a and L to path b, keeping OAM.
template <typename Scalar = double>
ElementOperator<Scalar> pg_split_operator(int subspace_l) {
  const ModeBasis domain = ModeBasis::codebook(subspace_l);
  const ModeBasis codomain = ModeBasis::split_ab(subspace_l);
  typename ElementOperator<Scalar>::Matrix m =
      ElementOperator<Scalar>::Matrix::Zero(codomain.dim(), domain.dim());
  for (int col = 0; col < domain.dim(); ++col) {
    const BasisIndex& in = domain.entry(col);
    const Path out_path = in.pol == Pol::r ? Path::a : Path::b;
    m(codomain.find({in.pol, in.oam, out_path}), col) = std::complex<Scalar>(1);
  }
  return ElementOperator<Scalar>("pg", domain, codomain, std::move(m));
}

// Recombining beam splitter, paths (a,b) -> (c,d). Convention: transmission
// 1/sqrt2, reflection i/sqrt2; a reflection reverses handedness, so it swaps
// R<->L and negates the OAM index. The dynamic phase delta sits on path b.
// At delta = pi/2 the vector codebook maps one mode per output port.
template <typename Scalar = double>
ElementOperator<Scalar> bs_operator(Scalar delta, int subspace_l) {
  using C = std::complex<Scalar>;
  const ModeBasis domain = ModeBasis::split_ab(subspace_l);
  const ModeBasis codomain = ModeBasis::split_cd(subspace_l);
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  const C refl(0, r);
  const C phase = std::exp(C(0, delta));
  typename ElementOperator<Scalar>::Matrix m =
      ElementOperator<Scalar>::Matrix::Zero(codomain.dim(), domain.dim());
  for (int col = 0; col < domain.dim(); ++col) {
    const BasisIndex& in = domain.entry(col);
    const BasisIndex keep{in.pol, in.oam, Path::none};
    const BasisIndex flipped{flip(in.pol), -in.oam, Path::none};
    if (in.path == Path::a) {
      m(codomain.find({keep.pol, keep.oam, Path::c}), col) = C(r);
      m(codomain.find({flipped.pol, flipped.oam, Path::d}), col) = refl;
    } else {
      m(codomain.find({flipped.pol, flipped.oam, Path::c}), col) = phase * refl;
      m(codomain.find({keep.pol, keep.oam, Path::d}), col) = phase * C(r);
    }
  }
  return ElementOperator<Scalar>("bs(delta=" + std::to_string(delta) + ")", domain, codomain, std::move(m));
}

enum class RecipeElementKind : std::uint8_t { quarter_wave, half_wave, q_plate };

struct RecipeElement {
  RecipeElementKind kind = RecipeElementKind::q_plate;
  double angle_pi = 0.0;  // fast-axis angle; unused for the q-plate
};

struct GenerationRecipe {
  ModeId target;
  std::vector<RecipeElement> elements;
};

using RecipeTable = std::array<GenerationRecipe, 8>;

// Plate trains that carve each codebook mode out of the source beam, in
// codebook order. data/recipes_table.json carries the same table for runs
// that want to rewire the transmitter.
inline RecipeTable default_recipe_table() {
  constexpr auto hwp = RecipeElementKind::half_wave;
  constexpr auto qwp = RecipeElementKind::quarter_wave;
  constexpr auto qp = RecipeElementKind::q_plate;
  return {{
      {{MubBasis::vector, 0}, {{hwp, 0.0}, {qp, 0.0}}},
      {{MubBasis::vector, 1}, {{hwp, 0.25}, {qp, 0.0}}},
      {{MubBasis::vector, 2}, {{qp, 0.0}, {hwp, 0.0}}},
      {{MubBasis::vector, 3}, {{qp, 0.0}, {hwp, 0.25}}},
      {{MubBasis::scalar, 0}, {{qwp, 0.25}, {qp, 0.0}, {qwp, 0.25}, {hwp, 0.125}}},
      {{MubBasis::scalar, 1}, {{qwp, -0.25}, {qp, 0.0}, {qwp, -0.25}, {hwp, 0.125}}},
      {{MubBasis::scalar, 2}, {{qwp, 0.25}, {qp, 0.0}, {qwp, 0.25}, {hwp, -0.125}}},
      {{MubBasis::scalar, 3}, {{qwp, -0.25}, {qp, 0.0}, {qwp, -0.25}, {hwp, -0.125}}},
  }};
}

// Source beam: horizontally polarised, OAM 0.
template <typename Scalar = double>
HybridState<Scalar> gaussian_input(int subspace_l) {
  auto s = zero_state<Scalar>(ModeBasis::generation(subspace_l));
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  s.amps[s.basis.find({Pol::r, 0, Path::none})] = std::complex<Scalar>(r);
  s.amps[s.basis.find({Pol::l, 0, Path::none})] = std::complex<Scalar>(r);
  return s;
}

// Run the element train of one recipe over the source beam and restrict the
// result to the codebook subspace. A recipe whose output keeps weight on
// OAM 0 is rejected.
template <typename Scalar = double>
HybridState<Scalar> generate_mode(const GenerationRecipe& recipe, int subspace_l) {
  const ModeBasis gen = ModeBasis::generation(subspace_l);
  auto state = gaussian_input<Scalar>(subspace_l);
  for (const auto& elem : recipe.elements) {
    if (elem.kind == RecipeElementKind::q_plate) {
      const auto op = qplate_operator<Scalar>({subspace_l / 2.0}, subspace_l);
      state = apply(op, restrict_to(state, op.domain()));
    } else {
      const WavePlateSpec spec{
          elem.kind == RecipeElementKind::half_wave ? WavePlateKind::half : WavePlateKind::quarter, elem.angle_pi};
      state = apply(waveplate_operator<Scalar>(spec, gen), state);
    }
  }
  return normalized(restrict_to(state, ModeBasis::codebook(subspace_l)));
}

}  // namespace hdqkd
