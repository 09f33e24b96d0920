#include <hdqkd/protocol.hpp>

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

namespace hdqkd {

const char* to_string(DetectorScheme s) { return s == DetectorScheme::deterministic ? "deterministic" : "filter"; }

DetectorScheme parse_detector_scheme(const std::string& name) {
  if (name == "deterministic") return DetectorScheme::deterministic;
  if (name == "filter") return DetectorScheme::filter;
  throw std::invalid_argument("unknown detector scheme '" + name + "'");
}

const char* to_string(EveKind k) { return k == EveKind::none ? "none" : "intercept-resend"; }

EveKind parse_eve_kind(const std::string& name) {
  if (name == "none") return EveKind::none;
  if (name == "intercept-resend") return EveKind::intercept_resend;
  throw std::invalid_argument("unknown eavesdropper '" + name + "'");
}

TranscriptStats tally(const Transcript& t) {
  TranscriptStats s;
  s.symbols = t.symbols.size();
  for (const auto& sym : t.symbols) {
    if (sym.photons >= 1) ++s.emitted;
    if (sym.photons >= 2) ++s.multi_photon;
    if (sym.clicked) ++s.clicked;
    if (sym.clicked && sym.alice_basis == sym.bob_basis) ++s.sifted;
  }
  return s;
}

namespace {

ProtocolSymbol run_symbol(std::uint64_t index, DetectorScheme scheme, const EveStrategy& eve, const Bench& bench,
                          std::uint64_t seed) {
  RandomStream rng(seed, index);
  ProtocolSymbol sym;
  sym.index = index;
  sym.alice_basis = static_cast<MubBasis>(rng.uniform_index(2));
  sym.alice_bits = static_cast<std::uint8_t>(rng.uniform_index(4));
  sym.bob_basis = static_cast<MubBasis>(rng.uniform_index(2));
  sym.photons = emit(bench.settings.source, rng);
  if (sym.photons == 0) return sym;

  const int prepared = codebook_index({sym.alice_basis, sym.alice_bits});
  StateXd state = perturb(bench.modes[static_cast<std::size_t>(prepared)], bench.settings.imperfections, rng);

  if (eve.kind == EveKind::intercept_resend) {
    const MubBasis eve_basis =
        rng.uniform() < eve.basis_choice_bias ? MubBasis::vector : MubBasis::scalar;
    const bool ev = eve_basis == MubBasis::vector;
    const auto probs = port_distribution(ev ? bench.vector_analyser : bench.scalar_analyser,
                                         ev ? bench.vector_projectors : bench.scalar_projectors, state);
    const int port_i = sample_port(probs, rng.uniform());
    const DetectorPort port = analyser_ports(eve_basis)[static_cast<std::size_t>(port_i)];
    const std::uint8_t eve_bits = bench.ports.bits_for(port);
    state = bench.modes[static_cast<std::size_t>(codebook_index({eve_basis, eve_bits}))];
  }

  const MeasurementOutcome out = scheme == DetectorScheme::deterministic
                                     ? analyse_with_model(bench, state, sym.bob_basis, rng)
                                     : filter_analyse_with_model(bench, state, sym.bob_basis, rng);
  sym.clicked = out.click;
  sym.bob_bits = out.bits;
  return sym;
}

}  // namespace

Transcript run_bb84(std::uint64_t n, DetectorScheme scheme, const EveStrategy& eve, const Bench& bench,
                    std::uint64_t seed, int threads) {
  if (eve.basis_choice_bias < 0.0 || eve.basis_choice_bias > 1.0) {
    throw std::invalid_argument("eavesdropper basis bias must be in [0, 1]");
  }
  Transcript t;
  t.bench_name = bench.settings.name;
  t.scheme = scheme;
  t.eve = eve;
  t.seed = seed;
  t.symbols.resize(n);

  const int workers = std::max(1, std::min<int>(threads, n > 0 ? static_cast<int>(std::min<std::uint64_t>(n, 256)) : 1));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < n; ++i) {
      t.symbols[i] = run_symbol(i, scheme, eve, bench, seed);
    }
    return t;
  }

  const std::uint64_t block = (n + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::uint64_t lo = static_cast<std::uint64_t>(w) * block;
      const std::uint64_t hi = std::min(n, lo + block);
      try {
        for (std::uint64_t i = lo; i < hi; ++i) {
          t.symbols[i] = run_symbol(i, scheme, eve, bench, seed);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return t;
}

SiftResult sift(const Transcript& t) {
  SiftResult r;
  for (const auto& sym : t.symbols) {
    if (!sym.clicked || sym.alice_basis != sym.bob_basis || !sym.bob_bits) continue;
    r.alice.bits.push_back((sym.alice_bits >> 1) & 1);
    r.alice.bits.push_back(sym.alice_bits & 1);
    r.alice.source_indices.push_back(sym.index);
    r.bob.bits.push_back((*sym.bob_bits >> 1) & 1);
    r.bob.bits.push_back(*sym.bob_bits & 1);
    r.bob.source_indices.push_back(sym.index);
  }
  return r;
}

double qber(const SiftedKey& alice, const SiftedKey& bob) {
  if (alice.bits.size() != bob.bits.size() || alice.source_indices.size() != bob.source_indices.size() ||
      alice.bits.size() != 2 * alice.source_indices.size()) {
    throw std::invalid_argument("alignment error: sifted keys disagree on length");
  }
  const std::size_t symbols = alice.source_indices.size();
  if (symbols == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < symbols; ++i) {
    if (alice.bits[2 * i] != bob.bits[2 * i] || alice.bits[2 * i + 1] != bob.bits[2 * i + 1]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(symbols);
}

OtpResult otp_apply(const std::vector<std::uint8_t>& payload, const std::vector<std::uint8_t>& key_bits) {
  if (key_bits.empty()) {
    throw std::invalid_argument("one-time pad key is empty");
  }
  OtpResult r;
  r.data.resize(payload.size());
  r.key_repeated = key_bits.size() < payload.size() * 8;
  const std::size_t klen = key_bits.size();
  for (std::size_t i = 0; i < payload.size(); ++i) {
    std::uint8_t mask = 0;
    for (int b = 0; b < 8; ++b) {
      const std::size_t k = (i * 8 + static_cast<std::size_t>(b)) % klen;
      mask = static_cast<std::uint8_t>(mask | ((key_bits[k] & 1u) << (7 - b)));
    }
    r.data[i] = payload[i] ^ mask;
  }
  return r;
}

}  // namespace hdqkd
