#pragma once

#include <hdqkd/channel.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdqkd {

enum class DetectorScheme : std::uint8_t { deterministic, filter };

const char* to_string(DetectorScheme s);
DetectorScheme parse_detector_scheme(const std::string& name);

enum class EveKind : std::uint8_t { none, intercept_resend };

const char* to_string(EveKind k);
EveKind parse_eve_kind(const std::string& name);

/// @brief Intercept-resend attack settings.
///
/// Eve measures every pulse with an ideal analyser of a basis she picks at
/// random, then injects the codebook mode she saw. Her bench is perfect;
/// only the basis guess costs her.
struct EveStrategy {
  EveKind kind = EveKind::none;
  double basis_choice_bias = 0.5;  // probability she picks the vector analyser
};

struct ProtocolSymbol {
  std::uint64_t index = 0;
  MubBasis alice_basis = MubBasis::vector;
  std::uint8_t alice_bits = 0;
  MubBasis bob_basis = MubBasis::vector;
  std::optional<std::uint8_t> bob_bits;
  bool clicked = false;
  int photons = 0;
};

struct Transcript {
  std::string bench_name;
  DetectorScheme scheme = DetectorScheme::deterministic;
  EveStrategy eve;
  std::uint64_t seed = 0;
  std::vector<ProtocolSymbol> symbols;
};

struct TranscriptStats {
  std::uint64_t symbols = 0;
  std::uint64_t emitted = 0;       // pulses with at least one photon
  std::uint64_t multi_photon = 0;  // pulses with two or more
  std::uint64_t clicked = 0;
  std::uint64_t sifted = 0;        // clicked with matching bases
};

TranscriptStats tally(const Transcript& t);

// One independent random stream per symbol, so the transcript is identical
// for any thread count.
Transcript run_bb84(std::uint64_t n, DetectorScheme scheme, const EveStrategy& eve, const Bench& bench,
                    std::uint64_t seed, int threads = 1);

struct SiftedKey {
  std::vector<std::uint8_t> bits;  // 0/1 entries, two per kept symbol, high bit first
  std::vector<std::uint64_t> source_indices;
};

struct SiftResult {
  SiftedKey alice;
  SiftedKey bob;
};

SiftResult sift(const Transcript& t);

// Symbol error rate between two sifted keys of equal layout. Counts a symbol
// wrong when either of its bits differs. Empty keys rate as 0.
double qber(const SiftedKey& alice, const SiftedKey& bob);

struct OtpResult {
  std::vector<std::uint8_t> data;
  bool key_repeated = false;  // payload was longer than the key
};

// XORs the payload with the key bitstream, high bit of each byte first,
// cycling the key when it runs short.
OtpResult otp_apply(const std::vector<std::uint8_t>& payload, const std::vector<std::uint8_t>& key_bits);

// The pad is its own inverse; the two names mark intent at call sites.
inline OtpResult otp_encrypt(const std::vector<std::uint8_t>& plain, const std::vector<std::uint8_t>& key_bits) {
  return otp_apply(plain, key_bits);
}
inline OtpResult otp_decrypt(const std::vector<std::uint8_t>& cipher, const std::vector<std::uint8_t>& key_bits) {
  return otp_apply(cipher, key_bits);
}

}  // namespace hdqkd
