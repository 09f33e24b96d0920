#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hdqkd {

// Circular polarisation component. Canonical order puts R before L.
enum class Pol : std::uint8_t { r = 0, l = 1 };

// Propagation path label. Free-space states carry `none`; the polarising
// gate splits onto a/b and the interferometer recombines onto c/d.
enum class Path : std::uint8_t { none = 0, a, b, c, d };

const char* to_string(Pol p);
const char* to_string(Path p);
Pol flip(Pol p);

// One basis ket of the hybrid space: polarisation, OAM index, path.
struct BasisIndex {
  Pol pol = Pol::r;
  int oam = 0;
  Path path = Path::none;

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

std::string to_string(const BasisIndex& b);

// Ordered basis of a modeled subspace. Entries follow the canonical order:
// lexicographic in (path, pol, oam) with paths none,a,b,c,d, polarisation
// R,L and OAM +l,-l,0. OAM index 0 appears only in generation-stage bases;
// the +-l pair is the configured subspace.
class ModeBasis {
 public:
  ModeBasis() = default;
  ModeBasis(int subspace_l, std::vector<BasisIndex> entries);

  // Polarisation x {+l,-l}, no path label. The four-dimensional protocol space.
  static ModeBasis codebook(int subspace_l);
  // Codebook extended with the OAM-0 input mode used while generating.
  static ModeBasis generation(int subspace_l);
  // Codebook subspace on the two gate output paths a, b.
  static ModeBasis split_ab(int subspace_l);
  // Codebook subspace on the two interferometer output paths c, d.
  static ModeBasis split_cd(int subspace_l);

  int subspace_l() const { return subspace_l_; }
  int dim() const { return static_cast<int>(entries_.size()); }
  const std::vector<BasisIndex>& entries() const { return entries_; }
  const BasisIndex& entry(int i) const { return entries_.at(static_cast<std::size_t>(i)); }

  // Position of a ket in this basis, -1 when absent.
  int find(const BasisIndex& b) const;
  bool contains(const BasisIndex& b) const { return find(b) >= 0; }

  friend bool operator==(const ModeBasis&, const ModeBasis&) = default;

 private:
  int subspace_l_ = 0;
  std::vector<BasisIndex> entries_;
};

}  // namespace hdqkd
