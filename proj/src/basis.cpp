#include <hdqkd/basis.hpp>

#include <stdexcept>
#include <utility>

namespace hdqkd {

namespace {

// Rank of an OAM index within one (path, pol) block: +l, -l, then 0.
int oam_rank(int oam, int subspace_l) {
  if (oam == subspace_l) return 0;
  if (oam == -subspace_l) return 1;
  if (oam == 0) return 2;
  return -1;
}

int canonical_rank(const BasisIndex& b, int subspace_l) {
  const int r = oam_rank(b.oam, subspace_l);
  if (r < 0) {
    throw std::invalid_argument("basis entry " + to_string(b) + " has OAM outside the modeled set {+" +
                                std::to_string(subspace_l) + ",-" + std::to_string(subspace_l) + ",0}");
  }
  return (static_cast<int>(b.path) * 2 + static_cast<int>(b.pol)) * 3 + r;
}

}  // namespace

const char* to_string(Pol p) { return p == Pol::r ? "R" : "L"; }

const char* to_string(Path p) {
  switch (p) {
    case Path::none: return "none";
    case Path::a: return "a";
    case Path::b: return "b";
    case Path::c: return "c";
    case Path::d: return "d";
  }
  return "?";
}

Pol flip(Pol p) { return p == Pol::r ? Pol::l : Pol::r; }

std::string to_string(const BasisIndex& b) {
  std::string s = "(";
  s += to_string(b.pol);
  s += ",";
  s += std::to_string(b.oam);
  if (b.path != Path::none) {
    s += ",";
    s += to_string(b.path);
  }
  s += ")";
  return s;
}

ModeBasis::ModeBasis(int subspace_l, std::vector<BasisIndex> entries)
    : subspace_l_(subspace_l), entries_(std::move(entries)) {
  if (subspace_l_ < 1) {
    throw std::invalid_argument("subspace OAM magnitude must be >= 1");
  }
  if (entries_.empty()) {
    throw std::invalid_argument("basis must have at least one entry");
  }
  int prev = -1;
  for (const auto& e : entries_) {
    const int rank = canonical_rank(e, subspace_l_);
    if (rank <= prev) {
      throw std::invalid_argument("basis entries must be distinct and in canonical order; " + to_string(e) +
                                  " is out of place");
    }
    prev = rank;
  }
}

ModeBasis ModeBasis::codebook(int subspace_l) {
  return ModeBasis(subspace_l, {{Pol::r, subspace_l, Path::none},
                                {Pol::r, -subspace_l, Path::none},
                                {Pol::l, subspace_l, Path::none},
                                {Pol::l, -subspace_l, Path::none}});
}

ModeBasis ModeBasis::generation(int subspace_l) {
  return ModeBasis(subspace_l, {{Pol::r, subspace_l, Path::none},
                                {Pol::r, -subspace_l, Path::none},
                                {Pol::r, 0, Path::none},
                                {Pol::l, subspace_l, Path::none},
                                {Pol::l, -subspace_l, Path::none},
                                {Pol::l, 0, Path::none}});
}

namespace {

ModeBasis two_path_basis(int subspace_l, Path first, Path second) {
  std::vector<BasisIndex> entries;
  entries.reserve(8);
  for (Path p : {first, second}) {
    for (Pol pol : {Pol::r, Pol::l}) {
      entries.push_back({pol, subspace_l, p});
      entries.push_back({pol, -subspace_l, p});
    }
  }
  return ModeBasis(subspace_l, std::move(entries));
}

}  // namespace

ModeBasis ModeBasis::split_ab(int subspace_l) { return two_path_basis(subspace_l, Path::a, Path::b); }

ModeBasis ModeBasis::split_cd(int subspace_l) { return two_path_basis(subspace_l, Path::c, Path::d); }

int ModeBasis::find(const BasisIndex& b) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] == b) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace hdqkd
