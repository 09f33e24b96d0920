#pragma once

#include <hdqkd/basis.hpp>

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdqkd {

// Pure state over an explicit ModeBasis. Amplitudes are stored in the
// basis's canonical entry order.
template <typename Scalar = double>
struct HybridState {
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Vector<Complex, Eigen::Dynamic>;

  ModeBasis basis;
  Vector amps;
};

using StateXd = HybridState<double>;

template <typename Scalar = double>
HybridState<Scalar> zero_state(const ModeBasis& basis) {
  HybridState<Scalar> s;
  s.basis = basis;
  s.amps = HybridState<Scalar>::Vector::Zero(basis.dim());
  return s;
}

template <typename Scalar = double>
HybridState<Scalar> basis_state(const ModeBasis& basis, const BasisIndex& ket) {
  const int i = basis.find(ket);
  if (i < 0) {
    throw std::invalid_argument("ket " + to_string(ket) + " is not in the given basis");
  }
  auto s = zero_state<Scalar>(basis);
  s.amps[i] = typename HybridState<Scalar>::Complex(1);
  return s;
}

namespace detail {

inline void require_same_basis(const ModeBasis& a, const ModeBasis& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string("dimension mismatch: ") + what + " require states over the same basis");
  }
}

}  // namespace detail

// <a|b>, conjugate-linear in the first argument.
template <typename Scalar>
std::complex<Scalar> inner_product(const HybridState<Scalar>& a, const HybridState<Scalar>& b) {
  detail::require_same_basis(a.basis, b.basis, "inner products");
  return a.amps.dot(b.amps);
}

template <typename Scalar>
Scalar norm(const HybridState<Scalar>& s) {
  return s.amps.norm();
}

template <typename Scalar>
HybridState<Scalar> normalized(const HybridState<Scalar>& s) {
  const Scalar n = norm(s);
  if (n <= Scalar(0)) {
    throw std::invalid_argument("cannot normalize a zero state");
  }
  return {s.basis, s.amps / n};
}

// |<a|b>|^2. Global-phase-insensitive comparison for unit vectors.
template <typename Scalar>
Scalar fidelity(const HybridState<Scalar>& a, const HybridState<Scalar>& b) {
  return std::norm(inner_product(a, b));
}

template <typename Scalar = double>
constexpr Scalar default_isometry_tol() {
  return std::numeric_limits<Scalar>::epsilon() > Scalar(1e-12) ? Scalar(1e-4) : Scalar(1e-10);
}

// Linear map between two mode bases. The matrix must be an isometry on its
// declared domain (M^dagger M = I), which covers both square unitaries and
// rectangular embeddings such as the path split.
template <typename Scalar = double>
class ElementOperator {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  ElementOperator(std::string label, ModeBasis domain, ModeBasis codomain, Matrix matrix,
                  Scalar tol = default_isometry_tol<Scalar>())
      : label_(std::move(label)), domain_(std::move(domain)), codomain_(std::move(codomain)),
        matrix_(std::move(matrix)) {
    if (matrix_.rows() != codomain_.dim() || matrix_.cols() != domain_.dim()) {
      throw std::invalid_argument("dimension mismatch: operator '" + label_ + "' matrix is " +
                                  std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()) +
                                  " but maps dim " + std::to_string(domain_.dim()) + " to dim " +
                                  std::to_string(codomain_.dim()));
    }
    if (codomain_.dim() < domain_.dim()) {
      throw std::invalid_argument("invariant violation: operator '" + label_ + "' loses dimensions");
    }
    const Matrix gram = matrix_.adjoint() * matrix_;
    const Matrix eye = Matrix::Identity(domain_.dim(), domain_.dim());
    const Scalar err = (gram - eye).template lpNorm<Eigen::Infinity>();
    if (err > tol) {
      throw std::invalid_argument("invariant violation: operator '" + label_ +
                                  "' is not an isometry on its domain (|U^H U - I| = " + std::to_string(err) + ")");
    }
  }

  const std::string& label() const { return label_; }
  const ModeBasis& domain() const { return domain_; }
  const ModeBasis& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }

 private:
  std::string label_;
  ModeBasis domain_;
  ModeBasis codomain_;
  Matrix matrix_;
};

using OperatorXd = ElementOperator<double>;

template <typename Scalar>
HybridState<Scalar> apply(const ElementOperator<Scalar>& op, const HybridState<Scalar>& s) {
  if (!(s.basis == op.domain())) {
    throw std::invalid_argument("domain error: state basis does not match domain of operator '" + op.label() + "'");
  }
  return {op.codomain(), op.matrix() * s.amps};
}

// second∘first as a single operator.
template <typename Scalar>
ElementOperator<Scalar> compose(const ElementOperator<Scalar>& second, const ElementOperator<Scalar>& first) {
  if (!(second.domain() == first.codomain())) {
    throw std::invalid_argument("dimension mismatch: cannot compose '" + second.label() + "' after '" +
                                first.label() + "'");
  }
  return ElementOperator<Scalar>(second.label() + "*" + first.label(), first.domain(), second.codomain(),
                                 second.matrix() * first.matrix());
}

// Inverse of a square operator. Rectangular isometries have no two-sided
// inverse, so they are rejected.
template <typename Scalar>
ElementOperator<Scalar> adjoint(const ElementOperator<Scalar>& op) {
  if (op.domain().dim() != op.codomain().dim()) {
    throw std::invalid_argument("dimension mismatch: adjoint of rectangular operator '" + op.label() +
                                "' is not an isometry");
  }
  return ElementOperator<Scalar>(op.label() + "^H", op.codomain(), op.domain(), op.matrix().adjoint());
}

// Zero-pad a state into a larger basis containing every entry of its own.
template <typename Scalar>
HybridState<Scalar> embed(const HybridState<Scalar>& s, const ModeBasis& target) {
  auto out = zero_state<Scalar>(target);
  for (int i = 0; i < s.basis.dim(); ++i) {
    const int j = target.find(s.basis.entry(i));
    if (j < 0) {
      throw std::invalid_argument("dimension mismatch: target basis lacks entry " + to_string(s.basis.entry(i)));
    }
    out.amps[j] = s.amps[i];
  }
  return out;
}

// Drop amplitudes outside `target`. Rejects states whose dropped weight
// exceeds drop_tol, which is how support outside an operator's domain or
// outside the modeled OAM set surfaces.
template <typename Scalar>
HybridState<Scalar> restrict_to(const HybridState<Scalar>& s, const ModeBasis& target,
                                Scalar drop_tol = Scalar(1e-9)) {
  auto out = zero_state<Scalar>(target);
  Scalar dropped = 0;
  for (int i = 0; i < s.basis.dim(); ++i) {
    const int j = target.find(s.basis.entry(i));
    if (j >= 0) {
      out.amps[j] = s.amps[i];
    } else {
      dropped += std::norm(s.amps[i]);
    }
  }
  if (dropped > drop_tol) {
    throw std::invalid_argument("domain error: state carries weight " + std::to_string(dropped) +
                                " outside the target basis");
  }
  return out;
}

// Diagonal projector: a named set of basis positions.
struct PortProjector {
  std::string label;
  std::vector<int> indices;
};

// Born probabilities for a complete set of diagonal projectors. The ports
// must be pairwise disjoint and cover the support of the state.
template <typename Scalar>
std::vector<Scalar> outcome_distribution(const HybridState<Scalar>& s, const std::vector<PortProjector>& ports) {
  const int dim = s.basis.dim();
  std::vector<char> covered(static_cast<std::size_t>(dim), 0);
  for (const auto& port : ports) {
    for (int idx : port.indices) {
      if (idx < 0 || idx >= dim) {
        throw std::invalid_argument("completeness error: port '" + port.label + "' references index " +
                                    std::to_string(idx) + " outside the basis");
      }
      if (covered[static_cast<std::size_t>(idx)]) {
        throw std::invalid_argument("completeness error: ports overlap at index " + std::to_string(idx));
      }
      covered[static_cast<std::size_t>(idx)] = 1;
    }
  }
  constexpr Scalar support_tol = Scalar(1e-12);
  for (int i = 0; i < dim; ++i) {
    if (!covered[static_cast<std::size_t>(i)] && std::norm(s.amps[i]) > support_tol) {
      throw std::invalid_argument("completeness error: ports do not cover populated index " + std::to_string(i));
    }
  }
  std::vector<Scalar> probs;
  probs.reserve(ports.size());
  for (const auto& port : ports) {
    Scalar p = 0;
    for (int idx : port.indices) p += std::norm(s.amps[idx]);
    probs.push_back(p);
  }
  return probs;
}

}  // namespace hdqkd
