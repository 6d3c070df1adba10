#pragma once

#include <complex>
#include <string>
#include <vector>

#include "tsqp/polarization.hpp"
#include "tsqp/rng.hpp"

namespace tsqp {

/// Complex state vector of dimension 2 (single polarization qubit) or 4
/// (two-qubit states used by the permutation and DFT families).
struct StateVector {
    std::vector<cplx> a;

    StateVector() = default;
    explicit StateVector(std::size_t dim) : a(dim, cplx{0.0, 0.0}) {}
    StateVector(std::initializer_list<cplx> init) : a(init) {}

    std::size_t dim() const { return a.size(); }
    double norm() const;
    StateVector normalized() const;

    static StateVector basis(std::size_t dim, std::size_t index);
    static StateVector from_jones(const JonesVector& v) { return {v.c0, v.c1}; }
    JonesVector to_jones() const;
};

cplx inner(const StateVector& x, const StateVector& y);
bool ray_equal(const StateVector& x, const StateVector& y, double tol = kTolAlgebra);

/// Square complex matrix of dimension 2 or 4, row-major.
struct UnitaryTransform {
    std::size_t n = 2;
    std::vector<cplx> m;

    UnitaryTransform() : m{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}} {}
    explicit UnitaryTransform(std::size_t dim);

    cplx operator()(std::size_t r, std::size_t c) const { return m[r * n + c]; }
    cplx& operator()(std::size_t r, std::size_t c) { return m[r * n + c]; }

    StateVector apply(const StateVector& v) const;
    UnitaryTransform operator*(const UnitaryTransform& o) const;
    UnitaryTransform dagger() const;
    UnitaryTransform scaled(cplx factor) const;
    bool is_unitary(double tol = kTolAlgebra) const;

    static UnitaryTransform identity(std::size_t dim);
    static UnitaryTransform from_jones(const JonesOperator& j);
    JonesOperator to_jones() const;
};

double max_abs_diff(const UnitaryTransform& a, const UnitaryTransform& b);

/// Exact commutation: AB = BA within tol.
bool commutes(const UnitaryTransform& a, const UnitaryTransform& b, double tol = kTolAlgebra);

/// Commutation up to a global phase: AB = lambda BA for unimodular lambda.
/// On success stores lambda (if out is non-null). This is the condition the
/// protocol needs, since states are rays: B† A† B A = conj(lambda) I acts as
/// the identity on every ray.
bool commutes_up_to_phase(const UnitaryTransform& a, const UnitaryTransform& b,
                          cplx* lambda = nullptr, double tol = kTolAlgebra);

enum class FamilyKind {
    Rotation,
    Pauli,
    HadamardPair,
    TwoQubitPermutation,
    TwoQubitDft,
    QuaternionSet,
};

std::string family_kind_name(FamilyKind kind);

/// Commutation behaviour of a family, checked over all element pairs.
enum class CommutationClass {
    Exact,        ///< every pair commutes exactly
    UpToPhase,    ///< every pair commutes up to a global phase, some only so
};

/// The single-qubit Pauli operators {I, X, Y, Z}. Distinct non-identity
/// elements anticommute (lambda = -1).
std::vector<UnitaryTransform> pauli_elements();
/// {I, H}: commuting pair built from the Hadamard gate.
std::vector<UnitaryTransform> hadamard_pair_elements();
/// Two commuting 4x4 permutations: the first swaps |10> and |11>, the
/// second swaps |00> and |01>. Disjoint transpositions, exact commutation.
std::vector<UnitaryTransform> two_qubit_permutation_elements();
/// {I, F} where F is the 4-point discrete Fourier transform (1/2 scale).
std::vector<UnitaryTransform> two_qubit_dft_elements();
/// Quaternion representation {1, i, j, k} as 4x4 real matrices. Distinct
/// imaginary units anticommute and square to -I.
std::vector<UnitaryTransform> quaternion_elements();

/// A set of mutually compatible encoding transformations plus a sampler.
/// For Rotation the set is continuous and `elements` holds representative
/// angles only; sample() draws a uniform angle.
struct TransformFamily {
    FamilyKind kind = FamilyKind::Rotation;
    std::size_t dim = 2;
    CommutationClass commutation = CommutationClass::Exact;
    std::vector<UnitaryTransform> elements;

    UnitaryTransform sample(Rng& rng) const;
    static TransformFamily make(FamilyKind kind);
};

/// Probability that a computational-basis readout of U|state> lands off the
/// dominant basis component of `state`, averaged over uniformly drawn family
/// elements U. Measures how well one layer of the family hides basis
/// encodings from a direct measurement: 1/2 for Pauli or Rotation acting on
/// a basis state, 1/4 for the Hadamard pair. Rotation averages over the
/// continuous angle by quadrature.
double masking_probability(const TransformFamily& family, const StateVector& state);

/// Haar-ish random unitary: Ginibre ensemble followed by Gram-Schmidt.
UnitaryTransform random_unitary(std::size_t dim, Rng& rng);

}  // namespace tsqp
