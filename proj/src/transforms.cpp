#include "tsqp/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace tsqp {

double StateVector::norm() const {
    double s = 0.0;
    for (const cplx& c : a) s += std::norm(c);
    return std::sqrt(s);
}

StateVector StateVector::normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero state");
    StateVector r(dim());
    for (std::size_t i = 0; i < dim(); ++i) r.a[i] = a[i] / n;
    return r;
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw std::out_of_range("basis index out of range");
    StateVector r(dim);
    r.a[index] = cplx{1.0, 0.0};
    return r;
}

JonesVector StateVector::to_jones() const {
    if (dim() != 2) throw std::invalid_argument("to_jones requires a 2-dim state");
    return {a[0], a[1]};
}

cplx inner(const StateVector& x, const StateVector& y) {
    if (x.dim() != y.dim()) throw std::invalid_argument("dimension mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < x.dim(); ++i) s += std::conj(x.a[i]) * y.a[i];
    return s;
}

bool ray_equal(const StateVector& x, const StateVector& y, double tol) {
    double nx = x.norm();
    double ny = y.norm();
    if (nx == 0.0 || ny == 0.0) return false;
    return std::abs(std::abs(inner(x, y)) / (nx * ny) - 1.0) <= tol;
}

UnitaryTransform::UnitaryTransform(std::size_t dim) : n(dim), m(dim * dim, cplx{0.0, 0.0}) {
    if (dim != 2 && dim != 4) throw std::invalid_argument("supported dimensions are 2 and 4");
}

StateVector UnitaryTransform::apply(const StateVector& v) const {
    if (v.dim() != n) throw std::invalid_argument("dimension mismatch");
    StateVector r(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) acc += (*this)(i, j) * v.a[j];
        r.a[i] = acc;
    }
    return r;
}

UnitaryTransform UnitaryTransform::operator*(const UnitaryTransform& o) const {
    if (n != o.n) throw std::invalid_argument("dimension mismatch");
    UnitaryTransform r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    return r;
}

UnitaryTransform UnitaryTransform::dagger() const {
    UnitaryTransform r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
}

UnitaryTransform UnitaryTransform::scaled(cplx factor) const {
    UnitaryTransform r(n);
    for (std::size_t i = 0; i < n * n; ++i) r.m[i] = m[i] * factor;
    return r;
}

bool UnitaryTransform::is_unitary(double tol) const {
    return max_abs_diff(dagger() * (*this), identity(n)) <= tol;
}

UnitaryTransform UnitaryTransform::identity(std::size_t dim) {
    UnitaryTransform r(dim);
    for (std::size_t i = 0; i < dim; ++i) r(i, i) = cplx{1.0, 0.0};
    return r;
}

UnitaryTransform UnitaryTransform::from_jones(const JonesOperator& j) {
    UnitaryTransform r(2);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) r(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = j(i, k);
    return r;
}

JonesOperator UnitaryTransform::to_jones() const {
    if (n != 2) throw std::invalid_argument("to_jones requires dimension 2");
    JonesOperator j;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) j(i, k) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
    return j;
}

double max_abs_diff(const UnitaryTransform& a, const UnitaryTransform& b) {
    if (a.n != b.n) throw std::invalid_argument("dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.m.size(); ++i) d = std::max(d, std::abs(a.m[i] - b.m[i]));
    return d;
}

bool commutes(const UnitaryTransform& a, const UnitaryTransform& b, double tol) {
    return max_abs_diff(a * b, b * a) <= tol;
}

bool commutes_up_to_phase(const UnitaryTransform& a, const UnitaryTransform& b, cplx* lambda,
                          double tol) {
    UnitaryTransform ab = a * b;
    UnitaryTransform ba = b * a;
    // Find the largest entry of BA to fix the candidate phase, then verify
    // AB = lambda BA entrywise.
    std::size_t best = 0;
    double mag = 0.0;
    for (std::size_t i = 0; i < ba.m.size(); ++i)
        if (std::abs(ba.m[i]) > mag) {
            mag = std::abs(ba.m[i]);
            best = i;
        }
    if (mag <= tol) return false;
    cplx candidate = ab.m[best] / ba.m[best];
    if (std::abs(std::abs(candidate) - 1.0) > tol) return false;
    if (max_abs_diff(ab, ba.scaled(candidate)) > tol) return false;
    if (lambda) *lambda = candidate;
    return true;
}

std::string family_kind_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Rotation: return "rotation";
        case FamilyKind::Pauli: return "pauli";
        case FamilyKind::HadamardPair: return "hadamard_pair";
        case FamilyKind::TwoQubitPermutation: return "two_qubit_permutation";
        case FamilyKind::TwoQubitDft: return "two_qubit_dft";
        case FamilyKind::QuaternionSet: return "quaternion_set";
    }
    return "unknown";
}

namespace {

UnitaryTransform make2(cplx a, cplx b, cplx c, cplx d) {
    UnitaryTransform r(2);
    r(0, 0) = a;
    r(0, 1) = b;
    r(1, 0) = c;
    r(1, 1) = d;
    return r;
}

UnitaryTransform make4(const double (&rows)[4][4]) {
    UnitaryTransform r(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r(i, j) = cplx{rows[i][j], 0.0};
    return r;
}

}  // namespace

std::vector<UnitaryTransform> pauli_elements() {
    return {
        UnitaryTransform::identity(2),
        make2({0, 0}, {1, 0}, {1, 0}, {0, 0}),
        make2({0, 0}, {0, -1}, {0, 1}, {0, 0}),
        make2({1, 0}, {0, 0}, {0, 0}, {-1, 0}),
    };
}

std::vector<UnitaryTransform> hadamard_pair_elements() {
    const double s = 1.0 / std::sqrt(2.0);
    return {
        UnitaryTransform::identity(2),
        make2({s, 0}, {s, 0}, {s, 0}, {-s, 0}),
    };
}

std::vector<UnitaryTransform> two_qubit_permutation_elements() {
    const double ua[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    const double ub[4][4] = {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    return {make4(ua), make4(ub)};
}

std::vector<UnitaryTransform> two_qubit_dft_elements() {
    UnitaryTransform f(4);
    const cplx w{0.0, 1.0};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            std::size_t p = (r * c) % 4;
            cplx v{1.0, 0.0};
            for (std::size_t k = 0; k < p; ++k) v *= w;
            f(r, c) = 0.5 * v;
        }
    return {UnitaryTransform::identity(4), f};
}

std::vector<UnitaryTransform> quaternion_elements() {
    const double qi[4][4] = {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
    const double qj[4][4] = {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
    const double qk[4][4] = {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}};
    return {UnitaryTransform::identity(4), make4(qi), make4(qj), make4(qk)};
}

UnitaryTransform TransformFamily::sample(Rng& rng) const {
    if (kind == FamilyKind::Rotation)
        return UnitaryTransform::from_jones(rotation_operator(rng.angle_deg()));
    return elements[rng.below(elements.size())];
}

TransformFamily TransformFamily::make(FamilyKind kind) {
    TransformFamily f;
    f.kind = kind;
    switch (kind) {
        case FamilyKind::Rotation:
            f.dim = 2;
            f.commutation = CommutationClass::Exact;
            for (double deg : {0.0, 30.0, 45.0, 90.0, 137.0})
                f.elements.push_back(UnitaryTransform::from_jones(rotation_operator(deg)));
            break;
        case FamilyKind::Pauli:
            f.dim = 2;
            f.commutation = CommutationClass::UpToPhase;
            f.elements = pauli_elements();
            break;
        case FamilyKind::HadamardPair:
            f.dim = 2;
            f.commutation = CommutationClass::Exact;
            f.elements = hadamard_pair_elements();
            break;
        case FamilyKind::TwoQubitPermutation:
            f.dim = 4;
            f.commutation = CommutationClass::Exact;
            f.elements = two_qubit_permutation_elements();
            break;
        case FamilyKind::TwoQubitDft:
            f.dim = 4;
            f.commutation = CommutationClass::Exact;
            f.elements = two_qubit_dft_elements();
            break;
        case FamilyKind::QuaternionSet:
            f.dim = 4;
            f.commutation = CommutationClass::UpToPhase;
            f.elements = quaternion_elements();
            break;
    }
    return f;
}

namespace {

double off_component_mass(const UnitaryTransform& u, const StateVector& state,
                          std::size_t ref_index) {
    StateVector out = u.apply(state);
    double total = 0.0;
    for (const cplx& c : out.a) total += std::norm(c);
    if (total == 0.0) return 0.0;
    return 1.0 - std::norm(out.a[ref_index]) / total;
}

}  // namespace

double masking_probability(const TransformFamily& family, const StateVector& state) {
    if (state.dim() != family.dim) throw std::invalid_argument("dimension mismatch");
    std::size_t ref = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < state.dim(); ++i)
        if (std::norm(state.a[i]) > best) {
            best = std::norm(state.a[i]);
            ref = i;
        }
    if (family.kind == FamilyKind::Rotation) {
        // Average sin^2-type leakage over the continuous angle by midpoint
        // quadrature; the integrand is trigonometric so this converges fast.
        const int steps = 3600;
        double acc = 0.0;
        for (int i = 0; i < steps; ++i) {
            double deg = (i + 0.5) * 360.0 / steps;
            acc += off_component_mass(UnitaryTransform::from_jones(rotation_operator(deg)),
                                      state, ref);
        }
        return acc / steps;
    }
    double acc = 0.0;
    for (const UnitaryTransform& u : family.elements) acc += off_component_mass(u, state, ref);
    return acc / static_cast<double>(family.elements.size());
}

UnitaryTransform random_unitary(std::size_t dim, Rng& rng) {
    // Columns of a Ginibre matrix orthonormalized in order give a
    // Haar-distributed unitary.
    std::vector<StateVector> cols;
    for (std::size_t c = 0; c < dim; ++c) {
        StateVector v(dim);
        for (std::size_t i = 0; i < dim; ++i) v.a[i] = cplx{rng.gaussian(), rng.gaussian()};
        for (const StateVector& prev : cols) {
            cplx proj = inner(prev, v);
            for (std::size_t i = 0; i < dim; ++i) v.a[i] -= proj * prev.a[i];
        }
        cols.push_back(v.normalized());
    }
    UnitaryTransform u(dim);
    for (std::size_t c = 0; c < dim; ++c)
        for (std::size_t r = 0; r < dim; ++r) u(r, c) = cols[c].a[r];
    return u;
}

}  // namespace tsqp
