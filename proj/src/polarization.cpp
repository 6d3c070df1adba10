#include "tsqp/polarization.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tsqp {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

double normalize_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r;
}

double shortest_arc_deg(double from, double to) {
    double d = std::fmod(to - from, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

double JonesVector::norm() const { return std::sqrt(std::norm(c0) + std::norm(c1)); }

bool JonesVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

JonesVector JonesVector::normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero Jones vector");
    return {c0 / n, c1 / n};
}

JonesVector JonesVector::linear(double angle_deg) {
    double a = deg_to_rad(angle_deg);
    return {std::cos(a), std::sin(a)};
}

cplx inner(const JonesVector& a, const JonesVector& b) {
    return std::conj(a.c0) * b.c0 + std::conj(a.c1) * b.c1;
}

bool ray_equal(const JonesVector& a, const JonesVector& b, double tol) {
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return false;
    return std::abs(std::abs(inner(a, b)) / (na * nb) - 1.0) <= tol;
}

double polarization_angle_deg(const JonesVector& v) {
    // For linear polarization the ray has a representative with real
    // components (cos a, sin a); recover a mod 180 from the Stokes params.
    StokesVector s = jones_to_stokes(v.normalized());
    if (std::abs(s.s3) > kTolTrig)
        throw std::invalid_argument("state is not linearly polarized");
    double a = 0.5 * std::atan2(s.s2, s.s1) * 180.0 / std::numbers::pi;
    if (a < 0.0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
}

JonesVector JonesOperator::apply(const JonesVector& v) const {
    return {m[0] * v.c0 + m[1] * v.c1, m[2] * v.c0 + m[3] * v.c1};
}

JonesOperator JonesOperator::operator*(const JonesOperator& o) const {
    JonesOperator r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            cplx acc{0.0, 0.0};
            for (int k = 0; k < 2; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    return r;
}

JonesOperator JonesOperator::dagger() const {
    JonesOperator r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
}

bool JonesOperator::is_unitary(double tol) const {
    return max_abs_diff(dagger() * (*this), identity()) <= tol;
}

double StokesVector::degree_of_polarization() const {
    if (s0 <= 0.0) return 0.0;
    return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3) / s0;
}

bool StokesVector::is_physical(double tol) const {
    if (s0 < -tol) return false;
    return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3) <= s0 + tol;
}

StokesVector StokesVector::linear(double angle_deg, double intensity) {
    double a2 = deg_to_rad(2.0 * angle_deg);
    return {intensity, intensity * std::cos(a2), intensity * std::sin(a2), 0.0};
}

bool approx_equal(const StokesVector& a, const StokesVector& b, double tol) {
    return std::abs(a.s0 - b.s0) <= tol && std::abs(a.s1 - b.s1) <= tol &&
           std::abs(a.s2 - b.s2) <= tol && std::abs(a.s3 - b.s3) <= tol;
}

MuellerMatrix MuellerMatrix::operator*(const MuellerMatrix& o) const {
    MuellerMatrix r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    return r;
}

double max_abs_diff(const MuellerMatrix& a, const MuellerMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < 16; ++i) d = std::max(d, std::abs(a.m[i] - b.m[i]));
    return d;
}

double max_abs_diff(const JonesOperator& a, const JonesOperator& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a.m[i] - b.m[i]));
    return d;
}

JonesOperator rotation_operator(double theta_deg) {
    double t = deg_to_rad(theta_deg);
    JonesOperator r;
    r(0, 0) = std::cos(t);
    r(0, 1) = -std::sin(t);
    r(1, 0) = std::sin(t);
    r(1, 1) = std::cos(t);
    return r;
}

MuellerMatrix half_wave_plate_mueller(double m_deg) {
    double a = deg_to_rad(4.0 * m_deg);
    MuellerMatrix r;
    r(1, 1) = std::cos(a);
    r(1, 2) = std::sin(a);
    r(2, 1) = std::sin(a);
    r(2, 2) = -std::cos(a);
    r(3, 3) = -1.0;
    return r;
}

JonesOperator half_wave_plate_jones(double m_deg) {
    double a = deg_to_rad(2.0 * m_deg);
    JonesOperator r;
    r(0, 0) = std::cos(a);
    r(0, 1) = std::sin(a);
    r(1, 0) = std::sin(a);
    r(1, 1) = -std::cos(a);
    return r;
}

MuellerMatrix linear_polarizer_mueller(double angle_deg) {
    double a = deg_to_rad(2.0 * angle_deg);
    double c = std::cos(a);
    double s = std::sin(a);
    MuellerMatrix r;
    double rows[4][4] = {{1.0, c, s, 0.0},
                         {c, c * c, c * s, 0.0},
                         {s, c * s, s * s, 0.0},
                         {0.0, 0.0, 0.0, 0.0}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = 0.5 * rows[i][j];
    return r;
}

MuellerMatrix rotation_mueller(double theta_deg) {
    double a = deg_to_rad(2.0 * theta_deg);
    MuellerMatrix r;
    r(1, 1) = std::cos(a);
    r(1, 2) = -std::sin(a);
    r(2, 1) = std::sin(a);
    r(2, 2) = std::cos(a);
    return r;
}

StokesVector apply_mueller(const MuellerMatrix& m, const StokesVector& s) {
    double in[4] = {s.s0, s.s1, s.s2, s.s3};
    double out[4] = {0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i] += m(i, j) * in[j];
    return {out[0], out[1], out[2], out[3]};
}

StokesVector jones_to_stokes(const JonesVector& v, double intensity) {
    if (!v.is_normalized(1e-9))
        throw std::invalid_argument("jones_to_stokes requires a normalized state");
    double s1 = std::norm(v.c0) - std::norm(v.c1);
    cplx cross = std::conj(v.c0) * v.c1;
    return {intensity, intensity * s1, intensity * 2.0 * cross.real(),
            intensity * 2.0 * cross.imag()};
}

JonesVector stokes_to_jones(const StokesVector& s) {
    if (s.s0 <= 0.0) throw std::invalid_argument("stokes_to_jones requires positive intensity");
    if (std::abs(s.degree_of_polarization() - 1.0) > 1e-6)
        throw std::invalid_argument("stokes_to_jones requires fully polarized light");
    double p1 = s.s1 / s.s0;
    double p2 = s.s2 / s.s0;
    double p3 = s.s3 / s.s0;
    // |c0|^2 = (1 + p1) / 2; choose c0 real and non-negative.
    double a = std::sqrt(std::max(0.0, (1.0 + p1) / 2.0));
    if (a < 1e-12) return {cplx{0.0, 0.0}, cplx{1.0, 0.0}};
    // conj(c0) c1 = (p2 + i p3) / 2 with c0 = a real.
    cplx c1 = cplx{p2 / 2.0, p3 / 2.0} / a;
    JonesVector v{a, c1};
    return v.normalized();
}

MuellerMatrix jones_to_mueller(const JonesOperator& u) {
    if (!u.is_unitary(kTolTrig))
        throw std::invalid_argument("jones_to_mueller requires a unitary operator");
    // Pauli basis ordered to match Stokes components: sigma_0 = I picks s0,
    // sigma_1 = Z picks s1 (H-V), sigma_2 = X picks s2, sigma_3 = Y picks s3.
    static const JonesOperator sigma[4] = {
        JonesOperator{{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}},
        JonesOperator{{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}}},
        JonesOperator{{cplx{0, 0}, cplx{1, 0}, cplx{1, 0}, cplx{0, 0}}},
        JonesOperator{{cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0}}}};
    MuellerMatrix r;
    JonesOperator ud = u.dagger();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            JonesOperator p = sigma[i] * u * sigma[j] * ud;
            r(i, j) = 0.5 * (p(0, 0) + p(1, 1)).real();
        }
    return r;
}

}  // namespace tsqp
