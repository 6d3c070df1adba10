#pragma once

#include <array>
#include <complex>

namespace tsqp {

using cplx = std::complex<double>;

/// Tolerance for pure algebra (unitarity, exact matrix identities).
inline constexpr double kTolAlgebra = 1e-12;
/// Tolerance for anything passing through trigonometric round trips.
inline constexpr double kTolTrig = 1e-9;

double deg_to_rad(double deg);
/// Normalize an angle to [0, 360).
double normalize_deg(double deg);
/// Shortest signed arc from `from` to `to`, in (-180, 180].
double shortest_arc_deg(double from, double to);

/// Fully polarized light in the Jones calculus: complex amplitudes of the
/// horizontal (c0) and vertical (c1) field components. States are rays;
/// use ray_equal for comparisons that ignore global phase.
struct JonesVector {
    cplx c0{1.0, 0.0};
    cplx c1{0.0, 0.0};

    double norm() const;
    bool is_normalized(double tol = kTolTrig) const;
    JonesVector normalized() const;

    /// Linear polarization at `angle` degrees from horizontal: (cos a, sin a).
    static JonesVector linear(double angle_deg);
    static JonesVector horizontal() { return {1.0, 0.0}; }
    static JonesVector vertical() { return {0.0, 1.0}; }
};

cplx inner(const JonesVector& a, const JonesVector& b);
/// Equality up to a global phase: |<a|b>| = 1 within tol (for unit vectors).
bool ray_equal(const JonesVector& a, const JonesVector& b, double tol = kTolAlgebra);
/// Axis angle in degrees ([0, 180)) of a linearly polarized state.
double polarization_angle_deg(const JonesVector& v);

/// 2x2 complex operator acting on Jones vectors. Row-major storage.
struct JonesOperator {
    std::array<cplx, 4> m{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};

    cplx operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
    cplx& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }

    JonesVector apply(const JonesVector& v) const;
    JonesOperator operator*(const JonesOperator& o) const;
    JonesOperator dagger() const;
    bool is_unitary(double tol = kTolAlgebra) const;

    static JonesOperator identity() { return {}; }
};

/// Stokes parameters (s0 total intensity; s1 H-V; s2 +45/-45; s3 circular).
/// Physical states satisfy s1^2 + s2^2 + s3^2 <= s0^2, with equality for
/// fully polarized light.
struct StokesVector {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;

    double degree_of_polarization() const;
    bool is_physical(double tol = kTolTrig) const;

    static StokesVector horizontal(double intensity = 1.0) {
        return {intensity, intensity, 0.0, 0.0};
    }
    static StokesVector vertical(double intensity = 1.0) {
        return {intensity, -intensity, 0.0, 0.0};
    }
    /// Fully polarized linear light at `angle` degrees.
    static StokesVector linear(double angle_deg, double intensity = 1.0);
};

bool approx_equal(const StokesVector& a, const StokesVector& b, double tol);

/// 4x4 real Mueller matrix. Row-major storage; acts on Stokes column vectors.
struct MuellerMatrix {
    std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(4 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(4 * r + c)]; }

    MuellerMatrix operator*(const MuellerMatrix& o) const;
    static MuellerMatrix identity() { return {}; }
};

double max_abs_diff(const MuellerMatrix& a, const MuellerMatrix& b);
double max_abs_diff(const JonesOperator& a, const JonesOperator& b);

/// Plane rotation of the polarization direction by theta degrees:
/// [[cos t, -sin t], [sin t, cos t]].
JonesOperator rotation_operator(double theta_deg);

/// Half-wave plate with fast axis at m degrees, Mueller form:
/// rows (1,0,0,0), (0,cos4m,sin4m,0), (0,sin4m,-cos4m,0), (0,0,0,-1).
MuellerMatrix half_wave_plate_mueller(double m_deg);

/// Half-wave plate in the Jones calculus: [[cos2m, sin2m], [sin2m, -cos2m]].
/// Its induced Mueller matrix equals half_wave_plate_mueller(m).
JonesOperator half_wave_plate_jones(double m_deg);

/// Ideal linear polarizer with transmission axis at `angle` degrees.
/// Transmitted fraction for polarized input at a follows Malus's law,
/// cos^2(a - angle).
MuellerMatrix linear_polarizer_mueller(double angle_deg);

/// Mueller rotation matrix induced by rotation_operator(theta): rotates the
/// (s1, s2) plane by 2*theta.
MuellerMatrix rotation_mueller(double theta_deg);

StokesVector apply_mueller(const MuellerMatrix& m, const StokesVector& s);

/// Map a normalized Jones vector to a fully polarized Stokes vector of the
/// given intensity. Throws std::invalid_argument if v is not normalized
/// (tolerance 1e-9).
StokesVector jones_to_stokes(const JonesVector& v, double intensity = 1.0);

/// Inverse of jones_to_stokes for fully polarized light, up to global phase.
/// Throws std::invalid_argument if s is not fully polarized within 1e-6.
JonesVector stokes_to_jones(const StokesVector& s);

/// Mueller matrix induced by a unitary Jones operator: for all states v,
/// jones_to_stokes(u v) = jones_to_mueller(u) * jones_to_stokes(v).
/// Throws std::invalid_argument if u is not unitary.
MuellerMatrix jones_to_mueller(const JonesOperator& u);

}  // namespace tsqp
