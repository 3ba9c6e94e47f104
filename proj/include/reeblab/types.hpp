#ifndef REEBLAB_TYPES_HPP
#define REEBLAB_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>

namespace reeb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

// Coordinates on R^4 are (x0, y0, x1, y1), identified with (z0, z1) in C^2.

// Standard complex structure, multiplication by i on both factors.
inline Mat4 Jmat()
{
    Mat4 J = Mat4::Zero();
    J(0, 1) = -1; J(1, 0) = 1;
    J(2, 3) = -1; J(3, 2) = 1;
    return J;
}

inline Vec4 Jmul(const Vec4& v)
{
    return Vec4(-v[1], v[0], -v[3], v[2]);
}

// Left quaternion multiplication by j and k under
// (x0, y0, x1, y1) <-> x0 + i y0 + j x1 + k y1.
inline Vec4 quat_j(const Vec4& z)
{
    return Vec4(-z[2], z[3], z[0], -z[1]);
}

inline Vec4 quat_k(const Vec4& z)
{
    return Vec4(-z[3], -z[2], z[1], z[0]);
}

// omega0(u, v) = sum dx_j ^ dy_j = <J u, v>
inline double omega0(const Vec4& u, const Vec4& v)
{
    return Jmul(u).dot(v);
}

inline Mat2 J2()
{
    Mat2 J;
    J << 0, -1, 1, 0;
    return J;
}

struct Tolerances {
    double surface_tol = 1e-10;   // |H - 1| on surface points
    double frame_tol = 1e-9;      // contact frame invariant checks
    double tol_step = 1e-10;      // integrator local error per step
    double orbit_tol = 1e-9;      // periodic orbit closure
    double dedup_tol = 1e-6;      // orbit deduplication distance
    double ndg_tol = 1e-6;        // |eig - 1| margin for nondegeneracy
    double spec_tol = 1e-6;       // spectral residual / near-delta warning
    double curve_h = 1e-2;        // max gap between closed-curve samples
    double tube_excl = 1e-2;      // exclusion radius around link components
    double rho_tol = 1e-4;        // rotation-number positivity margin
    double mu_tol = 1e-4;         // intersection-estimate positivity margin
    double cross_tol = 1e-6;      // transversality margin at page crossings
};

using Seed = std::uint64_t;

} // namespace reeb

#endif
