#ifndef REEBLAB_GEOMETRY_HPP
#define REEBLAB_GEOMETRY_HPP

#include <memory>
#include <string>
#include <map>

#include "reeblab/types.hpp"
#include "reeblab/errors.hpp"

namespace reeb {

// A positively 2-homogeneous Hamiltonian on R^4 \ {0}. The energy
// hypersurface Sigma = H^{-1}(1) carries the contact form induced by the
// standard Liouville form alpha0 = (1/2) sum (x dy - y dx).
class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;
    virtual double value(const Vec4& z) const = 0;
    virtual Vec4 gradient(const Vec4& z) const = 0;
    virtual Mat4 hessian(const Vec4& z) const = 0;
};

struct SurfacePoint {
    Vec4 z;
    double residual = 0.0; // |H(z) - 1|
};

struct ContactFrame {
    Vec4 e1;
    Vec4 e2;
};

class StarShapedSystem {
public:
    enum class Kind { split, custom };

    static StarShapedSystem split(double a, double b, std::string label = "");
    // Named registry entries, e.g. "perturbed_split" with params a, b, epsilon.
    static StarShapedSystem custom(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   std::string label = "");

    Kind kind() const { return kind_; }
    bool is_split() const { return kind_ == Kind::split; }
    double split_a() const { return a_; }
    double split_b() const { return b_; }
    const std::string& label() const { return label_; }
    const std::string& custom_name() const { return custom_name_; }

    double hamiltonian(const Vec4& z) const { return impl_->value(z); }
    Vec4 gradient(const Vec4& z) const { return impl_->gradient(z); }
    Mat4 hessian(const Vec4& z) const { return impl_->hessian(z); }

    // Radial projection z -> z / sqrt(H(z)); exact because H is 2-homogeneous.
    Vec4 project_radial(const Vec4& z) const;
    SurfacePoint surface_point(const Vec4& z, double surface_tol = 1e-10) const;

    const Tolerances& tol() const { return tol_; }
    Tolerances& tol() { return tol_; }

private:
    StarShapedSystem() = default;
    Kind kind_ = Kind::split;
    double a_ = 1.0, b_ = 1.0;
    std::string label_;
    std::string custom_name_;
    std::shared_ptr<const Hamiltonian> impl_;
    Tolerances tol_;
};

// alpha0 at z applied to v.
double contact_eval(const SurfacePoint& z, const Vec4& v);
double contact_eval(const Vec4& z, const Vec4& v);

// Reeb vector field X = J grad H on Sigma. Verifies lambda(X) = 1 and that
// i_X dlambda vanishes on tangent test vectors; throws DegenerateGradient if
// |grad H| is below 1e-12.
Vec4 reeb_field(const StarShapedSystem& sys, const SurfacePoint& z);

// Global dlambda-symplectic frame of ker(lambda) over Sigma: quaternionic
// sections jz, kz projected into T Sigma along the radial direction and
// rescaled so dlambda(e1, e2) = 1. On the round sphere this is (jz, kz).
ContactFrame global_frame(const StarShapedSystem& sys, const SurfacePoint& z);

// Directional derivative of the global frame along a tangent direction w,
// computed in closed form from grad H and Hess H. Needed when the frame is
// dragged along a trajectory.
struct FrameDerivative {
    ContactFrame frame;
    Vec4 de1;
    Vec4 de2;
};
FrameDerivative global_frame_derivative(const StarShapedSystem& sys,
                                        const Vec4& z, const Vec4& w);

// Coordinates of pi_lambda(v) = v - lambda(v) X in the frame (e1, e2),
// for v tangent to Sigma. Throws NotTangent if dH(v) is too large.
Vec2 project_xi(const StarShapedSystem& sys, const SurfacePoint& z,
                const Vec4& v);

// Frame-coordinate compression at a point: row-major 2x4 matrix P with
// P v = coordinates of pi_lambda(v) in (e1, e2). Since omega0(X, e_i) = 0
// for e_i tangent to Sigma, P v = (omega0(v, e2), -omega0(v, e1)).
Mat24 xi_compression(const ContactFrame& f);

} // namespace reeb

#endif
