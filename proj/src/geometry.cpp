#include "reeblab/geometry.hpp"

#include <cmath>
#include <complex>

namespace reeb {

namespace {

using cplx = std::complex<double>;

class SplitHamiltonian final : public Hamiltonian {
public:
    SplitHamiltonian(double a, double b) : a_(a), b_(b) {}

    double value(const Vec4& z) const override
    {
        return (z[0] * z[0] + z[1] * z[1]) / a_ + (z[2] * z[2] + z[3] * z[3]) / b_;
    }
    Vec4 gradient(const Vec4& z) const override
    {
        return Vec4(2 * z[0] / a_, 2 * z[1] / a_, 2 * z[2] / b_, 2 * z[3] / b_);
    }
    Mat4 hessian(const Vec4&) const override
    {
        Vec4 d(2 / a_, 2 / a_, 2 / b_, 2 / b_);
        return d.asDiagonal();
    }

private:
    double a_, b_;
};

// Split Hamiltonian plus eps * Re(z0^2 conj(z1)^2) / |z|^2. The correction is
// 2-homogeneous and vanishes on both axis circles together with its gradient,
// so the axis orbits and their periods survive while the transverse
// linearization picks up t-dependent coefficients.
class PerturbedSplitHamiltonian final : public Hamiltonian {
public:
    PerturbedSplitHamiltonian(double a, double b, double eps)
        : base_(a, b), eps_(eps) {}

    double value(const Vec4& z) const override
    {
        return base_.value(z) + eps_ * u(z) / z.squaredNorm();
    }

    Vec4 gradient(const Vec4& z) const override
    {
        double q = z.squaredNorm();
        return base_.gradient(z)
            + eps_ * (grad_u(z) / q - (u(z) / (q * q)) * (2.0 * z));
    }

    Mat4 hessian(const Vec4& z) const override
    {
        double q = z.squaredNorm();
        double uv = u(z);
        Vec4 gu = grad_u(z);
        Vec4 gq = 2.0 * z;
        Mat4 h = hess_u(z) / q;
        h -= (gu * gq.transpose() + gq * gu.transpose()) / (q * q);
        h -= (uv / (q * q)) * 2.0 * Mat4::Identity();
        h += (2.0 * uv / (q * q * q)) * (gq * gq.transpose());
        return base_.hessian(z) + eps_ * h;
    }

private:
    static cplx z0(const Vec4& z) { return {z[0], z[1]}; }
    static cplx z1(const Vec4& z) { return {z[2], z[3]}; }

    static double u(const Vec4& z)
    {
        cplx w = z0(z) * z0(z) * std::conj(z1(z)) * std::conj(z1(z));
        return w.real();
    }

    static Vec4 grad_u(const Vec4& z)
    {
        cplx a = z0(z), bc = std::conj(z1(z));
        cplx dwx0 = 2.0 * a * bc * bc;
        cplx dwy0 = cplx(0, 1) * dwx0;
        cplx dwx1 = 2.0 * a * a * bc;
        cplx dwy1 = cplx(0, -1) * dwx1;
        return Vec4(dwx0.real(), dwy0.real(), dwx1.real(), dwy1.real());
    }

    static Mat4 hess_u(const Vec4& z)
    {
        cplx a = z0(z), bc = std::conj(z1(z));
        cplx bc2 = bc * bc, a2 = a * a, ab = a * bc;
        const cplx I(0, 1);
        Mat4 h;
        h(0, 0) = (2.0 * bc2).real();
        h(0, 1) = (2.0 * I * bc2).real();
        h(1, 1) = (-2.0 * bc2).real();
        h(0, 2) = (4.0 * ab).real();
        h(0, 3) = (-4.0 * I * ab).real();
        h(1, 2) = (4.0 * I * ab).real();
        h(1, 3) = (4.0 * ab).real();
        h(2, 2) = (2.0 * a2).real();
        h(2, 3) = (-2.0 * I * a2).real();
        h(3, 3) = (-2.0 * a2).real();
        h(1, 0) = h(0, 1);
        h(2, 0) = h(0, 2); h(2, 1) = h(1, 2);
        h(3, 0) = h(0, 3); h(3, 1) = h(1, 3); h(3, 2) = h(2, 3);
        return h;
    }

    SplitHamiltonian base_;
    double eps_;
};

// Raw quaternionic frame with radial projection into T Sigma; returns the
// unscaled pair and the normalization dlambda(e1', e2').
struct RawFrame {
    Vec4 e1p, e2p;
    double c;
};

RawFrame raw_frame(const StarShapedSystem& sys, const Vec4& z)
{
    Vec4 g = sys.gradient(z);
    double gz = g.dot(z); // = 2 H(z) by Euler's identity
    Vec4 e1 = quat_j(z), e2 = quat_k(z);
    RawFrame rf;
    rf.e1p = e1 - (g.dot(e1) / gz) * z;
    rf.e2p = e2 - (g.dot(e2) / gz) * z;
    rf.c = omega0(rf.e1p, rf.e2p);
    return rf;
}

} // namespace

StarShapedSystem StarShapedSystem::split(double a, double b, std::string label)
{
    if (!(a > 0) || !(b > 0))
        throw ConfigError("split system needs a, b > 0");
    StarShapedSystem s;
    s.kind_ = Kind::split;
    s.a_ = a;
    s.b_ = b;
    s.label_ = label.empty() ? "split" : std::move(label);
    s.impl_ = std::make_shared<SplitHamiltonian>(a, b);
    return s;
}

StarShapedSystem StarShapedSystem::custom(const std::string& name,
                                          const std::map<std::string, double>& params,
                                          std::string label)
{
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    StarShapedSystem s;
    s.kind_ = Kind::custom;
    s.custom_name_ = name;
    s.label_ = label.empty() ? name : std::move(label);
    if (name == "perturbed_split") {
        double a = get("a", 1.0), b = get("b", 1.0), eps = get("epsilon", 0.0);
        if (!(a > 0) || !(b > 0))
            throw ConfigError("perturbed_split needs a, b > 0");
        if (std::abs(eps) >= 0.5)
            throw ConfigError("perturbed_split: |epsilon| must be < 0.5 to keep H positive");
        s.a_ = a;
        s.b_ = b;
        s.impl_ = std::make_shared<PerturbedSplitHamiltonian>(a, b, eps);
    } else {
        throw ConfigError("unknown custom Hamiltonian '" + name + "'");
    }
    return s;
}

Vec4 StarShapedSystem::project_radial(const Vec4& z) const
{
    double h = hamiltonian(z);
    if (!(h > 0))
        throw Error("radial projection: H(z) <= 0");
    return z / std::sqrt(h);
}

SurfacePoint StarShapedSystem::surface_point(const Vec4& z, double surface_tol) const
{
    SurfacePoint p;
    p.z = project_radial(z);
    p.residual = std::abs(hamiltonian(p.z) - 1.0);
    if (p.residual > surface_tol)
        throw Error("surface point residual " + std::to_string(p.residual));
    return p;
}

double contact_eval(const Vec4& z, const Vec4& v)
{
    return 0.5 * Jmul(z).dot(v);
}

double contact_eval(const SurfacePoint& z, const Vec4& v)
{
    return contact_eval(z.z, v);
}

Vec4 reeb_field(const StarShapedSystem& sys, const SurfacePoint& p)
{
    Vec4 g = sys.gradient(p.z);
    if (g.norm() < 1e-12)
        throw DegenerateGradient("gradient vanishes on the hypersurface");
    Vec4 X = Jmul(g);

    // Re-verify the defining equations so Hamiltonians that break
    // homogeneity are caught at runtime.
    double lam = contact_eval(p.z, X);
    if (std::abs(lam - 1.0) > sys.tol().frame_tol * 10)
        throw Error("reeb_field: lambda(X) = " + std::to_string(lam));
    double gz = g.dot(p.z);
    Vec4 t1 = Vec4(0, 1, 0, 0), t2 = Vec4(0, 0, 0, 1);
    t1 -= (g.dot(t1) / gz) * p.z;
    t2 -= (g.dot(t2) / gz) * p.z;
    double scale = std::max(1.0, X.norm());
    if (std::abs(omega0(X, t1)) > sys.tol().frame_tol * 10 * scale * t1.norm() ||
        std::abs(omega0(X, t2)) > sys.tol().frame_tol * 10 * scale * t2.norm())
        throw Error("reeb_field: i_X dlambda does not vanish on T Sigma");
    return X;
}

ContactFrame global_frame(const StarShapedSystem& sys, const SurfacePoint& p)
{
    RawFrame rf = raw_frame(sys, p.z);
    if (std::abs(rf.c) < 1e-8)
        throw FrameDegenerate("projected quaternionic pair degenerate, dlambda(e1',e2') = "
                              + std::to_string(rf.c));
    if (rf.c < 0)
        throw FrameDegenerate("frame orientation reversed; hypersurface too far from round");
    double s = 1.0 / std::sqrt(rf.c);
    return ContactFrame{rf.e1p * s, rf.e2p * s};
}

FrameDerivative global_frame_derivative(const StarShapedSystem& sys,
                                        const Vec4& z, const Vec4& w)
{
    Vec4 g = sys.gradient(z);
    Mat4 hs = sys.hessian(z);
    double gz = g.dot(z);
    Vec4 hw = hs * w;
    double dgz = hw.dot(z) + g.dot(w); // d/dt (g . z)

    auto project = [&](const Vec4& u) { return Vec4(u - (g.dot(u) / gz) * z); };
    auto dproject = [&](const Vec4& u, const Vec4& du) {
        double gu = g.dot(u);
        double dgu = hw.dot(u) + g.dot(du);
        return Vec4(du - ((dgu * gz - gu * dgz) / (gz * gz)) * z - (gu / gz) * w);
    };

    Vec4 e1r = quat_j(z), e2r = quat_k(z);
    Vec4 de1r = quat_j(w), de2r = quat_k(w);
    Vec4 e1p = project(e1r), e2p = project(e2r);
    Vec4 de1p = dproject(e1r, de1r), de2p = dproject(e2r, de2r);

    double c = omega0(e1p, e2p);
    if (std::abs(c) < 1e-8 || c < 0)
        throw FrameDegenerate("frame degenerate along derivative evaluation");
    double dc = omega0(de1p, e2p) + omega0(e1p, de2p);

    double s = 1.0 / std::sqrt(c);
    FrameDerivative out;
    out.frame.e1 = e1p * s;
    out.frame.e2 = e2p * s;
    out.de1 = de1p * s - (dc / (2 * c)) * out.frame.e1;
    out.de2 = de2p * s - (dc / (2 * c)) * out.frame.e2;
    return out;
}

Mat24 xi_compression(const ContactFrame& f)
{
    Mat24 P;
    P.row(0) = -Jmul(f.e2).transpose();
    P.row(1) = Jmul(f.e1).transpose();
    return P;
}

Vec2 project_xi(const StarShapedSystem& sys, const SurfacePoint& p, const Vec4& v)
{
    Vec4 g = sys.gradient(p.z);
    double dHv = g.dot(v);
    if (std::abs(dHv) > 1e-8 * std::max(1.0, g.norm() * v.norm()))
        throw NotTangent("project_xi: dH(v) = " + std::to_string(dHv));
    return xi_compression(global_frame(sys, p)) * v;
}

} // namespace reeb
