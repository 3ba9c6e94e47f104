#include "reeblab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace reeb {

namespace {

// Dormand-Prince 5(4), 7 stages.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

// Adaptive integration from t=0 to times.back() with exact hits on the
// requested sample times. post(y) runs after each accepted step (radial
// re-projection); emit(i, t, y) at each sample.
template <int N, class RHS, class Post, class Emit>
void dopri5(const RHS& f, Eigen::Matrix<double, N, 1> y,
            const std::vector<double>& times, const StepControl& ctl,
            const Post& post, const Emit& emit)
{
    using VecN = Eigen::Matrix<double, N, 1>;
    if (times.empty())
        return;
    double t = 0.0;
    std::size_t next = 0;
    if (times[0] <= 0.0) {
        emit(0, 0.0, y);
        next = 1;
    }
    if (next >= times.size())
        return;
    double h = std::min(ctl.h_init, ctl.h_max);
    const double tend = times.back();
    VecN k1, k2, k3, k4, k5, k6, k7, ytmp, y5;
    while (t < tend) {
        bool clipped = false;
        double target = times[next];
        if (t + h >= target) {
            h = target - t;
            clipped = true;
        }
        if (h < ctl.h_min)
            throw StepFailure("adaptive step underflow at t = " + std::to_string(t));

        k1 = f(t, y);
        ytmp = y + h * (a21 * k1);
        k2 = f(t + c2 * h, ytmp);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        k3 = f(t + c3 * h, ytmp);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = f(t + c4 * h, ytmp);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = f(t + c5 * h, ytmp);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = f(t + h, ytmp);
        y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = f(t + h, y5);

        double err = (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7))
                         .template lpNorm<Eigen::Infinity>();
        double ratio = err / ctl.tol_step;
        if (ratio <= 1.0) {
            t += h;
            y = y5;
            post(y);
            while (next < times.size() && t >= times[next] - 1e-14 * std::max(1.0, std::abs(t))) {
                emit(static_cast<int>(next), times[next], y);
                ++next;
            }
            if (next >= times.size())
                return;
        }
        double fac = ratio > 0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        double hnew = h * fac;
        if (clipped && ratio <= 1.0)
            hnew = std::max(hnew, std::min(ctl.h_max, 4 * h));
        h = std::min(hnew, ctl.h_max);
    }
}

std::vector<double> uniform_times(double T, int n)
{
    std::vector<double> ts(n + 1);
    for (int i = 0; i <= n; ++i)
        ts[i] = T * i / n;
    return ts;
}

} // namespace

Vec4 reeb_vector(const StarShapedSystem& sys, const Vec4& z)
{
    return Jmul(sys.gradient(z));
}

void flow_samples(const StarShapedSystem& sys, const Vec4& z0,
                  const std::vector<double>& times, const StepControl& ctl,
                  const std::function<void(int, double, const Vec4&)>& cb)
{
    auto rhs = [&sys](double, const Vec4& z) -> Vec4 { return reeb_vector(sys, z); };
    auto post = [&sys](Vec4& z) { z = sys.project_radial(z); };
    dopri5<4>(rhs, Vec4(z0), times, ctl, post,
              [&cb](int i, double t, const Vec4& z) { cb(i, t, z); });
}

Vec4 flow_state(const StarShapedSystem& sys, const Vec4& z0, double T,
                const StepControl& ctl)
{
    if (T == 0.0)
        return z0;
    Vec4 out = z0;
    flow_samples(sys, z0, {T}, ctl,
                 [&out](int, double, const Vec4& z) { out = z; });
    return out;
}

Trajectory integrate(const StarShapedSystem& sys, const SurfacePoint& z0,
                     double T, int n_samples, const StepControl& ctl)
{
    if (T < 0)
        throw Error("integrate: T must be >= 0");
    Trajectory traj;
    if (T == 0.0) {
        traj.t_samples = {0.0};
        traj.states = {z0};
        return traj;
    }
    traj.t_samples = uniform_times(T, n_samples);
    traj.states.resize(traj.t_samples.size());
    flow_samples(sys, z0.z, traj.t_samples, ctl,
                 [&](int i, double, const Vec4& z) {
                     SurfacePoint p;
                     p.z = sys.project_radial(z);
                     p.residual = std::abs(sys.hamiltonian(p.z) - 1.0);
                     traj.states[i] = p;
                     traj.max_residual = std::max(traj.max_residual, p.residual);
                 });
    return traj;
}

void flow_variational_samples(
    const StarShapedSystem& sys, const Vec4& z0, const std::vector<double>& times,
    const StepControl& ctl,
    const std::function<void(int, double, const Vec4&, const Mat4&)>& cb)
{
    using Y = Eigen::Matrix<double, 20, 1>;
    auto pack = [](const Vec4& z, const Mat4& V) {
        Y y;
        y.segment<4>(0) = z;
        for (int c = 0; c < 4; ++c)
            y.segment<4>(4 + 4 * c) = V.col(c);
        return y;
    };
    auto unpack_z = [](const Y& y) { return Vec4(y.segment<4>(0)); };
    auto unpack_V = [](const Y& y) {
        Mat4 V;
        for (int c = 0; c < 4; ++c)
            V.col(c) = y.segment<4>(4 + 4 * c);
        return V;
    };

    auto rhs = [&](double, const Y& y) -> Y {
        Vec4 z = unpack_z(y);
        Mat4 V = unpack_V(y);
        Mat4 DX = Jmat() * sys.hessian(z);
        return pack(reeb_vector(sys, z), Mat4(DX * V));
    };
    auto post = [&](Y& y) {
        Vec4 z = sys.project_radial(unpack_z(y));
        y.segment<4>(0) = z;
    };
    dopri5<20>(rhs, pack(z0, Mat4::Identity()), times, ctl, post,
               [&](int i, double t, const Y& y) { cb(i, t, unpack_z(y), unpack_V(y)); });
}

ContactFrame disk_frame_on_axis(const StarShapedSystem& sys, const Vec4& z)
{
    if (!sys.is_split())
        throw Error("disk-aligned frame is only defined for split systems");
    double n0 = std::hypot(z[0], z[1]), n1 = std::hypot(z[2], z[3]);
    ContactFrame f;
    if (n1 < 1e-9 * n0) {
        f.e1 = Vec4(0, 0, 1, 0);
        f.e2 = Vec4(0, 0, 0, 1);
    } else if (n0 < 1e-9 * n1) {
        f.e1 = Vec4(1, 0, 0, 0);
        f.e2 = Vec4(0, 1, 0, 0);
    } else {
        throw Error("disk-aligned frame requested off the axis orbits");
    }
    return f;
}

SymplecticPath transverse_linearized(const StarShapedSystem& sys,
                                     const SurfacePoint& z0, double T,
                                     int n_samples, FrameTag frame,
                                     const StepControl& ctl)
{
    if (!(T > 0))
        throw Error("transverse_linearized: T must be > 0");
    SymplecticPath path;
    path.T = T;
    path.frame = frame;
    path.t = uniform_times(T, n_samples);
    path.Phi.resize(path.t.size());

    Mat42 E0;
    if (frame == FrameTag::global) {
        ContactFrame f0 = global_frame(sys, z0);
        E0.col(0) = f0.e1;
        E0.col(1) = f0.e2;
    } else {
        ContactFrame f0 = disk_frame_on_axis(sys, z0.z);
        E0.col(0) = f0.e1;
        E0.col(1) = f0.e2;
    }

    flow_variational_samples(
        sys, z0.z, path.t, ctl, [&](int i, double, const Vec4& z, const Mat4& V) {
            SurfacePoint p{z, std::abs(sys.hamiltonian(z) - 1.0)};
            ContactFrame f = (frame == FrameTag::global)
                                 ? global_frame(sys, p)
                                 : disk_frame_on_axis(sys, z);
            path.Phi[i] = xi_compression(f) * V * E0;
        });

    for (const Mat2& M : path.Phi) {
        double d = M.determinant();
        if (std::abs(d - 1.0) > 1e-7)
            throw Error("transverse path lost symplecticity, det = " + std::to_string(d));
    }
    return path;
}

namespace {

double principal_delta(double from, double to)
{
    double d = to - from;
    while (d > M_PI)
        d -= 2 * M_PI;
    while (d <= -M_PI)
        d += 2 * M_PI;
    return d;
}

} // namespace

AngleLift polar_angle(const SymplecticPath& path, const Vec2& u0)
{
    if (u0.norm() == 0)
        throw Error("polar_angle: u0 must be nonzero");
    AngleLift lift;
    lift.t = path.t;
    lift.theta.resize(path.t.size());
    Vec2 u = path.Phi[0] * u0;
    double theta = std::atan2(u[1], u[0]);
    lift.theta[0] = theta;
    double prev_raw = theta;
    for (std::size_t i = 1; i < path.Phi.size(); ++i) {
        u = path.Phi[i] * u0;
        double raw = std::atan2(u[1], u[0]);
        double d = principal_delta(prev_raw, raw);
        if (std::abs(d) >= M_PI / 2)
            throw GridTooCoarse("angle increment " + std::to_string(d) +
                                " at sample " + std::to_string(i));
        theta += d;
        lift.theta[i] = theta;
        prev_raw = raw;
    }
    return lift;
}

AngleLift polar_angle_extended(const SymplecticPath& one_period, int n_periods,
                               const Vec2& u0)
{
    if (u0.norm() == 0)
        throw Error("polar_angle: u0 must be nonzero");
    const Mat2 M = one_period.Phi.back();
    const double T0 = one_period.T;
    AngleLift lift;
    std::size_t n = one_period.Phi.size();
    lift.t.reserve(1 + n_periods * (n - 1));
    lift.theta.reserve(lift.t.capacity());

    Mat2 Mk = Mat2::Identity();
    Vec2 u = one_period.Phi[0] * u0;
    double theta = std::atan2(u[1], u[0]);
    double prev_raw = theta;
    lift.t.push_back(0.0);
    lift.theta.push_back(theta);
    for (int k = 0; k < n_periods; ++k) {
        Vec2 v0 = Mk * u0;
        for (std::size_t i = 1; i < n; ++i) {
            u = one_period.Phi[i] * v0;
            double raw = std::atan2(u[1], u[0]);
            double d = principal_delta(prev_raw, raw);
            if (std::abs(d) >= M_PI / 2)
                throw GridTooCoarse("angle increment too large; refine the one-period grid");
            theta += d;
            lift.t.push_back(k * T0 + one_period.t[i]);
            lift.theta.push_back(theta);
            prev_raw = raw;
        }
        Mk = M * Mk;
    }
    return lift;
}

void trajectory_to_csv(const Trajectory& traj, std::ostream& os)
{
    os << "t,x0,y0,x1,y1\n";
    char buf[160];
    for (std::size_t i = 0; i < traj.t_samples.size(); ++i) {
        const Vec4& z = traj.states[i].z;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      traj.t_samples[i], z[0], z[1], z[2], z[3]);
        os << buf;
    }
}

} // namespace reeb
