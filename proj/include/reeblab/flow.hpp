#ifndef REEBLAB_FLOW_HPP
#define REEBLAB_FLOW_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "reeblab/geometry.hpp"

namespace reeb {

struct StepControl {
    double tol_step = 1e-10; // local error per step
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.25;
};

struct Trajectory {
    std::vector<double> t_samples;
    std::vector<SurfacePoint> states;
    int interpolation_order = 5;
    double max_residual = 0.0;
};

enum class FrameTag { global, disk_aligned };

// Transverse linearized flow in frame coordinates. Phi[i] maps
// xi at z(0) to xi at z(t[i]); Phi[0] = I and det Phi = 1.
struct SymplecticPath {
    std::vector<double> t;
    std::vector<Mat2> Phi;
    double T = 0.0;
    FrameTag frame = FrameTag::global;
};

struct AngleLift {
    std::vector<double> t;
    std::vector<double> theta;
    double total() const { return theta.back() - theta.front(); }
};

// Reeb vector field without the defining-equation re-checks; safe for points
// slightly off Sigma inside integrator stages.
Vec4 reeb_vector(const StarShapedSystem& sys, const Vec4& z);

// Flow endpoint phi^T(z0) with per-step radial re-projection.
Vec4 flow_state(const StarShapedSystem& sys, const Vec4& z0, double T,
                const StepControl& ctl = {});

// Trajectory sampled at n_samples+1 uniform times on [0, T].
Trajectory integrate(const StarShapedSystem& sys, const SurfacePoint& z0,
                     double T, int n_samples = 256, const StepControl& ctl = {});

// Flow with 4x4 variational solution, sampled at the given increasing times
// (first may be 0). cb(i, t, z, V) is invoked once per sample.
void flow_variational_samples(
    const StarShapedSystem& sys, const Vec4& z0, const std::vector<double>& times,
    const StepControl& ctl,
    const std::function<void(int, double, const Vec4&, const Mat4&)>& cb);

// Flow sampled at the given increasing times, state only.
void flow_samples(
    const StarShapedSystem& sys, const Vec4& z0, const std::vector<double>& times,
    const StepControl& ctl,
    const std::function<void(int, double, const Vec4&)>& cb);

// dphi^t compressed to the contact structure in the requested frame,
// sampled at n+1 uniform times on [0, T]. The 2x2 path is extracted
// pointwise from the 4x4 variational solution; the disk-aligned frame is
// only defined along axis orbits of split systems.
SymplecticPath transverse_linearized(const StarShapedSystem& sys,
                                     const SurfacePoint& z0, double T,
                                     int n_samples = 256,
                                     FrameTag frame = FrameTag::global,
                                     const StepControl& ctl = {});

// Continuous lift of arg(Phi(t) u0) on the path grid. Throws GridTooCoarse
// if a raw increment reaches pi/2.
AngleLift polar_angle(const SymplecticPath& path, const Vec2& u0);

// Lift extended over n_periods copies of a one-period path using
// Phi(t + k T) = Phi(t) Phi(T)^k (frame is periodic over the orbit).
AngleLift polar_angle_extended(const SymplecticPath& one_period, int n_periods,
                               const Vec2& u0);

// Constant transverse frame along an axis orbit of a split system.
ContactFrame disk_frame_on_axis(const StarShapedSystem& sys, const Vec4& z_on_orbit);

void trajectory_to_csv(const Trajectory& traj, std::ostream& os);

} // namespace reeb

#endif
