#include "reeblab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace reeb {

namespace {

// Smooth local refinement of argmin_t |phi^t(z) - z_ref| near t0.
double refine_min_distance(const StarShapedSystem& sys, const Vec4& z,
                           const Vec4& z_ref, double t0, double half_width,
                           const StepControl& ctl, double* dist_out)
{
    double lo = std::max(1e-6, t0 - half_width), hi = t0 + half_width;
    auto dist = [&](double t) { return (flow_state(sys, z, t, ctl) - z_ref).norm(); };
    // golden-section
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = dist(c), fd = dist(d);
    for (int it = 0; it < 60 && (hi - lo) > 1e-12 * std::max(1.0, t0); ++it) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - gr * (hi - lo);
            fc = dist(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + gr * (hi - lo);
            fd = dist(d);
        }
    }
    double t = 0.5 * (lo + hi);
    if (dist_out)
        *dist_out = dist(t);
    return t;
}

double min_distance_to_orbit(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                             const Vec4& point, const StepControl& ctl)
{
    const int n = 256;
    Trajectory tr = integrate(sys, orbit.marked_point, orbit.T0, n, ctl);
    double best = 1e300, tbest = 0;
    for (int i = 0; i <= n; ++i) {
        double d = (tr.states[i].z - point).norm();
        if (d < best) {
            best = d;
            tbest = tr.t_samples[i];
        }
    }
    double refined;
    refine_min_distance(sys, orbit.marked_point.z, point, tbest,
                        1.5 * orbit.T0 / n, ctl, &refined);
    return std::min(best, refined);
}

struct NewtonOutcome {
    bool converged = false;
    Vec4 z;
    double T = 0;
    double closure = 0;
};

NewtonOutcome newton_orbit(const StarShapedSystem& sys, const Vec4& seed,
                           double T_guess, double action_cap, double orbit_tol,
                           const StepControl& ctl)
{
    NewtonOutcome out;
    Vec4 z = seed;
    double T = T_guess;
    const Vec4 phase_dir = reeb_vector(sys, seed);

    for (int iter = 0; iter < 30; ++iter) {
        if (!(T > 0.05) || T > 1.5 * action_cap + 1.0)
            return out;
        Vec4 zT;
        Mat4 V;
        try {
            flow_variational_samples(sys, z, {T}, ctl,
                                     [&](int, double, const Vec4& zz, const Mat4& VV) {
                                         zT = zz;
                                         V = VV;
                                     });
        } catch (const StepFailure&) {
            return out;
        }

        Eigen::Matrix<double, 6, 1> r;
        r.segment<4>(0) = zT - z;
        r[4] = sys.hamiltonian(z) - 1.0;
        r[5] = phase_dir.dot(z - seed);

        double closure = r.segment<4>(0).norm();
        if (closure <= orbit_tol && std::abs(r[4]) <= 1e-9 && std::abs(r[5]) <= 1e-7) {
            out.converged = true;
            out.z = sys.project_radial(z);
            out.T = T;
            out.closure = closure;
            return out;
        }

        Eigen::Matrix<double, 6, 5> Jm;
        Jm.setZero();
        Jm.block<4, 4>(0, 0) = V - Mat4::Identity();
        Jm.block<4, 1>(0, 4) = reeb_vector(sys, zT);
        Jm.block<1, 4>(4, 0) = sys.gradient(z).transpose();
        Jm.block<1, 4>(5, 0) = phase_dir.transpose();

        Eigen::Matrix<double, 5, 1> step =
            Jm.colPivHouseholderQr().solve(Eigen::Matrix<double, 6, 1>(-r));
        if (!step.allFinite() || step.norm() > 5.0)
            return out;
        z += step.segment<4>(0);
        T += step[4];
    }
    return out;
}

// First positive time where the trajectory returns to z within tol; used to
// reduce a Newton period to the primitive one.
double primitive_period(const StarShapedSystem& sys, const Vec4& z, double T,
                        double orbit_tol, const StepControl& ctl)
{
    const int n = std::max(64, static_cast<int>(T / 0.02));
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i)
        times[i] = T * (i + 1) / n;
    std::vector<double> dist(n);
    flow_samples(sys, z, times, ctl, [&](int i, double, const Vec4& zz) {
        dist[i] = (zz - z).norm();
    });
    double dt = T / n;
    for (int i = 0; i < n; ++i) {
        bool local_min = dist[i] < 0.05 &&
                         (i == 0 || dist[i] <= dist[i - 1]) &&
                         (i + 1 >= n || dist[i] <= dist[i + 1]);
        if (!local_min)
            continue;
        double d;
        double t = refine_min_distance(sys, z, z, times[i], 1.5 * dt, ctl, &d);
        if (d <= 50 * orbit_tol && t > 0.05) {
            double ratio = T / t;
            int k = static_cast<int>(std::lround(ratio));
            if (k >= 1 && std::abs(ratio - k) < 1e-4)
                return T / k;
        }
    }
    return T;
}

bool identity_like(const Mat2& M)
{
    return (M - Mat2::Identity()).lpNorm<Eigen::Infinity>() < 1e-4;
}

} // namespace

PeriodicOrbit axis_orbit(const StarShapedSystem& sys, int which, const StepControl& ctl)
{
    if (!sys.is_split())
        throw NotSplitSystem("axis orbits only defined for split systems");
    PeriodicOrbit orb;
    if (which == 1) {
        orb.marked_point = sys.surface_point(Vec4(1, 0, 0, 0));
        orb.T0 = M_PI * sys.split_a();
        orb.id = "gamma1";
    } else if (which == 2) {
        orb.marked_point = sys.surface_point(Vec4(0, 0, 1, 0));
        orb.T0 = M_PI * sys.split_b();
        orb.id = "gamma2";
    } else {
        throw ConfigError("axis_orbit: which must be 1 or 2");
    }
    orb.k = 1;
    StepControl tight = ctl;
    tight.tol_step = std::min(ctl.tol_step, 1e-12);
    orb.closure_error =
        (flow_state(sys, orb.marked_point.z, orb.T0, tight) - orb.marked_point.z).norm();
    SymplecticPath path =
        transverse_linearized(sys, orb.marked_point, orb.T0, 128, FrameTag::global, tight);
    orb.monodromy = path.Phi.back();
    return orb;
}

OrbitSearchResult find_periodic_orbits(const StarShapedSystem& sys, double action_cap,
                                       const SeedGrid& grid, const StepControl& ctl)
{
    if (!(action_cap > 0))
        throw ConfigError("find_periodic_orbits: action cap must be > 0");
    StepControl search_ctl = ctl;
    search_ctl.tol_step = std::min(ctl.tol_step, 1e-11);

    OrbitSearchResult res;
    std::vector<PeriodicOrbit> found;
    std::vector<Mat2> monodromies_of_converged;
    int converged_seeds = 0, total_seeds = 0;

    for (int i = 0; i < grid.n_angle1; ++i) {
        double th1 = (M_PI / 2) * i / (grid.n_angle1 - 1);
        for (int jj = 0; jj < grid.n_angle2; ++jj) {
            // collapse the redundant phase on the axes
            if ((i == 0 || i == grid.n_angle1 - 1) && jj > 0)
                continue;
            double th2 = 2 * M_PI * jj / grid.n_angle2;
            Vec4 raw(std::cos(th1), 0.0, std::sin(th1) * std::cos(th2),
                     std::sin(th1) * std::sin(th2));
            Vec4 seed = sys.project_radial(raw);
            ++total_seeds;

            // return-proximity scan for period guesses
            const double t_lo = 0.2;
            const int ns = std::max(32, static_cast<int>((action_cap - t_lo) / 0.025));
            std::vector<double> times(ns);
            for (int s = 0; s < ns; ++s)
                times[s] = t_lo + (action_cap - t_lo) * s / (ns - 1);
            std::vector<double> dist(ns);
            flow_samples(sys, seed, times, search_ctl,
                         [&](int s, double, const Vec4& zz) {
                             dist[s] = (zz - seed).norm();
                         });
            std::vector<std::pair<double, double>> guesses; // (dist, t)
            for (int s = 1; s + 1 < ns; ++s)
                if (dist[s] < grid.proximity && dist[s] <= dist[s - 1] &&
                    dist[s] <= dist[s + 1])
                    guesses.emplace_back(dist[s], times[s]);
            std::sort(guesses.begin(), guesses.end());
            if (static_cast<int>(guesses.size()) > grid.max_period_guesses)
                guesses.resize(grid.max_period_guesses);

            bool seed_converged = false;
            for (auto& [d0, tg] : guesses) {
                NewtonOutcome nw = newton_orbit(sys, seed, tg, action_cap,
                                                sys.tol().orbit_tol, search_ctl);
                if (!nw.converged)
                    continue;
                double T0 = primitive_period(sys, nw.z, nw.T, sys.tol().orbit_tol,
                                             search_ctl);
                if (T0 > action_cap)
                    continue;
                seed_converged = true;

                PeriodicOrbit orb;
                orb.marked_point = sys.surface_point(nw.z, 1e-8);
                orb.T0 = T0;
                orb.k = 1;
                orb.closure_error =
                    (flow_state(sys, nw.z, T0, search_ctl) - nw.z).norm();
                if (orb.closure_error > sys.tol().orbit_tol * 10)
                    continue; // primitive reduction failed; not a clean orbit
                SymplecticPath path = transverse_linearized(
                    sys, orb.marked_point, T0, 128, FrameTag::global, search_ctl);
                orb.monodromy = path.Phi.back();

                bool duplicate = false;
                for (const auto& other : found) {
                    if (std::abs(other.T0 - T0) > 1e-4 * std::max(other.T0, T0))
                        continue;
                    if (min_distance_to_orbit(sys, other, orb.marked_point.z,
                                              search_ctl) < sys.tol().dedup_tol) {
                        duplicate = true;
                        break;
                    }
                }
                monodromies_of_converged.push_back(orb.monodromy);
                if (!duplicate)
                    found.push_back(orb);
                break;
            }
            if (seed_converged)
                ++converged_seeds;
        }
    }

    res.diagnostics.seeds_total = total_seeds;
    res.diagnostics.seeds_converged = converged_seeds;
    res.diagnostics.seeds_diverged = total_seeds - converged_seeds;
    res.diagnostics.converged_fraction =
        total_seeds ? static_cast<double>(converged_seeds) / total_seeds : 0.0;

    // Degenerate family: nearly all seeds sit on periodic orbits with
    // identity-like transverse monodromy. Nondegeneracy fails globally and a
    // discrete orbit list is meaningless.
    if (res.diagnostics.converged_fraction >= 0.9 && !monodromies_of_converged.empty()) {
        int id_like = 0;
        for (const auto& M : monodromies_of_converged)
            if (identity_like(M))
                ++id_like;
        if (id_like >= static_cast<int>(0.9 * monodromies_of_converged.size())) {
            res.degenerate_family = true;
            auto shortest = std::min_element(
                found.begin(), found.end(),
                [](const auto& a, const auto& b) { return a.T0 < b.T0; });
            if (shortest != found.end())
                res.representative = *shortest;
            return res;
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.T0 - b.T0) > 1e-9)
            return a.T0 < b.T0;
        return std::lexicographical_compare(a.marked_point.z.data(),
                                            a.marked_point.z.data() + 4,
                                            b.marked_point.z.data(),
                                            b.marked_point.z.data() + 4);
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        PeriodicOrbit& o = found[i];
        double n0 = std::hypot(o.marked_point.z[0], o.marked_point.z[1]);
        double n1 = std::hypot(o.marked_point.z[2], o.marked_point.z[3]);
        if (sys.is_split() && n1 < 1e-6)
            o.id = "gamma1";
        else if (sys.is_split() && n0 < 1e-6)
            o.id = "gamma2";
        else
            o.id = "orbit" + std::to_string(i + 1);
    }
    res.orbits = std::move(found);
    return res;
}

Mat2 monodromy(const StarShapedSystem& sys, const PeriodicOrbit& orbit, int k,
               FrameTag frame, const StepControl& ctl, bool check_power)
{
    if (k < 1)
        throw ConfigError("monodromy: k must be >= 1");
    StepControl tight = ctl;
    tight.tol_step = std::min(ctl.tol_step, 1e-12);
    int n = std::min(4096, 256 * k);
    SymplecticPath path =
        transverse_linearized(sys, orbit.marked_point, k * orbit.T0, n, frame, tight);
    Mat2 M = path.Phi.back();
    if (check_power && k > 1) {
        SymplecticPath p1 =
            transverse_linearized(sys, orbit.marked_point, orbit.T0, 256, frame, tight);
        Mat2 Mk = Mat2::Identity();
        for (int i = 0; i < k; ++i)
            Mk = p1.Phi.back() * Mk;
        if ((Mk - M).lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, M.norm()))
            throw Error("monodromy power identity violated; frame does not close over T0");
    }
    return M;
}

NondegeneracyReport nondegenerate_up_to(const StarShapedSystem& sys,
                                        const PeriodicOrbit& orbit, double C,
                                        double ndg_tol, const StepControl& ctl)
{
    NondegeneracyReport rep;
    Mat2 M1 = monodromy(sys, orbit, 1, FrameTag::global, ctl, false);
    Mat2 Mk = Mat2::Identity();
    for (int k = 1; k * orbit.T0 <= C + 1e-12; ++k) {
        Mk = M1 * Mk;
        Eigen::EigenSolver<Mat2> es(Mk);
        double dist = std::min(std::abs(es.eigenvalues()[0] - std::complex<double>(1, 0)),
                               std::abs(es.eigenvalues()[1] - std::complex<double>(1, 0)));
        NondegeneracyRow row{k, k * orbit.T0, dist, dist > ndg_tol};
        rep.verdict = rep.verdict && row.nondegenerate;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace reeb
