#ifndef REEBLAB_ORBITS_HPP
#define REEBLAB_ORBITS_HPP

#include <optional>
#include <vector>

#include "reeblab/flow.hpp"

namespace reeb {

struct PeriodicOrbit {
    SurfacePoint marked_point;
    double T0 = 0.0;      // primitive period
    int k = 1;            // covering multiplicity
    Mat2 monodromy;       // Phi(T0) in the global frame
    double closure_error = 0.0;
    std::string id;       // "gamma1", "gamma2" for split axis orbits, else "orbit<n>"

    double period() const { return k * T0; }
};

struct OrbitSearchDiagnostics {
    int seeds_total = 0;
    int seeds_converged = 0;
    int seeds_diverged = 0;
    double converged_fraction = 0.0;
};

struct OrbitSearchResult {
    std::vector<PeriodicOrbit> orbits; // primitive representatives, sorted by (T0, point)
    bool degenerate_family = false;    // continuum of periodic orbits detected
    std::optional<PeriodicOrbit> representative; // one member when degenerate
    OrbitSearchDiagnostics diagnostics;
};

struct SeedGrid {
    int n_angle1 = 9;  // polar angle between the two complex factors
    int n_angle2 = 8;  // relative phase
    int max_period_guesses = 3;
    double proximity = 0.25; // near-return threshold in the scan
};

// Axis circles {z1 = 0}, {z0 = 0} of a split system, with exact primitive
// periods pi*a and pi*b and the global-frame monodromy.
PeriodicOrbit axis_orbit(const StarShapedSystem& sys, int which /*1 or 2*/,
                         const StepControl& ctl = {});

// Multiple-shooting Newton search from a product seed grid, deduplicated.
// Degenerate families (every seed periodic, identity-like monodromy) are
// reported as a flag with one representative instead of an orbit list.
OrbitSearchResult find_periodic_orbits(const StarShapedSystem& sys, double action_cap,
                                       const SeedGrid& grid = {},
                                       const StepControl& ctl = {});

// Phi(k T0) in the chosen frame. Equals the k-th power of the T0-monodromy;
// the power identity is re-verified when check_power is set.
Mat2 monodromy(const StarShapedSystem& sys, const PeriodicOrbit& orbit, int k,
               FrameTag frame = FrameTag::global, const StepControl& ctl = {},
               bool check_power = true);

struct NondegeneracyRow {
    int k;
    double action;
    double eig_dist_to_one; // min |eig(Phi(k T0)) - 1|
    bool nondegenerate;
};

struct NondegeneracyReport {
    std::vector<NondegeneracyRow> rows;
    bool verdict = true; // conjunction over rows
};

// Checks 1 not in spec(Phi(k T0)) for all k with k T0 <= C.
NondegeneracyReport nondegenerate_up_to(const StarShapedSystem& sys,
                                        const PeriodicOrbit& orbit, double C,
                                        double ndg_tol = 1e-6,
                                        const StepControl& ctl = {});

} // namespace reeb

#endif
