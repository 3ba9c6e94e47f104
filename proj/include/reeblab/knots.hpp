#ifndef REEBLAB_KNOTS_HPP
#define REEBLAB_KNOTS_HPP

#include <random>
#include <string>
#include <vector>

#include "reeblab/orbits.hpp"

namespace reeb {

// Closed polygonal curve on the unit sphere S^3; samples include the wrap
// point implicitly (last is close to first within closure_error).
struct ClosedCurve {
    std::vector<Vec4> samples;
    double closure_error = 0.0;
    double max_gap = 0.0;
};

// Normalizes points to S^3 and validates gap/closure invariants.
ClosedCurve curve_from_points(const std::vector<Vec4>& pts, double curve_h = 1e-2);

// Samples a primitive orbit with gaps <= curve_h; reversed flips orientation.
ClosedCurve orbit_curve(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                        double curve_h = 1e-2, bool reversed = false,
                        const StepControl& ctl = {});

ClosedCurve reversed_curve(const ClosedCurve& c);

double curve_min_distance(const ClosedCurve& c1, const ClosedCurve& c2);
double point_to_curve_distance(const Vec4& p, const ClosedCurve& c);

// Linking number by signed crossing counting after stereographic projection,
// re-verified with a second random projection direction. Orientation
// sensitive and exact (integer).
int linking_number(const ClosedCurve& c1, const ClosedCurve& c2,
                   Seed seed = 0x5eed1u);

// Gauss linking integral by quadrature; slow oracle for the crossing count.
double gauss_linking(const ClosedCurve& c1, const ClosedCurve& c2,
                     int max_samples = 1024, Seed seed = 0x5eed1u);

// Self-linking via pushoff along e1 of the global frame, re-projected to the
// hypersurface; verified stable under eps -> eps/2.
int self_linking(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                 double eps = 1e-3, double curve_h = 1e-4,
                 const StepControl& ctl = {});

struct LinkComponent {
    std::string orbit_id;
    int coefficient = 1;
    double T0 = 0.0;
    int orientation = +1; // -1 marks a synthetically reversed test component
    ClosedCurve curve;
};

// Cohomology class of the link complement counting linking with each
// component once: <y, c> = sum_i coeff_i * link(c, gamma_i).
struct LinkingClass {
    std::vector<LinkComponent> components;
};

LinkingClass linking_class(const StarShapedSystem& sys,
                           const std::vector<PeriodicOrbit>& link,
                           double curve_h = 1e-2, const StepControl& ctl = {});

int evaluate_class(const LinkingClass& y, const ClosedCurve& loop,
                   Seed seed = 0x5eed1u);

} // namespace reeb

#endif
