#ifndef REEBLAB_SECTIONS_HPP
#define REEBLAB_SECTIONS_HPP

#include <string>

#include "reeblab/orbits.hpp"

namespace reeb {

// Explicit disk page of the open book of a split system with binding an axis
// orbit: the set { arg z_other = theta0 } on the hypersurface, charted by
// (rho, phi) with rho the transverse radius and phi the phase of the binding
// factor. tilt != 0 is a test hook that shears the defining angular
// coordinate; the chart and area operations require tilt == 0.
struct SectionPage {
    int binding = 1; // 1: binding gamma1 = {z1 = 0}; 2: binding gamma2 = {z0 = 0}
    std::string binding_id = "gamma1";
    double theta0 = 0.0;
    double tilt = 0.0;
    double a = 1.0, b = 1.0;
    double rho_max = 1.0; // sqrt(b) for binding 1, sqrt(a) for binding 2
};

SectionPage build_page(const StarShapedSystem& sys, int binding, double theta0);

// Chart (rho, phi) -> Sigma; rho in (0, rho_max], phi in R/2pi.
Vec4 page_chart(const SectionPage& page, double rho, double phi);

// (rho, phi) of a hypersurface point in the page chart.
void page_coords(const SectionPage& page, const Vec4& z, double& rho, double& phi);

// Defining angular coordinate and its derivative along the Reeb flow.
double page_angle(const SectionPage& page, const Vec4& z);
double page_angle_rate(const StarShapedSystem& sys, const SectionPage& page,
                       const Vec4& z);

struct ReturnResult {
    Vec4 point;
    double rho = 0, phi = 0;
    double tau = 0;
};

// First return to the page from an interior point, bisection-refined.
ReturnResult return_map(const StarShapedSystem& sys, const SectionPage& page,
                        const Vec4& p, const StepControl& ctl = {});
ReturnResult return_map(const StarShapedSystem& sys, const SectionPage& page,
                        double rho, double phi, const StepControl& ctl = {});

struct ReturnTimeBounds {
    double inf_tau, sup_tau;
};

// Min/max return time over a (rho, phi) grid with near-boundary rows
// rho in {1e-2, 1e-3, 1e-4}.
ReturnTimeBounds return_time_bounds(const StarShapedSystem& sys,
                                    const SectionPage& page, int n_rho = 8,
                                    int n_phi = 8, const StepControl& ctl = {});

struct PageArea {
    double quadrature;
    double stokes;
};

// Contact area of the page, by 2D quadrature of the pulled-back dlambda and
// by the binding action; throws StokesMismatch if they disagree.
PageArea page_area(const StarShapedSystem& sys, const SectionPage& page,
                   int n_rho = 64, int n_phi = 64, double rel_tol = 1e-5);

struct TransversalityReport {
    double min_rate;
    double rho_at_min, phi_at_min;
};

TransversalityReport transversality_scan(const StarShapedSystem& sys,
                                         const SectionPage& page, int n_rho = 16,
                                         int n_phi = 16);

} // namespace reeb

#endif
