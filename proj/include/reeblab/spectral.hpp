#ifndef REEBLAB_SPECTRAL_HPP
#define REEBLAB_SPECTRAL_HPP

#include <string>
#include <vector>

#include "reeblab/orbits.hpp"

namespace reeb {

// Fourier-collocation discretization of the first-order operator
//   A eta = -J eta' - S(t) eta
// acting on loops R/Z -> R^2, where S(t) = -J Psi'(t) Psi(t)^{-1} is the
// symmetric coefficient of the transverse linearized flow Psi(t) = Phi(T t)
// expressed in the chosen frame.
struct DiscretizedOperator {
    std::string orbit_id;
    int k = 1;
    FrameTag frame = FrameTag::global;
    int N = 0;
    double T = 0.0;
    Eigen::MatrixXd A;       // 2N x 2N, symmetric
    double symmetry_defect;  // max over grid of |S - S^T| before symmetrization
    double S_max_norm;       // max over grid of |S|_inf
    double path_winding_est; // total rotation of a reference vector / 2pi
};

struct SpectrumEntry {
    double nu;
    int wind;
    double residual;          // |A v - nu v|_inf
    double winding_closure;   // distance of the raw angle sum to 2*pi*wind
    double min_section_norm;  // min |eta(t_n)| over the grid (max-normalized)
    std::vector<Vec2> section;
};

struct AsymptoticSpectrum {
    std::string orbit_id;
    int k = 1;
    FrameTag frame = FrameTag::global;
    int N = 0;
    std::vector<SpectrumEntry> entries; // sorted by nu, trimmed to complete winding classes
    double window_lo = 0, window_hi = 0;
    double symmetry_defect = 0;
};

struct CzResult {
    int CZ;
    int alpha_lt;   // max winding among nu < delta
    int alpha_geq;  // min winding among nu >= delta
    int p;          // alpha_geq - alpha_lt, 0 or 1
    bool near_delta_warning; // some |nu - delta| < spec_tol (degenerate situation)
};

struct ConvexityRow {
    std::string orbit_id;
    int k;
    double action;
    int cz;
    bool near_delta_warning;
};

struct ConvexityReport {
    double action_cap = 0;
    std::vector<ConvexityRow> rows;
    bool verdict = false;       // all rows have CZ >= 3
    bool degenerate_flag = false;
    bool exhaustive = false;    // orbit list provably complete (split, irrational ratio)
    std::string caveat;
};

DiscretizedOperator build_operator(const StarShapedSystem& sys,
                                   const PeriodicOrbit& orbit, int k,
                                   FrameTag frame, int N,
                                   const StepControl& ctl = {});

// All eigenpairs with nu in [lo, hi], with eigenvalue winding numbers from
// angle accumulation of the eigensections. The returned window is trimmed so
// every winding class inside it is complete (two entries each).
AsymptoticSpectrum spectrum(const DiscretizedOperator& op, double lo, double hi);

CzResult cz_index(const AsymptoticSpectrum& spec, double delta,
                  double spec_tol = 1e-6);

// Transverse rotation number per period unit: Cesaro slope of the lifted
// polar angle of the linearized flow over >= min_periods periods, divided by
// 2 pi and normalized to the primitive period.
double rotation_alpha(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                      FrameTag frame, int min_periods = 64,
                      const StepControl& ctl = {});

ConvexityReport convexity_check(const StarShapedSystem& sys, double action_cap,
                                int N = 256, const StepControl& ctl = {},
                                bool require_nondegenerate = false);

// Max eigenvalue movement between discretizations N and 2N inside the window.
double spectrum_richardson_defect(const StarShapedSystem& sys,
                                  const PeriodicOrbit& orbit, int k,
                                  FrameTag frame, int N, double lo, double hi,
                                  const StepControl& ctl = {});

// Periodic spectral differentiation matrix on N points of R/Z (N even).
Eigen::MatrixXd fourier_diff_matrix(int N);

} // namespace reeb

#endif
