#include "reeblab/sections.hpp"

#include <algorithm>
#include <cmath>

namespace reeb {

namespace {

// angle of the complex factor (x, y), and d/dt along a velocity (vx, vy)
double cplx_arg(double x, double y) { return std::atan2(y, x); }
double cplx_arg_rate(double x, double y, double vx, double vy)
{
    double r2 = x * x + y * y;
    return (x * vy - y * vx) / r2;
}

struct Factors {
    double xb, yb; // binding complex factor
    double xt, yt; // transverse factor (vanishes on the binding)
};

Factors split_factors(const SectionPage& page, const Vec4& z)
{
    if (page.binding == 1)
        return {z[0], z[1], z[2], z[3]};
    return {z[2], z[3], z[0], z[1]};
}

} // namespace

SectionPage build_page(const StarShapedSystem& sys, int binding, double theta0)
{
    if (!sys.is_split())
        throw NotSplitSystem("pages are only constructed for split systems");
    if (binding != 1 && binding != 2)
        throw ConfigError("binding must be 1 or 2");
    SectionPage page;
    page.binding = binding;
    page.binding_id = binding == 1 ? "gamma1" : "gamma2";
    page.theta0 = theta0;
    page.a = sys.split_a();
    page.b = sys.split_b();
    page.rho_max = std::sqrt(binding == 1 ? page.b : page.a);
    return page;
}

Vec4 page_chart(const SectionPage& page, double rho, double phi)
{
    if (page.tilt != 0.0)
        throw Error("chart undefined for a tilted test page");
    if (!(rho > 0) || rho > page.rho_max + 1e-12)
        throw ConfigError("chart radius out of range (0, " +
                          std::to_string(page.rho_max) + "]");
    double ab = page.binding == 1 ? page.a : page.b; // binding factor scale
    double tb = page.binding == 1 ? page.b : page.a; // transverse factor scale
    double R2 = ab * (1.0 - rho * rho / tb);
    double R = std::sqrt(std::max(R2, 0.0));
    double xb = R * std::cos(phi), yb = R * std::sin(phi);
    double xt = rho * std::cos(page.theta0), yt = rho * std::sin(page.theta0);
    if (page.binding == 1)
        return Vec4(xb, yb, xt, yt);
    return Vec4(xt, yt, xb, yb);
}

void page_coords(const SectionPage& page, const Vec4& z, double& rho, double& phi)
{
    Factors f = split_factors(page, z);
    rho = std::hypot(f.xt, f.yt);
    phi = cplx_arg(f.xb, f.yb);
}

double page_angle(const SectionPage& page, const Vec4& z)
{
    Factors f = split_factors(page, z);
    double ang = cplx_arg(f.xt, f.yt) - page.theta0;
    if (page.tilt != 0.0)
        ang += page.tilt * cplx_arg(f.xb, f.yb);
    return ang;
}

double page_angle_rate(const StarShapedSystem& sys, const SectionPage& page,
                       const Vec4& z)
{
    Vec4 v = reeb_vector(sys, z);
    Factors f = split_factors(page, z);
    Factors fv = split_factors(page, v);
    double rate = cplx_arg_rate(f.xt, f.yt, fv.xt, fv.yt);
    if (page.tilt != 0.0)
        rate += page.tilt * cplx_arg_rate(f.xb, f.yb, fv.xb, fv.yb);
    return rate;
}

ReturnResult return_map(const StarShapedSystem& sys, const SectionPage& page,
                        const Vec4& p, const StepControl& ctl)
{
    if (page.tilt != 0.0)
        throw Error("return map undefined for a tilted test page");
    {
        double gap = std::remainder(page_angle(page, p), 2 * M_PI);
        if (std::abs(gap) > 1e-6)
            throw ConfigError("return_map: point not on the page, angle gap " +
                              std::to_string(gap));
    }
    StepControl tight = ctl;
    tight.tol_step = std::min(ctl.tol_step, 1e-12);

    // march until the lifted defining angle has advanced by 2 pi
    double rate0 = page_angle_rate(sys, page, p);
    if (!(rate0 > 0))
        throw NonTransverseCrossing("flow not positively transverse at the start point");
    double dt = std::min(0.2, (M_PI / 8) / rate0);

    double t = 0;
    double lift = 0;
    Vec4 z = p;
    double prev_angle = page_angle(page, p);
    int guard = 0;
    while (lift < 2 * M_PI) {
        if (++guard > 200000)
            throw Error("return_map: no return found");
        Vec4 znew = flow_state(sys, z, dt, tight);
        double ang = page_angle(page, znew);
        double d = std::remainder(ang - prev_angle, 2 * M_PI);
        if (std::abs(d) >= M_PI / 2) {
            dt /= 2;
            continue;
        }
        if (lift + d >= 2 * M_PI) {
            // bisection refine the crossing time inside [t, t + dt]
            double lo = 0, hi = dt;
            for (int it = 0; it < 200 && (hi - lo) > 1e-10; ++it) {
                double mid = 0.5 * (lo + hi);
                Vec4 zm = flow_state(sys, z, mid, tight);
                double dm = std::remainder(page_angle(page, zm) - prev_angle, 2 * M_PI);
                if (lift + dm >= 2 * M_PI)
                    hi = mid;
                else
                    lo = mid;
            }
            double tau = t + 0.5 * (lo + hi);
            Vec4 zq = sys.project_radial(flow_state(sys, z, 0.5 * (lo + hi), tight));
            ReturnResult res;
            res.point = zq;
            res.tau = tau;
            page_coords(page, zq, res.rho, res.phi);
            return res;
        }
        lift += d;
        prev_angle = ang;
        z = znew;
        t += dt;
    }
    throw Error("return_map: unreachable");
}

ReturnResult return_map(const StarShapedSystem& sys, const SectionPage& page,
                        double rho, double phi, const StepControl& ctl)
{
    return return_map(sys, page, page_chart(page, rho, phi), ctl);
}

ReturnTimeBounds return_time_bounds(const StarShapedSystem& sys,
                                    const SectionPage& page, int n_rho, int n_phi,
                                    const StepControl& ctl)
{
    std::vector<double> rhos = {1e-2, 1e-3, 1e-4};
    for (int i = 1; i <= n_rho; ++i)
        rhos.push_back(page.rho_max * i / (n_rho + 0.5));
    ReturnTimeBounds out{1e300, 0.0};
    for (double rho : rhos)
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2 * M_PI * j / n_phi;
            ReturnResult r = return_map(sys, page, rho, phi, ctl);
            out.inf_tau = std::min(out.inf_tau, r.tau);
            out.sup_tau = std::max(out.sup_tau, r.tau);
        }
    return out;
}

PageArea page_area(const StarShapedSystem& sys, const SectionPage& page, int n_rho,
                   int n_phi, double rel_tol)
{
    if (page.tilt != 0.0)
        throw Error("area undefined for a tilted test page");
    // dlambda-area of the page: quadrature of omega0(d_phi chart, d_rho chart),
    // oriented so the flow crosses positively. Gauss-Legendre would be exact
    // here; the midpoint product rule is plenty at these sizes.
    double quad = 0;
    for (int i = 0; i < n_rho; ++i) {
        double rho = page.rho_max * (i + 0.5) / n_rho;
        double drho = page.rho_max / n_rho;
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2 * M_PI * (j + 0.5) / n_phi;
            double dphi = 2 * M_PI / n_phi;
            double h = 1e-6;
            Vec4 dp = (page_chart(page, rho, phi + h) - page_chart(page, rho, phi - h)) /
                      (2 * h);
            Vec4 dr = (page_chart(page, std::min(rho + h, page.rho_max), phi) -
                       page_chart(page, rho - h, phi)) /
                      (std::min(rho + h, page.rho_max) - (rho - h));
            quad += omega0(dp, dr) * drho * dphi;
        }
    }

    // Stokes route: integral of lambda over the binding = its action.
    double stokes = 0;
    const int nb = 4096;
    double Rb = std::sqrt(page.binding == 1 ? page.a : page.b);
    for (int j = 0; j < nb; ++j) {
        double s = 2 * M_PI * j / nb;
        Vec4 z, v;
        if (page.binding == 1) {
            z = Vec4(Rb * std::cos(s), Rb * std::sin(s), 0, 0);
            v = Vec4(-Rb * std::sin(s), Rb * std::cos(s), 0, 0);
        } else {
            z = Vec4(0, 0, Rb * std::cos(s), Rb * std::sin(s));
            v = Vec4(0, 0, -Rb * std::sin(s), Rb * std::cos(s));
        }
        stokes += contact_eval(z, v) * (2 * M_PI / nb);
    }

    PageArea area{quad, stokes};
    if (std::abs(quad - stokes) > rel_tol * std::max(std::abs(stokes), 1e-30))
        throw StokesMismatch("quadrature " + std::to_string(quad) + " vs Stokes " +
                             std::to_string(stokes));
    return area;
}

TransversalityReport transversality_scan(const StarShapedSystem& sys,
                                         const SectionPage& page, int n_rho,
                                         int n_phi)
{
    TransversalityReport rep{1e300, 0, 0};
    std::vector<double> rhos = {1e-3};
    for (int i = 1; i <= n_rho; ++i)
        rhos.push_back(page.rho_max * i / (n_rho + 0.5));
    SectionPage chart_page = page;
    chart_page.tilt = 0.0; // grid points come from the untilted chart
    for (double rho : rhos)
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2 * M_PI * j / n_phi;
            Vec4 z = page_chart(chart_page, rho, phi);
            double rate = page_angle_rate(sys, page, z);
            if (rate < rep.min_rate) {
                rep.min_rate = rate;
                rep.rho_at_min = rho;
                rep.phi_at_min = phi;
            }
        }
    return rep;
}

} // namespace reeb
