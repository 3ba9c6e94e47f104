#include "reeblab/knots.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace reeb {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Vec4 random_unit4(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Vec4 v;
    do {
        v = Vec4(g(rng), g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

Vec3 random_unit3(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

// Stereographic chart of S^3 \ {pole} with a deterministic orthonormal basis
// of the pole's orthogonal complement.
struct Stereographic {
    Vec4 pole;
    Eigen::Matrix<double, 3, 4> basis;

    explicit Stereographic(const Vec4& p) : pole(p)
    {
        Eigen::Matrix<double, 4, 4> m;
        m.row(0) = p.transpose();
        m.row(1) = Vec4(1, 0, 0, 0).transpose();
        m.row(2) = Vec4(0, 1, 0, 0).transpose();
        m.row(3) = Vec4(0, 0, 1, 0).transpose();
        // complete to an orthonormal set; fall back to the last axis if the
        // seeds are dependent
        int got = 0;
        Vec4 rows[3];
        for (int i = 1; i < 4 && got < 3; ++i) {
            Vec4 v = m.row(i).transpose();
            v -= v.dot(pole) * pole;
            for (int j = 0; j < got; ++j)
                v -= v.dot(rows[j]) * rows[j];
            if (v.norm() > 1e-6) {
                rows[got++] = v.normalized();
            }
        }
        if (got < 3) {
            Vec4 v(0, 0, 0, 1);
            v -= v.dot(pole) * pole;
            for (int j = 0; j < got; ++j)
                v -= v.dot(rows[j]) * rows[j];
            rows[got++] = v.normalized();
        }
        for (int i = 0; i < 3; ++i)
            basis.row(i) = rows[i].transpose();
    }

    Vec3 map(const Vec4& q) const
    {
        double denom = 1.0 - pole.dot(q);
        return (basis * q) / denom;
    }
};

std::vector<Vec3> project_curve(const Stereographic& st, const ClosedCurve& c)
{
    std::vector<Vec3> out(c.samples.size());
    for (std::size_t i = 0; i < c.samples.size(); ++i)
        out[i] = st.map(c.samples[i]);
    return out;
}

struct Planar {
    std::vector<Eigen::Vector2d> pts;
    std::vector<double> depth;
};

Planar flatten(const std::vector<Vec3>& curve, const Vec3& f1, const Vec3& f2,
               const Vec3& d)
{
    Planar p;
    p.pts.resize(curve.size());
    p.depth.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        p.pts[i] = Eigen::Vector2d(curve[i].dot(f1), curve[i].dot(f2));
        p.depth[i] = curve[i].dot(d);
    }
    return p;
}

struct CrossingCount {
    long long signed_sum = 0; // sum of signs where c1 passes over c2
    bool degenerate = false;
};

// Uniform hash grid over the segments of the second curve.
class SegmentGrid {
public:
    SegmentGrid(const Planar& c, double cell) : c_(c), cell_(cell)
    {
        for (std::size_t j = 0; j + 1 < c.pts.size(); ++j)
            insert(j);
    }

    template <class F>
    void query(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, F&& f) const
    {
        long ix0 = cell_of(lo[0]), ix1 = cell_of(hi[0]);
        long iy0 = cell_of(lo[1]), iy1 = cell_of(hi[1]);
        for (long ix = ix0; ix <= ix1; ++ix)
            for (long iy = iy0; iy <= iy1; ++iy) {
                auto it = cells_.find(key(ix, iy));
                if (it == cells_.end())
                    continue;
                for (std::size_t j : it->second)
                    f(j);
            }
    }

private:
    long cell_of(double x) const { return static_cast<long>(std::floor(x / cell_)); }
    static std::uint64_t key(long ix, long iy)
    {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
               static_cast<std::uint32_t>(iy);
    }
    void insert(std::size_t j)
    {
        const auto& a = c_.pts[j];
        const auto& b = c_.pts[j + 1];
        long ix0 = cell_of(std::min(a[0], b[0])), ix1 = cell_of(std::max(a[0], b[0]));
        long iy0 = cell_of(std::min(a[1], b[1])), iy1 = cell_of(std::max(a[1], b[1]));
        for (long ix = ix0; ix <= ix1; ++ix)
            for (long iy = iy0; iy <= iy1; ++iy)
                cells_[key(ix, iy)].push_back(j);
    }

    const Planar& c_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

double median_segment_size(const Planar& p)
{
    std::vector<double> sizes;
    sizes.reserve(p.pts.size());
    for (std::size_t j = 0; j + 1 < p.pts.size(); ++j)
        sizes.push_back((p.pts[j + 1] - p.pts[j]).lpNorm<Eigen::Infinity>());
    if (sizes.empty())
        return 1.0;
    std::nth_element(sizes.begin(), sizes.begin() + sizes.size() / 2, sizes.end());
    return std::max(sizes[sizes.size() / 2], 1e-12);
}

// Signed crossings of proj(c1) over proj(c2) along direction d. The sign at
// a crossing where c1 is above is sgn det[t1, t2, d], the local degree of the
// chordal Gauss map at that preimage.
CrossingCount count_crossings(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2,
                              const Vec3& f1, const Vec3& f2, const Vec3& d)
{
    CrossingCount out;
    Planar p1 = flatten(c1, f1, f2, d);
    Planar p2 = flatten(c2, f1, f2, d);
    SegmentGrid grid(p2, 4.0 * median_segment_size(p2));

    const double par_eps = 1e-13, end_eps = 1e-10;
    for (std::size_t i = 0; i + 1 < p1.pts.size() && !out.degenerate; ++i) {
        Eigen::Vector2d a = p1.pts[i], u = p1.pts[i + 1] - a;
        Eigen::Vector2d lo = a.cwiseMin(p1.pts[i + 1]), hi = a.cwiseMax(p1.pts[i + 1]);
        grid.query(lo, hi, [&](std::size_t j) {
            if (out.degenerate)
                return;
            Eigen::Vector2d b = p2.pts[j], v = p2.pts[j + 1] - b;
            double det = u[0] * v[1] - u[1] * v[0];
            Eigen::Vector2d w = b - a;
            if (std::abs(det) < par_eps * u.norm() * v.norm()) {
                // parallel segments: degenerate only if they could overlap
                double cr = w[0] * u[1] - w[1] * u[0];
                if (std::abs(cr) < 1e-12 * u.norm() * w.norm())
                    out.degenerate = true;
                return;
            }
            double s = (w[0] * v[1] - w[1] * v[0]) / det;
            double t = (w[0] * u[1] - w[1] * u[0]) / det;
            if (s < -end_eps || s > 1 + end_eps || t < -end_eps || t > 1 + end_eps)
                return;
            if (s < end_eps || s > 1 - end_eps || t < end_eps || t > 1 - end_eps) {
                out.degenerate = true; // crossing at a vertex; re-throw the dice
                return;
            }
            double depth1 = p1.depth[i] + s * (p1.depth[i + 1] - p1.depth[i]);
            double depth2 = p2.depth[j] + t * (p2.depth[j + 1] - p2.depth[j]);
            if (std::abs(depth1 - depth2) < 1e-12) {
                out.degenerate = true;
                return;
            }
            if (depth1 > depth2) {
                Vec3 t1 = c1[i + 1] - c1[i];
                Vec3 t2 = c2[j + 1] - c2[j];
                double sign3 = t1.cross(t2).dot(d);
                out.signed_sum += sign3 > 0 ? 1 : -1;
            }
        });
    }
    return out;
}

Vec4 pick_pole(const ClosedCurve& c1, const ClosedCurve& c2, std::mt19937_64& rng)
{
    auto min_dist = [](const ClosedCurve& c, const Vec4& p) {
        double best = 2.0;
        std::size_t stride = std::max<std::size_t>(1, c.samples.size() / 512);
        for (std::size_t i = 0; i < c.samples.size(); i += stride)
            best = std::min(best, (c.samples[i] - p).norm());
        return best;
    };
    Vec4 best_pole = Vec4(0, 0, 0, 1);
    double best = -1;
    for (int i = 0; i < 64; ++i) {
        Vec4 p = random_unit4(rng);
        double d = std::min(min_dist(c1, p), min_dist(c2, p));
        if (d > best) {
            best = d;
            best_pole = p;
        }
    }
    if (best < 0.05)
        throw DegenerateProjection("no stereographic pole away from the curves");
    return best_pole;
}

int crossing_link_once(const std::vector<Vec3>& s1, const std::vector<Vec3>& s2,
                       std::mt19937_64& rng)
{
    for (int attempt = 0; attempt < 10; ++attempt) {
        Vec3 d = random_unit3(rng);
        Vec3 f1 = d.cross(std::abs(d[0]) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0)).normalized();
        Vec3 f2 = d.cross(f1).normalized();
        CrossingCount c = count_crossings(s1, s2, f1, f2, d);
        if (!c.degenerate)
            return static_cast<int>(c.signed_sum);
    }
    throw DegenerateProjection("crossing count degenerate after 10 directions");
}

} // namespace

ClosedCurve curve_from_points(const std::vector<Vec4>& pts, double curve_h)
{
    if (pts.size() < 4)
        throw Error("closed curve needs at least 4 samples");
    ClosedCurve c;
    c.samples.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double n = pts[i].norm();
        if (n == 0)
            throw Error("closed curve sample at the origin");
        c.samples[i] = pts[i] / n;
    }
    for (std::size_t i = 0; i + 1 < c.samples.size(); ++i)
        c.max_gap = std::max(c.max_gap, (c.samples[i + 1] - c.samples[i]).norm());
    c.closure_error = (c.samples.back() - c.samples.front()).norm();
    if (c.max_gap > curve_h)
        throw Error("closed curve gap " + std::to_string(c.max_gap) + " exceeds " +
                    std::to_string(curve_h));
    if (c.closure_error > 1e-8 && c.closure_error > curve_h)
        throw Error("closed curve not closed, gap " + std::to_string(c.closure_error));
    return c;
}

ClosedCurve orbit_curve(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                        double curve_h, bool reversed, const StepControl& ctl)
{
    // gap = speed * dt; bound the speed along the orbit from a coarse pass
    Trajectory coarse = integrate(sys, orbit.marked_point, orbit.T0, 64, ctl);
    double vmax = 0;
    for (const auto& p : coarse.states)
        vmax = std::max(vmax, reeb_vector(sys, p.z).norm());
    int n = std::max(64, static_cast<int>(std::ceil(orbit.T0 * vmax / (0.5 * curve_h))));
    Trajectory fine = integrate(sys, orbit.marked_point, orbit.T0, n, ctl);
    std::vector<Vec4> pts;
    pts.reserve(fine.states.size());
    for (const auto& p : fine.states)
        pts.push_back(p.z);
    ClosedCurve c = curve_from_points(pts, curve_h);
    if (reversed)
        c = reversed_curve(c);
    return c;
}

ClosedCurve reversed_curve(const ClosedCurve& c)
{
    ClosedCurve r = c;
    std::reverse(r.samples.begin(), r.samples.end());
    return r;
}

double curve_min_distance(const ClosedCurve& c1, const ClosedCurve& c2)
{
    // coarse lower-bounded scan, then exact pass over the nearby stretch
    std::size_t s1 = std::max<std::size_t>(1, c1.samples.size() / 4096);
    std::size_t s2 = std::max<std::size_t>(1, c2.samples.size() / 4096);
    double best = 1e300;
    for (std::size_t i = 0; i < c1.samples.size(); i += s1)
        for (std::size_t j = 0; j < c2.samples.size(); j += s2)
            best = std::min(best, (c1.samples[i] - c2.samples[j]).norm());
    double slack = s1 * c1.max_gap + s2 * c2.max_gap;
    if (slack < 0.25 * best)
        return best - slack; // safe lower bound, exact pass not needed
    best = 1e300;
    for (const auto& p : c1.samples)
        for (const auto& q : c2.samples)
            best = std::min(best, (p - q).norm());
    return best;
}

double point_to_curve_distance(const Vec4& p, const ClosedCurve& c)
{
    double best = 1e300;
    for (const auto& q : c.samples)
        best = std::min(best, (p - q).norm());
    return best;
}

int linking_number(const ClosedCurve& c1, const ClosedCurve& c2, Seed seed)
{
    double dmin = curve_min_distance(c1, c2);
    double gap = std::max(c1.max_gap, c2.max_gap);
    if (dmin < 10 * gap)
        throw CurvesTooClose("curve distance " + std::to_string(dmin) +
                             " below 10 x max sample gap " + std::to_string(gap));

    std::mt19937_64 rng(splitmix64(seed));
    Vec4 pole = pick_pole(c1, c2, rng);
    Stereographic st(pole);
    std::vector<Vec3> s1 = project_curve(st, c1);
    std::vector<Vec3> s2 = project_curve(st, c2);

    int first = crossing_link_once(s1, s2, rng);
    int second = crossing_link_once(s1, s2, rng);
    if (first != second)
        throw DegenerateProjection("projections disagree: " + std::to_string(first) +
                                   " vs " + std::to_string(second));
    return first;
}

double gauss_linking(const ClosedCurve& c1, const ClosedCurve& c2, int max_samples,
                     Seed seed)
{
    std::mt19937_64 rng(splitmix64(seed ^ 0x9a55u));
    Vec4 pole = pick_pole(c1, c2, rng);
    Stereographic st(pole);

    auto subsample = [&](const ClosedCurve& c) {
        std::size_t stride = std::max<std::size_t>(1, c.samples.size() / max_samples);
        std::vector<Vec3> out;
        for (std::size_t i = 0; i < c.samples.size(); i += stride)
            out.push_back(st.map(c.samples[i]));
        return out;
    };
    std::vector<Vec3> s1 = subsample(c1), s2 = subsample(c2);

    double sum = 0;
    const std::size_t n1 = s1.size(), n2 = s2.size();
    for (std::size_t i = 0; i < n1; ++i) {
        Vec3 d1 = s1[(i + 1) % n1] - s1[i];
        Vec3 m1 = 0.5 * (s1[(i + 1) % n1] + s1[i]);
        for (std::size_t j = 0; j < n2; ++j) {
            Vec3 d2 = s2[(j + 1) % n2] - s2[j];
            Vec3 m2 = 0.5 * (s2[(j + 1) % n2] + s2[j]);
            Vec3 r = m1 - m2;
            double rn = r.norm();
            sum += d1.cross(d2).dot(r) / (rn * rn * rn);
        }
    }
    return sum / (4 * M_PI);
}

int self_linking(const StarShapedSystem& sys, const PeriodicOrbit& orbit,
                 double eps, double curve_h, const StepControl& ctl)
{
    if (orbit.k != 1)
        throw ConfigError("self_linking needs a primitive orbit");

    auto pushoff_curve = [&](double e) {
        Trajectory coarse = integrate(sys, orbit.marked_point, orbit.T0, 64, ctl);
        double vmax = 0;
        for (const auto& p : coarse.states)
            vmax = std::max(vmax, reeb_vector(sys, p.z).norm());
        int n = std::max(256,
                         static_cast<int>(std::ceil(orbit.T0 * vmax / (0.5 * curve_h))));
        Trajectory fine = integrate(sys, orbit.marked_point, orbit.T0, n, ctl);
        std::vector<Vec4> base, push;
        base.reserve(fine.states.size());
        push.reserve(fine.states.size());
        for (const auto& p : fine.states) {
            base.push_back(p.z);
            ContactFrame f = global_frame(sys, p);
            push.push_back(sys.project_radial(p.z + e * f.e1));
        }
        return std::pair{curve_from_points(base, curve_h),
                         curve_from_points(push, curve_h)};
    };

    auto [base1, push1] = pushoff_curve(eps);
    int sl1 = linking_number(base1, push1);
    auto [base2, push2] = pushoff_curve(eps / 2);
    int sl2 = linking_number(base2, push2);
    if (sl1 != sl2)
        throw EpsilonInstability("pushoff linking " + std::to_string(sl1) + " at eps vs " +
                                 std::to_string(sl2) + " at eps/2");
    return sl1;
}

LinkingClass linking_class(const StarShapedSystem& sys,
                           const std::vector<PeriodicOrbit>& link, double curve_h,
                           const StepControl& ctl)
{
    LinkingClass y;
    for (const auto& orb : link) {
        LinkComponent comp;
        comp.orbit_id = orb.id;
        comp.coefficient = 1;
        comp.T0 = orb.T0;
        comp.curve = orbit_curve(sys, orb, curve_h, false, ctl);
        y.components.push_back(std::move(comp));
    }
    for (std::size_t i = 0; i < y.components.size(); ++i)
        for (std::size_t j = i + 1; j < y.components.size(); ++j) {
            double d = curve_min_distance(y.components[i].curve, y.components[j].curve);
            if (d < 10 * std::max(y.components[i].curve.max_gap,
                                  y.components[j].curve.max_gap))
                throw ComponentsIntersect("components " + std::to_string(i) + ", " +
                                          std::to_string(j) + " are " +
                                          std::to_string(d) + " apart");
        }
    return y;
}

int evaluate_class(const LinkingClass& y, const ClosedCurve& loop, Seed seed)
{
    int total = 0;
    for (const auto& comp : y.components)
        total += comp.coefficient * linking_number(loop, comp.curve, seed);
    return total;
}

} // namespace reeb
