#include "edgephase/classical.hpp"

#include <cmath>
#include <numbers>

#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/perturbation.hpp"

namespace edgephase {

namespace {

struct Vec2 {
    double x;
    double y;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double angle_between(Vec2 a, Vec2 b) { return std::atan2(cross(a, b), dot(a, b)); }

// circular segment cut off by a chord subtending the given central angle
double segment_area(double radius, double angle) {
    return 0.5 * radius * radius * (angle - std::sin(angle));
}

void check_eta(double eta) {
    if (!(eta > 0.0 && eta < std::numbers::pi)) throw ConfigError("eta must lie in (0, pi)");
}

}  // namespace

double eta_from(double E, double k) {
    if (!(E > 0.0)) throw NoCollision("energy must be positive");
    const double r = std::sqrt(E);
    if (std::abs(k) >= r) throw NoCollision("orbit with |k| >= sqrt(E) misses the wall");
    return std::acos(k / r);
}

OrbitShape orbit_shape(double E, double k) { return OrbitShape{E, k, std::sqrt(E), eta_from(E, k)}; }

double cap_area(double E, double k) {
    const double eta = eta_from(E, k);
    return E * (eta - std::sin(eta) * std::cos(eta));
}

double bohr_sommerfeld_residual(int n, double k) {
    const double E = band_energy(n, k);
    return cap_area(E, k) / (2.0 * std::numbers::pi) - n;
}

std::pair<double, double> velocity_ratio_check(int n, double k) {
    const FiberSolution sol = solve_fiber(k, n + 1);
    const double E = sol.energy(n);
    const double eta = eta_from(E, k);
    return {group_velocity(sol, n) / (2.0 * std::sqrt(E)), std::sin(eta) / eta};
}

double solve_kn(int n, double eta) {
    check_eta(eta);
    const double c = std::cos(eta);
    auto f = [&](double k) { return k - std::sqrt(band_energy(n, k)) * c; };
    if (std::abs(c) < 1e-15) return 0.0;
    double half = 2.0 * std::sqrt(4.0 * n + 3.0) + 2.0;
    double lo = -half;
    double hi = half;
    double flo = f(lo);
    double fhi = f(hi);
    for (int expand = 0; flo * fhi > 0.0; ++expand) {
        if (expand == 2) throw BracketFailure("no sign change of k - sqrt(E_n(k)) cos(eta) in the k window");
        half *= 2.0;
        lo = -half;
        hi = half;
        flo = f(lo);
        fhi = f(hi);
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) <= 1e-12 || hi - lo < 1e-14) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

HopDeltas hop_deltas(double r, double eta, double kappa, double beta) {
    if (std::abs(kappa) * r > 0.1) throw CurvatureTooLarge("|kappa| r must not exceed 0.1");
    const double s = std::sin(eta);
    HopDeltas d;
    d.d_span = -kappa * r * r * std::sin(2.0 * eta);
    d.d_eta = 0.0;
    d.d_length = -2.0 * kappa * r * r * s;
    d.d_area = -4.0 / 3.0 * kappa * r * r * r * s * s * s;
    d.d_action = -2.0 * beta * beta * r * r * r * kappa * s * (1.0 - 2.0 / 3.0 * s * s);
    return d;
}

HopGeometry exact_hop_geometry(double r, double eta, double kappa) {
    check_eta(eta);
    if (!(r > 0.0)) throw ConfigError("radius must be positive");
    const Vec2 origin{0.0, 0.0};
    const Vec2 c1{r * std::sin(eta), -r * std::cos(eta)};
    HopGeometry g;
    if (kappa == 0.0) {
        g.span = 2.0 * r * std::sin(eta);
        g.eta_out = eta;
        g.length = 2.0 * r * eta;
        g.area = segment_area(r, 2.0 * eta);
        return g;
    }
    const double R = 1.0 / kappa;
    const Vec2 c2{0.0, R};
    // the second intersection mirrors the origin across the line of centres
    const Vec2 d = c2 - c1;
    const double dn = std::sqrt(dot(d, d));
    const Vec2 nhat = (1.0 / dn) * d;
    const Vec2 foot = c1 + dot(origin - c1, nhat) * nhat;
    const Vec2 x = 2.0 * foot - origin;

    // wall arc from the origin, counter-clockwise about c2 for kappa > 0
    const double wall_angle = angle_between(origin - c2, x - c2);
    g.span = R * wall_angle;
    // orbit traversed clockwise about c1
    double orbit_angle = -angle_between(origin - c1, x - c1);
    if (orbit_angle <= 0.0) orbit_angle += 2.0 * std::numbers::pi;
    g.length = r * orbit_angle;

    const Vec2 rel = x - c1;
    const Vec2 velocity{rel.y, -rel.x};
    const Vec2 radial = x - c2;
    const Vec2 tangent = (kappa > 0.0) ? Vec2{-radial.y, radial.x} : Vec2{radial.y, -radial.x};
    g.eta_out = angle_between(velocity, tangent);

    const double wall_segment = segment_area(std::abs(R), std::abs(wall_angle));
    g.area = segment_area(r, orbit_angle) + (kappa > 0.0 ? wall_segment : -wall_segment);
    return g;
}

HopDeltas exact_hop_deltas(double r, double eta, double kappa, double beta) {
    const HopGeometry bent = exact_hop_geometry(r, eta, kappa);
    const HopGeometry flat = exact_hop_geometry(r, eta, 0.0);
    HopDeltas d;
    d.d_span = bent.span - flat.span;
    d.d_eta = bent.eta_out - flat.eta_out;
    d.d_length = bent.length - flat.length;
    d.d_area = bent.area - flat.area;
    d.d_action = beta * beta * (r * d.d_length - d.d_area);
    return d;
}

double semiclassical_phase(int n, double eta, double theta) {
    const double kn = solve_kn(n, eta);
    const double s = std::sin(eta);
    return -theta * band_energy(n, kn) * s * s / 3.0;
}

SemiclassicalComparison compare_semiclassical(int n, double eta, double theta) {
    SemiclassicalComparison c;
    c.n = n;
    c.eta = eta;
    c.k_n = solve_kn(n, eta);
    const FiberSolution sol = solve_fiber(c.k_n, n + 1);
    c.E_n = sol.energy(n);
    const double s = std::sin(eta);
    c.phi_semiclassical = -theta * c.E_n * s * s / 3.0;
    c.E1 = first_order_energy(sol, n);
    c.phi_quantum = -c.E1 / group_velocity(sol, n) * theta;
    c.rel_gap = std::abs(c.phi_semiclassical - c.phi_quantum) / std::abs(c.phi_quantum);
    c.E1_limit = 2.0 / 3.0 * std::pow(c.E_n, 1.5) * s * s * s / eta;
    return c;
}

}  // namespace edgephase
