#include "edgephase/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "edgephase/errors.hpp"

namespace edgephase {

namespace {

// d^order/dx^order of exp(-1/(1-x^2)) on (-1, 1); zero outside.
double unit_bump(double x, int order) {
    const double q = 1.0 - x * x;
    if (q <= 0.0) return 0.0;
    const double b = std::exp(-1.0 / q);
    if (order == 0) return b;
    const double g1 = -2.0 * x / (q * q);
    if (order == 1) return g1 * b;
    const double g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
    return (g2 + g1 * g1) * b;
}

double trapezoid_unit(auto&& f) {
    const int n = 20000;
    const double h = 2.0 / n;
    double acc = 0.0;
    for (int i = 1; i < n; ++i) acc += f(-1.0 + i * h);
    return acc * h;
}

void check_angle(double theta) {
    if (!std::isfinite(theta) || std::abs(theta) > std::numbers::pi ||
        std::abs(std::abs(theta) - std::numbers::pi) < 1e-12) {
        throw ConfigError("bending angle must lie in (-pi, pi)");
    }
}

void sample(BoundaryProfile& p, int samples) {
    if (samples < 3) throw ConfigError("profile needs at least 3 samples");
    const double lo = -1.25 * p.L;
    const double h = 2.5 * p.L / (samples - 1);
    p.s_grid.resize(samples);
    p.kappa.resize(samples);
    p.kappa_dot.resize(samples);
    p.kappa_ddot.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double s = lo + i * h;
        p.s_grid[i] = s;
        p.kappa[i] = p.curvature(s, 0);
        p.kappa_dot[i] = p.curvature(s, 1);
        p.kappa_ddot[i] = p.curvature(s, 2);
    }
}

BoundaryProfile assemble(std::string kind, std::vector<Bump> bumps, int samples) {
    BoundaryProfile p;
    p.kind = std::move(kind);
    p.bumps = std::move(bumps);
    p.theta = 0.0;
    p.L = 0.0;
    for (const Bump& b : p.bumps) {
        if (!(b.half_width > 0.0)) throw ConfigError("bump half-width must be positive");
        p.theta += b.theta;
        p.L = std::max(p.L, std::abs(b.center) + b.half_width);
    }
    check_angle(p.theta);
    sample(p, samples);
    return p;
}

}  // namespace

double bump_normalization() {
    static const double value = trapezoid_unit([](double x) { return unit_bump(x, 0); });
    return value;
}

double BoundaryProfile::curvature(double s, int order) const {
    double acc = 0.0;
    for (const Bump& b : bumps) {
        const double x = (s - b.center) / b.half_width;
        const double c = b.theta / (b.half_width * bump_normalization());
        acc += c * unit_bump(x, order) / std::pow(b.half_width, order);
    }
    return acc;
}

double BoundaryProfile::max_abs_curvature() const {
    double m = 0.0;
    for (double k : kappa) m = std::max(m, std::abs(k));
    return m;
}

double BoundaryProfile::kappa_squared_integral() const {
    static const double b2 = trapezoid_unit([](double x) { return unit_bump(x, 0) * unit_bump(x, 0); });
    const double i0 = bump_normalization();
    double acc = 0.0;
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        acc += bumps[i].theta * bumps[i].theta * b2 / (bumps[i].half_width * i0 * i0);
        for (std::size_t j = i + 1; j < bumps.size(); ++j) {
            const Bump& a = bumps[i];
            const Bump& c = bumps[j];
            if (std::abs(a.center - c.center) < a.half_width + c.half_width) {
                throw ConfigError("overlapping bumps are not supported");
            }
        }
    }
    return acc;
}

BoundaryProfile make_bump_profile(double theta, double L, int samples) {
    if (!(L > 0.0)) throw ConfigError("bump half-length must be positive");
    return assemble("bump", {Bump{0.0, L, theta}}, samples);
}

BoundaryProfile make_two_bump_profile(double theta1, double L1, double center1,
                                      double theta2, double L2, double center2, int samples) {
    if (std::abs(center1 - center2) < L1 + L2) throw ConfigError("bumps must be separated");
    return assemble("two_bump", {Bump{center1, L1, theta1}, Bump{center2, L2, theta2}}, samples);
}

BoundaryProfile scaled(const BoundaryProfile& p, double factor) {
    std::vector<Bump> bumps = p.bumps;
    for (Bump& b : bumps) b.theta *= factor;
    return assemble(p.kind, std::move(bumps), static_cast<int>(p.s_grid.size()));
}

BoundaryProfile stretched(const BoundaryProfile& p, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("stretch factor must be positive");
    std::vector<Bump> bumps = p.bumps;
    for (Bump& b : bumps) {
        b.center *= lambda;
        b.half_width *= lambda;
    }
    return assemble(p.kind, std::move(bumps), static_cast<int>(p.s_grid.size()));
}

double integrate(const BoundaryProfile& p, const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < n; ++i) acc += samples[i];
    return acc * p.s_spacing();
}

std::vector<double> cumulative_integral(const BoundaryProfile& p, const std::vector<double>& samples) {
    std::vector<double> out(samples.size(), 0.0);
    const double h = p.s_spacing();
    for (std::size_t i = 1; i < samples.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * h * (samples[i - 1] + samples[i]);
    }
    return out;
}

}  // namespace edgephase
