#include "edgephase/phases.hpp"

#include <cmath>

#include "edgephase/errors.hpp"
#include "edgephase/perturbation.hpp"

namespace edgephase {

namespace {

constexpr double kCurvatureStep = 1e-4;

double monomial_value(const CurvatureMonomial& m, const BoundaryProfile& p, double s) {
    double v = 1.0;
    for (std::size_t d = 0; d < m.exponents.size(); ++d) {
        const double kd = p.curvature(s, static_cast<int>(d));
        for (int j = 0; j < m.exponents[d]; ++j) v *= kd;
    }
    return v;
}

std::complex<double> group_moment(const std::vector<SymbolTerm>& terms, const FiberLevel& lv, double k, int n) {
    const auto& psi = lv.psi.at(n);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < lv.grid.interior(); ++i) {
        const double u = lv.grid.node(i);
        std::complex<double> poly = 0.0;
        for (const SymbolTerm& t : terms) poly += t.coeff * std::pow(u, t.u_power) * std::pow(k + u, t.p_power);
        acc += poly * psi[i] * psi[i];
    }
    return acc * lv.grid.spacing();
}

}  // namespace

const Symbol& h2_symbol() {
    static const Symbol s = expand_strip_symbol(2).order(2);
    return s;
}

double second_derivative_energy(int n, double k) {
    const TransverseGrid grid = TransverseGrid::default_for(std::abs(k) + kCurvatureStep, n + 1);
    const FiberSolution plus = solve_fiber(k + kCurvatureStep, grid, n + 1);
    const FiberSolution minus = solve_fiber(k - kCurvatureStep, grid, n + 1);
    return (group_velocity(plus, n) - group_velocity(minus, n)) / (2.0 * kCurvatureStep);
}

BandCoefficients band_coefficients(const FiberSolution& sol, int n, int m_max) {
    BandCoefficients c;
    c.n = n;
    c.k = sol.k;
    c.E = sol.energy(n);
    c.E_prime = group_velocity(sol, n);
    c.E_second = second_derivative_energy(n, sol.k);
    c.E1 = first_order_energy(sol, n);
    c.E1_prime = first_order_energy_slope(sol, n);
    c.E2 = second_order_energy(sol, n, m_max > 0 ? m_max : n + 40).E2;
    for (const auto& [mono, terms] : group_by_curvature(h2_symbol()).groups) {
        c.h2_moments[mono] = (4.0 * group_moment(terms, sol.fine, sol.k, n) -
                              group_moment(terms, sol.coarse, sol.k, n)) / 3.0;
    }
    return c;
}

BandCoefficients band_coefficients(int n, double k, int m_max) {
    return band_coefficients(solve_fiber(k, n + 1), n, m_max);
}

std::vector<std::complex<double>> apply_h2(const BoundaryProfile& profile, double s, double k,
                                           const TransverseGrid& grid, const std::vector<double>& psi) {
    auto kappa = [&](int d) { return profile.curvature(s, d); };
    std::vector<std::complex<double>> out(psi.size());
    for (int i = 0; i < grid.interior(); ++i) out[i] = h2_symbol().evaluate(kappa, k, grid.node(i)) * psi[i];
    return out;
}

std::vector<std::complex<double>> h2_expectation(const BandCoefficients& c, const BoundaryProfile& profile) {
    std::vector<std::complex<double>> out(profile.s_grid.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& [mono, moment] : c.h2_moments) out[i] += moment * monomial_value(mono, profile, profile.s_grid[i]);
    }
    return out;
}

double phi0(const BandCoefficients& c, const BoundaryProfile& profile) {
    return -c.E1 / c.E_prime * profile.theta;
}

double phi0(int n, double k, const BoundaryProfile& profile) {
    const FiberSolution sol = solve_fiber(k, n + 1);
    return -first_order_energy(sol, n) / group_velocity(sol, n) * profile.theta;
}

std::vector<double> phi_profile(const BandCoefficients& c, const BoundaryProfile& profile) {
    std::vector<double> out = cumulative_integral(profile, profile.kappa);
    const double ratio = -c.E1 / c.E_prime;
    for (double& v : out) v *= ratio;
    return out;
}

double phi1(const BandCoefficients& c, const BoundaryProfile& profile) {
    const std::vector<std::complex<double>> e12 = h2_expectation(c, profile);
    std::vector<double> integrand(e12.size());
    for (std::size_t i = 0; i < e12.size(); ++i) {
        integrand[i] = e12[i].real() + profile.kappa[i] * profile.kappa[i] * c.E2;
    }
    const double ep = c.E_prime;
    const double drift = c.E1 * c.E1_prime / (ep * ep) - 0.5 * c.E1 * c.E1 * c.E_second / (ep * ep * ep);
    return -integrate(profile, integrand) / ep + drift * profile.kappa_squared_integral();
}

PhaseRecord phase_record(const BandCoefficients& c, const BoundaryProfile& profile) {
    return PhaseRecord{c.n, c.k, phi0(c, profile), phi1(c, profile), phi_profile(c, profile)};
}

WkbProfile wkb_phase(const BandCoefficients& c, const BoundaryProfile& profile, double beta) {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    const std::size_t m = profile.s_grid.size();
    const std::vector<std::complex<double>> e12 = h2_expectation(c, profile);
    const double ep = c.E_prime;
    std::vector<double> s1p(m), s2p(m), s2i(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double kappa = profile.kappa[i];
        s1p[i] = -kappa * c.E1 / ep;
        const double h2 = e12[i].real() + kappa * kappa * c.E2;
        s2p[i] = -(h2 + 0.5 * c.E_second * s1p[i] * s1p[i] + kappa * c.E1_prime * s1p[i]) / ep;
        s2i[i] = -e12[i].imag() / ep;
    }
    WkbProfile w;
    w.s_grid = profile.s_grid;
    w.S1 = cumulative_integral(profile, s1p);
    w.S2 = cumulative_integral(profile, s2p);
    const std::vector<double> s2_imag = cumulative_integral(profile, s2i);
    w.phase.resize(m);
    w.log_amplitude.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        w.phase[i] = w.S1[i] + w.S2[i] / beta;
        const double dh = ep + (c.E_second * s1p[i] + profile.kappa[i] * c.E1_prime) / beta;
        w.log_amplitude[i] = 0.5 * std::log(ep / dh) - s2_imag[i] / beta;
    }
    return w;
}

}  // namespace edgephase
