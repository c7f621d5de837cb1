#include "edgephase/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "edgephase/errors.hpp"

namespace edgephase {

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty() || xs.size() != ys.size()) throw ConfigError("reconvention samples are malformed");
    if (xs.size() == 1 || x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1.0 - t) * ys[j - 1] + t * ys[j];
}

double second_order_level(const FiberLevel& level, double k, int n) {
    const std::vector<double> psi1 = first_order_vector(level, k, n);
    return h1_element(k, level.grid, psi1, level.psi.at(n)).value;
}

double slope_level(const FiberLevel& level, double k, int n) {
    const auto& psi = level.psi.at(n);
    double acc = 0.0;
    for (int i = 0; i < level.grid.interior(); ++i) {
        const double u = level.grid.node(i);
        acc += (3.0 * u * u + 4.0 * u * k) * psi[i] * psi[i];
    }
    acc *= level.grid.spacing();
    const std::vector<double> dpsi = dpsi_dk(level, k, n);
    return acc + 2.0 * h1_element(k, level.grid, dpsi, psi).value;
}

}  // namespace

std::vector<double> apply_H1(double k, std::span<const double> psi, const TransverseGrid& grid) {
    std::vector<double> out(psi.size());
    for (int i = 0; i < grid.interior(); ++i) out[i] = h1_value(k, grid.node(i)) * psi[i];
    return out;
}

MatrixElement h1_element(double k, const TransverseGrid& grid, std::span<const double> a,
                         std::span<const double> b) {
    const int n = grid.interior();
    const int tail_start = static_cast<int>(std::floor(0.9 * grid.n_points())) - 1;
    MatrixElement m;
    for (int i = 0; i < n; ++i) {
        const double term = a[i] * h1_value(k, grid.node(i)) * b[i];
        m.value += term;
        if (i >= tail_start) m.tail += term;
    }
    m.value *= grid.spacing();
    m.tail *= grid.spacing();
    if (std::abs(m.tail) > 1e-8 * std::abs(m.value) && std::abs(m.tail) > 1e-300) {
        throw TailContamination("outer 10% of the grid carries " + std::to_string(m.tail) + " of " +
                                std::to_string(m.value));
    }
    return m;
}

double first_order_energy(const FiberLevel& level, double k, int n) {
    const auto& psi = level.psi.at(n);
    return h1_element(k, level.grid, psi, psi).value;
}

double first_order_energy(const FiberSolution& sol, int n) {
    return richardson(first_order_energy(sol.coarse, sol.k, n), first_order_energy(sol.fine, sol.k, n));
}

std::vector<double> first_order_vector(const FiberLevel& level, double k, int n) {
    const auto& psi = level.psi.at(n);
    std::vector<double> rhs = apply_H1(k, psi, level.grid);
    for (double& v : rhs) v = -v;
    return reduced_resolvent_solve(build_fiber_matrix(k, level.grid), level.energies.at(n), psi, rhs);
}

std::vector<double> first_order_vector(const FiberSolution& sol, int n) {
    return first_order_vector(sol.coarse, sol.k, n);
}

std::vector<double> psi_tilde1(const FiberSolution& sol, int n) {
    const FiberLevel& lv = sol.coarse;
    const std::vector<double> psi1 = first_order_vector(lv, sol.k, n);
    const std::vector<double> dpsi = dpsi_dk(lv, sol.k, n);
    const auto& psi = lv.psi.at(n);
    const double ratio = first_order_energy(lv, sol.k, n) / group_velocity(lv, sol.k, n);
    const double overlap = inner(lv.grid, dpsi, psi);
    std::vector<double> out(psi1.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi1[i] - ratio * (dpsi[i] + overlap * psi[i]);
    return out;
}

double second_order_energy_resolvent(const FiberSolution& sol, int n) {
    return richardson(second_order_level(sol.coarse, sol.k, n), second_order_level(sol.fine, sol.k, n));
}

SecondOrderEnergy second_order_energy(const FiberSolution& sol, int n, int m_max) {
    if (m_max < n + 10) throw ConfigError("m_max must be at least n + 10");
    const FiberLevel& lv = sol.coarse;
    const TransverseGrid& grid = lv.grid;
    if (m_max > grid.interior()) throw ConfigError("m_max exceeds the number of grid unknowns");

    SecondOrderEnergy out;
    out.m_max = m_max;
    out.resolvent = second_order_level(lv, sol.k, n);
    out.E2 = richardson(out.resolvent, second_order_level(sol.fine, sol.k, n));

    const SymTridiagonal h = build_fiber_matrix(sol.k, grid);
    const std::vector<double> h1psi = apply_H1(sol.k, lv.psi.at(n), grid);
    const double en = lv.energies.at(n);
    std::vector<std::vector<double>> basis;
    std::vector<double> terms;
    double partial = 0.0;
    double previous_partial = 0.0;
    for (int m = 0; m < m_max; ++m) {
        const double em = eigenvalue(h, m);
        std::vector<double> v = eigenvector(h, em, basis);
        basis.push_back(v);
        if (m == n) continue;
        const double scale = 1.0 / std::sqrt(grid.spacing());
        double elem = 0.0;
        for (int i = 0; i < grid.interior(); ++i) elem += v[i] * scale * h1psi[i];
        elem *= grid.spacing();
        const double term = elem * elem / (en - em);
        previous_partial = partial;
        partial += term;
        terms.push_back(term);
    }
    out.sum_over_states = partial;

    // power-law tail fitted to the last two terms
    const std::size_t t = terms.size();
    const double a = std::abs(terms[t - 2]);
    const double b = std::abs(terms[t - 1]);
    const double m1 = m_max - 2;
    const double m2 = m_max - 1;
    if (b > 0.0 && a > b) {
        const double p = std::log(a / b) / std::log(m2 / m1);
        if (p > 1.0) out.remainder = terms[t - 1] * m2 / (p - 1.0);
    }

    const double scale = std::max(std::abs(out.resolvent), 1e-300);
    if (std::abs(partial - previous_partial) > 1e-6 * scale) {
        throw TruncationNotConverged("last two partial sums differ by " +
                                     std::to_string(std::abs(partial - previous_partial) / scale));
    }
    if (std::abs(out.sum_over_states + out.remainder - out.resolvent) > 1e-6 * scale) {
        throw TruncationNotConverged("sum over states disagrees with resolvent form by " +
                                     std::to_string(std::abs(out.sum_over_states + out.remainder - out.resolvent) / scale));
    }
    return out;
}

double Reconvention::lambda_at(double kk) const { return interpolate(k, lambda, kk); }
double Reconvention::lambda_prime_at(double kk) const { return interpolate(k, lambda_prime, kk); }

GeometricPhaseDensity geometric_phase_coeffs(const FiberSolution& sol, int n, const Reconvention* reconvention) {
    using cd = std::complex<double>;
    const FiberLevel& lv = sol.coarse;
    const auto& psi = lv.psi.at(n);
    const std::vector<double> dpsi = dpsi_dk(lv, sol.k, n);
    const double E1 = first_order_energy(sol, n);
    const double Ep = group_velocity(sol, n);

    const double lam = reconvention ? reconvention->lambda_at(sol.k) : 0.0;
    const double lam_p = reconvention ? reconvention->lambda_prime_at(sol.k) : 0.0;
    const cd phase = std::exp(cd(0.0, lam));

    cd berry = 0.0;
    cd rw = 0.0;
    for (int i = 0; i < lv.grid.interior(); ++i) {
        const cd p = phase * psi[i];
        const cd dp = phase * (dpsi[i] + cd(0.0, lam_p) * psi[i]);
        berry += std::conj(p) * dp;
        rw += std::conj(h1_value(sol.k, lv.grid.node(i)) * p) * (phase * dpsi[i]);
    }
    berry *= lv.grid.spacing();
    // the lambda' part of <H1 psi, d psi> is lambda' E1; use the extrapolated E1
    rw = rw * lv.grid.spacing() + cd(0.0, lam_p * E1);

    GeometricPhaseDensity g;
    g.k = sol.k;
    g.n = n;
    g.gamma_B_coeff = E1 / Ep * berry.imag();
    g.gamma_RW_coeff = -g.gamma_B_coeff + rw.imag() / Ep;
    g.gauge_tag = reconvention ? "real gauge with positive wall slope, reconvened by lambda(k)"
                               : "real gauge with positive wall slope";
    return g;
}

std::vector<double> adiabatic_drift(const BoundaryProfile& profile, const FiberSolution& sol, int n, double beta) {
    if (!(beta >= 1.0)) throw ConfigError("beta must be at least 1");
    const double ratio = first_order_energy(sol, n) / group_velocity(sol, n);
    std::vector<double> out(profile.kappa.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -profile.kappa[i] * ratio / beta;
    return out;
}

double first_order_energy_slope(const FiberSolution& sol, int n) {
    return richardson(slope_level(sol.coarse, sol.k, n), slope_level(sol.fine, sol.k, n));
}

}  // namespace edgephase
