#include <doctest.h>

#include <cmath>
#include <numbers>

#include "edgephase/errors.hpp"
#include "edgephase/perturbation.hpp"
#include "edgephase/profile.hpp"
#include "oracles.hpp"

using namespace edgephase;

namespace {

const double kFourOverSqrtPi = 4.0 / std::sqrt(std::numbers::pi);

/// Eigen-based eigenvalue of H0 + eps H1 on a grid large enough for the u^3 tail.
double perturbed(int n, double k, double eps) {
    const double u_max = std::abs(k) + 3.0 * std::sqrt(2.0 * n + 11.0);
    return oracle::dense_energy(n, k, u_max, static_cast<int>(std::ceil(150 * u_max)), eps);
}

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("H1 multiplication") {
    const TransverseGrid g(8.0, 400);
    std::vector<double> ones(g.interior(), 1.0);
    const std::vector<double> at0 = apply_H1(0.0, ones, g);
    const std::vector<double> at1 = apply_H1(-0.7, ones, g);
    for (int i = 0; i < g.interior(); ++i) {
        const double u = g.node(i);
        CHECK(at0[i] == doctest::Approx(u * u * u).epsilon(1e-14));
        const double k = -0.7;
        CHECK(std::abs(at1[i] - (u * u * u + 3 * u * u * k + 2 * u * k * k)) <= 1e-12 * std::max(1.0, u * u * u));
    }
}

TEST_CASE("first-order energy anchors") {
    const FiberSolution sol = solve_fiber(0.0, 1);
    CHECK(first_order_energy(sol, 0) == doctest::Approx(kFourOverSqrtPi).epsilon(1e-7));
    CHECK(first_order_energy(sol, 0) == doctest::Approx(group_velocity(sol, 0)).epsilon(1e-7));
}

TEST_CASE("first- and second-order energies against the perturbed eigenproblem") {
    const int points[4][2] = {{0, 0}, {0, 1}, {1, 0}, {2, -1}};
    for (const auto& p : points) {
        const int n = p[0];
        const double k = p[1];
        CAPTURE(n);
        CAPTURE(k);
        const FiberSolution sol = solve_fiber(k, n + 1);
        const double e1 = first_order_energy(sol, n);
        const double slope = (perturbed(n, k, 1e-3) - perturbed(n, k, -1e-3)) / 2e-3;
        CHECK(std::abs(e1 - slope) / std::abs(slope) <= 1e-5);

        const double e2 = second_order_energy(sol, n, n + 40).E2;
        const double curv =
            0.5 * oracle::second_difference([&](double eps) { return perturbed(n, k, eps); }, 0.0, 1e-2);
        CHECK(std::abs(e2 - curv) / std::abs(curv) <= 1e-4);
    }
}

TEST_CASE("first-order vector") {
    const int n = 1;
    const double k = 0.2;
    const FiberSolution sol = solve_fiber(k, n + 1);
    const TransverseGrid& g = sol.grid();
    const FiberLevel& lv = sol.coarse;
    const std::vector<double> x = first_order_vector(lv, k, n);
    const std::vector<double>& psi = lv.psi[n];
    const double e1 = first_order_energy(lv, k, n);
    const std::vector<double> hpsi = apply_H1(k, psi, g);
    const std::vector<double> hx = build_fiber_matrix(k, g).apply(x);
    std::vector<double> res(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) res[i] = hx[i] - lv.energies[n] * x[i] + (hpsi[i] - e1 * psi[i]);
    CHECK(oracle::grid_norm(res, g.spacing()) <= 1e-8);
    CHECK(std::abs(inner(g, psi, x)) <= 1e-10);

    const double eps = 1e-3;
    const auto up = oracle::dense_fiber(k, g.u_max(), g.n_points(), eps, true);
    const auto down = oracle::dense_fiber(k, g.u_max(), g.n_points(), -eps, true);
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = (up.vectors(i, n) - down.vectors(i, n)) / (2.0 * eps) - x[i];
    CHECK(oracle::grid_norm(diff, g.spacing()) <= 1e-4);
}

TEST_CASE("psi tilde in the real gauge") {
    const FiberSolution sol = solve_fiber(0.5, 1);
    const std::vector<double> pt = psi_tilde1(sol, 0);
    const std::vector<double> p1 = first_order_vector(sol, 0);
    const BandDerivatives d = dpsi_dk(sol, 0);
    const double ratio = first_order_energy(sol, 0) / group_velocity(sol, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) worst = std::max(worst, std::abs(pt[i] - (p1[i] - ratio * d.dpsi_dk[i])));
    CHECK(worst <= 1e-6);

    const TransverseGrid g(11.0, 2000);
    const double a = oracle::grid_norm(psi_tilde1(solve_fiber(0.5, g, 1), 0), g.spacing());
    const double b = oracle::grid_norm(psi_tilde1(solve_fiber(0.5, g.refined(), 1), 0), g.refined().spacing());
    CHECK(std::isfinite(a));
    CHECK(std::abs(a - b) / b <= 0.01);
}

TEST_CASE("second-order energy forms agree") {
    for (int n : {0, 1, 3}) {
        const FiberSolution sol = solve_fiber(-0.3, n + 1);
        const SecondOrderEnergy e2 = second_order_energy(sol, n, n + 40);
        CHECK(std::abs(e2.resolvent - e2.sum_over_states) <= 1e-6 * std::abs(e2.resolvent));
        if (n == 0) CHECK(e2.E2 < 0.0);
    }
}

TEST_CASE("geometric phase densities") {
    const FiberSolution sol = solve_fiber(0.8, 2);
    const GeometricPhaseDensity real = geometric_phase_coeffs(sol, 1);
    CHECK(real.gamma_B_coeff == 0.0);
    Reconvention rc;
    for (int i = 0; i <= 400; ++i) {
        const double kk = -4.0 + 0.02 * i;
        rc.k.push_back(kk);
        rc.lambda.push_back(0.3 * std::cos(1.7 * kk));
        rc.lambda_prime.push_back(-0.51 * std::sin(1.7 * kk));
    }
    const GeometricPhaseDensity g = geometric_phase_coeffs(sol, 1, &rc);
    const double ratio = first_order_energy(sol, 1) / group_velocity(sol, 1);
    CHECK(std::abs(g.gamma_B_coeff - ratio * rc.lambda_prime_at(0.8)) <= 1e-8);
    CHECK(std::abs(g.gamma_RW_coeff - real.gamma_RW_coeff) <= 1e-8);
    CHECK(g.gauge_tag != real.gauge_tag);
}

TEST_CASE("adiabatic momentum drift") {
    const BoundaryProfile profile = make_bump_profile(0.4, 1.0);
    const FiberSolution sol = solve_fiber(0.0, 1);
    const std::vector<double> d6 = adiabatic_drift(profile, sol, 0, 6.0);
    const std::vector<double> d12 = adiabatic_drift(profile, sol, 0, 12.0);
    for (std::size_t i = 0; i < d6.size(); i += 100) {
        CHECK(d6[i] == doctest::Approx(-profile.kappa[i] / 6.0).epsilon(1e-6));
        CHECK(d12[i] == doctest::Approx(0.5 * d6[i]).epsilon(1e-14));
    }
    const BoundaryProfile flat = make_bump_profile(0.0, 1.0);
    for (double v : adiabatic_drift(flat, sol, 0, 6.0)) CHECK(v == 0.0);
    CHECK_THROWS_AS(adiabatic_drift(profile, sol, 0, 0.5), Error);
}

}
