#include <doctest.h>

#include <cmath>
#include <numbers>

#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/tridiagonal.hpp"
#include "oracles.hpp"

using namespace edgephase;

namespace {
const double kSqrtPi = std::sqrt(std::numbers::pi);
}

TEST_SUITE("fiber") {

TEST_CASE("fiber matrix entries and symmetry") {
    const TransverseGrid grid(12.0, 4800);
    const double h = grid.spacing();
    const SymTridiagonal t0 = build_fiber_matrix(0.0, grid);
    for (int i : {0, 17, 2399, grid.interior() - 1}) {
        const double u = grid.node(i);
        CHECK(t0.diag[i] == doctest::Approx(2.0 / (h * h) + u * u).epsilon(1e-15));
    }
    for (double off : t0.off) CHECK(off == -1.0 / (h * h));

    const TransverseGrid g1(12.0, 1200);
    const SymTridiagonal t1 = build_fiber_matrix(1.0, g1);
    const int j = static_cast<int>(std::lround(2.0 / g1.spacing())) - 1;
    REQUIRE(g1.node(j) == doctest::Approx(2.0));
    CHECK(t1.diag[j] - 2.0 / (g1.spacing() * g1.spacing()) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("odd oscillator levels at k = 0") {
    const FiberSolution sol = solve_fiber(0.0, 5);
    for (int n = 0; n < 5; ++n) CHECK(std::abs(sol.energy(n) - (4 * n + 3)) < 1e-6);
}

TEST_CASE("ground band approaches the Landau level") {
    // E - 1 lies below double resolution of E itself, hence the direct gap
    CHECK(landau_gap(0, -8.0) > 0.0);
    CHECK(landau_gap(0, -8.0) < 1e-4);
    CHECK(std::abs(band_energy(0, -8.0) - 1.0) < 1e-4);
    for (int n = 0; n < 3; ++n) {
        double prev = landau_gap(n, -3.0);
        for (double k = -3.5; k >= -8.0; k -= 0.5) {
            const double gap = landau_gap(n, k);
            CHECK(gap > 0.0);
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("ground energy at k = 1 matches the dense-grid regression value") {
    // Eigen QL on u_max = 20 with 40000 and 80000 points, Richardson-combined.
    constexpr double pinned = 6.07439106069;
    CHECK(std::abs(band_energy(0, 1.0) - pinned) < 1e-8);
}

TEST_CASE("energies agree with an independent dense eigensolver") {
    for (double k : {-1.5, 0.0, 0.7}) {
        const TransverseGrid grid(14.0, 2000);
        const auto dense = oracle::dense_fiber(k, grid.u_max(), grid.n_points());
        const FiberSolution sol = solve_fiber(k, grid, 3);
        for (int n = 0; n < 3; ++n) CHECK(sol.coarse.energies[n] == doctest::Approx(dense.energies(n)).epsilon(1e-11));
    }
}

TEST_CASE("Richardson consistency and error order") {
    const TransverseGrid g(12.0, 600);
    const double e1 = solve_fiber(0.3, g, 1).coarse.energies[0];
    const double e2 = solve_fiber(0.3, g.refined(), 1).coarse.energies[0];
    const double e4 = solve_fiber(0.3, g.refined().refined(), 1).coarse.energies[0];
    CHECK(std::abs(e1 - e2) / std::abs(e2 - e4) >= 3.5);
}

TEST_CASE("spectrum is ordered and simple") {
    for (double k = -3.0; k <= 3.0; k += 0.75) {
        const FiberSolution sol = solve_fiber(k, 6);
        for (int n = 0; n + 1 < 6; ++n) CHECK(sol.energy(n + 1) - sol.energy(n) > 0.0);
    }
}

TEST_CASE("eigenvectors are orthonormal with positive wall slope") {
    const FiberSolution sol = solve_fiber(-0.4, 5);
    const TransverseGrid& g = sol.grid();
    double worst = 0.0;
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            worst = std::max(worst, std::abs(inner(g, sol.psi(a), sol.psi(b)) - (a == b ? 1.0 : 0.0)));
        }
        CHECK(sol.psi(a)[0] > 0.0);
        CHECK(sol.coarse.wall_slope[a] > 0.0);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("grid precondition") {
    CHECK_THROWS_AS(solve_fiber(0.0, TransverseGrid(3.0, 1000), 2), GridTooSmall);
    CHECK_THROWS_AS(solve_fiber(0.0, 0), Error);
}

TEST_CASE("group velocity") {
    const FiberSolution s0 = solve_fiber(0.0, 1);
    CHECK(group_velocity(s0, 0) == doctest::Approx(4.0 / kSqrtPi).epsilon(1e-7));
    for (int n : {0, 1, 3}) {
        for (double k : {-2.0, -0.5, 0.0, 1.5}) {
            const FiberSolution sol = solve_fiber(k, n + 1);
            const double v = group_velocity(sol, n);
            CHECK(v > 0.0);
            const TransverseGrid g = TransverseGrid::default_for(std::abs(k) + 0.01, n + 1);
            auto e = [&](double kk) { return band_energy(n, kk, g); };
            const double d = 3e-3;
            const double fd = (8.0 * (e(k + d) - e(k - d)) - (e(k + 2 * d) - e(k - 2 * d))) / (12.0 * d);
            CAPTURE(n);
            CAPTURE(k);
            CHECK(std::abs(v - fd) / std::abs(fd) <= 1e-6);
        }
    }
}

TEST_CASE("dpsi/dk solves its defining system") {
    for (int n : {0, 2}) {
        const double k = 0.35;
        const TransverseGrid g(12.0, 4000);
        const FiberSolution sol = solve_fiber(k, g, n + 1);
        const FiberLevel& lv = sol.coarse;
        const std::vector<double> x = dpsi_dk(lv, k, n);
        const SymTridiagonal h = build_fiber_matrix(k, g);
        const double E = lv.energies[n];
        const double Ep = group_velocity(lv, k, n);
        const std::vector<double>& psi = lv.psi[n];
        std::vector<double> hx = h.apply(x);
        std::vector<double> res(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = g.node(static_cast<int>(i));
            res[i] = hx[i] - E * x[i] - (Ep - 2.0 * (k + u)) * psi[i];
        }
        CHECK(oracle::grid_norm(res, g.spacing()) <= 1e-8);
        CHECK(std::abs(inner(g, psi, x)) <= 1e-10);

        const double d = 1e-4;
        const FiberSolution plus = solve_fiber(k + d, g, n + 1);
        const FiberSolution minus = solve_fiber(k - d, g, n + 1);
        std::vector<double> fd(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) fd[i] = (plus.psi(n)[i] - minus.psi(n)[i]) / (2.0 * d);
        std::vector<double> diff(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) diff[i] = fd[i] - x[i];
        CHECK(oracle::grid_norm(diff, g.spacing()) <= 1e-5);
    }
}

TEST_CASE("decay norm") {
    const FiberSolution sol = solve_fiber(0.0, 1);
    CHECK(decay_norm(sol, 0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const TransverseGrid g(12.0, 2400);
    const double a = decay_norm(solve_fiber(0.0, g, 1), 0, 0.5);
    const double b = decay_norm(solve_fiber(0.0, g.refined(), 1), 0, 0.5);
    CHECK(std::abs(a - b) / b <= 0.01);
    double worst = 0.0;
    for (double k = -2.0; k <= 2.0; k += 0.5) worst = std::max(worst, decay_norm(solve_fiber(k, 1), 0, 0.5));
    CHECK(worst < 10.0);
}

TEST_CASE("band window inversion") {
    const double k = k_for_energy(0, 4.0);
    CHECK(band_energy(0, k) == doctest::Approx(4.0).epsilon(1e-9));
    const auto [lo, hi] = band_k_interval(0, 3.5, 4.5);
    CHECK(lo < k);
    CHECK(k < hi);
}

}
