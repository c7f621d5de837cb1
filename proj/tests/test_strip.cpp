#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/strip.hpp"

using namespace edgephase;
using cd = std::complex<double>;

namespace {

/// Small operator-level configuration: beta 4, scaled spacings 0.5 and 0.05.
StripConfig small_config(double theta) {
    StripConfig cfg;
    cfg.beta = 4.0;
    cfg.profile = make_bump_profile(theta, 1.0);
    cfg.s_min = -20.0;
    cfg.s_max = 20.0;
    cfg.u_max = 1.75;
    cfg.ds = 0.125;
    cfg.du = 0.0125;
    cfg.dt = 0.02;
    cfg.operator_only = true;
    return cfg;
}

cvec random_state(int size, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    cvec x(size);
    for (cd& v : x) v = {g(rng), g(rng)};
    return x;
}

cd weighted_dot(const StripOperator& op, const cvec& a, const cvec& b) {
    cd acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc * op.ds() * op.du();
}

/// exp(i k s) phi_k(u) for the grid momentum at index m.
cvec straight_eigenstate(const StripOperator& op, int m, double* energy) {
    const double k = op.k()[m];
    std::vector<double> e;
    const auto phi = op.fiber_vectors(k, 1, &e);
    *energy = e[0];
    cvec x(op.size());
    for (int j = 0; j < op.n_u(); ++j) {
        for (int i = 0; i < op.n_s(); ++i) x[j * op.n_s() + i] = std::polar(phi[0][j], k * op.s()[i]);
    }
    return x;
}

}  // namespace

TEST_SUITE("strip") {

TEST_CASE("curved operator is symmetric") {
    const auto op = build_strip_operator(small_config(0.4));
    const cvec x = random_state(op->size(), 1);
    const cvec y = random_state(op->size(), 2);
    cvec hx(op->size()), hy(op->size());
    op->apply(x, hx);
    op->apply(y, hy);
    const cd a = weighted_dot(*op, x, hy);
    const cd b = weighted_dot(*op, hx, y);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
}

TEST_CASE("Fourier transforms") {
    const auto op = build_strip_operator(small_config(0.4));
    const cvec x = random_state(op->size(), 3);
    cvec xk(op->size()), back(op->size());
    op->forward(x, xk);
    op->backward(xk, back);
    double err = 0.0, nx = 0.0, nk = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        err = std::max(err, std::abs(back[i] - x[i]));
        nx += std::norm(x[i]);
        nk += std::norm(xk[i]);
    }
    CHECK(err <= 1e-12);
    CHECK(nk / nx == doctest::Approx(op->n_s()).epsilon(1e-12));
}

TEST_CASE("straight eigenstates acquire the Crank-Nicolson phase") {
    StripConfig cfg = small_config(0.0);
    const auto op = std::make_unique<StripOperator>(cfg, true);
    const int m = 7;
    double E = 0.0;
    const cvec x = straight_eigenstate(*op, m, &E);
    for (double dt : {0.02, 1e-10}) {
        CrankNicolson cn(*op, dt, 1e-13);
        cvec xk(op->size()), y(op->size());
        op->forward(x, xk);
        cn.step(xk);
        op->backward(xk, y);
        const cd expected = dt > 1e-6 ? (1.0 - cd(0, 0.5 * dt * E)) / (1.0 + cd(0, 0.5 * dt * E)) : std::polar(1.0, -E * dt);
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - expected * x[i]));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("norm is conserved through the bend") {
    StripConfig cfg = small_config(0.4);
    const auto op = build_strip_operator(cfg);
    StripState st = band_packet(*op, 0, 0.42, 0.2, 0.0, 64);
    const double n0 = op->inner_norm2(st.psi);
    CHECK(n0 == doctest::Approx(1.0).epsilon(1e-8));
    const StripState out = propagate(st, *op, 40, cfg.dt);
    CHECK(std::abs(op->inner_norm2(out.psi) - n0) <= 1e-10);
}

TEST_CASE("band packet content") {
    const auto op = build_strip_operator(small_config(0.0));
    const StripState st = band_packet(*op, 0, 0.42, 0.15, -40.0, 128);
    const std::vector<double> masses = band_masses(*op, st.psi, 3);
    CHECK(masses[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(masses[1] + masses[2] <= 1e-12);
    CHECK(mass_below(*op, st.psi, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("straight-channel group speed") {
    StripConfig cfg = small_config(0.0);
    const auto op = std::make_unique<StripOperator>(cfg, true);
    const StripState st = band_packet(*op, 0, 0.42, 0.07, -36.0, 128);
    const double s_start = mean_s(*op, st.psi);
    const int steps = 500;
    const StripState out = propagate(st, *op, steps, cfg.dt);
    const double moved = mean_s(*op, out.psi) - s_start;
    const FiberSolution sol = solve_fiber(0.42, 1);
    const double expected = group_velocity(sol, 0) / cfg.beta * steps * cfg.dt;
    CHECK(std::abs(moved - expected) / expected <= 0.01);
}

TEST_CASE("configuration invariants") {
    const BoundaryProfile bump = make_bump_profile(0.4, 1.0);
    StripConfig ok = default_strip_config(6.0, bump, 0, 0.42, 0.07);
    CHECK_NOTHROW(validate(ok));

    StripConfig wide = ok;
    wide.u_max = 3.0;
    CHECK_THROWS_AS(validate(wide), ConfigInvalid);

    StripConfig close = ok;
    close.s0 = -1.1;
    CHECK_THROWS_AS(validate(close), PacketOverlapsBend);

    StripConfig coarse_time = ok;
    coarse_time.dt = 0.2;
    CHECK_THROWS_AS(validate(coarse_time), ConfigInvalid);

    CHECK_THROWS_AS(validate(default_strip_config(6.0, bump, 0, 0.42, 0.3)), ConfigInvalid);
}

TEST_CASE("extraction requires an asymptotic packet") {
    StripConfig cfg = default_strip_config(4.0, make_bump_profile(0.4, 1.0), 0, 0.42, 0.07);
    const auto op = build_strip_operator(cfg);
    const StripState st = prepare_packet(cfg, *op);
    CHECK_THROWS_AS(extract_scattering(cfg, *op, st, st), NotAsymptotic);
}

TEST_CASE("straight boundary scatters trivially") {
    const StripConfig cfg = default_strip_config(2.0, make_bump_profile(0.0, 1.0), 0, 0.42, 0.07);
    const SimulationResult r = run_scattering(cfg);
    CHECK(std::abs(r.record.phase) <= 1e-10);
    CHECK(r.record.abs_t == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.record.reflected_mass <= 1e-10);
    CHECK(r.max_norm_drift <= 1e-10);
}

}
