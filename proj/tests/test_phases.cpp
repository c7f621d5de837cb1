#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/perturbation.hpp"
#include "edgephase/phases.hpp"
#include "edgephase/profile.hpp"
#include "edgephase/symbolic.hpp"

using namespace edgephase;

TEST_SUITE("profile") {

TEST_CASE("bump profile integrates to theta and is compactly supported") {
    const BoundaryProfile p = make_bump_profile(0.7, 1.3);
    CHECK(std::abs(integrate(p, p.kappa) - 0.7) <= 1e-10);
    CHECK(p.curvature(1.3) == 0.0);
    CHECK(p.curvature(-1.31) == 0.0);
    CHECK(p.curvature(0.0) > 0.0);
    const double h = 1e-4;
    CHECK(p.curvature(0.4, 1) == doctest::Approx((p.curvature(0.4 + h) - p.curvature(0.4 - h)) / (2 * h)).epsilon(1e-6));
    CHECK(p.curvature(0.4, 2) ==
          doctest::Approx((p.curvature(0.4 + h, 1) - p.curvature(0.4 - h, 1)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("two-bump profile and transformations") {
    const BoundaryProfile two = make_two_bump_profile(0.1, 0.4, -0.5, 0.3, 0.45, 0.5);
    CHECK(std::abs(integrate(two, two.kappa) - 0.4) <= 1e-10);
    CHECK(two.theta == doctest::Approx(0.4));
    const BoundaryProfile one = make_bump_profile(0.4, 1.0);
    const BoundaryProfile s2 = stretched(one, 2.0);
    CHECK(std::abs(integrate(s2, s2.kappa) - 0.4) <= 1e-10);
    CHECK(s2.kappa_squared_integral() == doctest::Approx(0.5 * one.kappa_squared_integral()).epsilon(1e-12));
    const BoundaryProfile doubled = scaled(one, 2.0);
    CHECK(doubled.theta == doctest::Approx(0.8));
}

TEST_CASE("profile preconditions") {
    CHECK_THROWS_AS(make_bump_profile(std::numbers::pi, 1.0), ConfigError);
    CHECK_THROWS_AS(make_bump_profile(0.4, 0.0), ConfigError);
    CHECK_THROWS_AS(make_two_bump_profile(0.2, 0.6, -0.5, 0.2, 0.6, 0.5), ConfigError);
}

}

TEST_SUITE("symbolic") {

TEST_CASE("commutator of P with a curvature function") {
    const Symbol pk = Symbol::p().multiply(Symbol::curvature(1.0, 0, 0, 0), 4);
    bool has_kp = false;
    bool has_derivative = false;
    for (const SymbolTerm& t : pk.terms()) {
        if (t.p_power == 1 && t.curvature.str() == "kappa") has_kp = t.coeff == std::complex<double>(1.0, 0.0);
        if (t.p_power == 0 && t.eps == 1) has_derivative = t.coeff == std::complex<double>(0.0, -1.0);
    }
    CHECK(has_kp);
    CHECK(has_derivative);
    CHECK(pk.terms().size() == 2);
}

TEST_CASE("low orders of the strip expansion") {
    const Symbol s = expand_strip_symbol(2);
    auto kappa_one = [](int d) { return d == 0 ? 1.0 : 0.0; };
    for (double k : {-1.0, 0.3}) {
        for (double u : {0.2, 1.7}) {
            CHECK(std::abs(s.order(0).evaluate(kappa_one, k, u) - (k + u) * (k + u)) <= 1e-12);
            CHECK(std::abs(s.order(1).evaluate(kappa_one, k, u) - h1_value(k, u)) <= 1e-12);
        }
    }
}

TEST_CASE("second-order symbol bookkeeping") {
    const Symbol& h2 = h2_symbol();
    REQUIRE(!h2.terms().empty());
    for (const SymbolTerm& t : h2.terms()) {
        CHECK(t.eps == 2);
        CHECK(t.curvature.weight() == 2);
        const bool quadratic = t.curvature.degree() == 2 && t.curvature.exponents.size() == 1;
        const bool one_derivative = t.curvature.degree() == 1 && t.curvature.exponents.size() >= 2;
        CHECK((quadratic || one_derivative));
    }
    auto flat = [](int) { return 0.0; };
    CHECK(std::abs(h2.evaluate(flat, 0.4, 1.1)) == 0.0);
}

}

TEST_SUITE("phases") {

TEST_CASE("leading phase anchors") {
    for (double theta : {0.1, 0.4, 1.0}) {
        CHECK(std::abs(phi0(0, 0.0, make_bump_profile(theta, 1.0)) + theta) <= 1e-6);
    }
    CHECK(phi0(2, 0.7, make_bump_profile(0.0, 1.0)) == 0.0);
    CHECK(phi0(0, 0.0, make_bump_profile(0.3, 1.0)) < 0.0);
}

TEST_CASE("leading phase depends only on the bending angle") {
    const BandCoefficients c = band_coefficients(1, -0.2);
    const double single = phi0(c, make_bump_profile(0.6, 1.0));
    const double wide = phi0(c, make_bump_profile(0.6, 2.5));
    const double split = phi0(c, make_two_bump_profile(0.25, 0.4, -0.6, 0.35, 0.5, 0.4));
    CHECK(std::abs(single - wide) <= 1e-10);
    CHECK(std::abs(single - split) <= 1e-10);
    const double a = phi0(c, make_bump_profile(0.25, 1.0));
    const double b = phi0(c, make_bump_profile(0.35, 1.0));
    CHECK(std::abs(a + b - single) <= 1e-12);
    CHECK(phi0(c, make_bump_profile(1.2, 1.0)) == doctest::Approx(2.0 * single).epsilon(1e-14));
}

TEST_CASE("phase profile") {
    const BoundaryProfile p = make_bump_profile(0.5, 1.0);
    const BandCoefficients c = band_coefficients(0, 0.42);
    const std::vector<double> prof = phi_profile(c, p);
    const double total = phi0(c, p);
    CHECK(prof.front() == 0.0);
    CHECK(std::abs(prof.back() - total) <= 1e-12);
    CHECK(std::abs(prof[prof.size() / 2] - 0.5 * total) <= 1e-8);
}

TEST_CASE("first correction") {
    const BandCoefficients c = band_coefficients(0, 0.42);
    const BoundaryProfile p = make_bump_profile(0.4, 1.0);
    CHECK(phi1(c, make_bump_profile(0.0, 1.0)) == 0.0);
    const double base = phi1(c, p);
    CHECK(std::isfinite(base));
    CHECK(phi1(c, stretched(p, 2.0)) == doctest::Approx(0.5 * base).epsilon(1e-6));
    CHECK(phi1(c, scaled(p, 2.0)) == doctest::Approx(4.0 * base).epsilon(1e-6));
    CHECK(std::abs(phi1(band_coefficients(0, 0.0), p)) <= 1e-6);
}

TEST_CASE("E'' by differencing velocities") {
    const TransverseGrid g = TransverseGrid::default_for(0.6, 1);
    const double fd =
        (band_energy(0, 0.5 + 1e-3, g) - 2 * band_energy(0, 0.5, g) + band_energy(0, 0.5 - 1e-3, g)) / 1e-6;
    CHECK(second_derivative_energy(0, 0.5) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("WKB pipeline") {
    const BoundaryProfile p = make_bump_profile(0.4, 1.0);
    const BandCoefficients c = band_coefficients(0, 0.42);
    const PhaseRecord rec = phase_record(c, p);
    for (double beta : {6.0, 12.0}) {
        const WkbProfile w = wkb_phase(c, p, beta);
        CHECK(std::abs(w.endpoint_phase() - (rec.phi0 + rec.phi1 / beta)) <= 1e-8);
        double worst = 0.0;
        for (std::size_t i = 0; i < w.S1.size(); ++i) worst = std::max(worst, std::abs(w.S1[i] - rec.phi_profile[i]));
        CHECK(worst <= 1e-12);
        CHECK(std::abs(w.S2.back() - rec.phi1) <= 1e-8);
    }
    const WkbProfile flat = wkb_phase(c, make_bump_profile(0.0, 1.0), 8.0);
    for (std::size_t i = 0; i < flat.phase.size(); ++i) {
        CHECK(flat.phase[i] == 0.0);
        CHECK(flat.log_amplitude[i] == 0.0);
    }
}

}
