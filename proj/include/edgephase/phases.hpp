#pragma once

#include <complex>
#include <map>
#include <vector>

#include "edgephase/fiber.hpp"
#include "edgephase/profile.hpp"
#include "edgephase/symbolic.hpp"

namespace edgephase {

/// Band quantities entering the phase formulas at one (n, k).
struct BandCoefficients {
    int n = 0;
    double k = 0.0;
    double E = 0.0;
    double E_prime = 0.0;
    double E_second = 0.0;
    double E1 = 0.0;
    double E1_prime = 0.0;
    double E2 = 0.0;
    /// <psi, (order-2 symbol restricted to one curvature monomial) psi>.
    std::map<CurvatureMonomial, std::complex<double>> h2_moments;
};

/// m_max <= 0 selects n + 40 states for the sum-over-states cross-check of E2.
BandCoefficients band_coefficients(const FiberSolution& sol, int n, int m_max = 0);
BandCoefficients band_coefficients(int n, double k, int m_max = 0);

/// dE'/dk by central difference of Hellmann-Feynman velocities at k +- 1e-4.
double second_derivative_energy(int n, double k);

/// Order-2 symbol of the strip operator, produced by the expansion engine.
const Symbol& h2_symbol();

/// H2(s,k) acting on a transverse vector: pointwise multiplication (there is no d/du part).
std::vector<std::complex<double>> apply_h2(const BoundaryProfile& profile, double s, double k,
                                           const TransverseGrid& grid, const std::vector<double>& psi);

/// E^(1;2)(s,k) = <psi, H2(s,k) psi> on the profile grid.
std::vector<std::complex<double>> h2_expectation(const BandCoefficients& c, const BoundaryProfile& profile);

double phi0(const BandCoefficients& c, const BoundaryProfile& profile);
double phi0(int n, double k, const BoundaryProfile& profile);

/// -(E1/E') * integral of kappa up to s, on the profile grid.
std::vector<double> phi_profile(const BandCoefficients& c, const BoundaryProfile& profile);

double phi1(const BandCoefficients& c, const BoundaryProfile& profile);

struct PhaseRecord {
    int n = 0;
    double k = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    std::vector<double> phi_profile;
};

PhaseRecord phase_record(const BandCoefficients& c, const BoundaryProfile& profile);

/// WKB solution S = k s + S1/beta + S2/beta^2 with transport amplitude B.
struct WkbProfile {
    std::vector<double> s_grid;
    std::vector<double> S1;
    std::vector<double> S2;
    /// beta (S - k s) = S1 + S2 / beta.
    std::vector<double> phase;
    /// ln |B| including the non-Hermitian part of the order-2 symbol.
    std::vector<double> log_amplitude;
    double endpoint_phase() const { return phase.back(); }
};

WkbProfile wkb_phase(const BandCoefficients& c, const BoundaryProfile& profile, double beta);

}  // namespace edgephase
