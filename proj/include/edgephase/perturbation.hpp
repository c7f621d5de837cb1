#pragma once

#include <span>
#include <string>
#include <vector>

#include "edgephase/fiber.hpp"
#include "edgephase/profile.hpp"

namespace edgephase {

/// u^3 + 3u^2 k + 2u k^2 = u(u+k)(u+2k).
inline double h1_value(double k, double u) { return u * (u + k) * (u + 2.0 * k); }

std::vector<double> apply_H1(double k, std::span<const double> psi, const TransverseGrid& grid);

/// Matrix element <a, H1 b> with the share contributed by the outer 10% of the grid.
struct MatrixElement {
    double value = 0.0;
    double tail = 0.0;
};

/// Throws TailContamination when |tail| > 1e-8 |value|.
MatrixElement h1_element(double k, const TransverseGrid& grid, std::span<const double> a,
                         std::span<const double> b);

/// <psi_n, H1 psi_n> on one level.
double first_order_energy(const FiberLevel& level, double k, int n);
/// Richardson-extrapolated first-order energy.
double first_order_energy(const FiberSolution& sol, int n);

/// Solution of (H0 - E) x = -(1-P) H1 psi with x orthogonal to psi, on one level.
std::vector<double> first_order_vector(const FiberLevel& level, double k, int n);
std::vector<double> first_order_vector(const FiberSolution& sol, int n);

/// psi1 - (E1/E') (dpsi/dk + <dpsi/dk, psi> psi).
std::vector<double> psi_tilde1(const FiberSolution& sol, int n);

struct SecondOrderEnergy {
    /// Richardson-extrapolated resolvent value.
    double E2 = 0.0;
    /// Resolvent form on the coarse level.
    double resolvent = 0.0;
    /// Truncated sum over states on the coarse level.
    double sum_over_states = 0.0;
    /// Estimated contribution of the omitted states m >= m_max.
    double remainder = 0.0;
    int m_max = 0;
};

/// Computes E2 twice (resolvent and sum over states m < m_max) and insists they agree.
SecondOrderEnergy second_order_energy(const FiberSolution& sol, int n, int m_max);
/// Resolvent form only, Richardson-extrapolated.
double second_order_energy_resolvent(const FiberSolution& sol, int n);

/// Smooth gauge change psi -> exp(i lambda(k)) psi, given as samples on a k-grid.
struct Reconvention {
    std::vector<double> k;
    std::vector<double> lambda;
    std::vector<double> lambda_prime;

    double lambda_at(double kk) const;
    double lambda_prime_at(double kk) const;
};

struct GeometricPhaseDensity {
    double k = 0.0;
    int n = 0;
    double gamma_B_coeff = 0.0;
    double gamma_RW_coeff = 0.0;
    std::string gauge_tag;
};

GeometricPhaseDensity geometric_phase_coeffs(const FiberSolution& sol, int n,
                                             const Reconvention* reconvention = nullptr);

/// delta k(s) = -kappa(s) E1 / (beta E') on the profile grid.
std::vector<double> adiabatic_drift(const BoundaryProfile& profile, const FiberSolution& sol, int n,
                                    double beta);

/// Richardson-extrapolated dE1/dk = <psi,(3u^2 + 4uk) psi> + 2 <dpsi/dk, H1 psi>.
double first_order_energy_slope(const FiberSolution& sol, int n);

}  // namespace edgephase
