#pragma once

#include <span>
#include <utility>
#include <vector>

#include "edgephase/tridiagonal.hpp"

namespace edgephase {

/// Uniform discretization of [0, u_max] with Dirichlet values at both ends.
/// Only the interior nodes u_j = j*h, j = 1..n_points-1, carry unknowns.
class TransverseGrid {
public:
    TransverseGrid(double u_max, int n_points);

    double u_max() const { return u_max_; }
    int n_points() const { return n_points_; }
    double spacing() const { return u_max_ / n_points_; }
    int interior() const { return n_points_ - 1; }
    /// Coordinate of interior unknown i (0-based), i.e. (i+1)*h.
    double node(int i) const { return (i + 1) * spacing(); }
    std::vector<double> nodes() const;
    TransverseGrid refined() const { return TransverseGrid(u_max_, 2 * n_points_); }

    /// u_max = |k| + 3 sqrt(2 n_max + 9), n_points = ceil(400 u_max).
    static TransverseGrid default_for(double k, int n_max);
    static double minimum_extent(double k, int n_max);

private:
    double u_max_;
    int n_points_;
};

/// Midpoint-rule inner product h * sum a_i b_i.
double inner(const TransverseGrid& grid, std::span<const double> a, std::span<const double> b);

/// Central-difference matrix of -d^2/du^2 + (k+u)^2.
SymTridiagonal build_fiber_matrix(double k, const TransverseGrid& grid);

/// Eigenpairs of one discretization level. Vectors are unit in the midpoint norm.
struct FiberLevel {
    TransverseGrid grid{1.0, 16};
    std::vector<double> energies;
    std::vector<std::vector<double>> psi;
    /// Accurate du psi(0) per band, from a wall-started recurrence.
    std::vector<double> wall_slope;
};

inline double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

/// Lowest bands of H0(k). Energies are Richardson-extrapolated from the
/// grid and its refinement; vectors live on the requested (coarse) grid.
struct FiberSolution {
    double k = 0.0;
    FiberLevel coarse;
    FiberLevel fine;

    const TransverseGrid& grid() const { return coarse.grid; }
    int band_count() const { return static_cast<int>(coarse.energies.size()); }
    double energy(int n) const;
    const std::vector<double>& psi(int n) const;
    const FiberLevel& level(bool fine_level) const { return fine_level ? fine : coarse; }
};

FiberSolution solve_fiber(double k, const TransverseGrid& grid, int n_max);
FiberSolution solve_fiber(double k, int n_max);

/// Single Richardson-extrapolated eigenvalue, without eigenvectors.
double band_energy(int n, double k, const TransverseGrid& grid);
double band_energy(int n, double k);

struct BandDerivatives {
    double k = 0.0;
    int n = 0;
    double E_prime = 0.0;
    std::vector<double> dpsi_dk;
};

/// Hellmann-Feynman dE/dk = 2 <psi|(k+u)|psi>, Richardson-extrapolated.
double group_velocity(const FiberSolution& sol, int n);
/// Same quantity on a single discretization level.
double group_velocity(const FiberLevel& level, double k, int n);

BandDerivatives dpsi_dk(const FiberSolution& sol, int n);
/// Gauge-fixed dpsi/dk on one level, using that level's discrete E and E'.
std::vector<double> dpsi_dk(const FiberLevel& level, double k, int n);

/// Solves (H - E) x = rhs on the space orthogonal to psi. rhs must be
/// (numerically) orthogonal to psi; E is the discrete eigenvalue of psi.
std::vector<double> reduced_resolvent_solve(const SymTridiagonal& h, double E,
                                            std::span<const double> psi,
                                            std::span<const double> rhs);

/// Integral of exp(2 lambda u) psi_n(u)^2.
double decay_norm(const FiberSolution& sol, int n, double lambda);

/// E_n(k) - (2n+1), accurate even when far below double-precision resolution of E_n.
double landau_gap(int n, double k);
double landau_gap(int n, double k, const TransverseGrid& grid);

/// Momentum where E_n(k) = energy, by bisection on the monotone dispersion.
double k_for_energy(int n, double energy);
/// Band window E_n^{-1}[e_lo, e_hi].
std::pair<double, double> band_k_interval(int n, double e_lo, double e_hi);

}  // namespace edgephase
