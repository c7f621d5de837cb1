#pragma once

#include <string>
#include <vector>

namespace edgephase {

/// One smooth compact bump theta * c * exp(-1/(1-x^2)), x = (s - center)/half_width.
struct Bump {
    double center = 0.0;
    double half_width = 1.0;
    double theta = 0.0;
};

/// Compactly supported boundary curvature kappa(s) with bending angle theta.
struct BoundaryProfile {
    std::string kind;
    double theta = 0.0;
    /// Half-length of the symmetric window [-L, L] that contains the support.
    double L = 0.0;
    std::vector<Bump> bumps;
    std::vector<double> s_grid;
    std::vector<double> kappa;
    std::vector<double> kappa_dot;
    std::vector<double> kappa_ddot;

    /// Analytic d^order kappa / ds^order at s, order 0..2.
    double curvature(double s, int order = 0) const;
    double max_abs_curvature() const;
    /// Integral of kappa^2, computed from the analytic form.
    double kappa_squared_integral() const;
    double s_spacing() const { return s_grid.size() > 1 ? s_grid[1] - s_grid[0] : 0.0; }
};

/// Integral of exp(-1/(1-x^2)) over (-1, 1).
double bump_normalization();

/// Single bump centred at 0 with support (-L, L).
BoundaryProfile make_bump_profile(double theta, double L, int samples = 4001);

/// Two separated bumps; the total angle is theta1 + theta2.
BoundaryProfile make_two_bump_profile(double theta1, double L1, double center1,
                                      double theta2, double L2, double center2,
                                      int samples = 4001);

/// Same shape with every bump angle multiplied by factor.
BoundaryProfile scaled(const BoundaryProfile& p, double factor);

/// Bumps stretched as kappa(s/lambda)/lambda; theta is unchanged.
BoundaryProfile stretched(const BoundaryProfile& p, double lambda);

/// Trapezoid integral of samples on the profile grid.
double integrate(const BoundaryProfile& p, const std::vector<double>& samples);

/// Running trapezoid integral from the left end of the grid.
std::vector<double> cumulative_integral(const BoundaryProfile& p, const std::vector<double>& samples);

}  // namespace edgephase
