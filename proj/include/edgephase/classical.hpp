#pragma once

#include <utility>

namespace edgephase {

/// Transverse phase-space circle of radius sqrt(E) cut by the wall at offset k.
struct OrbitShape {
    double E = 0.0;
    double k = 0.0;
    double r = 0.0;
    double eta = 0.0;
};

/// arccos(k / sqrt(E)); throws NoCollision when |k| >= sqrt(E).
double eta_from(double E, double k);
OrbitShape orbit_shape(double E, double k);

/// E (eta - sin(eta) cos(eta)).
double cap_area(double E, double k);

/// A(E_n(k), k) / (2 pi) - n.
double bohr_sommerfeld_residual(int n, double k);

/// (E'_n / (2 sqrt(E_n)), sin(eta)/eta) at momentum k.
std::pair<double, double> velocity_ratio_check(int n, double k);

/// Root of k - sqrt(E_n(k)) cos(eta) by bisection.
double solve_kn(int n, double eta);

/// First-order changes of one hop under a boundary curvature kappa.
struct HopDeltas {
    double d_span = 0.0;
    double d_eta = 0.0;
    double d_length = 0.0;
    double d_area = 0.0;
    double d_action = 0.0;
};

/// Throws CurvatureTooLarge unless |kappa| r <= 0.1.
HopDeltas hop_deltas(double r, double eta, double kappa, double beta = 1.0);

/// Hop quantities for a circular-arc wall of curvature kappa, computed from the
/// exact intersection of the orbit circle with the wall circle.
struct HopGeometry {
    double span = 0.0;
    double eta_out = 0.0;
    double length = 0.0;
    double area = 0.0;
};

HopGeometry exact_hop_geometry(double r, double eta, double kappa);
/// Exact geometry at kappa minus exact geometry of the straight wall.
HopDeltas exact_hop_deltas(double r, double eta, double kappa, double beta = 1.0);

/// -(1/3) theta E_n(k_n) sin^2(eta).
double semiclassical_phase(int n, double eta, double theta);

struct SemiclassicalComparison {
    int n = 0;
    double eta = 0.0;
    double k_n = 0.0;
    double E_n = 0.0;
    double phi_semiclassical = 0.0;
    double phi_quantum = 0.0;
    double rel_gap = 0.0;
    /// E1 against its uniform-rate limit (2/3) E^{3/2} sin^3(eta)/eta.
    double E1 = 0.0;
    double E1_limit = 0.0;
};

SemiclassicalComparison compare_semiclassical(int n, double eta, double theta);

}  // namespace edgephase
