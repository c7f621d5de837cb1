#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <vector>

#include "edgephase/perturbation.hpp"

namespace edgephase::oracle {

/// Central-difference fiber matrix plus eps * H1, diagonalized by Eigen's QL solver.
struct DenseFiber {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    double spacing = 0.0;
};

inline DenseFiber dense_fiber(double k, double u_max, int n_points, double eps = 0.0, bool with_vectors = false) {
    const int m = n_points - 1;
    const double h = u_max / n_points;
    Eigen::VectorXd diag(m), off(m - 1);
    for (int i = 0; i < m; ++i) {
        const double u = (i + 1) * h;
        diag(i) = 2.0 / (h * h) + (k + u) * (k + u) + eps * h1_value(k, u);
    }
    off.setConstant(-1.0 / (h * h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    DenseFiber out;
    out.energies = solver.eigenvalues();
    if (with_vectors) {
        // unit in the midpoint norm, positive slope at the wall
        out.vectors = solver.eigenvectors() / std::sqrt(h);
        for (int j = 0; j < out.vectors.cols(); ++j) {
            if (out.vectors(0, j) < 0.0) out.vectors.col(j) *= -1.0;
        }
    }
    out.spacing = h;
    return out;
}

/// Richardson-combined eigenvalue from grids with n_points and 2 n_points.
inline double dense_energy(int n, double k, double u_max, int n_points, double eps = 0.0) {
    const double coarse = dense_fiber(k, u_max, n_points, eps).energies(n);
    const double fine = dense_fiber(k, u_max, 2 * n_points, eps).energies(n);
    return (4.0 * fine - coarse) / 3.0;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Five-point second derivative.
inline double second_difference(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double grid_norm(const std::vector<double>& a, double h) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(h * s);
}

}  // namespace edgephase::oracle
