#pragma once

#include <span>
#include <vector>

namespace edgephase {

/// Real symmetric tridiagonal matrix. off[j] couples rows j and j+1.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    int size() const { return static_cast<int>(diag.size()); }
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;
};

/// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
int count_below(const SymTridiagonal& t, double x);

/// index-th eigenvalue in ascending order, bisected to full double precision.
double eigenvalue(const SymTridiagonal& t, int index);

/// Unit-norm (Euclidean) eigenvector for an eigenvalue already accurate to
/// machine precision. Orthogonalized against `previous` when given.
std::vector<double> eigenvector(const SymTridiagonal& t, double lambda,
                                const std::vector<std::vector<double>>& previous = {});

/// Solves (t - shift) x = rhs by Gaussian elimination with partial pivoting.
/// Throws SingularSystem when a pivot vanishes relative to the matrix scale.
std::vector<double> solve_shifted(const SymTridiagonal& t, double shift,
                                  std::span<const double> rhs);

}  // namespace edgephase
