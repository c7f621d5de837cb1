#include "edgephase/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgephase/errors.hpp"

namespace edgephase {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double matrix_scale(const SymTridiagonal& t) {
    double scale = 0.0;
    const int n = t.size();
    for (int j = 0; j < n; ++j) {
        double row = std::abs(t.diag[j]);
        if (j > 0) row += std::abs(t.off[j - 1]);
        if (j + 1 < n) row += std::abs(t.off[j]);
        scale = std::max(scale, row);
    }
    return scale;
}

// LU factors of a shifted tridiagonal with row interchanges (LAPACK dgttrf layout).
struct PivotedLU {
    std::vector<double> lower;   // multipliers
    std::vector<double> d;       // U diagonal
    std::vector<double> u1;      // U first superdiagonal
    std::vector<double> u2;      // U second superdiagonal (fill-in)
    std::vector<char> swapped;   // row j and j+1 interchanged at step j
};

PivotedLU factor(const SymTridiagonal& t, double shift, double tiny) {
    const int n = t.size();
    PivotedLU f;
    f.lower.assign(std::max(n - 1, 0), 0.0);
    f.d.resize(n);
    f.u1.assign(std::max(n - 1, 0), 0.0);
    f.u2.assign(std::max(n - 2, 0), 0.0);
    f.swapped.assign(std::max(n - 1, 0), 0);
    for (int j = 0; j < n; ++j) f.d[j] = t.diag[j] - shift;
    for (int j = 0; j + 1 < n; ++j) f.u1[j] = t.off[j];
    std::vector<double> sub(t.off.begin(), t.off.end());

    for (int j = 0; j + 1 < n; ++j) {
        if (std::abs(f.d[j]) >= std::abs(sub[j])) {
            if (std::abs(f.d[j]) < tiny) f.d[j] = tiny;
            const double m = sub[j] / f.d[j];
            f.lower[j] = m;
            f.d[j + 1] -= m * f.u1[j];
        } else {
            // interchange rows j and j+1
            const double m = f.d[j] / sub[j];
            f.lower[j] = m;
            f.swapped[j] = 1;
            f.d[j] = sub[j];
            const double old_diag_next = f.d[j + 1];
            f.d[j + 1] = f.u1[j] - m * old_diag_next;
            f.u1[j] = old_diag_next;
            if (j + 2 < n) {
                f.u2[j] = f.u1[j + 1];
                f.u1[j + 1] = -m * f.u2[j];
            }
        }
    }
    if (n > 0 && std::abs(f.d[n - 1]) < tiny) f.d[n - 1] = tiny;
    return f;
}

void back_substitute(const PivotedLU& f, std::vector<double>& x) {
    const int n = static_cast<int>(f.d.size());
    for (int j = 0; j + 1 < n; ++j) {
        if (f.swapped[j]) {
            std::swap(x[j], x[j + 1]);
            x[j + 1] -= f.lower[j] * x[j];
        } else {
            x[j + 1] -= f.lower[j] * x[j];
        }
    }
    for (int j = n - 1; j >= 0; --j) {
        double v = x[j];
        if (j + 1 < n) v -= f.u1[j] * x[j + 1];
        if (j + 2 < n) v -= f.u2[j] * x[j + 2];
        x[j] = v / f.d[j];
    }
}

double norm2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

void SymTridiagonal::apply(std::span<const double> x, std::span<double> y) const {
    const int n = size();
    for (int j = 0; j < n; ++j) {
        double v = diag[j] * x[j];
        if (j > 0) v += off[j - 1] * x[j - 1];
        if (j + 1 < n) v += off[j] * x[j + 1];
        y[j] = v;
    }
}

std::vector<double> SymTridiagonal::apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    apply(x, y);
    return y;
}

int count_below(const SymTridiagonal& t, double x) {
    const int n = t.size();
    const double guard = kEps * kEps * std::max(1.0, std::abs(x));
    int count = 0;
    double q = t.diag[0] - x;
    if (q == 0.0) q = -guard;
    if (q < 0.0) ++count;
    for (int j = 1; j < n; ++j) {
        q = (t.diag[j] - x) - t.off[j - 1] * t.off[j - 1] / q;
        if (q == 0.0) q = -guard;
        if (q < 0.0) ++count;
    }
    return count;
}

double eigenvalue(const SymTridiagonal& t, int index) {
    const int n = t.size();
    if (index < 0 || index >= n) throw ConvergenceFailure("eigenvalue index out of range");
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int j = 0; j < n; ++j) {
        double radius = 0.0;
        if (j > 0) radius += std::abs(t.off[j - 1]);
        if (j + 1 < n) radius += std::abs(t.off[j]);
        lo = std::min(lo, t.diag[j] - radius);
        hi = std::max(hi, t.diag[j] + radius);
    }
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)) || mid == lo || mid == hi) {
            return mid;
        }
        if (count_below(t, mid) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    throw ConvergenceFailure("Sturm bisection stalled");
}

std::vector<double> eigenvector(const SymTridiagonal& t, double lambda,
                                const std::vector<std::vector<double>>& previous) {
    const int n = t.size();
    const double scale = matrix_scale(t);
    const PivotedLU f = factor(t, lambda, kEps * scale);
    // deterministic start vector with no special symmetry
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::sin(0.7 * j + 0.3);
    for (int iter = 0; iter < 3; ++iter) {
        back_substitute(f, x);
        for (const auto& p : previous) {
            const double c = std::inner_product(p.begin(), p.end(), x.begin(), 0.0);
            for (int j = 0; j < n; ++j) x[j] -= c * p[j];
        }
        const double nrm = norm2(x);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw ConvergenceFailure("inverse iteration produced a null vector");
        for (double& v : x) v /= nrm;
    }
    return x;
}

std::vector<double> solve_shifted(const SymTridiagonal& t, double shift, std::span<const double> rhs) {
    const int n = t.size();
    const double scale = matrix_scale(t) + std::abs(shift);
    const double tiny = 1e3 * kEps * scale;
    const PivotedLU f = factor(t, shift, 0.0);
    for (double p : f.d) {
        if (!(std::abs(p) > tiny)) throw SingularSystem("vanishing pivot in shifted tridiagonal solve");
    }
    std::vector<double> x(rhs.begin(), rhs.end());
    x.resize(n);
    back_substitute(f, x);
    return x;
}

}  // namespace edgephase
