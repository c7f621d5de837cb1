#include "edgephase/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgephase/errors.hpp"

namespace edgephase {

namespace {

constexpr double kRescale = 1e100;

double potential(double k, double u) { return (k + u) * (k + u); }

std::size_t argmax_abs(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    return best;
}

// Runs the three-term recurrence of (H - E) x = 0 from a zero Dirichlet value
// at node index `start - 1` with x[start] = 1, up to node `stop`. Returns the
// values at `probe` and `stop` on a common (possibly rescaled) scale.
std::pair<double, double> forward_recurrence(std::span<const double> diag, double off,
                                             double E, int start, int probe, int stop) {
    double prev = 0.0;
    double cur = 1.0;
    double at_probe = (probe == start) ? 1.0 : 0.0;
    for (int i = start; i < stop; ++i) {
        const double next = -((diag[i] - E) * cur + off * prev) / off;
        prev = cur;
        cur = next;
        if (i + 1 == probe) at_probe = cur;
        if (std::abs(cur) > kRescale) {
            cur /= kRescale;
            prev /= kRescale;
            at_probe /= kRescale;
        }
    }
    return {at_probe, cur};
}

void normalize_midpoint(const TransverseGrid& grid, std::vector<double>& v) {
    const double nrm = std::sqrt(inner(grid, v, v));
    for (double& x : v) x /= nrm;
}

FiberLevel solve_level(double k, const TransverseGrid& grid, int n_max) {
    const SymTridiagonal h = build_fiber_matrix(k, grid);
    if (n_max > h.size()) throw GridTooSmall("more bands requested than grid unknowns");
    FiberLevel level{grid, {}, {}, {}};
    std::vector<std::vector<double>> euclidean;
    const double off = -1.0 / (grid.spacing() * grid.spacing());
    for (int n = 0; n < n_max; ++n) {
        const double E = eigenvalue(h, n);
        std::vector<double> v = eigenvector(h, E, euclidean);
        euclidean.push_back(v);
        const int peak = static_cast<int>(argmax_abs(v));
        const auto [first, at_peak] = forward_recurrence(h.diag, off, E, 0, 0, peak);
        double scale = v[peak] / at_peak;
        if (scale < 0.0) {
            for (double& x : v) x = -x;
            scale = -scale;
        }
        normalize_midpoint(grid, v);
        const double norm_factor = 1.0 / std::sqrt(grid.spacing());
        level.energies.push_back(E);
        level.psi.push_back(std::move(v));
        level.wall_slope.push_back(scale * first * norm_factor / grid.spacing());
    }
    return level;
}

void check_extent(double k, const TransverseGrid& grid, int n_max) {
    if (n_max < 1) throw ConfigError("n_max must be at least 1");
    const double need = TransverseGrid::minimum_extent(k, n_max);
    if (grid.u_max() < need * (1.0 - 1e-12)) {
        throw GridTooSmall("u_max " + std::to_string(grid.u_max()) + " below required " + std::to_string(need));
    }
}

// E_A - E_B for the half-line matrix A and its full-line companion B on the same spacing,
// through (E_A - E_B) psi.phi = psi_1 phi_0 / h^2.
double level_gap(int n, double k, const TransverseGrid& grid) {
    const double h = grid.spacing();
    const double off = -1.0 / (h * h);
    const SymTridiagonal a = build_fiber_matrix(k, grid);
    const double ea = eigenvalue(a, n);
    const std::vector<double> psi = eigenvector(a, ea);

    const int m = grid.n_points() - 1;
    SymTridiagonal b;
    b.diag.resize(2 * m + 1);
    b.off.assign(2 * m, off);
    for (int i = 0; i <= 2 * m; ++i) {
        const double u = (i - m) * h;
        b.diag[i] = 2.0 / (h * h) + potential(k, u);
    }
    const double eb = eigenvalue(b, n);
    const std::vector<double> phi = eigenvector(b, eb);

    const int psi_peak = static_cast<int>(argmax_abs(psi));
    const auto [psi_first, psi_at_peak] = forward_recurrence(a.diag, off, ea, 0, 0, psi_peak);
    const double psi1 = psi[psi_peak] / psi_at_peak * psi_first;

    const int phi_peak = static_cast<int>(argmax_abs(phi));
    if (phi_peak <= m) throw ConvergenceFailure("landau_gap requires the orbit centre inside the half-line");
    const auto [phi_wall, phi_at_peak] = forward_recurrence(b.diag, off, eb, 0, m, phi_peak);
    const double phi0 = phi[phi_peak] / phi_at_peak * phi_wall;

    double overlap = 0.0;
    for (int i = 0; i < a.size(); ++i) overlap += psi[i] * phi[m + 1 + i];
    return psi1 * phi0 / (h * h * overlap);
}

}  // namespace

TransverseGrid::TransverseGrid(double u_max, int n_points) : u_max_(u_max), n_points_(n_points) {
    if (!(u_max > 0.0) || !std::isfinite(u_max)) throw ConfigError("u_max must be positive");
    if (n_points < 16) throw ConfigError("n_points must be at least 16");
}

std::vector<double> TransverseGrid::nodes() const {
    std::vector<double> u(interior());
    for (int i = 0; i < interior(); ++i) u[i] = node(i);
    return u;
}

double TransverseGrid::minimum_extent(double k, int n_max) {
    return std::abs(k) + 3.0 * std::sqrt(2.0 * n_max + 9.0);
}

TransverseGrid TransverseGrid::default_for(double k, int n_max) {
    const double u_max = minimum_extent(k, n_max);
    return TransverseGrid(u_max, static_cast<int>(std::ceil(400.0 * u_max)));
}

double inner(const TransverseGrid& grid, std::span<const double> a, std::span<const double> b) {
    return grid.spacing() * std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

SymTridiagonal build_fiber_matrix(double k, const TransverseGrid& grid) {
    const int n = grid.interior();
    const double h = grid.spacing();
    SymTridiagonal t;
    t.diag.resize(n);
    t.off.assign(n - 1, -1.0 / (h * h));
    for (int i = 0; i < n; ++i) t.diag[i] = 2.0 / (h * h) + potential(k, grid.node(i));
    return t;
}

double FiberSolution::energy(int n) const {
    return richardson(coarse.energies.at(n), fine.energies.at(n));
}

const std::vector<double>& FiberSolution::psi(int n) const { return coarse.psi.at(n); }

FiberSolution solve_fiber(double k, const TransverseGrid& grid, int n_max) {
    check_extent(k, grid, n_max);
    FiberSolution sol;
    sol.k = k;
    sol.coarse = solve_level(k, grid, n_max);
    sol.fine = solve_level(k, grid.refined(), n_max);
    return sol;
}

FiberSolution solve_fiber(double k, int n_max) {
    if (n_max < 1) throw ConfigError("n_max must be at least 1");
    return solve_fiber(k, TransverseGrid::default_for(k, n_max), n_max);
}

double band_energy(int n, double k, const TransverseGrid& grid) {
    check_extent(k, grid, n + 1);
    const double ec = eigenvalue(build_fiber_matrix(k, grid), n);
    const double ef = eigenvalue(build_fiber_matrix(k, grid.refined()), n);
    return richardson(ec, ef);
}

double band_energy(int n, double k) { return band_energy(n, k, TransverseGrid::default_for(k, n + 1)); }

double group_velocity(const FiberLevel& level, double k, int n) {
    const auto& psi = level.psi.at(n);
    double acc = 0.0;
    for (int i = 0; i < level.grid.interior(); ++i) acc += (k + level.grid.node(i)) * psi[i] * psi[i];
    return 2.0 * level.grid.spacing() * acc;
}

double group_velocity(const FiberSolution& sol, int n) {
    return richardson(group_velocity(sol.coarse, sol.k, n), group_velocity(sol.fine, sol.k, n));
}

std::vector<double> reduced_resolvent_solve(const SymTridiagonal& h, double E,
                                            std::span<const double> psi,
                                            std::span<const double> rhs) {
    const int n = h.size();
    const double psi_sq = std::inner_product(psi.begin(), psi.end(), psi.begin(), 0.0);
    auto project = [&](std::vector<double>& v) {
        const double c = std::inner_product(psi.begin(), psi.end(), v.begin(), 0.0) / psi_sq;
        for (int i = 0; i < n; ++i) v[i] -= c * psi[i];
    };
    auto norm = [](const std::vector<double>& v) {
        return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    };
    std::vector<double> b(rhs.begin(), rhs.end());
    project(b);
    const double b_norm = norm(b);
    std::vector<double> x(n, 0.0);
    if (b_norm == 0.0) return x;

    // Shift below E; the iteration contracts by |mu| / (gap + |mu|) on the complement of psi.
    const double mu = -0.05;
    std::vector<double> r = b;
    std::vector<double> hx(n);
    double best = b_norm;
    for (int iter = 0; iter < 80; ++iter) {
        std::vector<double> dx = solve_shifted(h, E + mu, r);
        project(dx);
        for (int i = 0; i < n; ++i) x[i] += dx[i];
        h.apply(x, hx);
        for (int i = 0; i < n; ++i) r[i] = b[i] - (hx[i] - E * x[i]);
        const double rn = norm(r);
        if (rn <= 1e-14 * b_norm || rn >= 0.9 * best) {
            best = std::min(best, rn);
            break;
        }
        best = rn;
    }
    if (best > 1e-9 * b_norm) throw SingularSystem("reduced resolvent iteration did not converge");
    return x;
}

std::vector<double> dpsi_dk(const FiberLevel& level, double k, int n) {
    const auto& psi = level.psi.at(n);
    const double ep = group_velocity(level, k, n);
    std::vector<double> rhs(psi.size());
    for (int i = 0; i < level.grid.interior(); ++i) {
        rhs[i] = (ep - 2.0 * (k + level.grid.node(i))) * psi[i];
    }
    return reduced_resolvent_solve(build_fiber_matrix(k, level.grid), level.energies[n], psi, rhs);
}

BandDerivatives dpsi_dk(const FiberSolution& sol, int n) {
    BandDerivatives out;
    out.k = sol.k;
    out.n = n;
    out.E_prime = group_velocity(sol, n);
    out.dpsi_dk = dpsi_dk(sol.coarse, sol.k, n);
    return out;
}

double decay_norm(const FiberSolution& sol, int n, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("decay rate must lie in [0, 1]");
    auto level_value = [&](const FiberLevel& lv) {
        const auto& psi = lv.psi.at(n);
        double acc = 0.0;
        for (int i = 0; i < lv.grid.interior(); ++i) {
            acc += std::exp(2.0 * lambda * lv.grid.node(i)) * psi[i] * psi[i];
        }
        return lv.grid.spacing() * acc;
    };
    return richardson(level_value(sol.coarse), level_value(sol.fine));
}

double landau_gap(int n, double k, const TransverseGrid& grid) {
    check_extent(k, grid, n + 1);
    if (k >= -2.0) return band_energy(n, k, grid) - (2.0 * n + 1.0);
    return richardson(level_gap(n, k, grid), level_gap(n, k, grid.refined()));
}

double landau_gap(int n, double k) { return landau_gap(n, k, TransverseGrid::default_for(k, n + 1)); }

double k_for_energy(int n, double energy) {
    if (!(energy > 2.0 * n + 1.0)) throw BracketFailure("energy at or below the Landau level 2n+1");
    double lo = -1.0;
    double hi = 1.0;
    for (int i = 0; band_energy(n, lo) >= energy; ++i) {
        if (i > 8) throw BracketFailure("no lower bracket for band energy");
        hi = lo;
        lo *= 2.0;
    }
    for (int i = 0; band_energy(n, hi) <= energy; ++i) {
        if (i > 8) throw BracketFailure("no upper bracket for band energy");
        lo = hi;
        hi = hi > 0.0 ? 2.0 * hi : 1.0;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (band_energy(n, mid) < energy) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> band_k_interval(int n, double e_lo, double e_hi) {
    if (!(e_lo < e_hi)) throw ConfigError("empty energy window");
    return {k_for_energy(n, e_lo), k_for_energy(n, e_hi)};
}

}  // namespace edgephase
