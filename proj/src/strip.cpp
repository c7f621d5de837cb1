#include "edgephase/strip.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/phases.hpp"

namespace edgephase {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

int smooth_size(int n) {
    auto smooth = [](int m) {
        for (int p : {2, 3, 5}) {
            while (m % p == 0) m /= p;
        }
        return m == 1;
    };
    if (n % 2) ++n;
    while (!smooth(n)) n += 2;
    return n;
}

// five-point second-difference weights for -d^2/du^2
struct Stencil {
    double c0, c1, c2;
};

Stencil stencil(double du) {
    const double h2 = 12.0 * du * du;
    return {30.0 / h2, -16.0 / h2, 1.0 / h2};
}

void add_transverse(const Stencil& st, int n_s, int n_u, const cd* x, cd* y) {
    for (int j = 0; j < n_u; ++j) {
        const cd* xj = x + static_cast<std::size_t>(j) * n_s;
        cd* yj = y + static_cast<std::size_t>(j) * n_s;
        double diag = st.c0;
        if (j == 0 || j == n_u - 1) diag -= st.c2;
        for (int i = 0; i < n_s; ++i) yj[i] += diag * xj[i];
        for (int d = 1; d <= 2; ++d) {
            const double c = d == 1 ? st.c1 : st.c2;
            if (j - d >= 0) {
                const cd* xm = xj - static_cast<std::size_t>(d) * n_s;
                for (int i = 0; i < n_s; ++i) yj[i] += c * xm[i];
            }
            if (j + d < n_u) {
                const cd* xp = xj + static_cast<std::size_t>(d) * n_s;
                for (int i = 0; i < n_s; ++i) yj[i] += c * xp[i];
            }
        }
    }
}

}  // namespace

struct StripOperator::Fft {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Fft() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

void validate(const StripConfig& cfg) {
    if (!(cfg.beta > 0.0)) throw ConfigInvalid("beta must be positive");
    if (!(cfg.s_max > cfg.s_min)) throw ConfigInvalid("empty s-domain");
    if (!(cfg.ds > 0.0 && cfg.du > 0.0 && cfg.dt > 0.0)) throw ConfigInvalid("grid spacings and dt must be positive");
    if (!(cfg.u_max > 4.0 * cfg.du)) throw ConfigInvalid("u_max must cover several transverse cells");
    if (cfg.band < 0) throw ConfigInvalid("band index must be non-negative");
    if (cfg.k_points < 64) throw ConfigInvalid("at least 64 momentum quadrature points are required");
    if (cfg.u_max * cfg.profile.max_abs_curvature() >= 0.9) {
        throw ConfigInvalid("u_max * max|kappa| must stay below 0.9");
    }
    if (cfg.s_min > -cfg.profile.L || cfg.s_max < cfg.profile.L) {
        throw ConfigInvalid("s-domain must contain the curved window [-L, L]");
    }
    if (cfg.operator_only) return;
    if (!(cfg.k_width > 0.0)) throw ConfigInvalid("k_width must be positive");
    const double lo = band_energy(cfg.band, cfg.k_center - 4.0 * cfg.k_width);
    const double hi = band_energy(cfg.band, cfg.k_center + 4.0 * cfg.k_width);
    const double level = std::floor((lo - 1.0) / 2.0);
    if (2.0 * level + 3.0 <= hi || lo <= 2.0 * level + 1.0) {
        throw ConfigInvalid("packet energies straddle a Landau level");
    }
    if (cfg.dt * packet_max_energy(cfg) > 0.1) throw ConfigInvalid("dt * E_max exceeds 0.1");
    const double reach = 3.5 / (cfg.beta * cfg.k_width);
    if (cfg.s0 + reach >= -cfg.profile.L) throw PacketOverlapsBend("initial packet reaches the curved window");
    if (cfg.s0 - reach <= cfg.s_min) throw ConfigInvalid("initial packet touches the left end of the domain");
}

double packet_max_energy(const StripConfig& cfg) {
    double e = 0.0;
    for (int q = 0; q <= 16; ++q) {
        const double k = cfg.k_center + cfg.k_width * (-4.0 + 0.5 * q);
        e = std::max(e, band_energy(cfg.band, k));
    }
    return e;
}

StripOperator::StripOperator(const StripConfig& cfg, bool straight)
    : beta_(cfg.beta), straight_(straight), fft_(std::make_unique<Fft>()) {
    validate(cfg);
    ds_ = cfg.ds * beta_;
    du_ = cfg.du * beta_;
    n_s_ = smooth_size(static_cast<int>(std::ceil((cfg.s_max - cfg.s_min) / cfg.ds)));
    n_u_ = static_cast<int>(std::lround(cfg.u_max / cfg.du)) - 1;
    if (n_u_ < 8) throw ConfigInvalid("too few transverse nodes");
    const double s_start = cfg.s_min * beta_;
    s_.resize(n_s_);
    for (int i = 0; i < n_s_; ++i) s_[i] = s_start + i * ds_;
    u_.resize(n_u_);
    for (int j = 0; j < n_u_; ++j) u_[j] = (j + 1) * du_;
    k_.resize(n_s_);
    const double dk = 2.0 * std::numbers::pi / (n_s_ * ds_);
    for (int i = 0; i < n_s_; ++i) k_[i] = dk * (i < n_s_ / 2 ? i : i - n_s_);
    k_[n_s_ / 2] = 0.0;

    const std::size_t total = static_cast<std::size_t>(n_s_) * n_u_;
    gauge_.assign(total, 0.0);
    ginv_.assign(total, 1.0);
    potential_.assign(total, 0.0);
    if (!straight_) {
        const int fine = cfg.filter_coefficients ? 8 : 1;
        const int n_f = fine * n_s_;
        const double L = cfg.profile.L;
        std::vector<double> k0(n_f), k1(n_f), k2(n_f);
        for (int m = 0; m < n_f; ++m) {
            const double s = (s_start + m * ds_ / fine) / beta_;
            if (std::abs(s) >= L) continue;
            k0[m] = cfg.profile.curvature(s, 0) / beta_;
            k1[m] = cfg.profile.curvature(s, 1) / (beta_ * beta_);
            k2[m] = cfg.profile.curvature(s, 2) / (beta_ * beta_ * beta_);
        }
        auto coefficients = [&](int m, double u, double& a, double& gi, double& v) {
            const double g = 1.0 - u * k0[m];
            a = 0.5 * u * u * k0[m];
            gi = 1.0 / (g * g) - 1.0;
            v = -0.5 * u * k2[m] / (g * g * g) - 1.25 * u * u * k1[m] * k1[m] / (g * g * g * g) -
                0.25 * k0[m] * k0[m] / (g * g);
        };
        if (fine == 1) {
            for (int j = 0; j < n_u_; ++j) {
                for (int i = 0; i < n_s_; ++i) {
                    const std::size_t idx = static_cast<std::size_t>(j) * n_s_ + i;
                    double a, gi, v;
                    coefficients(i, u_[j], a, gi, v);
                    gauge_[idx] = a;
                    ginv_[idx] = 1.0 + gi;
                    potential_[idx] = v;
                }
            }
        } else {
            // band-limit the coefficients so that products with the state do not alias
            cvec fine_buf(n_f);
            cvec coarse_buf(n_s_);
            auto* fb = reinterpret_cast<fftw_complex*>(fine_buf.data());
            auto* cb = reinterpret_cast<fftw_complex*>(coarse_buf.data());
            fftw_plan pf = fftw_plan_dft_1d(n_f, fb, fb, FFTW_FORWARD, FFTW_ESTIMATE);
            fftw_plan pb = fftw_plan_dft_1d(n_s_, cb, cb, FFTW_BACKWARD, FFTW_ESTIMATE);
            std::vector<double> taper(n_s_, 0.0);
            for (int q = 0; q < n_s_; ++q) {
                const int m = q < n_s_ / 2 ? q : q - n_s_;
                const double x = 2.0 * std::abs(m) / n_s_;
                taper[q] = (q == n_s_ / 2) ? 0.0 : std::exp(-36.0 * std::pow(x, 16));
            }
            std::vector<double>* targets[3] = {&gauge_, &ginv_, &potential_};
            for (int j = 0; j < n_u_; ++j) {
                for (int c = 0; c < 3; ++c) {
                    for (int m = 0; m < n_f; ++m) {
                        double vals[3];
                        coefficients(m, u_[j], vals[0], vals[1], vals[2]);
                        fine_buf[m] = vals[c];
                    }
                    fftw_execute(pf);
                    for (int q = 0; q < n_s_; ++q) {
                        const int m = q < n_s_ / 2 ? q : q - n_s_;
                        coarse_buf[q] = taper[q] * fine_buf[(m + n_f) % n_f] / static_cast<double>(n_f);
                    }
                    fftw_execute(pb);
                    for (int i = 0; i < n_s_; ++i) {
                        (*targets[c])[static_cast<std::size_t>(j) * n_s_ + i] =
                            coarse_buf[i].real() + (c == 1 ? 1.0 : 0.0);
                    }
                }
            }
            fftw_destroy_plan(pf);
            fftw_destroy_plan(pb);
        }
        for (int i = 0; i < n_s_; ++i) {
            bool active = false;
            for (int j = 0; j < n_u_ && !active; ++j) {
                const std::size_t idx = static_cast<std::size_t>(j) * n_s_ + i;
                active = std::abs(gauge_[idx]) > 1e-16 || std::abs(ginv_[idx] - 1.0) > 1e-16 ||
                         std::abs(potential_[idx]) > 1e-16;
            }
            if (active) bend_columns_.push_back(i);
        }
    }

    work_a_.resize(total);
    work_b_.resize(total);
    work_c_.resize(total);
    auto* buf = reinterpret_cast<fftw_complex*>(work_a_.data());
    int n = n_s_;
    fft_->fwd = fftw_plan_many_dft(1, &n, n_u_, buf, nullptr, 1, n_s_, buf, nullptr, 1, n_s_, FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fft_->bwd = fftw_plan_many_dft(1, &n, n_u_, buf, nullptr, 1, n_s_, buf, nullptr, 1, n_s_, FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fft_->fwd || !fft_->bwd) throw SolveFailure("FFT plan creation failed");
}

StripOperator::~StripOperator() = default;

void StripOperator::forward(const cvec& real_space, cvec& k_space) const {
    k_space = real_space;
    auto* p = reinterpret_cast<fftw_complex*>(k_space.data());
    fftw_execute_dft(fft_->fwd, p, p);
}

void StripOperator::backward(const cvec& k_space, cvec& real_space) const {
    real_space = k_space;
    auto* p = reinterpret_cast<fftw_complex*>(real_space.data());
    fftw_execute_dft(fft_->bwd, p, p);
    const double scale = 1.0 / n_s_;
    for (cd& v : real_space) v *= scale;
}

void StripOperator::apply_straight_k(const cvec& xk, cvec& yk) const {
    yk.assign(xk.size(), 0.0);
    for (int j = 0; j < n_u_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n_s_;
        for (int i = 0; i < n_s_; ++i) {
            const double p = k_[i] + u_[j];
            yk[row + i] = p * p * xk[row + i];
        }
    }
    add_transverse(stencil(du_), n_s_, n_u_, xk.data(), yk.data());
}

void StripOperator::apply_k(const cvec& xk, cvec& yk) const {
    if (straight_ || bend_columns_.empty()) {
        apply_straight_k(xk, yk);
        return;
    }
    const std::size_t total = xk.size();
    cvec& psi = work_a_;
    cvec& c = work_b_;
    cvec& e = work_c_;
    auto* fwd = fft_->fwd;
    auto* bwd = fft_->bwd;
    auto run = [](fftw_plan plan, cvec& v) {
        auto* p = reinterpret_cast<fftw_complex*>(v.data());
        fftw_execute_dft(plan, p, p);
    };
    const double scale = 1.0 / n_s_;
    for (int j = 0; j < n_u_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n_s_;
        for (int i = 0; i < n_s_; ++i) {
            psi[row + i] = scale * xk[row + i];
            c[row + i] = scale * (k_[i] + u_[j]) * xk[row + i];
        }
    }
    run(bwd, psi);
    run(bwd, c);
    std::fill(e.begin(), e.end(), cd{0.0});
    for (int j = 0; j < n_u_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n_s_;
        for (int i : bend_columns_) {
            const std::size_t idx = row + i;
            const cd cv = ginv_[idx] * (c[idx] - gauge_[idx] * psi[idx]);
            c[idx] = cv;
            e[idx] = -gauge_[idx] * cv + potential_[idx] * psi[idx];
        }
    }
    run(fwd, c);
    run(fwd, e);
    yk.resize(total);
    for (int j = 0; j < n_u_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n_s_;
        for (int i = 0; i < n_s_; ++i) yk[row + i] = (k_[i] + u_[j]) * c[row + i] + e[row + i];
    }
    add_transverse(stencil(du_), n_s_, n_u_, xk.data(), yk.data());
}

void StripOperator::apply(const cvec& x, cvec& y) const {
    cvec xk;
    cvec yk;
    forward(x, xk);
    apply_k(xk, yk);
    backward(yk, y);
}

void StripOperator::apply_curved_part(const cvec& x, cvec& y) const {
    cvec xk;
    forward(x, xk);
    cvec yk;
    apply_k(xk, yk);
    // remove the transverse kinetic term
    cvec tk(xk.size(), 0.0);
    add_transverse(stencil(du_), n_s_, n_u_, xk.data(), tk.data());
    for (std::size_t q = 0; q < yk.size(); ++q) yk[q] -= tk[q];
    backward(yk, y);
}

StripOperator::Pentadiagonal StripOperator::transverse_matrix(double kk) const {
    const Stencil st = stencil(du_);
    Pentadiagonal m;
    m.diag.resize(n_u_);
    for (int j = 0; j < n_u_; ++j) {
        const double p = kk + u_[j];
        m.diag[j] = st.c0 + p * p;
    }
    m.diag.front() -= st.c2;
    m.diag.back() -= st.c2;
    m.off1 = st.c1;
    m.off2 = st.c2;
    return m;
}

std::vector<std::vector<double>> StripOperator::fiber_vectors(double kk, int count,
                                                              std::vector<double>* energies) const {
    if (count < 1 || count > n_u_) throw ConfigError("invalid number of transverse modes");
    const Pentadiagonal t = transverse_matrix(kk);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_u_, n_u_);
    for (int j = 0; j < n_u_; ++j) {
        a(j, j) = t.diag[j];
        if (j + 1 < n_u_) a(j, j + 1) = a(j + 1, j) = t.off1;
        if (j + 2 < n_u_) a(j, j + 2) = a(j + 2, j) = t.off2;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw ConvergenceFailure("transverse eigensolver failed");
    std::vector<std::vector<double>> out(count, std::vector<double>(n_u_));
    if (energies) energies->resize(count);
    const double scale = 1.0 / std::sqrt(du_);
    for (int m = 0; m < count; ++m) {
        const auto v = es.eigenvectors().col(m);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        const double sign = v(arg) < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n_u_; ++j) out[m][j] = sign * scale * v(j);
        if (energies) (*energies)[m] = es.eigenvalues()(m);
    }
    return out;
}

std::vector<double> StripOperator::fiber_energies(double kk, int count) const {
    std::vector<double> e;
    fiber_vectors(kk, count, &e);
    return e;
}

const std::vector<std::vector<double>>& StripOperator::fiber_modes(int mode, int count) const {
    auto it = mode_cache_.find(mode);
    if (it == mode_cache_.end() || static_cast<int>(it->second.size()) < count) {
        it = mode_cache_.insert_or_assign(mode, fiber_vectors(k_.at(mode), count)).first;
    }
    return it->second;
}

double StripOperator::inner_norm2(const cvec& x) const {
    double acc = 0.0;
    for (const cd& v : x) acc += std::norm(v);
    return acc * ds_ * du_;
}

CrankNicolson::CrankNicolson(const StripOperator& op, double dt, double tol)
    : op_(op), tau_(0.5 * dt), tol_(tol) {
    const int n_s = op.n_s();
    const int n_u = op.n_u();
    const std::size_t total = static_cast<std::size_t>(n_s) * n_u;
    d_.resize(total);
    l1_.resize(total);
    l2_.resize(total);
    const Stencil st = stencil(op.du());
    const cd a1 = I * tau_ * st.c1;
    const cd a2 = I * tau_ * st.c2;
    for (int i = 0; i < n_s; ++i) {
        const auto m = op.transverse_matrix(op.k()[i]);
        for (int j = 0; j < n_u; ++j) {
            const std::size_t idx = static_cast<std::size_t>(j) * n_s + i;
            cd d = 1.0 + I * tau_ * m.diag[j];
            cd l1num = a1;
            if (j >= 1) {
                const std::size_t p1 = idx - n_s;
                d -= l1_[p1] * l1_[p1] * d_[p1];
                if (j >= 2) {
                    const std::size_t p2 = idx - 2 * static_cast<std::size_t>(n_s);
                    d -= l2_[p2] * l2_[p2] * d_[p2];
                }
                l1num -= l2_[p1] * l1_[p1] * d_[p1];
            }
            if (std::abs(d) < 1e-12) throw SingularSystem("straight-channel factorization broke down");
            d_[idx] = d;
            l1_[idx] = l1num / d;
            l2_[idx] = a2 / d;
        }
    }
}

void CrankNicolson::precondition(cvec& x) const {
    const int n_s = op_.n_s();
    const int n_u = op_.n_u();
    const std::size_t S = n_s;
    for (int j = 1; j < n_u; ++j) {
        cd* xj = x.data() + j * S;
        const cd* x1 = xj - S;
        const cd* l1 = l1_.data() + (j - 1) * S;
        for (int i = 0; i < n_s; ++i) xj[i] -= l1[i] * x1[i];
        if (j >= 2) {
            const cd* x2 = xj - 2 * S;
            const cd* l2 = l2_.data() + (j - 2) * S;
            for (int i = 0; i < n_s; ++i) xj[i] -= l2[i] * x2[i];
        }
    }
    for (std::size_t q = 0; q < x.size(); ++q) x[q] /= d_[q];
    for (int j = n_u - 2; j >= 0; --j) {
        cd* xj = x.data() + j * S;
        const cd* l1 = l1_.data() + j * S;
        const cd* l2 = l2_.data() + j * S;
        for (int i = 0; i < n_s; ++i) xj[i] -= l1[i] * xj[i + S];
        if (j + 2 < n_u) {
            for (int i = 0; i < n_s; ++i) xj[i] -= l2[i] * xj[i + 2 * S];
        }
    }
}

void CrankNicolson::step(cvec& xk) {
    const std::size_t n = xk.size();
    cvec& hx = hx_;
    op_.apply_k(xk, hx);
    cvec b(n);
    for (std::size_t q = 0; q < n; ++q) b[q] = xk[q] - I * tau_ * hx[q];
    cvec x = b;
    precondition(x);
    last_iterations_ = 0;
    if (op_.straight()) {
        xk = std::move(x);
        return;
    }
    // linear extrapolation of the correction beyond the straight-channel solve
    cvec base = x;
    if (history_ == 2) {
        for (std::size_t q = 0; q < n; ++q) x[q] += 2.0 * delta_[q] - delta_prev_[q];
    } else if (history_ == 1) {
        for (std::size_t q = 0; q < n; ++q) x[q] += delta_[q];
    }
    auto apply_a = [&](const cvec& v, cvec& out) {
        op_.apply_k(v, out);
        for (std::size_t q = 0; q < n; ++q) out[q] = v[q] + I * tau_ * out[q];
    };
    auto norm = [](const cvec& v) {
        double acc = 0.0;
        for (const cd& z : v) acc += std::norm(z);
        return std::sqrt(acc);
    };
    const double bnorm = norm(b);
    constexpr int restart = 30;
    constexpr int max_total = 300;
    if (basis_.size() < restart + 1) basis_.assign(restart + 1, cvec(n));
    int total = 0;
    cvec& ax = ax_;
    cvec& z = z_;
    cvec& w = w_;
    while (true) {
        apply_a(x, ax);
        cvec& r = basis_[0];
        for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - ax[q];
        const double beta = norm(r);
        if (beta <= tol_ * bnorm) break;
        if (total >= max_total) throw SolveFailure("GMRES did not reach the requested tolerance");
        for (cd& v : r) v /= beta;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(restart + 1, restart);
        std::vector<cd> cs(restart), sn(restart), g(restart + 1, 0.0);
        g[0] = beta;
        int k = 0;
        while (k < restart && total < max_total) {
            z = basis_[k];
            precondition(z);
            apply_a(z, w);
            for (int i = 0; i <= k; ++i) {
                const cvec& vi = basis_[i];
                cd dot = 0.0;
                for (std::size_t q = 0; q < n; ++q) dot += std::conj(vi[q]) * w[q];
                h(i, k) = dot;
                for (std::size_t q = 0; q < n; ++q) w[q] -= dot * vi[q];
            }
            const double wn = norm(w);
            for (int i = 0; i < k; ++i) {
                const cd t = std::conj(cs[i]) * h(i, k) + std::conj(sn[i]) * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double den = std::sqrt(std::norm(h(k, k)) + wn * wn);
            cs[k] = h(k, k) / den;
            sn[k] = wn / den;
            h(k, k) = den;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            cvec& next = basis_[k + 1];
            for (std::size_t q = 0; q < n; ++q) next[q] = wn > 0.0 ? w[q] / wn : 0.0;
            ++k;
            ++total;
            if (std::abs(g[k]) <= tol_ * bnorm) break;
        }
        std::vector<cd> y(k);
        for (int i = k - 1; i >= 0; --i) {
            cd acc = g[i];
            for (int j = i + 1; j < k; ++j) acc -= h(i, j) * y[j];
            y[i] = acc / h(i, i);
        }
        std::fill(z.begin(), z.end(), cd{0.0});
        for (int i = 0; i < k; ++i) {
            const cvec& vi = basis_[i];
            for (std::size_t q = 0; q < n; ++q) z[q] += y[i] * vi[q];
        }
        precondition(z);
        for (std::size_t q = 0; q < n; ++q) x[q] += z[q];
    }
    delta_prev_.swap(delta_);
    delta_.resize(n);
    for (std::size_t q = 0; q < n; ++q) delta_[q] = x[q] - base[q];
    history_ = std::min(history_ + 1, 2);
    last_iterations_ = total;
    max_iterations_ = std::max(max_iterations_, total);
    xk = std::move(x);
}

std::unique_ptr<StripOperator> build_strip_operator(const StripConfig& cfg) {
    return std::make_unique<StripOperator>(cfg, false);
}

StripState band_packet(const StripOperator& op, int band, double k_center, double k_width, double s0_scaled,
                       int k_points) {
    const int n_s = op.n_s();
    const int n_u = op.n_u();
    StripState st;
    st.psi.assign(static_cast<std::size_t>(n_s) * n_u, 0.0);
    const double k_lo = k_center - 5.0 * k_width;
    const double dk = 10.0 * k_width / (k_points - 1);
    for (int q = 0; q < k_points; ++q) {
        const double kq = k_lo + q * dk;
        const double w = (q == 0 || q == k_points - 1 ? 0.5 : 1.0) * dk;
        const double x = (kq - k_center) / k_width;
        const double f = w * std::exp(-0.5 * x * x);
        const auto modes = op.fiber_vectors(kq, band + 1);
        const std::vector<double>& phi = modes[band];
        std::vector<cd> wave(n_s);
        for (int i = 0; i < n_s; ++i) wave[i] = f * std::exp(I * (kq * (op.s()[i] - s0_scaled)));
        for (int j = 0; j < n_u; ++j) {
            cd* row = st.psi.data() + static_cast<std::size_t>(j) * n_s;
            for (int i = 0; i < n_s; ++i) row[i] += phi[j] * wave[i];
        }
    }
    const double nrm = std::sqrt(op.inner_norm2(st.psi));
    for (cd& v : st.psi) v /= nrm;
    st.norm0 = 1.0;
    return st;
}

StripState prepare_packet(const StripConfig& cfg, const StripOperator& op) {
    validate(cfg);
    StripState st = band_packet(op, cfg.band, cfg.k_center, cfg.k_width, cfg.s0 * cfg.beta, cfg.k_points);
    const double inside = op.inner_norm2(st.psi) - mass_below(op, st.psi, -cfg.profile.L * cfg.beta);
    if (inside > 1e-6) throw PacketOverlapsBend("initial packet has mass inside the curved window");
    return st;
}

StripState propagate(const StripState& state, const StripOperator& op, int steps, double dt, double tol) {
    CrankNicolson cn(op, dt, tol);
    cvec xk;
    op.forward(state.psi, xk);
    for (int i = 0; i < steps; ++i) cn.step(xk);
    StripState out;
    op.backward(xk, out.psi);
    out.t = state.t + steps * dt;
    out.norm0 = state.norm0;
    return out;
}

double mass_below(const StripOperator& op, const cvec& psi, double s_scaled) {
    double acc = 0.0;
    for (int j = 0; j < op.n_u(); ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * op.n_s();
        for (int i = 0; i < op.n_s() && op.s()[i] < s_scaled; ++i) acc += std::norm(psi[row + i]);
    }
    return acc * op.ds() * op.du();
}

double mass_above(const StripOperator& op, const cvec& psi, double s_scaled) {
    return op.inner_norm2(psi) - mass_below(op, psi, s_scaled);
}

double mean_s(const StripOperator& op, const cvec& psi) {
    double acc = 0.0;
    double m = 0.0;
    for (int j = 0; j < op.n_u(); ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * op.n_s();
        for (int i = 0; i < op.n_s(); ++i) {
            const double w = std::norm(psi[row + i]);
            acc += w * op.s()[i];
            m += w;
        }
    }
    return m > 0.0 ? acc / m / op.beta() : 0.0;
}

namespace {

// band amplitudes c_m(k) = du * sum_j phi_m(k; u_j) psi_hat(k, u_j) for every s-mode
std::vector<std::vector<cd>> band_amplitudes(const StripOperator& op, const cvec& xk, int count,
                                             double cutoff) {
    const int n_s = op.n_s();
    const int n_u = op.n_u();
    double total = 0.0;
    std::vector<double> column(n_s, 0.0);
    for (int j = 0; j < n_u; ++j) {
        for (int i = 0; i < n_s; ++i) column[i] += std::norm(xk[static_cast<std::size_t>(j) * n_s + i]);
    }
    for (double c : column) total += c;
    std::vector<std::vector<cd>> amp(count, std::vector<cd>(n_s, 0.0));
    for (int i = 0; i < n_s; ++i) {
        if (column[i] <= cutoff * total) continue;
        const auto& modes = op.fiber_modes(i, count);
        for (int m = 0; m < count; ++m) {
            cd acc = 0.0;
            for (int j = 0; j < n_u; ++j) acc += modes[m][j] * xk[static_cast<std::size_t>(j) * n_s + i];
            amp[m][i] = acc * op.du();
        }
    }
    return amp;
}

}  // namespace

std::vector<double> band_masses(const StripOperator& op, const cvec& psi, int count) {
    cvec xk;
    op.forward(psi, xk);
    const auto amp = band_amplitudes(op, xk, count, 1e-16);
    std::vector<double> out(count, 0.0);
    // Parseval with du-normalized modes: mass = (ds / n_s) sum_k sum_m |a_m(k)|^2
    for (int m = 0; m < count; ++m) {
        for (const cd& a : amp[m]) out[m] += std::norm(a);
        out[m] *= op.ds() / op.n_s();
    }
    return out;
}

ScatteringRecord extract_scattering(const StripConfig& cfg, const StripOperator& op, const StripState& final_state,
                                    const StripState& reference_state) {
    const double edge = cfg.profile.L * cfg.beta;
    ScatteringRecord rec;
    rec.norm = op.inner_norm2(final_state.psi);
    const double beyond = mass_above(op, final_state.psi, edge);
    if (beyond < (1.0 - 1e-4) * rec.norm) throw NotAsymptotic("transmitted packet has not left the curved window");
    rec.reflected_mass = mass_below(op, final_state.psi, -edge);

    const int count = cfg.band + 4;
    cvec bk;
    cvec rk;
    op.forward(final_state.psi, bk);
    op.forward(reference_state.psi, rk);
    const auto bent = band_amplitudes(op, bk, count, 1e-16);
    const auto ref = band_amplitudes(op, rk, count, 1e-16);

    int best = 0;
    for (int i = 0; i < op.n_s(); ++i) {
        if (std::abs(op.k()[i] - cfg.k_center) < std::abs(op.k()[best] - cfg.k_center)) best = i;
    }
    rec.k_used = op.k()[best];
    rec.t_n = bent[cfg.band][best] / ref[cfg.band][best];
    rec.phase = std::arg(rec.t_n);
    rec.abs_t = std::abs(rec.t_n);
    cd avg = 0.0;
    for (int i = 0; i < op.n_s(); ++i) avg += bent[cfg.band][i] * std::conj(ref[cfg.band][i]);
    rec.packet_phase = std::arg(avg);

    rec.band_masses.assign(count, 0.0);
    const double scale = op.ds() / op.n_s();
    for (int m = 0; m < count; ++m) {
        for (const cd& a : bent[m]) rec.band_masses[m] += std::norm(a) * scale;
        if (m != cfg.band) rec.interband_mass += rec.band_masses[m];
    }
    return rec;
}

SimulationResult run_scattering(const StripConfig& cfg, int sample_every) {
    const auto bent_op = build_strip_operator(cfg);
    const StripOperator straight_op(cfg, true);
    const StripState initial = prepare_packet(cfg, *bent_op);
    SimulationResult res;
    res.initial_interband_mass = 0.0;
    {
        const auto bm = band_masses(*bent_op, initial.psi, cfg.band + 2);
        for (int m = 0; m < static_cast<int>(bm.size()); ++m) {
            if (m != cfg.band) res.initial_interband_mass += bm[m];
        }
    }

    const double edge = cfg.profile.L * cfg.beta;
    const double velocity = std::max(0.1, group_velocity(solve_fiber(cfg.k_center, cfg.band + 1), cfg.band));
    const double travel = edge - cfg.s0 * cfg.beta + 6.0 / cfg.k_width;
    const int max_steps = static_cast<int>(3.0 * travel / velocity / cfg.dt) + 100;
    constexpr int check_every = 25;

    CrankNicolson cn(*bent_op, cfg.dt, cfg.gmres_tol);
    cvec xk;
    bent_op->forward(initial.psi, xk);
    cvec psi = initial.psi;
    int steps = 0;
    auto sample = [&](int step) {
        TimeSample ts;
        ts.t = step * cfg.dt;
        ts.norm = bent_op->inner_norm2(psi);
        ts.s_mean = mean_s(*bent_op, psi);
        ts.reflected_mass = mass_below(*bent_op, psi, -edge);
        ts.band_masses = band_masses(*bent_op, psi, cfg.band + 2);
        res.series.push_back(std::move(ts));
    };
    if (sample_every > 0) sample(0);
    while (true) {
        cn.step(xk);
        ++steps;
        const bool check = steps % check_every == 0;
        const bool record = sample_every > 0 && steps % sample_every == 0;
        if (check || record) {
            bent_op->backward(xk, psi);
            res.max_norm_drift = std::max(res.max_norm_drift, std::abs(bent_op->inner_norm2(psi) - 1.0));
            if (record) sample(steps);
            if (check && mass_below(*bent_op, psi, edge) - mass_below(*bent_op, psi, -edge) <= 1e-10) break;
        }
        if (steps >= max_steps) throw NotAsymptotic("packet did not leave the curved window within the step budget");
    }
    bent_op->backward(xk, psi);
    StripState bent_final{psi, steps * cfg.dt, 1.0};
    const StripState ref_final = propagate(initial, straight_op, steps, cfg.dt, cfg.gmres_tol);
    res.steps = steps;
    res.max_gmres_iterations = cn.max_iterations();
    res.record = extract_scattering(cfg, *bent_op, bent_final, ref_final);
    return res;
}

StripConfig default_strip_config(double beta, const BoundaryProfile& profile, int band, double k_center,
                                 double k_width) {
    StripConfig cfg;
    cfg.beta = beta;
    cfg.profile = profile;
    cfg.band = band;
    cfg.k_center = k_center;
    cfg.k_width = k_width;
    const double u_scaled =
        std::max(7.0, std::abs(k_center) + 4.0 * k_width + 2.0 * std::sqrt(2.0 * band + 1.0) + 4.5);
    cfg.u_max = u_scaled / beta;
    cfg.du = 0.05 / beta;
    cfg.ds = 0.5 / beta;
    const double width = 1.0 / k_width;
    const double edge = beta * profile.L;
    const double s0 = -edge - 3.8 * width;
    cfg.s0 = s0 / beta;
    cfg.s_min = (s0 - 5.5 * width) / beta;
    cfg.s_max = (edge + 10.5 * width + 5.0) / beta;
    cfg.dt = std::min(0.02, 0.1 / packet_max_energy(cfg));
    return cfg;
}

double symbol_expansion_residual(double beta, const BoundaryProfile& profile, int band, double k_center,
                                 int max_order) {
    StripConfig cfg;
    cfg.beta = beta;
    cfg.profile = profile;
    cfg.band = band;
    cfg.k_center = k_center;
    cfg.operator_only = true;
    cfg.filter_coefficients = false;
    const double k_width = 1.0 / (0.3 * beta * profile.L);
    const double edge = beta * profile.L;
    cfg.u_max = 9.0 / beta;
    cfg.du = 0.05 / beta;
    cfg.ds = 0.2 / beta;
    cfg.s_min = -(edge + 8.0 / k_width) / beta;
    cfg.s_max = -cfg.s_min;
    const StripOperator op(cfg, false);
    const StripState packet = band_packet(op, band, k_center, k_width, 0.0, 128);

    cvec exact;
    op.apply_curved_part(packet.psi, exact);

    const Symbol sym = expand_strip_symbol(max_order);
    cvec xk;
    op.forward(packet.psi, xk);
    const int n_s = op.n_s();
    const int n_u = op.n_u();
    int p_max = 0;
    for (const SymbolTerm& t : sym.terms()) p_max = std::max(p_max, t.p_power);
    std::vector<cvec> p_psi(p_max + 1);
    for (int b = 0; b <= p_max; ++b) {
        cvec pk(xk.size());
        for (int j = 0; j < n_u; ++j) {
            for (int i = 0; i < n_s; ++i) {
                const std::size_t idx = static_cast<std::size_t>(j) * n_s + i;
                pk[idx] = std::pow(op.k()[i] + op.u()[j], b) * xk[idx];
            }
        }
        op.backward(pk, p_psi[b]);
    }
    cvec approx(xk.size(), 0.0);
    for (const SymbolTerm& t : sym.terms()) {
        for (int i = 0; i < n_s; ++i) {
            const double s = op.s()[i] / beta;
            double f = 1.0;
            for (std::size_t d = 0; d < t.curvature.exponents.size(); ++d) {
                const double kd = profile.curvature(s, static_cast<int>(d)) / std::pow(beta, static_cast<int>(d) + 1);
                for (int e = 0; e < t.curvature.exponents[d]; ++e) f *= kd;
            }
            if (f == 0.0 && !t.curvature.exponents.empty()) continue;
            for (int j = 0; j < n_u; ++j) {
                const std::size_t idx = static_cast<std::size_t>(j) * n_s + i;
                approx[idx] += t.coeff * std::pow(op.u()[j], t.u_power) * f * p_psi[t.p_power][idx];
            }
        }
    }
    for (std::size_t q = 0; q < exact.size(); ++q) exact[q] -= approx[q];
    return std::sqrt(op.inner_norm2(exact));
}

}  // namespace edgephase
