#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include "edgephase/profile.hpp"

namespace edgephase {

using cvec = std::vector<std::complex<double>>;

/// Curved-strip simulation parameters. Lengths are physical; the simulator works
/// internally in the scaled coordinates (beta s, beta u).
struct StripConfig {
    double beta = 8.0;
    BoundaryProfile profile;
    double s_min = -20.0;
    double s_max = 20.0;
    double u_max = 1.0;
    double ds = 0.04;
    double du = 0.006;
    double dt = 0.02;
    int band = 0;
    double k_center = 0.42;
    double k_width = 0.08;
    /// Packet centre (physical s).
    double s0 = -10.0;
    double gmres_tol = 1e-12;
    int k_points = 128;
    /// Skip the energy-window and packet-placement checks (operator-level tests).
    bool operator_only = false;
    /// Band-limit the curvature coefficients to the s-grid before forming products.
    bool filter_coefficients = true;
};

/// Throws ConfigInvalid / PacketOverlapsBend for violated invariants.
void validate(const StripConfig& cfg);

/// Wavefunction on the interior nodes, index j * n_s + i (u-row j, s-column i).
struct StripState {
    cvec psi;
    double t = 0.0;
    double norm0 = 1.0;
};

class StripOperator {
public:
    StripOperator(const StripConfig& cfg, bool straight);
    ~StripOperator();
    StripOperator(const StripOperator&) = delete;
    StripOperator& operator=(const StripOperator&) = delete;

    int n_s() const { return n_s_; }
    int n_u() const { return n_u_; }
    int size() const { return n_s_ * n_u_; }
    double beta() const { return beta_; }
    double ds() const { return ds_; }
    double du() const { return du_; }
    bool straight() const { return straight_; }
    /// Scaled coordinates.
    const std::vector<double>& s() const { return s_; }
    const std::vector<double>& u() const { return u_; }
    /// Fourier momenta of the s-columns (Nyquist mode mapped to 0).
    const std::vector<double>& k() const { return k_; }

    void forward(const cvec& real_space, cvec& k_space) const;
    void backward(const cvec& k_space, cvec& real_space) const;

    /// H x in real space.
    void apply(const cvec& x, cvec& y) const;
    /// H x with input and output in k-space.
    void apply_k(const cvec& xk, cvec& yk) const;
    /// Straight-channel operator in k-space (block diagonal in k).
    void apply_straight_k(const cvec& xk, cvec& yk) const;
    /// Curvature part of the symbol expansion, D g^-1 D + V without -d^2/du^2, in real space.
    void apply_curved_part(const cvec& x, cvec& y) const;

    /// Transverse matrix at Fourier momentum k: 5-point -d^2/du^2 + (k+u)^2.
    struct Pentadiagonal {
        std::vector<double> diag;
        double off1 = 0.0;
        double off2 = 0.0;
    };
    Pentadiagonal transverse_matrix(double kk) const;

    /// Lowest eigenvectors (unit in the du-weighted norm) of the transverse matrix at k.
    const std::vector<std::vector<double>>& fiber_modes(int mode, int count) const;
    std::vector<double> fiber_energies(double kk, int count) const;
    std::vector<std::vector<double>> fiber_vectors(double kk, int count, std::vector<double>* energies = nullptr) const;

    double inner_norm2(const cvec& x) const;

private:
    double beta_;
    bool straight_;
    int n_s_;
    int n_u_;
    double ds_;
    double du_;
    std::vector<double> s_;
    std::vector<double> u_;
    std::vector<double> k_;
    std::vector<double> gauge_;     // u^2 kappa / 2
    std::vector<double> ginv_;      // (1 - u kappa)^-2
    std::vector<double> potential_; // curvature potential
    std::vector<int> bend_columns_;
    struct Fft;
    std::unique_ptr<Fft> fft_;
    mutable std::map<int, std::vector<std::vector<double>>> mode_cache_;
    mutable cvec work_a_, work_b_, work_c_;
};

/// Crank-Nicolson stepper: (1 + i dt H / 2) x_new = (1 - i dt H / 2) x, in k-space.
class CrankNicolson {
public:
    CrankNicolson(const StripOperator& op, double dt, double tol);
    void step(cvec& xk);
    int last_iterations() const { return last_iterations_; }
    int max_iterations() const { return max_iterations_; }

private:
    void precondition(cvec& xk) const;
    const StripOperator& op_;
    double tau_;
    double tol_;
    std::vector<std::complex<double>> d_, l1_, l2_;
    std::vector<cvec> basis_;
    cvec hx_, ax_, z_, w_, delta_, delta_prev_;
    int history_ = 0;
    int last_iterations_ = 0;
    int max_iterations_ = 0;
};

std::unique_ptr<StripOperator> build_strip_operator(const StripConfig& cfg);

/// Band packet sum_k f(k) exp(i k (s - s0)) psi_n(k) by quadrature, normalized.
StripState prepare_packet(const StripConfig& cfg, const StripOperator& op);
/// Packet centred at physical s0 with Gaussian momentum weight of width k_width (no placement checks).
StripState band_packet(const StripOperator& op, int band, double k_center, double k_width, double s0_scaled,
                       int k_points);

/// Maximum band energy over the packet support k_center +- 4 k_width.
double packet_max_energy(const StripConfig& cfg);

StripState propagate(const StripState& state, const StripOperator& op, int steps, double dt, double tol = 1e-12);

/// Mass with scaled s below / above the given scaled coordinate.
double mass_below(const StripOperator& op, const cvec& psi, double s_scaled);
double mass_above(const StripOperator& op, const cvec& psi, double s_scaled);
double mean_s(const StripOperator& op, const cvec& psi);

/// Per-band masses (bands 0..count-1) using the simulator's own transverse eigenvectors.
std::vector<double> band_masses(const StripOperator& op, const cvec& psi, int count);

struct ScatteringRecord {
    double k_used = 0.0;
    std::complex<double> t_n;
    double phase = 0.0;
    double abs_t = 0.0;
    /// arg of the band-n overlap averaged over the packet.
    double packet_phase = 0.0;
    double reflected_mass = 0.0;
    std::vector<double> band_masses;
    double interband_mass = 0.0;
    double norm = 0.0;
};

/// Throws NotAsymptotic unless the mass beyond s = +L is at least 1 - 1e-4.
ScatteringRecord extract_scattering(const StripConfig& cfg, const StripOperator& op, const StripState& final_state,
                                    const StripState& reference_state);

struct TimeSample {
    double t = 0.0;
    double norm = 0.0;
    double s_mean = 0.0;
    double reflected_mass = 0.0;
    std::vector<double> band_masses;
};

struct SimulationResult {
    ScatteringRecord record;
    std::vector<TimeSample> series;
    int steps = 0;
    double max_norm_drift = 0.0;
    int max_gmres_iterations = 0;
    double initial_interband_mass = 0.0;
};

/// Prepares the packet, propagates the bent and straight channels until the
/// packet has left the bend, and extracts the scattering data.
SimulationResult run_scattering(const StripConfig& cfg, int sample_every = 0);

/// Builds a StripConfig with grid and domain chosen from beta, the profile and the packet.
StripConfig default_strip_config(double beta, const BoundaryProfile& profile, int band, double k_center,
                                 double k_width);

/// || (exact curved part - truncated symbol expansion through order max_order) packet ||
/// for a normalized band packet centred on the bend with physical width 0.3 L.
double symbol_expansion_residual(double beta, const BoundaryProfile& profile, int band, double k_center,
                                 int max_order = 2);

}  // namespace edgephase
