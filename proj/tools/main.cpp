#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "edgephase/acceptance.hpp"
#include "edgephase/classical.hpp"
#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/perturbation.hpp"
#include "edgephase/phases.hpp"
#include "edgephase/strip.hpp"
#include "plot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace edgephase;

namespace {

/// One command parameter; physical parameters have no default.
struct Param {
    std::string name;
    std::string help;
    std::string fallback;
    bool required = false;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Param> params;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> list = {
        {"dispersion",
         "band energies and group velocities on a momentum grid",
         {{"n", "band range, e.g. 0..3", "", true},
          {"k", "momentum range, e.g. -4..2", "", true},
          {"dk", "momentum step", "", true}}},
        {"perturb",
         "first- and second-order band corrections at (n, k)",
         {{"n", "band index", "", true}, {"k", "momentum", "", true}, {"m-max", "states in the sum over states", "0"}}},
        {"phase",
         "bend phases phi0, phi1 and the WKB profile",
         {{"n", "band index", "", true},
          {"k", "momentum", "", true},
          {"theta", "bending angle", "", true},
          {"L", "bump half-width", "1"},
          {"beta", "field-scale parameter for the WKB profile (optional)", ""}}},
        {"classical",
         "skipping-orbit geometry and semiclassical phase",
         {{"n", "band index", "", true},
          {"eta", "incidence angle in (0, pi)", "", true},
          {"theta", "bending angle", "", true},
          {"kappa-r", "curvature times orbit radius for the hop deltas", "0.001"}}},
        {"simulate",
         "curved-strip wave-packet scattering run",
         {{"beta", "field-scale parameter", "", true},
          {"theta", "bending angle", "", true},
          {"n", "band index", "", true},
          {"k", "packet centre momentum", "", true},
          {"k-width", "packet momentum spread", "0.07"},
          {"L", "bump half-width", "1"},
          {"shape", "bump or two_bump", "bump"},
          {"sample-every", "steps between time-series samples", "50"}}},
        {"sweep",
         "independent phase or simulator runs over a parameter list",
         {{"what", "phase or simulate", "", true},
          {"n", "band index", "", true},
          {"theta", "bending angle", "", true},
          {"k", "momentum (simulate) or range a..b (phase)", "", true},
          {"dk", "momentum step for phase sweeps", "0.05"},
          {"beta", "comma-separated beta list", "", true},
          {"k-width", "packet momentum spread", "0.07"},
          {"L", "bump half-width", "1"},
          {"workers", "parallel workers", "1"}}},
        {"selfcheck", "acceptance suite", {{"criterion", "run a single criterion (1..13); 0 runs all", "0"}}},
    };
    return list;
}

struct Resolved {
    std::string command;
    std::map<std::string, std::string> params;
    std::string output_dir = ".";
    std::string format = "csv";
    bool plot = false;
    std::string hash;

    bool has(const std::string& key) const { return params.count(key) && !params.at(key).empty(); }
    const std::string& str(const std::string& key) const { return params.at(key); }

    double num(const std::string& key) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(params.at(key), &pos);
            if (pos != params.at(key).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("parameter --" + key + " is not a number: '" + params.at(key) + "'");
        }
    }
    int integer(const std::string& key) const {
        const double v = num(key);
        if (v != std::floor(v)) throw ConfigError("parameter --" + key + " must be an integer");
        return static_cast<int>(v);
    }
};

std::pair<double, double> parse_range(const std::string& text, const std::string& key) {
    const auto pos = text.find("..");
    try {
        if (pos == std::string::npos) {
            const double v = std::stod(text);
            return {v, v};
        }
        return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 2))};
    } catch (const std::exception&) {
        throw ConfigError("parameter --" + key + " must be a value or a range a..b");
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("parameter --" + key + " must be a comma-separated list of numbers");
        }
    }
    if (out.empty()) throw ConfigError("parameter --" + key + " is empty");
    return out;
}

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json manifest(const Resolved& r) {
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    return json{{"command", r.command}, {"parameters", params}, {"format", r.format}};
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Table written as CSV (with a config-hash comment) or JSON rows.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add(std::vector<double> row) { rows_.push_back(std::move(row)); }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    void write(const Resolved& r, const std::string& stem) const {
        fs::create_directories(r.output_dir);
        const fs::path path = fs::path(r.output_dir) / (stem + (r.format == "json" ? ".json" : ".csv"));
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        if (r.format == "json") {
            json rows = json::array();
            for (const auto& row : rows_) {
                json obj = json::object();
                for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = row[i];
                rows.push_back(obj);
            }
            out << json{{"config_hash", r.hash}, {"config", manifest(r)}, {"rows", rows}}.dump(2) << "\n";
        } else {
            out << "# config-hash: " << r.hash << "\n";
            for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
            out << "\n";
            for (const auto& row : rows_) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << g17(row[i]);
                out << "\n";
            }
        }
        std::cout << "wrote " << path.string() << "\n";
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

void write_json(const Resolved& r, const std::string& stem, json body) {
    fs::create_directories(r.output_dir);
    body["config_hash"] = r.hash;
    const fs::path path = fs::path(r.output_dir) / (stem + ".json");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << body.dump(2) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

std::string svg_path(const Resolved& r, const std::string& stem) {
    fs::create_directories(r.output_dir);
    return (fs::path(r.output_dir) / (stem + ".svg")).string();
}

BoundaryProfile profile_from(const Resolved& r) {
    const double theta = r.num("theta");
    const double L = r.num("L");
    if (r.has("shape") && r.str("shape") == "two_bump") {
        return make_two_bump_profile(0.5 * theta, 0.45 * L, -0.5 * L, 0.5 * theta, 0.45 * L, 0.5 * L);
    }
    if (r.has("shape") && r.str("shape") != "bump") throw ConfigError("--shape must be bump or two_bump");
    return make_bump_profile(theta, L);
}

int run_dispersion(const Resolved& r) {
    const auto [n_lo, n_hi] = parse_range(r.str("n"), "n");
    const auto [k_lo, k_hi] = parse_range(r.str("k"), "k");
    const double dk = r.num("dk");
    if (!(dk > 0.0) || k_hi < k_lo || n_lo < 0 || n_hi < n_lo || n_lo != std::floor(n_lo) || n_hi != std::floor(n_hi)) {
        throw ConfigError("invalid dispersion ranges");
    }
    const int steps = static_cast<int>(std::floor((k_hi - k_lo) / dk + 1e-9));
    Table t({"n", "k", "E", "E_prime"});
    std::vector<cli::Series> series;
    for (int n = static_cast<int>(n_lo); n <= static_cast<int>(n_hi); ++n) {
        cli::Series s{"n=" + std::to_string(n), {}, {}};
        for (int i = 0; i <= steps; ++i) {
            const double k = k_lo + i * dk;
            const FiberSolution sol = solve_fiber(k, n + 1);
            t.add({static_cast<double>(n), k, sol.energy(n), group_velocity(sol, n)});
            s.x.push_back(k);
            s.y.push_back(sol.energy(n));
        }
        series.push_back(std::move(s));
    }
    t.write(r, "dispersion");
    if (r.plot) cli::write_line_chart(svg_path(r, "dispersion"), "band dispersion", "k", "E_n(k)", series);
    return 0;
}

int run_perturb(const Resolved& r) {
    const int n = r.integer("n");
    const double k = r.num("k");
    if (n < 0) throw ConfigError("--n must be non-negative");
    const int m_max = r.integer("m-max") > 0 ? r.integer("m-max") : n + 40;
    const FiberSolution sol = solve_fiber(k, n + 1);
    const SecondOrderEnergy e2 = second_order_energy(sol, n, m_max);
    const GeometricPhaseDensity g = geometric_phase_coeffs(sol, n);
    Table t({"n", "k", "E", "E_prime", "E1", "E1_prime", "E2", "E2_sum_over_states", "E2_remainder", "gamma_B_coeff",
             "gamma_RW_coeff"});
    t.add({static_cast<double>(n), k, sol.energy(n), group_velocity(sol, n), first_order_energy(sol, n),
           first_order_energy_slope(sol, n), e2.E2, e2.sum_over_states, e2.remainder, g.gamma_B_coeff,
           g.gamma_RW_coeff});
    const auto& row = t.rows().front();
    std::printf("E = %.12g\nE' = %.12g\nE1 = %.12g\nE2 = %.12g\n", row[2], row[3], row[4], row[6]);
    t.write(r, "perturb");
    return 0;
}

int run_phase(const Resolved& r) {
    const int n = r.integer("n");
    const double k = r.num("k");
    if (n < 0) throw ConfigError("--n must be non-negative");
    const BoundaryProfile profile = profile_from(r);
    const BandCoefficients c = band_coefficients(n, k);
    const PhaseRecord rec = phase_record(c, profile);
    std::printf("phi0 = %.12g\nphi1 = %.12g\n", rec.phi0, rec.phi1);
    const bool wkb = r.has("beta");
    WkbProfile w;
    if (wkb) {
        const double beta = r.num("beta");
        if (!(beta >= 1.0)) throw ConfigError("--beta must be at least 1");
        w = wkb_phase(c, profile, beta);
        std::printf("wkb endpoint = %.12g\n", w.endpoint_phase());
    }
    std::vector<std::string> cols{"s", "kappa", "phi_profile"};
    if (wkb) {
        cols.push_back("wkb_phase");
        cols.push_back("wkb_log_amplitude");
    }
    Table t(cols);
    for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
        std::vector<double> row{profile.s_grid[i], profile.kappa[i], rec.phi_profile[i]};
        if (wkb) {
            row.push_back(w.phase[i]);
            row.push_back(w.log_amplitude[i]);
        }
        t.add(std::move(row));
    }
    t.write(r, "phase_profile");
    if (r.plot) {
        std::vector<cli::Series> s{{"phi_profile", profile.s_grid, rec.phi_profile}};
        if (wkb) s.push_back({"wkb", profile.s_grid, w.phase});
        cli::write_line_chart(svg_path(r, "phase_profile"), "phase along the boundary", "s", "phase", s);
    }
    return 0;
}

int run_classical(const Resolved& r) {
    const int n = r.integer("n");
    const double eta = r.num("eta");
    const double theta = r.num("theta");
    const double kr = r.num("kappa-r");
    if (n < 0) throw ConfigError("--n must be non-negative");
    if (!(eta > 0.0 && eta < std::numbers::pi)) throw ConfigError("--eta must lie in (0, pi)");
    const SemiclassicalComparison c = compare_semiclassical(n, eta, theta);
    const double radius = std::sqrt(c.E_n);
    const HopDeltas first = hop_deltas(radius, eta, kr / radius);
    const HopDeltas exact = exact_hop_deltas(radius, eta, kr / radius);
    std::printf("k_n = %.12g\nphi_semiclassical = %.12g\nphi_quantum = %.12g\nrelative gap = %.3e\n", c.k_n,
                c.phi_semiclassical, c.phi_quantum, c.rel_gap);
    Table t({"n", "eta", "k_n", "E_n", "phi_semiclassical", "phi_quantum", "rel_gap", "bohr_sommerfeld_residual",
             "d_span", "d_span_exact", "d_length", "d_length_exact", "d_area", "d_area_exact", "d_eta_exact"});
    t.add({static_cast<double>(n), eta, c.k_n, c.E_n, c.phi_semiclassical, c.phi_quantum, c.rel_gap,
           bohr_sommerfeld_residual(n, c.k_n), first.d_span, exact.d_span, first.d_length, exact.d_length,
           first.d_area, exact.d_area, exact.d_eta});
    t.write(r, "classical");
    return 0;
}

StripConfig simulation_config(const Resolved& r, double beta, double k) {
    const int n = r.integer("n");
    if (n < 0) throw ConfigError("--n must be non-negative");
    if (!(beta >= 1.0)) throw ConfigError("--beta must be at least 1");
    StripConfig cfg = default_strip_config(beta, profile_from(r), n, k, r.num("k-width"));
    try {
        validate(cfg);
    } catch (const ConfigInvalid& e) {
        throw ConfigError(e.what());
    } catch (const PacketOverlapsBend& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

json config_json(const StripConfig& c) {
    json bumps = json::array();
    for (const Bump& b : c.profile.bumps) bumps.push_back({{"center", b.center}, {"half_width", b.half_width}, {"theta", b.theta}});
    return {{"beta", c.beta},   {"profile", {{"kind", c.profile.kind}, {"theta", c.profile.theta}, {"L", c.profile.L}, {"bumps", bumps}}},
            {"s_min", c.s_min}, {"s_max", c.s_max},
            {"u_max", c.u_max}, {"ds", c.ds},
            {"du", c.du},       {"dt", c.dt},
            {"band", c.band},   {"k_center", c.k_center},
            {"k_width", c.k_width}, {"s0", c.s0},
            {"gmres_tol", c.gmres_tol}, {"k_points", c.k_points}};
}

json scattering_json(const SimulationResult& res, const StripConfig& cfg) {
    const BandCoefficients bc = band_coefficients(cfg.band, res.record.k_used);
    const double p0 = phi0(bc, cfg.profile);
    const double p1 = phi1(bc, cfg.profile);
    return {{"k_used", res.record.k_used},
            {"phase", res.record.phase},
            {"abs_t", res.record.abs_t},
            {"packet_phase", res.record.packet_phase},
            {"phi0", p0},
            {"phi1", p1},
            {"phase_minus_phi0", res.record.phase - p0},
            {"phase_minus_phi0_phi1", res.record.phase - p0 - p1 / cfg.beta},
            {"reflected_mass", res.record.reflected_mass},
            {"band_masses", res.record.band_masses},
            {"interband_mass", res.record.interband_mass},
            {"norm", res.record.norm},
            {"max_norm_drift", res.max_norm_drift},
            {"steps", res.steps},
            {"max_gmres_iterations", res.max_gmres_iterations}};
}

int run_simulate(const Resolved& r) {
    const StripConfig cfg = simulation_config(r, r.num("beta"), r.num("k"));
    const int every = r.integer("sample-every");
    if (every < 1) throw ConfigError("--sample-every must be positive");
    write_json(r, "manifest", {{"config", config_json(cfg)}, {"run", manifest(r)}});
    const SimulationResult res = run_scattering(cfg, every);
    std::vector<std::string> cols{"t", "norm", "s_mean", "reflected_mass"};
    const std::size_t bands = res.series.empty() ? 0 : res.series.front().band_masses.size();
    for (std::size_t m = 0; m < bands; ++m) cols.push_back("band_mass_" + std::to_string(m));
    Table t(cols);
    for (const TimeSample& s : res.series) {
        std::vector<double> row{s.t, s.norm, s.s_mean, s.reflected_mass};
        row.insert(row.end(), s.band_masses.begin(), s.band_masses.end());
        t.add(std::move(row));
    }
    Resolved csv = r;
    csv.format = "csv";
    t.write(csv, "series");
    const json rec = scattering_json(res, cfg);
    write_json(r, "scattering", rec);
    std::printf("phase = %.12g\nphi0 = %.12g\nphi0 + phi1/beta = %.12g\n", rec["phase"].get<double>(),
                rec["phi0"].get<double>(), rec["phi0"].get<double>() + rec["phi1"].get<double>() / cfg.beta);
    if (r.plot) {
        cli::Series m{"s_mean", {}, {}};
        for (const TimeSample& x : res.series) {
            m.x.push_back(x.t);
            m.y.push_back(x.s_mean);
        }
        cli::write_line_chart(svg_path(r, "series"), "packet centre", "t", "s", {m});
    }
    return 0;
}

int run_sweep(const Resolved& r) {
    const std::string what = r.str("what");
    const int workers = std::max(1, r.integer("workers"));
    if (what == "phase") {
        const int n = r.integer("n");
        const auto [k_lo, k_hi] = parse_range(r.str("k"), "k");
        const double dk = r.num("dk");
        if (!(dk > 0.0) || k_hi < k_lo) throw ConfigError("invalid momentum range");
        const std::vector<double> betas = parse_list(r.str("beta"), "beta");
        const BoundaryProfile profile = profile_from(r);
        const int steps = static_cast<int>(std::floor((k_hi - k_lo) / dk + 1e-9));
        std::vector<std::string> cols{"k", "phi0", "phi1"};
        for (double b : betas) cols.push_back("phi0_plus_phi1_over_beta_" + g17(b));
        Table t(cols);
        std::vector<cli::Series> series{{"phi0", {}, {}}};
        for (int i = 0; i <= steps; ++i) {
            const double k = k_lo + i * dk;
            const BandCoefficients c = band_coefficients(n, k);
            const double p0 = phi0(c, profile);
            const double p1 = phi1(c, profile);
            std::vector<double> row{k, p0, p1};
            for (double b : betas) row.push_back(p0 + p1 / b);
            t.add(std::move(row));
            series[0].x.push_back(k);
            series[0].y.push_back(p0);
        }
        t.write(r, "sweep_phase");
        if (r.plot) cli::write_line_chart(svg_path(r, "sweep_phase"), "phase against momentum", "k", "phi0", series);
        return 0;
    }
    if (what != "simulate") throw ConfigError("--what must be phase or simulate");
    std::vector<double> betas = parse_list(r.str("beta"), "beta");
    std::sort(betas.begin(), betas.end());
    const double k = r.num("k");
    std::vector<StripConfig> configs;
    for (double b : betas) configs.push_back(simulation_config(r, b, k));
    std::vector<json> results(configs.size());
    for (std::size_t start = 0; start < configs.size(); start += workers) {
        std::vector<std::future<json>> jobs;
        for (std::size_t i = start; i < std::min(configs.size(), start + workers); ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] { return scattering_json(run_scattering(configs[i]), configs[i]); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) results[start + i] = jobs[i].get();
    }
    Table t({"beta", "k_used", "phase", "phi0", "phi1", "phase_minus_phi0", "phase_minus_phi0_phi1", "reflected_mass",
             "interband_mass", "max_norm_drift"});
    cli::Series e0{"|phase - phi0|", {}, {}};
    cli::Series e1{"|phase - phi0 - phi1/beta|", {}, {}};
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const json& j = results[i];
        t.add({betas[i], j["k_used"], j["phase"], j["phi0"], j["phi1"], j["phase_minus_phi0"], j["phase_minus_phi0_phi1"],
               j["reflected_mass"], j["interband_mass"], j["max_norm_drift"]});
        e0.x.push_back(betas[i]);
        e0.y.push_back(std::abs(j["phase_minus_phi0"].get<double>()));
        e1.x.push_back(betas[i]);
        e1.y.push_back(std::abs(j["phase_minus_phi0_phi1"].get<double>()));
    }
    t.write(r, "sweep_simulate");
    if (r.plot) cli::write_line_chart(svg_path(r, "sweep_simulate"), "simulator error against beta", "beta", "error", {e0, e1}, true);
    return 0;
}

int run_selfcheck(const Resolved& r) {
    const int only = r.integer("criterion");
    bool all = true;
    for (const auto& [id, title] : acceptance_criteria()) {
        if (only != 0 && id != only) continue;
        const CriterionResult res = run_criterion(id);
        std::cout << format_result(res) << std::endl;
        all = all && res.passed;
    }
    return all ? 0 : 3;
}

int dispatch(const Resolved& r) {
    if (r.command == "dispersion") return run_dispersion(r);
    if (r.command == "perturb") return run_perturb(r);
    if (r.command == "phase") return run_phase(r);
    if (r.command == "classical") return run_classical(r);
    if (r.command == "simulate") return run_simulate(r);
    if (r.command == "sweep") return run_sweep(r);
    return run_selfcheck(r);
}

Resolved resolve(const std::string& command, const std::map<std::string, std::string>& flags,
                 const std::string& config_path, const std::string& output_dir, const std::string& format, bool plot,
                 bool output_given, bool format_given) {
    Resolved r;
    r.command = command;
    json file = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file " + config_path);
        try {
            in >> file;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed config file: ") + e.what());
        }
        for (const auto& [key, value] : file.items()) {
            if (key != "command" && key != "parameters" && key != "output_dir" && key != "format" && key != "plot") {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
        if (file.contains("command") && file["command"] != command) {
            throw ConfigError("config file is for command '" + file["command"].get<std::string>() + "'");
        }
    }
    const Command* spec = nullptr;
    for (const Command& c : commands()) {
        if (c.name == command) spec = &c;
    }
    json fparams = file.value("parameters", json::object());
    for (const auto& [key, value] : fparams.items()) {
        bool known = false;
        for (const Param& p : spec->params) known = known || p.name == key;
        if (!known) throw ConfigError("unknown parameter '" + key + "' for " + command);
    }
    for (const Param& p : spec->params) {
        std::string value;
        if (flags.count(p.name)) {
            value = flags.at(p.name);
        } else if (fparams.contains(p.name)) {
            const json& v = fparams[p.name];
            value = v.is_string() ? v.get<std::string>() : v.dump();
        } else if (p.required) {
            throw ConfigError("missing required parameter --" + p.name);
        } else {
            value = p.fallback;
        }
        r.params[p.name] = value;
    }
    r.output_dir = output_given ? output_dir : file.value("output_dir", output_dir);
    r.format = format_given ? format : file.value("format", format);
    if (r.format != "csv" && r.format != "json") throw ConfigError("--format must be csv or json");
    r.plot = plot || file.value("plot", false);
    r.hash = fnv1a(manifest(r).dump());
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-state phases of curved quantum Hall boundaries"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::string output_dir = ".";
    std::string format = "csv";
    bool plot = false;
    int seed = 0;
    app.add_option("--config", config_path, "JSON configuration file (flags override)");
    auto* out_opt = app.add_option("--output-dir", output_dir, "directory for output files");
    auto* fmt_opt = app.add_option("--format", format, "csv or json");
    app.add_flag("--plot", plot, "also write SVG charts");
    app.add_option("--seed", seed, "reserved; the pipeline is deterministic");

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, CLI::App*> subs;
    for (const Command& c : commands()) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        subs[c.name] = sub;
        for (const Param& p : c.params) {
            sub->add_option("--" + p.name, values[c.name][p.name], p.help + (p.required ? " (required)" : ""));
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        for (const Command& c : commands()) {
            CLI::App* sub = subs[c.name];
            if (!sub->parsed()) continue;
            std::map<std::string, std::string> given;
            for (const Param& p : c.params) {
                if (sub->count("--" + p.name) > 0) given[p.name] = values[c.name][p.name];
            }
            const Resolved r = resolve(c.name, given, config_path, output_dir, format, plot, out_opt->count() > 0,
                                       fmt_opt->count() > 0);
            return dispatch(r);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigInvalid& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
