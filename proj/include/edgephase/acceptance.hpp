#pragma once

#include <string>
#include <vector>

#include "edgephase/fiber.hpp"
#include "edgephase/profile.hpp"

namespace edgephase {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Identifiers and titles of the acceptance checks, in order.
std::vector<std::pair<int, std::string>> acceptance_criteria();

/// Runs one check; numerical failures are reported as a failed result.
CriterionResult run_criterion(int id);

/// One line: "PASS  3 hellmann-feynman velocity  (detail) [1.2 s]".
std::string format_result(const CriterionResult& r);

/// Richardson-combined eigenvalue of H0(k) + eps H1(k) on the given grid.
double perturbed_band_energy(int n, double k, double eps, const TransverseGrid& grid);

/// Parameters of the simulator checks.
struct SimulationCase {
    double beta = 6.0;
    double theta = 0.4;
    double k_center = 0.42;
    double k_width = 0.07;
    bool two_bumps = false;
};

struct SimulationOutcome {
    SimulationCase spec;
    double k_used = 0.0;
    double extracted = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    double reflected_mass = 0.0;
    double interband_mass = 0.0;
    double norm_drift = 0.0;
    int steps = 0;
};

BoundaryProfile simulation_profile(const SimulationCase& c);
SimulationOutcome run_simulation_case(const SimulationCase& c);

}  // namespace edgephase
