#include <CLI11.hpp>

#include <iostream>

#include "edgephase/acceptance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks; prints one PASS/FAIL line per criterion"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1..13)")->check(CLI::Range(1, 13));
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& [id, title] : edgephase::acceptance_criteria()) {
        if (only != 0 && id != only) continue;
        const edgephase::CriterionResult r = edgephase::run_criterion(id);
        std::cout << edgephase::format_result(r) << std::endl;
        if (!r.passed) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
