#pragma once

#include "mink/boundary.hpp"
#include "mink/solver.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace mink {

struct RunSpec {
    int n = 2;
    SolverConfig solver;
    BoundaryData phi;
    nlohmann::ordered_json phi_json;
    std::vector<double> h_schedule;  // grid-refinement study, coarsest first
    double order_threshold = 0;
    double convergence_r = 0;
};

// Throws ConfigError; JSON syntax errors carry "line L, column C".
RunSpec parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunSpec load_run_config(const std::string& path);

BoundaryData boundary_from_json(int n, const nlohmann::ordered_json& j, const std::string& base_dir = ".");

}  // namespace mink
