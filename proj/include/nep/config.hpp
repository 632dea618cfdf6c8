#pragma once

// Plain-data problem descriptions and the INI config format read by the CLI.

#include "nep/problem.hpp"
#include "nep/solvers.hpp"

#include <optional>
#include <string>

namespace nep {

struct PlayerConfig {
    std::optional<fem::Rect> region;  // whole domain if empty
    double y_d = 0.0;
    double u_a = -1.0;
    double u_b = 1.0;
};

/// Constant or affine data on a rectangle, as read from a config file.
struct ProblemConfig {
    fem::Rect domain{0.0, 1.0, 0.0, 1.0};
    int nx = 32;
    int ny = 32;
    double alpha = 1.0;
    double rho = 10.0;
    double mu = 0.0;
    double psi = 1.0;    // psi(x, y) = psi + psi_x x + psi_y y
    double psi_x = 0.0;
    double psi_y = 0.0;
    double source = 0.0;
    double y0 = 10.0;
    std::vector<PlayerConfig> players;
    SolverConfig solver;
};

/// Parses INI text; see docs/config.md for the keys.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

struct BuiltProblem {
    NepProblem problem;
    InitialGuess initial;
};

BuiltProblem build_problem(const ProblemConfig& config);

}  // namespace nep
