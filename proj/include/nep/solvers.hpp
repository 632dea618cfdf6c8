#pragma once

// Semi-smooth Newton and primal-dual active-set iterations for the augmented
// NEP, sharing one outer driver and stopping rule.

#include "nep/linalg.hpp"
#include "nep/problem.hpp"
#include "nep/semismooth.hpp"

#include <optional>

namespace nep {

struct IterateState {
    Controls u;
    Vector y;
    Controls p;
    ActiveSets sets;
    int k = 0;
};

enum class Method { Ssn, ActiveSet };

enum class Termination { SetsStationary, ResidualFallback, IterationCap };

struct SolverConfig {
    Method method = Method::Ssn;
    int max_outer = 50;
    linalg::GmresOptions gmres;
    double residual_tol = 1e-13;
};

struct ReportRow {
    int k = 0;
    long nodes = 0;
    double opt = 0.0;            // ||u_k - P(-p(u_k)/alpha)||, exact multiplier
    double step = 0.0;           // ||u_k - u_{k-1}||
    std::optional<int> gmres;    // inner iterations, SSN only
};

struct SolveReport {
    Method method = Method::Ssn;
    std::vector<ReportRow> rows;
    Termination termination = Termination::IterationCap;
    double wall_seconds = 0.0;
    std::vector<Controls> u_history;       // u_1, u_2, ...
    std::vector<ActiveSets> sets_history;  // sets_0, sets_1, ...
    IterateState final;

    bool converged() const { return termination != Termination::IterationCap; }
};

/// Block mass norm sqrt(sum_nu ||u^nu||_M^2).
double control_norm(const NepProblem& problem, const Controls& u);
Controls control_difference(const Controls& a, const Controls& b);

/// alpha u^nu + p^nu(u), p with the exact multiplier.
Controls reduced_gradient(const NepProblem& problem, const Controls& u);

/// Adjoints at y with the exact multiplier, one per player.
Controls exact_adjoints(const NepProblem& problem, const Vector& y);

/// ||u - P(-p/alpha)|| in the block mass norm, with y and p recomputed from u.
double optimality_residual(const NepProblem& problem, const Controls& u);

/// Matrix-free reduced Newton system for the inactive control components,
/// unknowns stacked player by player. Non-inactive components satisfy
/// M w = 0 and therefore vanish.
struct NewtonSystem {
    linalg::LinearOperator op;
    Vector rhs;
};
NewtonSystem newton_system(const NepProblem& problem, const ActiveSets& sets);

/// One semi-smooth Newton step with the sets stored in `iterate`. The
/// returned adjoints use the frozen state mask.
IterateState ssn_step(const NepProblem& problem, const IterateState& iterate,
                      const linalg::GmresOptions& gmres = {}, int* gmres_iterations = nullptr);

/// Sparse (2N+1)m block system of one active-set step.
SparseMatrix active_set_matrix(const NepProblem& problem, const ActiveSets& sets);
Vector active_set_rhs(const NepProblem& problem, const ActiveSets& sets);

/// One active-set step, solved with sparse LU.
IterateState active_set_step(const NepProblem& problem, const IterateState& iterate);

SolveReport run_solver(const NepProblem& problem, const InitialGuess& initial, const SolverConfig& config);

struct MethodComparison {
    SolveReport ssn;
    SolveReport active_set;
    double max_control_difference = 0.0;  // max over common k of ||u_k^ssn - u_k^as||
    long max_set_difference = 0;          // max over common k of set_change_count
    bool same_length = false;
};

/// Runs both methods (concurrently) from the same start and compares them
/// iteration by iteration.
MethodComparison compare_methods(const NepProblem& problem, const InitialGuess& initial, const SolverConfig& config);

const char* to_string(Method m);
const char* to_string(Termination t);

}  // namespace nep
