#pragma once

// Convergence estimators, CSV tables and VTK field output.

#include "nep/solvers.hpp"

#include <optional>
#include <string>

namespace nep {

using Estimates = std::vector<std::optional<double>>;

/// Numerical order from successive differences d_j = ||u_j - u_{j-1}||:
/// entry k (1-based) is log(d_k / d_{k-1}) / log(d_{k-1} / d_{k-2}), defined
/// for k >= 4. Entries whose differences are at rounding level are absent.
Estimates kappa_numeric(const SparseMatrix& M, const std::vector<Controls>& history);

struct ExactRates {
    Estimates rate;   // R: e_k / e_{k-1}, k >= 2
    Estimates order;  // kappa_ex: log(e_k / e_{k-1}) / log(e_{k-1} / e_{k-2}), k >= 3
};

/// Rates against a known solution, e_k = ||u_k - u_bar||.
ExactRates kappa_exact_and_rate(const SparseMatrix& M, const std::vector<Controls>& history, const Controls& exact);

struct TableRow {
    int k = 0;
    std::optional<double> kappa;
    std::optional<double> kappa_ex;
    std::optional<double> R;
    long nodes = 0;
    double opt = 0.0;
    std::optional<int> gmres;

    bool operator==(const TableRow&) const = default;
};

struct ConvergenceTable {
    std::vector<TableRow> rows;
    bool operator==(const ConvergenceTable&) const = default;
};

ConvergenceTable build_table(const NepProblem& problem, const SolveReport& report, const Controls* exact = nullptr);

/// Header k,kappa,kappa_ex,R,nodes,opt,gmres; absent values are empty.
std::string format_csv(const ConvergenceTable& table);
void emit_csv(const ConvergenceTable& table, const std::string& path);
ConvergenceTable parse_csv(const std::string& text);
ConvergenceTable read_csv(const std::string& path);

/// Legacy ASCII VTK unstructured grid with point arrays state, control_sum,
/// control_<nu>, adjoint_<nu> and psi.
void emit_fields(const NepProblem& problem, const IterateState& iterate, const std::string& path);

}  // namespace nep
