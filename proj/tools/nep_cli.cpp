// Command-line front end; talks to the solver only through the C API.

#include "nep/nep.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct RunOptions {
    int nx = 0;
    int ny = 0;
    double alpha = 0.0;
    double rho = 0.0;
    double control_bound = 0.0;
    std::optional<std::string> method;
    std::optional<double> gmres_tol;
    std::optional<int> max_outer;
    std::string out_table;
    std::string out_fields;
    bool compare = false;
    std::string config;
};

using ProblemPtr = std::unique_ptr<nep_problem, decltype(&nep_problem_destroy)>;
using ResultPtr = std::unique_ptr<nep_result, decltype(&nep_result_destroy)>;

int report_error(nep_status status) {
    std::fprintf(stderr, "error: %s: %s\n", nep_status_string(status), nep_last_error());
    return 1;
}

std::string cell(int has, double v, const char* fmt) {
    if (!has) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void print_table(const nep_result* result) {
    std::printf("%4s %10s %10s %10s %8s %12s %6s\n", "k", "kappa", "kappa_ex", "R", "nodes", "opt", "gmres");
    const int n = nep_result_num_rows(result);
    for (int i = 0; i < n; ++i) {
        nep_table_row r;
        if (nep_result_get_row(result, i, &r) != NEP_OK) continue;
        std::printf("%4d %10s %10s %10s %8ld %12.4e %6s\n", r.k, cell(r.has_kappa, r.kappa, "%.4f").c_str(),
                    cell(r.has_kappa_ex, r.kappa_ex, "%.4f").c_str(), cell(r.has_R, r.R, "%.4f").c_str(), r.nodes,
                    r.opt, r.has_gmres ? std::to_string(r.gmres).c_str() : "-");
    }
}

const char* termination_text(nep_termination t) {
    switch (t) {
        case NEP_TERM_SETS_STATIONARY: return "active sets stationary";
        case NEP_TERM_RESIDUAL: return "optimality residual below tolerance";
        case NEP_TERM_ITERATION_CAP: return "iteration cap reached (not converged)";
    }
    return "unknown";
}

int summarize(const nep_result* result, const char* label) {
    nep_result_summary s;
    if (nep_status st = nep_result_get_summary(result, &s); st != NEP_OK) return report_error(st);
    std::printf("%s: %s after %d iterations, opt %.3e, %.2f s\n", label, termination_text(s.termination), s.iterations,
                s.final_opt, s.wall_seconds);
    if (!std::isnan(s.error_to_exact)) std::printf("%s: ||u - u_bar|| = %.6e\n", label, s.error_to_exact);
    return s.converged ? 0 : 2;
}

int write_outputs(const nep_result* result, const RunOptions& opts) {
    if (!opts.out_table.empty()) {
        if (nep_status st = nep_result_write_table(result, opts.out_table.c_str()); st != NEP_OK) return report_error(st);
    }
    if (!opts.out_fields.empty()) {
        if (nep_status st = nep_result_write_fields(result, opts.out_fields.c_str()); st != NEP_OK) {
            return report_error(st);
        }
    }
    return 0;
}

std::string with_suffix(const std::string& path, const char* suffix) {
    if (path.empty()) return path;
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + suffix;
    return path.substr(0, dot) + "_" + suffix + path.substr(dot);
}

int run(nep_problem* problem, const RunOptions& opts) {
    nep_problem_info info;
    if (nep_status st = nep_problem_get_info(problem, &info); st != NEP_OK) return report_error(st);
    std::printf("nodes %ld, players %d, h %.4f, alpha %g, rho %g\n", info.num_nodes, info.num_players, info.h,
                info.alpha, info.rho);

    nep_solver_options so;
    if (nep_status st = nep_solver_options_default(problem, &so); st != NEP_OK) return report_error(st);
    if (opts.method) so.method = *opts.method == "as" ? NEP_METHOD_AS : NEP_METHOD_SSN;
    if (opts.gmres_tol) so.gmres_tol = *opts.gmres_tol;
    if (opts.max_outer) so.max_outer = *opts.max_outer;

    if (opts.compare) {
        nep_comparison cmp;
        nep_result* ssn_raw = nullptr;
        nep_result* as_raw = nullptr;
        if (nep_status st = nep_compare(problem, &so, &cmp, &ssn_raw, &as_raw); st != NEP_OK) return report_error(st);
        ResultPtr ssn(ssn_raw, nep_result_destroy);
        ResultPtr as(as_raw, nep_result_destroy);
        std::printf("semi-smooth Newton\n");
        print_table(ssn.get());
        const int c1 = summarize(ssn.get(), "ssn");
        std::printf("active set\n");
        print_table(as.get());
        const int c2 = summarize(as.get(), "as");
        std::printf("max iterate discrepancy %.3e\n", cmp.max_control_difference);
        std::printf("max active-set difference %ld nodes%s\n", cmp.max_set_difference,
                    cmp.same_length ? "" : " (iteration counts differ)");
        RunOptions per = opts;
        per.out_table = with_suffix(opts.out_table, "ssn");
        per.out_fields = with_suffix(opts.out_fields, "ssn");
        if (int rc = write_outputs(ssn.get(), per); rc != 0) return rc;
        per.out_table = with_suffix(opts.out_table, "as");
        per.out_fields = with_suffix(opts.out_fields, "as");
        if (int rc = write_outputs(as.get(), per); rc != 0) return rc;
        return (c1 == 0 && c2 == 0) ? 0 : (c1 == 1 || c2 == 1 ? 1 : 2);
    }

    nep_result* raw = nullptr;
    if (nep_status st = nep_solve(problem, &so, &raw); st != NEP_OK) return report_error(st);
    ResultPtr result(raw, nep_result_destroy);
    print_table(result.get());
    const int code = summarize(result.get(), so.method == NEP_METHOD_AS ? "as" : "ssn");
    if (int rc = write_outputs(result.get(), opts); rc != 0) return rc;
    return code;
}

void add_mesh_flags(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--nx", o.nx, "cells in x")->check(CLI::PositiveNumber);
    cmd->add_option("--ny", o.ny, "cells in y")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "control cost")->check(CLI::PositiveNumber);
    cmd->add_option("--rho", o.rho, "penalty parameter")->check(CLI::PositiveNumber);
}

void add_solve_flags(CLI::App* cmd, RunOptions& o) {
    add_mesh_flags(cmd, o);
    cmd->add_option("--method", o.method, "ssn or as")->check(CLI::IsMember({"ssn", "as"}));
    cmd->add_option("--gmres-tol", o.gmres_tol, "relative GMRES tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-outer", o.max_outer, "outer iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--out-table", o.out_table, "CSV convergence table");
    cmd->add_option("--out-fields", o.out_fields, "VTK field file");
    cmd->add_flag("--compare", o.compare, "run both methods and compare iterates");
}

nep_problem_options problem_options(const RunOptions& o) {
    nep_problem_options po;
    nep_problem_options_init(&po);
    po.nx = o.nx;
    po.ny = o.ny;
    po.alpha = o.alpha;
    po.rho = o.rho;
    po.control_bound = o.control_bound;
    return po;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-smooth Newton and active-set solver for PDE-constrained Nash equilibrium problems"};
    app.require_subcommand(1);

    RunOptions opts;
    auto* ex1 = app.add_subcommand("example1", "four-player game on the unit square");
    add_solve_flags(ex1, opts);
    ex1->add_option("--control-bound", opts.control_bound, "symmetric control bound")->check(CLI::PositiveNumber);
    auto* ex2 = app.add_subcommand("example2", "four-player game with known exact solution");
    add_solve_flags(ex2, opts);
    auto* solve = app.add_subcommand("solve", "solve a problem described by an INI config");
    solve->add_option("config", opts.config, "config file")->required()->check(CLI::ExistingFile);
    add_solve_flags(solve, opts);
    auto* offset = app.add_subcommand("check-offset", "evaluate the monotonicity offset of a config");
    offset->add_option("config", opts.config, "config file")->required()->check(CLI::ExistingFile);
    add_mesh_flags(offset, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const nep_problem_options po = problem_options(opts);
    nep_problem* raw = nullptr;
    nep_status st = NEP_OK;
    if (ex1->parsed()) {
        st = nep_problem_example1(&po, &raw);
    } else if (ex2->parsed()) {
        st = nep_problem_example2(&po, &raw);
    } else {
        st = nep_problem_from_config(opts.config.c_str(), &po, &raw);
    }
    if (st != NEP_OK) return report_error(st);
    ProblemPtr problem(raw, nep_problem_destroy);

    if (offset->parsed()) {
        nep_problem_info info;
        if (st = nep_problem_get_info(problem.get(), &info); st != NEP_OK) return report_error(st);
        std::vector<double> norms(static_cast<std::size_t>(info.num_players));
        double total = 0.0;
        int ok = 0;
        st = nep_offset_estimate(problem.get(), &total, norms.data(), info.num_players, &ok);
        if (st != NEP_OK) return report_error(st);
        for (int nu = 0; nu < info.num_players; ++nu) {
            std::printf("player %d: ||chi_Z (S - chi_nu S)|| = %.6e\n", nu + 1, norms[static_cast<std::size_t>(nu)]);
        }
        std::printf("offset %.6e, alpha %g\n", total, info.alpha);
        std::printf("%s\n", ok ? "Assumption 1 satisfied" : "Assumption 1 violated");
        return 0;
    }
    return run(problem.get(), opts);
}
