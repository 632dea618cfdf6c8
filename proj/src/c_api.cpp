#include "nep/nep.h"

#include "nep/config.hpp"
#include "nep/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <string>

struct nep_problem {
    nep::NepProblem problem;
    nep::InitialGuess initial;
    std::optional<nep::ExactSolution> exact;
    nep::SolverConfig defaults;
};

struct nep_result {
    nep::NepProblem problem;
    std::optional<nep::ExactSolution> exact;
    nep::SolveReport report;
    nep::ConvergenceTable table;
};

namespace {

thread_local std::string last_error;

nep_status fail(nep_status status, const char* what) {
    last_error = what;
    return status;
}

template <class F>
nep_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return NEP_OK;
    } catch (const nep::ArgumentError& e) {
        return fail(NEP_ERR_ARGUMENT, e.what());
    } catch (const nep::FactorizationError& e) {
        return fail(NEP_ERR_FACTORIZATION, e.what());
    } catch (const nep::StateError& e) {
        return fail(NEP_ERR_STATE, e.what());
    } catch (const nep::IoError& e) {
        return fail(NEP_ERR_IO, e.what());
    } catch (const nep::linalg::GmresError& e) {
        return fail(NEP_ERR_SOLVER, e.what());
    } catch (const nep::linalg::PowerIterationError& e) {
        return fail(NEP_ERR_SOLVER, e.what());
    } catch (const std::bad_alloc&) {
        return fail(NEP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(NEP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NEP_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* ptr, const char* name) {
    if (!ptr) throw nep::ArgumentError(std::string(name) + " must not be NULL");
}

nep_problem_options resolve(const nep_problem_options* opts) {
    nep_problem_options o;
    nep_problem_options_init(&o);
    if (opts) o = *opts;
    return o;
}

nep::SolverConfig to_config(const nep_solver_options& o) {
    if (o.method != NEP_METHOD_SSN && o.method != NEP_METHOD_AS) throw nep::ArgumentError("unknown solver method");
    nep::SolverConfig c;
    c.method = o.method == NEP_METHOD_SSN ? nep::Method::Ssn : nep::Method::ActiveSet;
    c.max_outer = o.max_outer;
    c.gmres.tol = o.gmres_tol;
    c.gmres.restart = o.gmres_restart;
    c.gmres.maxiter = o.gmres_maxiter;
    c.residual_tol = o.residual_tol;
    if (c.max_outer < 1) throw nep::ArgumentError("max_outer must be >= 1");
    if (!(c.gmres.tol > 0.0)) throw nep::ArgumentError("gmres_tol must be positive");
    return c;
}

nep_result* make_result(const nep_problem& p, nep::SolveReport report) {
    auto r = std::make_unique<nep_result>(nep_result{p.problem, p.exact, std::move(report), {}});
    r->table = nep::build_table(r->problem, r->report, r->exact ? &r->exact->u_bar : nullptr);
    return r.release();
}

nep_termination to_c(nep::Termination t) {
    switch (t) {
        case nep::Termination::SetsStationary: return NEP_TERM_SETS_STATIONARY;
        case nep::Termination::ResidualFallback: return NEP_TERM_RESIDUAL;
        case nep::Termination::IterationCap: return NEP_TERM_ITERATION_CAP;
    }
    return NEP_TERM_ITERATION_CAP;
}

}  // namespace

extern "C" {

const char* nep_last_error(void) { return last_error.c_str(); }

const char* nep_status_string(nep_status status) {
    switch (status) {
        case NEP_OK: return "ok";
        case NEP_ERR_ARGUMENT: return "invalid argument";
        case NEP_ERR_FACTORIZATION: return "factorization failed";
        case NEP_ERR_STATE: return "invalid state";
        case NEP_ERR_IO: return "i/o error";
        case NEP_ERR_SOLVER: return "iterative solver failed";
        case NEP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void nep_problem_options_init(nep_problem_options* options) {
    if (options) *options = nep_problem_options{0, 0, 0.0, 0.0, 0.0};
}

nep_status nep_problem_example1(const nep_problem_options* options, nep_problem** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        const auto o = resolve(options);
        auto ex = nep::make_example1(o.nx > 0 ? o.nx : 64, o.ny > 0 ? o.ny : 64, o.alpha > 0 ? o.alpha : 1e-5,
                                     o.rho > 0 ? o.rho : 10.0, o.control_bound > 0 ? o.control_bound : 1e4);
        nep::SolverConfig defaults;
        defaults.gmres.tol = 1e-12;
        *out = new nep_problem{std::move(ex.problem), std::move(ex.initial), std::nullopt, defaults};
    });
}

nep_status nep_problem_example2(const nep_problem_options* options, nep_problem** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        const auto o = resolve(options);
        auto ex = nep::make_example2(o.nx > 0 ? o.nx : 128, o.ny > 0 ? o.ny : 128, o.alpha > 0 ? o.alpha : 0.1,
                                     o.rho > 0 ? o.rho : 10.0);
        nep::SolverConfig defaults;
        defaults.gmres.tol = 1e-8;
        *out = new nep_problem{std::move(ex.problem), std::move(ex.initial), std::move(ex.exact), defaults};
    });
}

nep_status nep_problem_from_config(const char* path, const nep_problem_options* options, nep_problem** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        nep::ProblemConfig cfg = nep::load_config(path);
        const auto o = resolve(options);
        if (o.nx > 0) cfg.nx = o.nx;
        if (o.ny > 0) cfg.ny = o.ny;
        if (o.alpha > 0) cfg.alpha = o.alpha;
        if (o.rho > 0) cfg.rho = o.rho;
        auto built = nep::build_problem(cfg);
        *out = new nep_problem{std::move(built.problem), std::move(built.initial), std::nullopt, cfg.solver};
    });
}

void nep_problem_destroy(nep_problem* problem) { delete problem; }

nep_status nep_problem_get_info(const nep_problem* problem, nep_problem_info* info) {
    return guarded([&] {
        require(problem, "problem");
        require(info, "info");
        const auto& p = problem->problem;
        *info = nep_problem_info{static_cast<long>(p.num_nodes()), p.num_players(), p.mesh().h(), p.alpha(), p.rho(),
                                 problem->exact ? 1 : 0};
    });
}

nep_status nep_offset_estimate(const nep_problem* problem, double* total, double* norms, int capacity, int* alpha_ok) {
    return guarded([&] {
        require(problem, "problem");
        if (capacity > 0) require(norms, "norms");
        const auto est = nep::offset_estimate(problem->problem);
        if (total) *total = est.total;
        if (alpha_ok) *alpha_ok = est.alpha_ok ? 1 : 0;
        for (int i = 0; i < capacity && i < static_cast<int>(est.norms.size()); ++i) {
            norms[i] = est.norms[static_cast<std::size_t>(i)];
        }
    });
}

nep_status nep_solver_options_default(const nep_problem* problem, nep_solver_options* options) {
    return guarded([&] {
        require(problem, "problem");
        require(options, "options");
        const auto& d = problem->defaults;
        *options = nep_solver_options{d.method == nep::Method::Ssn ? NEP_METHOD_SSN : NEP_METHOD_AS,
                                      d.max_outer,
                                      d.gmres.tol,
                                      d.gmres.restart,
                                      d.gmres.maxiter,
                                      d.residual_tol};
    });
}

nep_status nep_solve(const nep_problem* problem, const nep_solver_options* options, nep_result** out) {
    return guarded([&] {
        require(problem, "problem");
        require(options, "options");
        require(out, "out");
        *out = nullptr;
        auto report = nep::run_solver(problem->problem, problem->initial, to_config(*options));
        *out = make_result(*problem, std::move(report));
    });
}

void nep_result_destroy(nep_result* result) { delete result; }

nep_status nep_result_get_summary(const nep_result* result, nep_result_summary* summary) {
    return guarded([&] {
        require(result, "result");
        require(summary, "summary");
        const auto& rep = result->report;
        double err = std::numeric_limits<double>::quiet_NaN();
        if (result->exact) {
            err = nep::control_norm(result->problem, nep::control_difference(rep.final.u, result->exact->u_bar));
        }
        *summary = nep_result_summary{static_cast<int>(rep.rows.size()),
                                      to_c(rep.termination),
                                      rep.converged() ? 1 : 0,
                                      rep.rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rep.rows.back().opt,
                                      rep.wall_seconds,
                                      err};
    });
}

int nep_result_num_rows(const nep_result* result) {
    return result ? static_cast<int>(result->table.rows.size()) : 0;
}

nep_status nep_result_get_row(const nep_result* result, int index, nep_table_row* row) {
    return guarded([&] {
        require(result, "result");
        require(row, "row");
        if (index < 0 || index >= static_cast<int>(result->table.rows.size())) {
            throw nep::ArgumentError("row index out of range");
        }
        const auto& r = result->table.rows[static_cast<std::size_t>(index)];
        *row = nep_table_row{r.k,
                             r.kappa ? 1 : 0,
                             r.kappa.value_or(0.0),
                             r.kappa_ex ? 1 : 0,
                             r.kappa_ex.value_or(0.0),
                             r.R ? 1 : 0,
                             r.R.value_or(0.0),
                             r.nodes,
                             r.opt,
                             r.gmres ? 1 : 0,
                             r.gmres.value_or(0)};
    });
}

nep_status nep_result_write_table(const nep_result* result, const char* path) {
    return guarded([&] {
        require(result, "result");
        require(path, "path");
        nep::emit_csv(result->table, path);
    });
}

nep_status nep_result_write_fields(const nep_result* result, const char* path) {
    return guarded([&] {
        require(result, "result");
        require(path, "path");
        nep::emit_fields(result->problem, result->report.final, path);
    });
}

nep_status nep_compare(const nep_problem* problem, const nep_solver_options* options, nep_comparison* out,
                       nep_result** ssn, nep_result** as) {
    return guarded([&] {
        require(problem, "problem");
        require(options, "options");
        require(out, "out");
        if (ssn) *ssn = nullptr;
        if (as) *as = nullptr;
        auto cmp = nep::compare_methods(problem->problem, problem->initial, to_config(*options));
        *out = nep_comparison{cmp.max_control_difference,
                              cmp.max_set_difference,
                              cmp.same_length ? 1 : 0,
                              static_cast<int>(cmp.ssn.rows.size()),
                              static_cast<int>(cmp.active_set.rows.size()),
                              cmp.ssn.converged() && cmp.active_set.converged() ? 1 : 0};
        std::unique_ptr<nep_result> r1(make_result(*problem, std::move(cmp.ssn)));
        std::unique_ptr<nep_result> r2(make_result(*problem, std::move(cmp.active_set)));
        if (ssn) *ssn = r1.release();
        if (as) *as = r2.release();
    });
}

}  // extern "C"
