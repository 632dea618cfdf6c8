/* C interface to the Nash equilibrium solver library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every function returning nep_status stores a message retrievable with
 * nep_last_error() on failure (per thread). */
#ifndef NEP_NEP_H
#define NEP_NEP_H

#include <stddef.h>

#if defined(_WIN32)
#define NEP_API __declspec(dllexport)
#else
#define NEP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    NEP_OK = 0,
    NEP_ERR_ARGUMENT = 1,
    NEP_ERR_FACTORIZATION = 2,
    NEP_ERR_STATE = 3,
    NEP_ERR_IO = 4,
    NEP_ERR_SOLVER = 5,
    NEP_ERR_INTERNAL = 6
} nep_status;

typedef enum { NEP_METHOD_SSN = 0, NEP_METHOD_AS = 1 } nep_method;

typedef enum {
    NEP_TERM_SETS_STATIONARY = 0,
    NEP_TERM_RESIDUAL = 1,
    NEP_TERM_ITERATION_CAP = 2
} nep_termination;

typedef struct nep_problem nep_problem;
typedef struct nep_result nep_result;

/* Zero (or a non-positive value) keeps the built-in default. */
typedef struct {
    int nx;
    int ny;
    double alpha;
    double rho;
    double control_bound; /* example 1 only */
} nep_problem_options;

typedef struct {
    long num_nodes;
    int num_players;
    double h;
    double alpha;
    double rho;
    int has_exact_solution;
} nep_problem_info;

typedef struct {
    nep_method method;
    int max_outer;
    double gmres_tol;
    int gmres_restart;
    int gmres_maxiter;
    double residual_tol;
} nep_solver_options;

typedef struct {
    int iterations;
    nep_termination termination;
    int converged;
    double final_opt;
    double wall_seconds;
    double error_to_exact; /* block L2 error to the exact control, NaN without one */
} nep_result_summary;

typedef struct {
    int k;
    int has_kappa;
    double kappa;
    int has_kappa_ex;
    double kappa_ex;
    int has_R;
    double R;
    long nodes;
    double opt;
    int has_gmres;
    int gmres;
} nep_table_row;

typedef struct {
    double max_control_difference;
    long max_set_difference;
    int same_length;
    int ssn_iterations;
    int as_iterations;
    int both_converged;
} nep_comparison;

NEP_API const char* nep_last_error(void);
NEP_API const char* nep_status_string(nep_status status);

NEP_API void nep_problem_options_init(nep_problem_options* options);
NEP_API nep_status nep_problem_example1(const nep_problem_options* options, nep_problem** out);
NEP_API nep_status nep_problem_example2(const nep_problem_options* options, nep_problem** out);
NEP_API nep_status nep_problem_from_config(const char* path, const nep_problem_options* options, nep_problem** out);
NEP_API void nep_problem_destroy(nep_problem* problem);
NEP_API nep_status nep_problem_get_info(const nep_problem* problem, nep_problem_info* info);

/* Fills `norms` with up to `capacity` per-player operator norms. */
NEP_API nep_status nep_offset_estimate(const nep_problem* problem, double* total, double* norms, int capacity,
                                       int* alpha_ok);

/* Defaults depend on the problem (GMRES tolerance 1e-12 for example 1, 1e-8 for example 2). */
NEP_API nep_status nep_solver_options_default(const nep_problem* problem, nep_solver_options* options);

NEP_API nep_status nep_solve(const nep_problem* problem, const nep_solver_options* options, nep_result** out);
NEP_API void nep_result_destroy(nep_result* result);
NEP_API nep_status nep_result_get_summary(const nep_result* result, nep_result_summary* summary);
NEP_API int nep_result_num_rows(const nep_result* result);
NEP_API nep_status nep_result_get_row(const nep_result* result, int index, nep_table_row* row);
NEP_API nep_status nep_result_write_table(const nep_result* result, const char* path);
NEP_API nep_status nep_result_write_fields(const nep_result* result, const char* path);

/* Runs both methods; `ssn` and `as` may be NULL. */
NEP_API nep_status nep_compare(const nep_problem* problem, const nep_solver_options* options, nep_comparison* out,
                               nep_result** ssn, nep_result** as);

#ifdef __cplusplus
}
#endif

#endif /* NEP_NEP_H */
