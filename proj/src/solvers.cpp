#include "nep/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace nep {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_sets(const NepProblem& problem, const ActiveSets& sets) {
    if (static_cast<int>(sets.players.size()) != problem.num_players()) {
        throw StateError("active sets do not match the number of players");
    }
    if (sets.state.size() != problem.num_nodes()) throw StateError("state mask has wrong size");
    if (!sets.is_partition()) throw StateError("active sets do not partition the nodes");
}

// D_A u_a + D_B u_b for player nu.
Vector bound_part(const NepProblem& problem, const ActiveSets& sets, int nu) {
    const auto& pl = problem.player(nu);
    const auto& s = sets.players[static_cast<std::size_t>(nu)];
    return s.lower.cwiseProduct(pl.u_a) + s.upper.cwiseProduct(pl.u_b);
}

std::string describe_sets(const ActiveSets& sets) {
    std::ostringstream msg;
    msg << "|Y| = " << sets.state.sum();
    for (std::size_t nu = 0; nu < sets.players.size(); ++nu) {
        const auto& s = sets.players[nu];
        msg << "; player " << nu + 1 << ": |A_a| = " << s.lower.sum() << ", |A_b| = " << s.upper.sum()
            << ", |I| = " << s.inactive.sum();
    }
    return msg.str();
}

}  // namespace

double control_norm(const NepProblem& problem, const Controls& u) {
    double sum = 0.0;
    for (const auto& c : u) sum += c.dot(problem.mass() * c);
    return std::sqrt(std::max(0.0, sum));
}

Controls control_difference(const Controls& a, const Controls& b) {
    if (a.size() != b.size()) throw ArgumentError("control_difference: player counts differ");
    Controls d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

Controls exact_adjoints(const NepProblem& problem, const Vector& y) {
    Controls p;
    for (int nu = 0; nu < problem.num_players(); ++nu) p.push_back(solve_adjoint(problem, nu, y, ExactMultiplier{}));
    return p;
}

Controls reduced_gradient(const NepProblem& problem, const Controls& u) {
    const Controls p = exact_adjoints(problem, solve_state(problem, u));
    Controls g(u.size());
    for (std::size_t nu = 0; nu < u.size(); ++nu) g[nu] = problem.alpha() * u[nu] + p[nu];
    return g;
}

namespace {

double residual_from_adjoints(const NepProblem& problem, const Controls& u, const Controls& p) {
    Controls r(u.size());
    for (int nu = 0; nu < problem.num_players(); ++nu) {
        const auto& pl = problem.player(nu);
        const auto i = static_cast<std::size_t>(nu);
        r[i] = u[i] - project_box(-p[i] / problem.alpha(), pl.u_a, pl.u_b);
    }
    return control_norm(problem, r);
}

}  // namespace

double optimality_residual(const NepProblem& problem, const Controls& u) {
    return residual_from_adjoints(problem, u, exact_adjoints(problem, solve_state(problem, u)));
}

NewtonSystem newton_system(const NepProblem& problem, const ActiveSets& sets) {
    check_sets(problem, sets);
    const int n = problem.num_players();
    const Eigen::Index m = problem.num_nodes();
    const SparseMatrix& M = problem.mass();
    const double alpha = problem.alpha();
    const double rho = problem.rho();
    const Mask& Y = sets.state;

    Vector bound_sum = Vector::Zero(m);
    for (int nu = 0; nu < n; ++nu) bound_sum += bound_part(problem, sets, nu);
    const Vector y_base = problem.solve_dirichlet(M * bound_sum) + problem.source_state();

    NewtonSystem sys;
    sys.rhs.resize(n * m);
    for (int nu = 0; nu < n; ++nu) {
        const auto& pl = problem.player(nu);
        const SparseMatrix& M_nu = problem.observation_mass(nu);
        const Vector load = M_nu * (y_base - pl.y_d) +
                            M * Y.cwiseProduct(problem.mu() + rho * (y_base - problem.psi()));
        const Vector p_base = problem.solve_dirichlet(load);
        sys.rhs.segment(nu * m, m) = -(M * sets.players[static_cast<std::size_t>(nu)].inactive.cwiseProduct(p_base)) / alpha;
    }

    // Copies keep the operator valid independently of `sets`.
    std::vector<Mask> inactive;
    for (const auto& s : sets.players) inactive.push_back(s.inactive);
    sys.op.dim = n * m;
    sys.op.apply = [problem, inactive, Y, n, m, alpha, rho](const Vector& w) -> Vector {
        const SparseMatrix& M = problem.mass();
        Vector sum = Vector::Zero(m);
        for (int j = 0; j < n; ++j) sum += inactive[static_cast<std::size_t>(j)].cwiseProduct(w.segment(j * m, m));
        const Vector ys = problem.solve_dirichlet(M * sum);
        const Vector penalty = rho * (M * Y.cwiseProduct(ys));
        Vector out(n * m);
        for (int nu = 0; nu < n; ++nu) {
            const Vector q = problem.solve_dirichlet(problem.observation_mass(nu) * ys + penalty);
            out.segment(nu * m, m) =
                M * (w.segment(nu * m, m) + inactive[static_cast<std::size_t>(nu)].cwiseProduct(q) / alpha);
        }
        return out;
    };
    return sys;
}

IterateState ssn_step(const NepProblem& problem, const IterateState& iterate, const linalg::GmresOptions& gmres,
                      int* gmres_iterations) {
    const ActiveSets& sets = iterate.sets;
    const NewtonSystem sys = newton_system(problem, sets);
    linalg::GmresResult res;
    try {
        res = linalg::gmres(sys.op, sys.rhs, gmres);
    } catch (const linalg::GmresError& e) {
        throw linalg::GmresError(std::string("ssn_step: ") + e.what(), e.best());
    }
    if (gmres_iterations) *gmres_iterations = res.iterations;

    const int n = problem.num_players();
    const Eigen::Index m = problem.num_nodes();
    IterateState next;
    next.k = iterate.k + 1;
    next.sets = sets;
    for (int nu = 0; nu < n; ++nu) {
        const Vector u_tilde = res.x.segment(nu * m, m);
        next.u.push_back(sets.players[static_cast<std::size_t>(nu)].inactive.cwiseProduct(u_tilde) +
                         bound_part(problem, sets, nu));
    }
    next.y = solve_state(problem, next.u);
    for (int nu = 0; nu < n; ++nu) next.p.push_back(solve_adjoint(problem, nu, next.y, FrozenMultiplier{sets.state}));
    return next;
}

SparseMatrix active_set_matrix(const NepProblem& problem, const ActiveSets& sets) {
    check_sets(problem, sets);
    const int n = problem.num_players();
    const auto m = static_cast<int>(problem.num_nodes());
    const auto& mesh = problem.mesh();
    const SparseMatrix& K = problem.stiffness();
    const SparseMatrix& M = problem.mass();
    const Mask& Y = sets.state;
    const double rho = problem.rho();
    const double inv_alpha = 1.0 / problem.alpha();

    // Unknown blocks: y | u^1..u^N | p^1..p^N.
    // Row blocks: state | adjoint^1..adjoint^N | control^1..control^N.
    auto u_col = [m](int nu) { return (1 + nu) * m; };
    auto p_col = [m, n](int nu) { return (1 + n + nu) * m; };
    auto adj_row = [m](int nu) { return (1 + nu) * m; };
    auto ctl_row = [m, n](int nu) { return (1 + n + nu) * m; };

    Triplets trip;
    trip.reserve(static_cast<std::size_t>((1 + 3 * n) * K.nonZeros() + n * 2 * M.nonZeros()));

    for (int col = 0; col < K.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (mesh.is_boundary(row)) continue;
            trip.emplace_back(row, col, it.value());
            for (int nu = 0; nu < n; ++nu) trip.emplace_back(adj_row(nu) + row, p_col(nu) + col, it.value());
        }
    }
    for (int b : mesh.boundary_nodes()) {
        trip.emplace_back(b, b, 1.0);
        for (int nu = 0; nu < n; ++nu) trip.emplace_back(adj_row(nu) + b, p_col(nu) + b, 1.0);
    }

    for (int col = 0; col < M.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(M, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            const double v = it.value();
            for (int nu = 0; nu < n; ++nu) {
                const auto& s = sets.players[static_cast<std::size_t>(nu)];
                if (!mesh.is_boundary(row)) {
                    trip.emplace_back(row, u_col(nu) + col, -v);
                    if (Y[col] != 0.0) trip.emplace_back(adj_row(nu) + row, col, -rho * v);
                }
                trip.emplace_back(ctl_row(nu) + row, u_col(nu) + col, v);
                if (s.inactive[col] != 0.0) trip.emplace_back(ctl_row(nu) + row, p_col(nu) + col, inv_alpha * v);
            }
        }
    }
    for (int nu = 0; nu < n; ++nu) {
        const SparseMatrix& M_nu = problem.observation_mass(nu);
        for (int col = 0; col < M_nu.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(M_nu, col); it; ++it) {
                const int row = static_cast<int>(it.row());
                if (!mesh.is_boundary(row)) trip.emplace_back(adj_row(nu) + row, col, -it.value());
            }
        }
    }

    const int dim = (1 + 2 * n) * m;
    SparseMatrix A(dim, dim);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

Vector active_set_rhs(const NepProblem& problem, const ActiveSets& sets) {
    check_sets(problem, sets);
    const int n = problem.num_players();
    const Eigen::Index m = problem.num_nodes();
    const SparseMatrix& M = problem.mass();
    const Vector multiplier_part = M * sets.state.cwiseProduct(problem.mu() - problem.rho() * problem.psi());

    Vector rhs = Vector::Zero((1 + 2 * n) * m);
    if (problem.source()) rhs.head(m) = M * *problem.source();
    for (int nu = 0; nu < n; ++nu) {
        rhs.segment((1 + nu) * m, m) = -(problem.observation_mass(nu) * problem.player(nu).y_d) + multiplier_part;
        rhs.segment((1 + n + nu) * m, m) = M * bound_part(problem, sets, nu);
    }
    for (int b : problem.mesh().boundary_nodes()) {
        rhs[b] = 0.0;
        for (int nu = 0; nu < n; ++nu) rhs[(1 + nu) * m + b] = 0.0;
    }
    return rhs;
}

IterateState active_set_step(const NepProblem& problem, const IterateState& iterate) {
    const ActiveSets& sets = iterate.sets;
    const SparseMatrix A = active_set_matrix(problem, sets);
    const Vector rhs = active_set_rhs(problem, sets);
    const int n = problem.num_players();
    const Eigen::Index m = problem.num_nodes();
    const double inv_alpha = 1.0 / problem.alpha();

    // The control rows read M (u + D_I p / alpha - g) = 0 with M nonsingular,
    // so u = g - D_I p / alpha node by node. Substituting this into the state
    // and adjoint rows leaves an (N+1)m system in (y, p) that is much cheaper
    // to factor than the full block matrix.
    std::vector<Vector> g;
    for (int nu = 0; nu < n; ++nu) g.push_back(bound_part(problem, sets, nu));
    const Eigen::Index reduced = (1 + n) * m;
    Vector rhs_r = rhs.head(reduced);
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros()));
    for (int col = 0; col < A.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
            const Eigen::Index row = it.row();
            if (row >= reduced) continue;
            if (col < m) {
                trip.emplace_back(row, col, it.value());
            } else if (col < reduced) {
                const auto nu = static_cast<std::size_t>((col - m) / m);
                const Eigen::Index j = (col - m) % m;
                rhs_r[row] -= it.value() * g[nu][j];
                const double inactive = sets.players[nu].inactive[j];
                if (inactive != 0.0) trip.emplace_back(row, col, -it.value() * inv_alpha * inactive);
            } else {
                trip.emplace_back(row, col - n * m, it.value());
            }
        }
    }
    SparseMatrix R(reduced, reduced);
    R.setFromTriplets(trip.begin(), trip.end());

    Vector x;
    try {
        const linalg::Factorization lu = linalg::lu_factorize(R);
        x = lu.solve(rhs_r);
        for (int sweep = 0; sweep < 3; ++sweep) x += lu.solve(rhs_r - R * x);
    } catch (const FactorizationError& e) {
        throw FactorizationError(std::string("active_set_step: ") + e.what() + " (" + describe_sets(sets) + ")");
    }
    if (!x.allFinite()) throw FactorizationError("active_set_step: non-finite solution (" + describe_sets(sets) + ")");

    IterateState next;
    next.k = iterate.k + 1;
    next.sets = sets;
    next.y = x.head(m);
    for (int nu = 0; nu < n; ++nu) {
        Vector p = x.segment((1 + nu) * m, m);
        next.u.push_back(g[static_cast<std::size_t>(nu)] -
                         inv_alpha * sets.players[static_cast<std::size_t>(nu)].inactive.cwiseProduct(p));
        next.p.push_back(std::move(p));
    }
    return next;
}

SolveReport run_solver(const NepProblem& problem, const InitialGuess& initial, const SolverConfig& config) {
    if (config.max_outer < 1) throw ArgumentError("run_solver: max_outer must be >= 1");
    if (static_cast<int>(initial.u.size()) != problem.num_players() ||
        static_cast<int>(initial.p.size()) != problem.num_players()) {
        throw ArgumentError("run_solver: initial guess has the wrong number of players");
    }
    const auto start = std::chrono::steady_clock::now();

    SolveReport report;
    report.method = config.method;
    IterateState current{initial.u, initial.y, initial.p, classify_sets(problem, initial.y, initial.p), 0};
    report.sets_history.push_back(current.sets);

    for (int k = 1; k <= config.max_outer; ++k) {
        ReportRow row;
        row.k = k;
        IterateState next;
        if (config.method == Method::Ssn) {
            int iterations = 0;
            next = ssn_step(problem, current, config.gmres, &iterations);
            row.gmres = iterations;
        } else {
            next = active_set_step(problem, current);
        }

        next.p = exact_adjoints(problem, next.y);
        next.sets = classify_sets(problem, next.y, next.p);
        row.nodes = set_change_count(current.sets, next.sets);
        row.opt = residual_from_adjoints(problem, next.u, next.p);
        row.step = control_norm(problem, control_difference(next.u, current.u));

        report.rows.push_back(row);
        report.u_history.push_back(next.u);
        report.sets_history.push_back(next.sets);
        current = std::move(next);

        if (row.nodes == 0) {
            report.termination = Termination::SetsStationary;
            break;
        }
        if (row.opt <= config.residual_tol) {
            report.termination = Termination::ResidualFallback;
            break;
        }
    }
    report.final = std::move(current);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

MethodComparison compare_methods(const NepProblem& problem, const InitialGuess& initial, const SolverConfig& config) {
    SolverConfig ssn_cfg = config;
    ssn_cfg.method = Method::Ssn;
    SolverConfig as_cfg = config;
    as_cfg.method = Method::ActiveSet;

    auto ssn_future = std::async(std::launch::async, [&] { return run_solver(problem, initial, ssn_cfg); });
    MethodComparison cmp;
    cmp.active_set = run_solver(problem, initial, as_cfg);
    cmp.ssn = ssn_future.get();

    const std::size_t common = std::min(cmp.ssn.u_history.size(), cmp.active_set.u_history.size());
    cmp.same_length = cmp.ssn.u_history.size() == cmp.active_set.u_history.size();
    for (std::size_t i = 0; i < common; ++i) {
        cmp.max_control_difference = std::max(
            cmp.max_control_difference,
            control_norm(problem, control_difference(cmp.ssn.u_history[i], cmp.active_set.u_history[i])));
    }
    for (std::size_t i = 0; i <= common && i < cmp.ssn.sets_history.size() && i < cmp.active_set.sets_history.size(); ++i) {
        cmp.max_set_difference =
            std::max(cmp.max_set_difference, set_change_count(cmp.ssn.sets_history[i], cmp.active_set.sets_history[i]));
    }
    return cmp;
}

const char* to_string(Method m) { return m == Method::Ssn ? "ssn" : "as"; }

const char* to_string(Termination t) {
    switch (t) {
        case Termination::SetsStationary: return "sets stationary";
        case Termination::ResidualFallback: return "residual below tolerance";
        case Termination::IterationCap: return "iteration cap reached";
    }
    return "unknown";
}

}  // namespace nep
