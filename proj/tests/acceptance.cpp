// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "nep/diagnostics.hpp"
#include "nep/solvers.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>

using namespace nep;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

SolverConfig example1_config() {
    SolverConfig cfg;
    cfg.gmres.tol = 1e-12;
    return cfg;
}

SolverConfig example2_config(Method method) {
    SolverConfig cfg;
    cfg.method = method;
    cfg.gmres.tol = 1e-8;
    return cfg;
}

// 1: identical iterates and active sets for both methods on example 1.
Outcome criterion1(const MethodComparison& c32, const MethodComparison& c64) {
    Outcome o;
    for (const auto* c : {&c32, &c64}) {
        const double du = c->max_control_difference;
        o.detail << " n=" << (c == &c32 ? 32 : 64) << ": set diff " << c->max_set_difference << ", max ||du|| " << du
                 << ", iterations " << c->ssn.rows.size() << "/" << c->active_set.rows.size() << ";";
        o.require(c->same_length, "iteration counts differ");
        o.require(c->max_set_difference == 0, "active sets differ");
        o.require(du <= 1e-6, "iterate discrepancy above 1e-6");
    }
    return o;
}

// 2: example 1 at 64 x 64 terminates in 10..14 steps with superlinear rates.
Outcome criterion2(const NepProblem& P, const MethodComparison& c) {
    Outcome o;
    for (const auto* rep : {&c.ssn, &c.active_set}) {
        const char* name = to_string(rep->method);
        const auto n = rep->rows.size();
        o.detail << " " << name << ": " << n << " iterations, final nodes " << rep->rows.back().nodes << ", opt "
                 << rep->rows.back().opt << ";";
        o.require(rep->termination == Termination::SetsStationary, std::string(name) + " did not reach stationary sets");
        o.require(n >= 10 && n <= 14, std::string(name) + " iteration count outside 10..14");
        o.require(rep->rows.back().nodes == 0 && rep->rows.front().nodes > 0, std::string(name) + " node counts");
    }
    o.require(c.active_set.rows.back().opt <= 1e-10, "active-set opt above 1e-10");
    const auto kappa = kappa_numeric(P.mass(), c.ssn.u_history);
    std::vector<double> defined;
    for (const auto& k : kappa)
        if (k) defined.push_back(*k);
    int above = 0;
    o.detail << " last kappa:";
    for (std::size_t i = defined.size() >= 3 ? defined.size() - 3 : 0; i < defined.size(); ++i) {
        o.detail << " " << defined[i];
        above += defined[i] > 1.0;
    }
    o.require(defined.size() >= 3 && above >= 2, "fewer than two of the last three kappa values exceed 1");
    return o;
}

// 3: example 2 mesh convergence at alpha = 0.1 and contraction at alpha = 0.01.
Outcome criterion3() {
    Outcome o;
    std::vector<double> errors;
    for (int n : {16, 32, 64}) {
        auto ex = make_example2(n, n, 0.1);
        const auto rep = run_solver(ex.problem, ex.initial, example2_config(Method::ActiveSet));
        const double e = control_norm(ex.problem, control_difference(rep.final.u, ex.exact.u_bar));
        errors.push_back(e);
        o.detail << " alpha=0.1 n=" << n << ": " << rep.rows.size() << " it, err " << e << ";";
        o.require(rep.converged() && rep.rows.size() <= 5, "alpha=0.1 needs more than 5 iterations");
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const double order = std::log2(errors[i - 1] / errors[i]);
        o.detail << " order " << order << ";";
        o.require(order >= 1.5, "mesh order below 1.5");
    }

    auto ex = make_example2(128, 128, 0.01);
    const auto rep = run_solver(ex.problem, ex.initial, example2_config(Method::Ssn));
    const auto rates = kappa_exact_and_rate(ex.problem.mass(), rep.u_history, ex.exact.u_bar);
    double min_rate = INFINITY;
    for (const auto& r : rates.rate)
        if (r) min_rate = std::min(min_rate, *r);
    o.detail << " alpha=0.01 n=128: " << rep.rows.size() << " it, min R " << min_rate << ";";
    o.require(rep.converged() && rep.rows.size() <= 10, "alpha=0.01 needs more than 10 iterations");
    o.require(min_rate <= 0.05, "no R <= 0.05 at alpha=0.01");
    return o;
}

// 4: offset vanishes for coincident regions; strong monotonicity with slack.
Outcome criterion4() {
    Outcome o;
    fem::Mesh mesh = fem::build_rect_mesh({0, 1, 0, 1}, 16, 16);
    const auto m = mesh.num_vertices();
    const Vector z = Vector::Zero(m);
    for (const fem::Region& r : {fem::Region::everywhere(), fem::Region::box({0.25, 0.75, 0.25, 0.75})}) {
        std::vector<PlayerSpec> pl(4, PlayerSpec{r, z, Vector::Constant(m, -1), Vector::Constant(m, 1)});
        const auto est = offset_estimate(NepProblem(mesh, pl, 1e-5, 10, z, z));
        o.detail << " coincident offset " << est.total << ";";
        o.require(est.total <= 1e-12, "coincident offset above 1e-12");
    }

    auto ex = make_example1(32, 32);
    const auto est = offset_estimate(ex.problem);
    const double alpha = est.total + 0.1;
    const NepProblem P = ex.problem.with_parameters(alpha, ex.problem.rho());
    std::mt19937_64 rng(2024);
    double worst = INFINITY;
    for (int pair = 0; pair < 50; ++pair) {
        Controls u, v;
        for (int nu = 0; nu < 4; ++nu) {
            u.push_back(oracle::random_vector(rng, P.num_nodes(), -20, 20));
            v.push_back(oracle::random_vector(rng, P.num_nodes(), -20, 20));
        }
        const Controls Fu = reduced_gradient(P, u), Fv = reduced_gradient(P, v);
        double lhs = 0.0, d2 = 0.0;
        for (std::size_t nu = 0; nu < 4; ++nu) {
            const Vector d = u[nu] - v[nu];
            lhs += (Fu[nu] - Fv[nu]).dot(P.mass() * d);
            d2 += d.dot(P.mass() * d);
        }
        worst = std::min(worst, lhs / d2);
    }
    o.detail << " example 1 offset " << est.total << ", min (F(u)-F(v),u-v)/||u-v||^2 " << worst
             << " vs bound " << alpha - est.total << ";";
    o.require(worst >= (alpha - est.total) * (1 - 1e-9), "monotonicity bound violated");
    return o;
}

// 5: semismoothness of projection and max, nonexpansiveness of projection.
Outcome criterion5() {
    Outcome o;
    fem::Mesh mesh = fem::build_rect_mesh({0, 1, 0, 1}, 10, 10);
    const SparseMatrix M = fem::assemble_mass(mesh);
    const auto m = mesh.num_vertices();
    auto norm = [&M](const Vector& v) { return std::sqrt(v.dot(M * v)); };
    const Vector a = Vector::Constant(m, -0.5), b = Vector::Constant(m, 0.5);
    std::mt19937_64 rng(77);
    // Residuals averaged over random directions at t = 2^-1 .. 2^-20.
    const int trials = 20;
    double first_box = 0, last_box = 0, first_max = 0, last_max = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const Vector v = oracle::random_vector(rng, m), s = oracle::random_vector(rng, m);
        for (int j = 1; j <= 20; ++j) {
            const double t = std::ldexp(1.0, -j);
            const Vector w = v + t * s;
            const double rb = norm(project_box(w, a, b) - project_box(v, a, b) -
                                   newton_derivative_box(w, a, b).cwiseProduct(t * s)) / norm(t * s);
            const double rm = norm(w.cwiseMax(a) - v.cwiseMax(a) - newton_derivative_max(w, a).cwiseProduct(t * s)) /
                              norm(t * s);
            (j <= 10 ? first_box : last_box) += rb;
            (j <= 10 ? first_max : last_max) += rm;
        }
    }
    o.detail << " mean residual first/last decade: box " << first_box / (10 * trials) << " / "
             << last_box / (10 * trials) << ", max " << first_max / (10 * trials) << " / " << last_max / (10 * trials)
             << ";";
    o.require(last_box <= 0.1 * first_box && last_max <= 0.1 * first_max, "semismooth residual did not decrease tenfold");

    int violations = 0;
    for (int pair = 0; pair < 1000; ++pair) {
        const Vector v1 = oracle::random_vector(rng, m), v2 = oracle::random_vector(rng, m);
        violations += norm(project_box(v1, a, b) - project_box(v2, a, b)) > norm(v1 - v2) * (1 + 1e-14);
    }
    o.detail << " nonexpansiveness violations " << violations << "/1000;";
    o.require(violations == 0, "projection expanded a pair");
    return o;
}

// 6: one Newton step on a 5 x 5 grid against a dense solve.
Outcome criterion6() {
    Outcome o;
    const NepProblem P = oracle::single_player(4, 1e-2);
    const Controls ref = oracle::dense_unconstrained_controls(P);
    const auto g = default_initial_guess(P, 0.0);
    const IterateState it{g.u, g.y, g.p, oracle::all_inactive(P), 0};
    linalg::GmresOptions opts;
    opts.tol = 1e-14;
    const double e_ssn = control_norm(P, control_difference(ssn_step(P, it, opts).u, ref));
    const double e_as = control_norm(P, control_difference(active_set_step(P, it).u, ref));
    o.detail << " ||u_ssn - u_dense|| " << e_ssn << ", ||u_as - u_dense|| " << e_as << ";";
    o.require(e_ssn <= 1e-8 && e_as <= 1e-8, "step differs from dense oracle");
    return o;
}

double poisson_error(int n) {
    constexpr double pi = std::numbers::pi;
    const NepProblem P = oracle::single_player(n, 1.0);
    const Vector f = fem::interpolate(P.mesh(), [](const fem::Point& p) {
        return 2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
    });
    return oracle::l2_error(P.mesh(), solve_state(P, {f}),
                            [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
}

// 7: second-order Poisson solves and consistent manufactured data.
Outcome criterion7() {
    Outcome o;
    double prev = poisson_error(8);
    for (int n : {16, 32, 64}) {
        const double e = poisson_error(n);
        const double order = std::log2(prev / e);
        o.detail << " order " << order << " at n=" << n << ";";
        o.require(order >= 1.9, "Poisson order below 1.9");
        prev = e;
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    constexpr double h = 1e-4;
    double worst = 0.0;
    int checked = 0;
    while (checked < 1000) {
        const fem::Point p{u(rng), u(rng)};
        bool near_kink = false;
        for (int nu = 0; nu < 4; ++nu) near_kink |= std::abs(std::sqrt(manufactured::radius_squared(nu, p)) - 0.5) < 10 * h;
        if (near_kink) continue;
        ++checked;
        for (int nu = 0; nu < 4; ++nu) {
            const double exact = manufactured::adjoint_laplacian(nu, p);
            const double fd = oracle::fd_laplacian([nu](double x, double y) { return manufactured::adjoint(nu, {x, y}); },
                                                   p.x, p.y, h);
            worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
        }
    }
    o.detail << " max relative FD mismatch of the adjoint Laplacian " << worst << ";";
    o.require(worst <= 1e-4, "adjoint Laplacian disagrees with finite differences");
    return o;
}

bool report(int id, const char* title, const Outcome& o) {
    std::printf("[%s] criterion %d: %s:%s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str());
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main() {
    bool all = true;
    auto ex32 = make_example1(32, 32);
    auto ex64 = make_example1(64, 64);
    const auto c32 = compare_methods(ex32.problem, ex32.initial, example1_config());
    const auto c64 = compare_methods(ex64.problem, ex64.initial, example1_config());

    all &= report(1, "SSN and active-set iterates coincide on example 1", criterion1(c32, c64));
    all &= report(2, "example 1 (64x64) terminates in 10-14 iterations, superlinear", criterion2(ex64.problem, c64));
    all &= report(3, "example 2 mesh convergence and contraction", criterion3());
    all &= report(4, "monotonicity offset", criterion4());
    all &= report(5, "semismoothness and nonexpansiveness", criterion5());
    all &= report(6, "Newton step against dense oracle", criterion6());
    all &= report(7, "Poisson order and manufactured data", criterion7());
    return all ? 0 : 1;
}
