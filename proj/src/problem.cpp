#include "nep/problem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nep {

namespace {

void check_size(const Vector& v, Eigen::Index m, const char* what) {
    if (v.size() != m) {
        std::ostringstream msg;
        msg << "NepProblem: " << what << " has " << v.size() << " entries, expected " << m;
        throw ArgumentError(msg.str());
    }
    if (!v.allFinite()) throw ArgumentError(std::string("NepProblem: ") + what + " is not finite");
}

}  // namespace

NepProblem::NepProblem(fem::Mesh mesh, std::vector<PlayerSpec> players, double alpha, double rho, Vector mu,
                       Vector psi, std::optional<Vector> source) {
    const Eigen::Index m = mesh.num_vertices();
    if (players.empty()) throw ArgumentError("NepProblem: at least one player is required");
    if (!(alpha > 0.0)) throw ArgumentError("NepProblem: alpha must be positive");
    if (!(rho > 0.0)) throw ArgumentError("NepProblem: rho must be positive");
    check_size(mu, m, "mu");
    check_size(psi, m, "psi");
    if ((mu.array() < 0.0).any()) throw ArgumentError("NepProblem: mu must be nonnegative");
    if (source) check_size(*source, m, "source");
    for (std::size_t nu = 0; nu < players.size(); ++nu) {
        const auto& pl = players[nu];
        check_size(pl.y_d, m, "y_d");
        check_size(pl.u_a, m, "u_a");
        check_size(pl.u_b, m, "u_b");
        if ((pl.u_a.array() > pl.u_b.array()).any()) {
            std::ostringstream msg;
            msg << "NepProblem: u_a > u_b for player " << nu + 1;
            throw ArgumentError(msg.str());
        }
        if (pl.observation.is_nodal()) {
            throw ArgumentError("NepProblem: observation regions must be geometric");
        }
    }

    SparseMatrix K = fem::assemble_stiffness(mesh);
    SparseMatrix M = fem::assemble_mass(mesh);
    std::vector<SparseMatrix> M_obs;
    M_obs.reserve(players.size());
    for (const auto& pl : players) M_obs.push_back(fem::assemble_mass(mesh, pl.observation));
    std::vector<int> interior = mesh.interior_nodes();
    linalg::Factorization K_int = linalg::lu_factorize(fem::restrict_to_interior(mesh, K));

    auto data = std::make_shared<Data>(Data{std::move(mesh), std::move(players), alpha, rho, std::move(mu),
                                            std::move(psi), std::move(source), std::move(K), std::move(M),
                                            std::move(M_obs), std::move(interior), std::move(K_int), Vector()});
    data_ = data;
    data->source_state = data->source ? solve_dirichlet(data->M * *data->source) : Vector::Zero(m);
}

const PlayerSpec& NepProblem::player(int nu) const {
    if (nu < 0 || nu >= num_players()) throw ArgumentError("NepProblem: invalid player index");
    return data_->players[static_cast<std::size_t>(nu)];
}

const SparseMatrix& NepProblem::observation_mass(int nu) const {
    if (nu < 0 || nu >= num_players()) throw ArgumentError("NepProblem: invalid player index");
    return data_->M_obs[static_cast<std::size_t>(nu)];
}

Vector NepProblem::solve_dirichlet(const Vector& load) const {
    const auto& interior = data_->interior;
    if (load.size() != num_nodes()) throw ArgumentError("solve_dirichlet: load has wrong size");
    Vector rhs(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t i = 0; i < interior.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = load[interior[i]];
    const Vector sol = data_->K_interior.solve(rhs);
    Vector x = Vector::Zero(num_nodes());
    for (std::size_t i = 0; i < interior.size(); ++i) x[interior[i]] = sol[static_cast<Eigen::Index>(i)];
    return x;
}

NepProblem NepProblem::with_parameters(double alpha, double rho) const {
    return NepProblem(data_->mesh, data_->players, alpha, rho, data_->mu, data_->psi, data_->source);
}

Vector multiplier(const NepProblem& problem, const Vector& y, const MultiplierMode& mode) {
    Vector g = problem.mu() + problem.rho() * (y - problem.psi());
    if (std::holds_alternative<ExactMultiplier>(mode)) return g.cwiseMax(0.0);
    const Mask& active = std::get<FrozenMultiplier>(mode).active;
    if (active.size() != g.size()) throw ArgumentError("multiplier: state mask has wrong size");
    return active.cwiseProduct(g);
}

Vector solve_state(const NepProblem& problem, const Controls& u) {
    if (static_cast<int>(u.size()) != problem.num_players()) throw ArgumentError("solve_state: wrong number of controls");
    Vector sum = Vector::Zero(problem.num_nodes());
    for (const auto& c : u) {
        if (c.size() != sum.size()) throw ArgumentError("solve_state: control has wrong size");
        sum += c;
    }
    return problem.solve_dirichlet(problem.mass() * sum) + problem.source_state();
}

Vector solve_adjoint(const NepProblem& problem, int nu, const Vector& y, const MultiplierMode& mode) {
    const auto& pl = problem.player(nu);
    if (y.size() != problem.num_nodes()) throw ArgumentError("solve_adjoint: state has wrong size");
    const Vector load = problem.observation_mass(nu) * (y - pl.y_d) + problem.mass() * multiplier(problem, y, mode);
    return problem.solve_dirichlet(load);
}

InitialGuess default_initial_guess(const NepProblem& problem, double y0) {
    const Eigen::Index m = problem.num_nodes();
    InitialGuess g;
    g.y = Vector::Constant(m, y0);
    g.u.assign(static_cast<std::size_t>(problem.num_players()), Vector::Zero(m));
    g.p.assign(static_cast<std::size_t>(problem.num_players()), Vector::Zero(m));
    return g;
}

OffsetEstimate offset_estimate(const NepProblem& problem, double tol, int maxiter) {
    const auto& mesh = problem.mesh();
    const auto& players = problem.players();
    auto in_union = [&players](const fem::Point& p) {
        for (const auto& pl : players)
            if (pl.observation.geometric()(p)) return true;
        return false;
    };

    OffsetEstimate est;
    for (int nu = 0; nu < problem.num_players(); ++nu) {
        const auto& own = problem.player(nu).observation.geometric();
        const SparseMatrix M_gap =
            fem::assemble_mass(mesh, fem::Region::predicate([&](const fem::Point& p) { return in_union(p) && !own(p); }));
        double norm = 0.0;
        if (M_gap.nonZeros() > 0 && M_gap.coeffs().cwiseAbs().maxCoeff() > 0.0) {
            // w -> S^* M_gap S w with S = K^{-1} M is self-adjoint in the M inner product.
            linalg::LinearOperator gram;
            gram.dim = problem.num_nodes();
            gram.apply = [&](const Vector& w) -> Vector {
                const Vector s = problem.solve_dirichlet(problem.mass() * w);
                return problem.solve_dirichlet(M_gap * s);
            };
            norm = std::sqrt(std::max(0.0, linalg::dominant_eigenvalue(gram, problem.mass(), tol, maxiter)));
        }
        est.norms.push_back(norm);
        est.total += 0.25 * norm * norm;
    }
    est.alpha_ok = problem.alpha() > est.total;
    return est;
}

namespace manufactured {

fem::Point shift(int nu) {
    static constexpr double xi1[4] = {0.5, -0.5, 0.5, -0.5};
    static constexpr double xi2[4] = {0.5, 0.5, -0.5, -0.5};
    if (nu < 0 || nu > 3) throw ArgumentError("manufactured::shift: player index out of range");
    return {xi1[nu], xi2[nu]};
}

double radius_squared(int nu, const fem::Point& p) {
    const fem::Point s = shift(nu);
    return (p.x + s.x) * (p.x + s.x) + (p.y + s.y) * (p.y + s.y);
}

double adjoint(int nu, const fem::Point& p) {
    const double t = radius_squared(nu, p);
    if (t >= 0.25) return 0.0;
    const double s = t - 0.25;
    return 16.0 * s * s * s;
}

double adjoint_laplacian(int nu, const fem::Point& p) {
    // For g(r^2) in 2D: Laplace g = 4 g'(t) + 4 t g''(t), t = r^2.
    const double t = radius_squared(nu, p);
    if (t >= 0.25) return 0.0;
    const double s = t - 0.25;
    return 192.0 * s * s + 384.0 * t * s;
}

double state(const fem::Point& p) {
    using std::numbers::pi;
    return std::sin(2.0 * pi * p.x) * std::sin(2.0 * pi * p.y);
}

double state_laplacian(const fem::Point& p) { return -8.0 * std::numbers::pi * std::numbers::pi * state(p); }

}  // namespace manufactured

Example1 make_example1(int nx, int ny, double alpha, double rho, double control_bound) {
    if (!(control_bound > 0.0)) throw ArgumentError("make_example1: control bound must be positive");
    fem::Mesh mesh = fem::build_rect_mesh({0.0, 1.0, 0.0, 1.0}, nx, ny);
    const Eigen::Index m = mesh.num_vertices();
    const fem::Rect quadrants[4] = {
        {0.0, 0.5, 0.0, 0.5},
        {0.5, 1.0, 0.0, 0.5},
        {0.5, 1.0, 0.5, 1.0},
        {0.0, 0.5, 0.5, 1.0},
    };
    std::vector<PlayerSpec> players;
    for (int nu = 0; nu < 4; ++nu) {
        players.push_back({fem::Region::box(quadrants[nu]), Vector::Constant(m, static_cast<double>(nu)),
                           Vector::Constant(m, -control_bound), Vector::Constant(m, control_bound)});
    }
    Vector psi = fem::interpolate(mesh, [](const fem::Point& p) { return -2.0 * p.x + 2.0 * p.y + 2.0; });
    NepProblem problem(std::move(mesh), std::move(players), alpha, rho, Vector::Zero(m), std::move(psi));
    InitialGuess initial = default_initial_guess(problem, 10.0);
    return {std::move(problem), std::move(initial)};
}

Example2 make_example2(int nx, int ny, double alpha, double rho) {
    fem::Mesh mesh = fem::build_rect_mesh({-1.0, 1.0, -1.0, 1.0}, nx, ny);
    const Eigen::Index m = mesh.num_vertices();
    constexpr double u_lower = -1.0;
    constexpr double u_upper = 20.0;
    constexpr double psi_value = 2.0;
    // Quadrants in player order; closed versions decide where y_d is defined.
    const fem::Rect quadrants[4] = {
        {-1.0, 0.0, -1.0, 0.0},
        {0.0, 1.0, -1.0, 0.0},
        {-1.0, 0.0, 0.0, 1.0},
        {0.0, 1.0, 0.0, 1.0},
    };

    ExactSolution exact;
    exact.y_bar = fem::interpolate(mesh, manufactured::state);
    Vector u_sum = Vector::Zero(m);
    std::vector<PlayerSpec> players;
    for (int nu = 0; nu < 4; ++nu) {
        Vector p_bar = fem::interpolate(mesh, [nu](const fem::Point& p) { return manufactured::adjoint(nu, p); });
        Vector u_bar = (-p_bar / alpha).cwiseMax(u_lower).cwiseMin(u_upper);
        u_sum += u_bar;

        const fem::Rect q = quadrants[nu];
        Vector y_d = fem::interpolate(mesh, [&](const fem::Point& p) {
            const bool inside = p.x >= q.x_min && p.x <= q.x_max && p.y >= q.y_min && p.y <= q.y_max;
            if (!inside) return 0.0;
            const double y = manufactured::state(p);
            return y + manufactured::adjoint_laplacian(nu, p) + std::max(0.0, rho * (y - psi_value));
        });
        players.push_back({fem::Region::box(q), std::move(y_d), Vector::Constant(m, u_lower),
                           Vector::Constant(m, u_upper)});
        exact.p_bar.push_back(std::move(p_bar));
        exact.u_bar.push_back(std::move(u_bar));
    }
    Vector f = fem::interpolate(mesh, [](const fem::Point& p) { return -manufactured::state_laplacian(p); }) - u_sum;

    NepProblem problem(std::move(mesh), std::move(players), alpha, rho, Vector::Zero(m), Vector::Constant(m, psi_value),
                       std::move(f));
    InitialGuess initial = default_initial_guess(problem, 10.0);
    return {std::move(problem), std::move(initial), std::move(exact)};
}

}  // namespace nep
