#pragma once

// N-player augmented Nash equilibrium problem on a P1 discretization:
// player nu minimizes
//   1/2 ||y - y_d^nu||^2_{Omega_nu} + alpha/2 ||u^nu||^2 + 1/(2 rho) ||(mu + rho (y - psi))_+||^2
// over u_a^nu <= u^nu <= u_b^nu, where -Laplace y = sum_nu u^nu + f with y = 0 on the boundary.

#include "nep/fem.hpp"
#include "nep/linalg.hpp"
#include "nep/types.hpp"

#include <memory>
#include <optional>
#include <variant>

namespace nep {

struct PlayerSpec {
    fem::Region observation = fem::Region::everywhere();  // Omega_nu, must be geometric
    Vector y_d;
    Vector u_a;
    Vector u_b;
};

/// Immutable problem definition together with its assembled matrices and the
/// factorized Dirichlet stiffness matrix. Copies share the same data.
class NepProblem {
public:
    NepProblem(fem::Mesh mesh, std::vector<PlayerSpec> players, double alpha, double rho, Vector mu, Vector psi,
               std::optional<Vector> source = std::nullopt);

    const fem::Mesh& mesh() const { return data_->mesh; }
    int num_players() const { return static_cast<int>(data_->players.size()); }
    Eigen::Index num_nodes() const { return data_->mesh.num_vertices(); }
    const PlayerSpec& player(int nu) const;
    const std::vector<PlayerSpec>& players() const { return data_->players; }

    double alpha() const { return data_->alpha; }
    double rho() const { return data_->rho; }
    const Vector& mu() const { return data_->mu; }
    const Vector& psi() const { return data_->psi; }
    const std::optional<Vector>& source() const { return data_->source; }

    const SparseMatrix& stiffness() const { return data_->K; }
    const SparseMatrix& mass() const { return data_->M; }
    /// Mass matrix restricted to the observation region of player nu.
    const SparseMatrix& observation_mass(int nu) const;

    /// Solves K x = load on the interior nodes with x = 0 on the boundary.
    /// Boundary entries of `load` are ignored.
    Vector solve_dirichlet(const Vector& load) const;

    /// S f, the state generated by the source term alone (zero without source).
    const Vector& source_state() const { return data_->source_state; }

    /// Same geometry and data with different alpha / rho.
    NepProblem with_parameters(double alpha, double rho) const;

private:
    struct Data {
        fem::Mesh mesh;
        std::vector<PlayerSpec> players;
        double alpha;
        double rho;
        Vector mu;
        Vector psi;
        std::optional<Vector> source;
        SparseMatrix K;
        SparseMatrix M;
        std::vector<SparseMatrix> M_obs;
        std::vector<int> interior;
        linalg::Factorization K_interior;
        Vector source_state;
    };
    std::shared_ptr<const Data> data_;
};

/// Multiplier (mu + rho (y - psi))_+ taken node by node.
struct ExactMultiplier {};
/// Linearized multiplier chi_Y (mu + rho (y - psi)) on a fixed nodal set Y.
struct FrozenMultiplier {
    const Mask& active;
};
using MultiplierMode = std::variant<ExactMultiplier, FrozenMultiplier>;

/// Nodal multiplier field for the given mode.
Vector multiplier(const NepProblem& problem, const Vector& y, const MultiplierMode& mode);

/// y with K y = M (sum_nu u^nu + f), y = 0 on the boundary.
Vector solve_state(const NepProblem& problem, const Controls& u);

/// p^nu with K p = M_nu (y - y_d^nu) + M m, m the nodal multiplier field.
Vector solve_adjoint(const NepProblem& problem, int nu, const Vector& y, const MultiplierMode& mode);

/// Starting values (y_0, u_0, p_0); y_0 only seeds the first state-constraint set.
struct InitialGuess {
    Vector y;
    Controls u;
    Controls p;
};

InitialGuess default_initial_guess(const NepProblem& problem, double y0 = 10.0);

struct OffsetEstimate {
    std::vector<double> norms;  // ||chi_Z (S_nu - chi_nu S_nu)||_{L2 -> L2} per player
    double total = 0.0;         // 1/4 sum_nu norms^2
    bool alpha_ok = false;      // alpha > total
};

OffsetEstimate offset_estimate(const NepProblem& problem, double tol = 1e-10, int maxiter = 20000);

struct ExactSolution {
    Vector y_bar;
    Controls u_bar;
    Controls p_bar;
};

struct Example1 {
    NepProblem problem;
    InitialGuess initial;
};

struct Example2 {
    NepProblem problem;
    InitialGuess initial;
    ExactSolution exact;
};

/// Four players on the unit square observing one quadrant each, desired
/// states 0..3 and state bound psi = -2 x + 2 y + 2. The default control
/// bound +-1e4 is never attained, so the game is effectively unconstrained
/// in the controls.
Example1 make_example1(int nx = 64, int ny = 64, double alpha = 1e-5, double rho = 10.0, double control_bound = 1e4);

/// Four players on (-1, 1)^2 with manufactured exact solution
/// y = sin(2 pi x) sin(2 pi y).
Example2 make_example2(int nx = 128, int ny = 128, double alpha = 0.1, double rho = 10.0);

namespace manufactured {

/// Center offsets (xi^1_nu, xi^2_nu), nu = 0..3.
fem::Point shift(int nu);
/// r_nu^2 = (x + xi^1_nu)^2 + (y + xi^2_nu)^2
double radius_squared(int nu, const fem::Point& p);
/// Exact adjoint: 16 (r^2 - 1/4)^3 for r < 1/2, zero elsewhere.
double adjoint(int nu, const fem::Point& p);
/// Laplacian of the exact adjoint.
double adjoint_laplacian(int nu, const fem::Point& p);
double state(const fem::Point& p);
double state_laplacian(const fem::Point& p);

}  // namespace manufactured

}  // namespace nep
