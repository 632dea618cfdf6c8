#pragma once

// Direct sparse factorization, matrix-free restarted GMRES and power
// iteration in a mass-matrix geometry.

#include "nep/types.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace nep::linalg {

/// Black-box linear map on R^dim. `apply_transpose` is optional and only
/// required by power_iteration.
struct LinearOperator {
    Eigen::Index dim = 0;
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_transpose;

    static LinearOperator from_matrix(const SparseMatrix& A);
};

/// Sparse LU factors of a square matrix. Immutable after construction, so
/// concurrent solves are safe.
class Factorization {
public:
    explicit Factorization(const SparseMatrix& A);

    Eigen::Index dim() const { return dim_; }
    Vector solve(const Vector& b) const;

private:
    Eigen::Index dim_;
    std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

Factorization lu_factorize(const SparseMatrix& A);

struct GmresOptions {
    double tol = 1e-12;   // relative residual ||b - A x|| / ||b||
    int restart = 200;
    int maxiter = 2000;   // total inner iterations over all cycles
};

struct GmresResult {
    Vector x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    /// Residual estimate after each inner iteration (relative to ||b||).
    std::vector<double> residual_history;
};

class GmresError : public std::runtime_error {
public:
    GmresError(const std::string& what, GmresResult best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const GmresResult& best() const { return best_; }

private:
    GmresResult best_;
};

/// Restarted GMRES (modified Gram-Schmidt, Givens rotations), no
/// preconditioner. Throws GmresError carrying the best iterate when the
/// tolerance is not met within `maxiter` inner iterations.
GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& opts = {},
                  const Vector* x0 = nullptr);

class PowerIterationError : public std::runtime_error {
public:
    PowerIterationError(const std::string& what, double last) : std::runtime_error(what), last_(last) {}
    double last_estimate() const { return last_; }

private:
    double last_;
};

/// Dominant eigenvalue of an operator that is self-adjoint and positive
/// semidefinite with respect to (x, y) -> x^T inner y.
double dominant_eigenvalue(const LinearOperator& op, const SparseMatrix& inner, double tol = 1e-10,
                           int maxiter = 10000);

/// Largest singular value of `op` measured in the norm induced by `inner`,
/// i.e. sqrt of the dominant eigenvalue of inner^{-1} op^T inner op.
double power_iteration(const LinearOperator& op, const SparseMatrix& inner, double tol = 1e-10,
                       int maxiter = 10000);

/// sqrt(v^T M v)
double mass_norm(const SparseMatrix& M, const Vector& v);

}  // namespace nep::linalg
