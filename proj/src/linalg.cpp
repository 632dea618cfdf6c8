#include "nep/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <sstream>

namespace nep::linalg {

LinearOperator LinearOperator::from_matrix(const SparseMatrix& A) {
    if (A.rows() != A.cols()) throw ArgumentError("LinearOperator::from_matrix: matrix must be square");
    auto shared = std::make_shared<const SparseMatrix>(A);
    LinearOperator op;
    op.dim = A.rows();
    op.apply = [shared](const Vector& x) -> Vector { return (*shared) * x; };
    op.apply_transpose = [shared](const Vector& x) -> Vector { return shared->transpose() * x; };
    return op;
}

Factorization::Factorization(const SparseMatrix& A) : dim_(A.rows()) {
    if (A.rows() != A.cols()) throw ArgumentError("lu_factorize: matrix must be square");
    lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
    if (dim_ == 0) return;
    SparseMatrix copy = A;
    copy.makeCompressed();
    lu_->compute(copy);
    if (lu_->info() != Eigen::Success) {
        throw FactorizationError("lu_factorize: " + lu_->lastErrorMessage());
    }
}

Vector Factorization::solve(const Vector& b) const {
    if (b.size() != dim_) throw ArgumentError("Factorization::solve: dimension mismatch");
    if (dim_ == 0) return Vector();
    Vector x = lu_->solve(b);
    return x;
}

Factorization lu_factorize(const SparseMatrix& A) { return Factorization(A); }

namespace {

void apply_givens(double& dx, double& dy, double cs, double sn) {
    const double t = cs * dx + sn * dy;
    dy = -sn * dx + cs * dy;
    dx = t;
}

}  // namespace

GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& opts, const Vector* x0) {
    const Eigen::Index n = b.size();
    if (op.dim != n || !op.apply) throw ArgumentError("gmres: operator dimension does not match right-hand side");
    if (!b.allFinite()) throw ArgumentError("gmres: right-hand side is not finite");
    if (opts.restart < 1 || opts.maxiter < 0) throw ArgumentError("gmres: invalid restart/maxiter");

    GmresResult res;
    res.x = x0 ? *x0 : Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.x.setZero();
        res.converged = true;
        return res;
    }

    const int m = opts.restart;
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Vector cs(m), sn(m), g(m + 1);

    Vector r = b - op.apply(res.x);
    double rel = r.norm() / bnorm;
    res.relative_residual = rel;
    if (rel <= opts.tol) {
        res.converged = true;
        return res;
    }

    while (res.iterations < opts.maxiter) {
        const double beta = r.norm();
        V.col(0) = r / beta;
        g.setZero();
        g[0] = beta;
        H.setZero();

        int j = 0;
        for (; j < m && res.iterations < opts.maxiter; ++j) {
            Vector w = op.apply(V.col(j));
            const double wnorm0 = w.norm();
            for (int i = 0; i <= j; ++i) {
                H(i, j) = w.dot(V.col(i));
                w -= H(i, j) * V.col(i);
            }
            H(j + 1, j) = w.norm();
            const bool breakdown = H(j + 1, j) <= 1e-14 * wnorm0;
            if (!breakdown) V.col(j + 1) = w / H(j + 1, j);

            for (int i = 0; i < j; ++i) apply_givens(H(i, j), H(i + 1, j), cs[i], sn[i]);
            const double denom = std::hypot(H(j, j), H(j + 1, j));
            cs[j] = denom > 0.0 ? H(j, j) / denom : 1.0;
            sn[j] = denom > 0.0 ? H(j + 1, j) / denom : 0.0;
            apply_givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
            apply_givens(g[j], g[j + 1], cs[j], sn[j]);

            ++res.iterations;
            rel = std::abs(g[j + 1]) / bnorm;
            res.residual_history.push_back(rel);
            if (rel <= opts.tol || breakdown) {
                ++j;
                break;
            }
        }

        // x += V_j y with y solving the triangular least-squares system.
        Vector y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        res.x += V.leftCols(j) * y;
        r = b - op.apply(res.x);
        res.relative_residual = r.norm() / bnorm;
        if (res.relative_residual <= opts.tol) {
            res.converged = true;
            return res;
        }
        if (!res.x.allFinite()) break;
    }

    std::ostringstream msg;
    msg << "gmres: no convergence after " << res.iterations << " iterations (relative residual "
        << res.relative_residual << ", tolerance " << opts.tol << ")";
    throw GmresError(msg.str(), res);
}

double mass_norm(const SparseMatrix& M, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(M * v))); }

double dominant_eigenvalue(const LinearOperator& op, const SparseMatrix& inner, double tol, int maxiter) {
    const Eigen::Index n = op.dim;
    if (inner.rows() != n || inner.cols() != n) throw ArgumentError("power iteration: inner product size mismatch");
    if (n == 0) return 0.0;

    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = dist(rng);
    w /= mass_norm(inner, w);

    double lambda = 0.0;
    for (int it = 0; it < maxiter; ++it) {
        Vector z = op.apply(w);
        const double next = w.dot(inner * z);  // Rayleigh quotient, ||w|| = 1
        const double znorm = mass_norm(inner, z);
        if (znorm == 0.0) return 0.0;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
        w = z / znorm;
    }
    std::ostringstream msg;
    msg << "power iteration: no convergence after " << maxiter << " iterations (last estimate " << lambda << ")";
    throw PowerIterationError(msg.str(), lambda);
}

double power_iteration(const LinearOperator& op, const SparseMatrix& inner, double tol, int maxiter) {
    if (!op.apply_transpose) throw ArgumentError("power_iteration: operator transpose is required");
    auto chol = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(inner);
    if (chol->info() != Eigen::Success) throw FactorizationError("power_iteration: inner product is not SPD");

    LinearOperator normal;
    normal.dim = op.dim;
    normal.apply = [&op, &inner, chol](const Vector& w) -> Vector {
        const Vector Mz = inner * op.apply(w);
        return chol->solve(op.apply_transpose(Mz));
    };
    try {
        return std::sqrt(std::max(0.0, dominant_eigenvalue(normal, inner, tol, maxiter)));
    } catch (const PowerIterationError& e) {
        throw PowerIterationError(e.what(), std::sqrt(std::max(0.0, e.last_estimate())));
    }
}

}  // namespace nep::linalg
