#pragma once

// Proximal SVM: the equality-constrained least-squares classifier
//   min (nu/2)|Hu - e|^2 + (1/2)|u|^2,   H = D[A, -e],  u = (w, gamma).

#include "lpsvm/data.hpp"
#include "lpsvm/types.hpp"

#include <cmath>
#include <string>

namespace lpsvm {

namespace detail {

/// Solves the SPD system `a x = b` by Cholesky; throws with a conditioning hint on failure.
inline Vector spd_solve(const Matrix& a, const Vector& b) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw Error("Cholesky factorization failed: system is not positive definite");
    Vector x = llt.solve(b);
    if (!x.allFinite())
        throw Error("linear solve produced non-finite values (reciprocal condition estimate " + std::to_string(llt.rcond()) + ")");
    return x;
}

} // namespace detail

/// Solves (I + nu H^T H) u = nu H^T e, the stationarity condition of the PSVM
/// objective. Equivalent to (H^T H + beta I) u = H^T e with beta = 1/nu.
inline Hyperplane solve_psvm(const Matrix& h, double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be a positive finite number");
    const Index k = h.cols();
    Matrix a = Matrix::Identity(k, k);
    a.selfadjointView<Eigen::Lower>().rankUpdate(h.transpose(), nu);
    a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
    const Vector rhs = nu * (h.transpose() * Vector::Ones(h.rows()));
    return Hyperplane::from_stacked(detail::spd_solve(a, rhs));
}

inline Hyperplane solve_psvm(const Dataset& ds, double nu) { return solve_psvm(build_augmented(ds), nu); }

/// (nu/2)|Hu - e|^2 + (1/2)|u|^2.
inline double psvm_objective(const Matrix& h, const Vector& u, double nu) {
    const Vector r = h * u - Vector::Ones(h.rows());
    return 0.5 * nu * r.squaredNorm() + 0.5 * u.squaredNorm();
}

/// Infinity norm of (I + nu H^T H) u - nu H^T e.
inline double psvm_stationarity_residual(const Matrix& h, const Vector& u, double nu) {
    const Vector e = Vector::Ones(h.rows());
    const Vector g = u + nu * (h.transpose() * (h * u - e));
    return g.lpNorm<Eigen::Infinity>();
}

} // namespace lpsvm
