#pragma once

// Sparse nonsmooth linear classifier.
//
// Minimizes  phi(u) + beta * psi(u)  over u = (w, gamma) with
//
//   phi(u) = (1/2) | S^{1/2} max(0, e - Hu) |^2     (weighted positive-part hinge)
//   psi(u) = |w|_p^p + (1/2) gamma^2                 (l_p sparsity, 0 < p <= 2)
//
// by iteratively reweighted least squares. Each step freezes the active-set
// weights Gamma(u^k) and the l_p weights T(w^k) and solves
//
//   (H^T S Gamma H + beta * blockdiag(T, 1)) u^{k+1} = H^T S Gamma e,
//
//   T_jj = p / max(eps^{2-p}, |w_j|^{2-p}),   S_ii = 1 (d_i = +1) or alpha (d_i = -1).
//
// The eps-smoothing replaces the (possibly empty) subdifferential of |w|^p at
// zero by p w / max(eps^{2-p}, |w|^{2-p}). With S = Gamma = I the iteration is a
// majorize-minimize scheme for the smoothed functional
//
//   J_eps(u) = (1/2)|Hu - e|^2 + beta * (sum_j Psi_eps(w_j^2) + (1/2) gamma^2),
//
//   Psi_eps(x) = x^{p/2}                                  for x >= eps^2
//              = (p/2) x / eps^{2-p} + (1 - p/2) eps^p    for x <  eps^2,
//
// so J_eps is nonincreasing along the iterates. Psi_eps is concave with
// Psi_eps'(w^2) = T/2, which makes the quadratic step an upper bound of J_eps.

#include "lpsvm/data.hpp"
#include "lpsvm/psvm.hpp"
#include "lpsvm/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lpsvm {

enum class GammaMode {
    indicator,  ///< Gamma_ii = 1 where the hinge residual is positive, else 0
    residual,   ///< Gamma_ii = max(0, 1 - d_i(x_i.w - gamma))
    all_active, ///< Gamma = I; reduces the scheme to a least-squares (PSVM-type) fit
};

enum class WeightMode {
    lp,       ///< T from the eps-smoothed l_p subgradient
    identity, ///< T = I; the plain Tikhonov term, used to reproduce PSVM exactly
};

enum class WarmStart { psvm, zero };

inline const char* to_string(GammaMode m) {
    switch (m) {
    case GammaMode::indicator: return "indicator";
    case GammaMode::residual: return "residual";
    case GammaMode::all_active: return "all-active";
    }
    return "?";
}

inline const char* to_string(WeightMode m) { return m == WeightMode::lp ? "lp" : "identity"; }
inline const char* to_string(WarmStart m) { return m == WarmStart::psvm ? "psvm" : "zero"; }

inline GammaMode parse_gamma_mode(const std::string& s) {
    if (s == "indicator") return GammaMode::indicator;
    if (s == "residual") return GammaMode::residual;
    if (s == "all-active" || s == "all_active") return GammaMode::all_active;
    throw ConfigError("unknown gamma mode '" + s + "'");
}

inline WeightMode parse_weight_mode(const std::string& s) {
    if (s == "lp") return WeightMode::lp;
    if (s == "identity") return WeightMode::identity;
    throw ConfigError("unknown weight mode '" + s + "'");
}

inline WarmStart parse_warm_start(const std::string& s) {
    if (s == "psvm") return WarmStart::psvm;
    if (s == "zero") return WarmStart::zero;
    throw ConfigError("unknown warm start '" + s + "'");
}

struct SolverConfig {
    double beta = 1.0;
    double p = 1.0;
    double epsilon = 1e-3;
    double alpha = 1.0;
    GammaMode gamma_mode = GammaMode::indicator;
    WeightMode weight_mode = WeightMode::lp;
    int max_iter = 50;
    double tol = 1e-8;
    WarmStart warm_start = WarmStart::psvm;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a positive finite number");
        if (!(p > 0.0 && p <= 2.0)) throw ConfigError("p must lie in (0, 2]");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
        if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    }
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> j_eps_history; ///< J_eps at u^0 .. u^iterations (S = Gamma = I data term)
    double stationarity_residual = 0.0;
    bool converged = false;
    std::vector<Index> final_active_set; ///< rows with Gamma_ii > 0 at the returned u
};

struct SparseSolution {
    Hyperplane hyperplane;
    SolveReport report;
};

// ---------------------------------------------------------------------------
// Building blocks

/// eps-approximate subgradient of |w|_p^p: p w_j / max(eps^{2-p}, |w_j|^{2-p}).
inline Vector approx_subgradient(const Vector& w, double p, double eps) {
    const double floor = std::pow(eps, 2.0 - p);
    return w.unaryExpr([&](double x) { return p * x / std::max(floor, std::pow(std::abs(x), 2.0 - p)); });
}

/// Diagonal of T: p / max(eps^{2-p}, |w_j|^{2-p}). Strictly positive.
inline Vector build_T(const Vector& w, double p, double eps) {
    const double floor = std::pow(eps, 2.0 - p);
    return w.unaryExpr([&](double x) { return p / std::max(floor, std::pow(std::abs(x), 2.0 - p)); });
}

/// Diagonal of S: 1 for d_i = +1, alpha for d_i = -1.
inline Vector build_S(const Vector& labels, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    return labels.unaryExpr([&](double d) { return d > 0.0 ? 1.0 : alpha; });
}

/// Hinge residuals r_i = 1 - d_i(x_i.w - gamma) = (e - Hu)_i.
inline Vector hinge_residuals(const Matrix& h, const Vector& u) { return Vector::Ones(h.rows()) - h * u; }

/// Diagonal of Gamma at u.
inline Vector build_Gamma(const Matrix& h, const Vector& u, GammaMode mode) {
    const Vector r = hinge_residuals(h, u);
    switch (mode) {
    case GammaMode::indicator: return r.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case GammaMode::residual: return r.cwiseMax(0.0);
    case GammaMode::all_active: return Vector::Ones(h.rows());
    }
    return Vector::Ones(h.rows());
}

inline Vector build_Gamma(const Hyperplane& u, const Dataset& ds, GammaMode mode) {
    return build_Gamma(build_augmented(ds), u.stacked(), mode);
}

/// One reweighted solve: (H^T S Gamma H + beta blockdiag(T, 1)) u = H^T S Gamma e.
/// `t` holds the m channel weights; the offset block always carries weight 1.
inline Vector iterate_step(const Matrix& h, const Vector& s, const Vector& gamma, const Vector& t, double beta) {
    const Index k = h.cols();
    if (t.size() != k - 1) throw Error("T must have one entry per channel");
    const Vector weights = s.cwiseProduct(gamma);
    Matrix a = Matrix::Zero(k, k);
    const Matrix weighted = weights.cwiseSqrt().asDiagonal() * h;
    a.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
    a.diagonal().head(k - 1) += beta * t;
    a(k - 1, k - 1) += beta;
    const Vector rhs = h.transpose() * weights;
    return detail::spd_solve(a, rhs);
}

// ---------------------------------------------------------------------------
// Smoothed functional and descent certificate

/// Psi_eps(x) for x >= 0; continuous at x = eps^2 where both branches equal eps^p.
inline double psi_eps(double x, double p, double eps) {
    if (x < 0.0) throw Error("psi_eps is defined for x >= 0");
    const double knot = eps * eps;
    if (x >= knot) return std::pow(x, 0.5 * p);
    return 0.5 * p * x / std::pow(eps, 2.0 - p) + (1.0 - 0.5 * p) * std::pow(eps, p);
}

/// J_eps(x) = (1/2)|Hx - e|^2 + beta sum_j Psi_eps(x_j^2), every coordinate penalized.
inline double j_eps(const Vector& x, const Matrix& h, double beta, double p, double eps) {
    double reg = 0.0;
    for (Index j = 0; j < x.size(); ++j) reg += psi_eps(x(j) * x(j), p, eps);
    return 0.5 * (h * x - Vector::Ones(h.rows())).squaredNorm() + beta * reg;
}

/// J_eps for u = (w, gamma): the offset carries the quadratic (1/2) gamma^2 instead of Psi_eps.
inline double j_eps_augmented(const Vector& u, const Matrix& h, double beta, double p, double eps) {
    const Index m = u.size() - 1;
    double reg = 0.5 * u(m) * u(m);
    for (Index j = 0; j < m; ++j) reg += psi_eps(u(j) * u(j), p, eps);
    return 0.5 * (h * u - Vector::Ones(h.rows())).squaredNorm() + beta * reg;
}

struct LpIterationResult {
    Vector x;
    std::vector<double> j_eps_history;
    int iterations = 0;
    bool converged = false;
};

/// The plain reweighted iteration H^T H x^{k+1} + beta T(x^k) x^{k+1} = H^T e on a
/// generic matrix (no offset, no hinge, no class weights), started from x0.
inline LpIterationResult lp_iteration(const Matrix& h, double beta, double p, double eps, const Vector& x0, int max_iter,
                                      double tol) {
    const Matrix hth = h.transpose() * h;
    const Vector rhs = h.transpose() * Vector::Ones(h.rows());
    LpIterationResult out{x0, {j_eps(x0, h, beta, p, eps)}, 0, false};
    for (int k = 0; k < max_iter; ++k) {
        Matrix a = hth;
        a.diagonal() += beta * build_T(out.x, p, eps);
        Vector next = detail::spd_solve(a, rhs);
        const double step = (next - out.x).norm();
        const double scale = 1.0 + out.x.norm();
        out.x = std::move(next);
        out.j_eps_history.push_back(j_eps(out.x, h, beta, p, eps));
        out.iterations = k + 1;
        if (step <= tol * scale) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// Infinity norm of H^T H x + beta T(x) x - H^T e, the fixed-point equation of lp_iteration.
inline double lp_fixed_point_residual(const Matrix& h, const Vector& x, double beta, double p, double eps) {
    const Vector g = h.transpose() * (h * x - Vector::Ones(h.rows())) + beta * build_T(x, p, eps).cwiseProduct(x);
    return g.lpNorm<Eigen::Infinity>();
}

// ---------------------------------------------------------------------------
// Data-fit and regularizer functionals

/// (1/2) sum_i S_ii max(0, 1 - (Hu)_i)^2.
inline double hinge_objective(const Matrix& h, const Vector& s, const Vector& u) {
    return 0.5 * s.dot(hinge_residuals(h, u).cwiseMax(0.0).cwiseAbs2());
}

/// -H^T S max(0, e - Hu); the hinge objective is C^1 so this is its gradient everywhere.
inline Vector hinge_gradient(const Matrix& h, const Vector& s, const Vector& u) {
    return -(h.transpose() * s.cwiseProduct(hinge_residuals(h, u).cwiseMax(0.0)));
}

/// Data-fit term matching the gamma mode: the full least-squares residual
/// for all-active, the positive-part hinge otherwise.
inline double data_fit(const Matrix& h, const Vector& s, const Vector& u, GammaMode mode) {
    if (mode == GammaMode::all_active) return 0.5 * s.dot((h * u - Vector::Ones(h.rows())).cwiseAbs2());
    return hinge_objective(h, s, u);
}

/// psi(u) = |w|_p^p + (1/2) gamma^2, or (1/2)|u|^2 under WeightMode::identity.
inline double regularizer(const Vector& u, double p, WeightMode mode) {
    const Index m = u.size() - 1;
    if (mode == WeightMode::identity) return 0.5 * u.squaredNorm();
    return u.head(m).cwiseAbs().array().pow(p).sum() + 0.5 * u(m) * u(m);
}

/// Infinity norm of H^T S Gamma (Hu - e) + beta (T w, gamma) with Gamma, T evaluated at u.
inline double sparse_stationarity_residual(const Matrix& h, const Vector& s, const Vector& u, const SolverConfig& cfg) {
    const Index m = u.size() - 1;
    const Vector weights = s.cwiseProduct(build_Gamma(h, u, cfg.gamma_mode));
    Vector g = h.transpose() * weights.cwiseProduct(h * u - Vector::Ones(h.rows()));
    const Vector t = cfg.weight_mode == WeightMode::lp ? build_T(u.head(m), cfg.p, cfg.epsilon) : Vector::Ones(m);
    g.head(m) += cfg.beta * t.cwiseProduct(u.head(m));
    g(m) += cfg.beta * u(m);
    return g.lpNorm<Eigen::Infinity>();
}

// ---------------------------------------------------------------------------
// Solver

inline SparseSolution solve_sparse(const Matrix& h, const Vector& labels, const SolverConfig& cfg) {
    cfg.validate();
    const Index m = h.cols() - 1;
    const Vector s = build_S(labels, cfg.alpha);
    const auto weights_of = [&](const Vector& u) {
        return cfg.weight_mode == WeightMode::lp ? build_T(u.head(m), cfg.p, cfg.epsilon) : Vector::Ones(m);
    };
    const auto j_of = [&](const Vector& u) { return j_eps_augmented(u, h, cfg.beta, cfg.p, cfg.epsilon); };

    Vector u = cfg.warm_start == WarmStart::psvm ? solve_psvm(h, 1.0 / cfg.beta).stacked() : Vector::Zero(m + 1);

    SolveReport report;
    report.j_eps_history.push_back(j_of(u));
    for (int k = 0; k < cfg.max_iter; ++k) {
        const Vector gamma = build_Gamma(h, u, cfg.gamma_mode);
        if (cfg.gamma_mode == GammaMode::indicator && gamma.isZero()) {
            // Every margin constraint is slack.
            u.setZero();
            report.iterations = k + 1;
            report.j_eps_history.push_back(j_of(u));
            report.converged = true;
            break;
        }
        Vector next = iterate_step(h, s, gamma, weights_of(u), cfg.beta);
        const double step = (next - u).norm();
        const double scale = 1.0 + u.norm();
        u = std::move(next);
        report.iterations = k + 1;
        report.j_eps_history.push_back(j_of(u));
        if (step <= cfg.tol * scale) {
            report.converged = true;
            break;
        }
    }

    report.stationarity_residual = sparse_stationarity_residual(h, s, u, cfg);
    const Vector gamma = build_Gamma(h, u, cfg.gamma_mode);
    for (Index i = 0; i < gamma.size(); ++i)
        if (gamma(i) > 0.0) report.final_active_set.push_back(i);
    return {Hyperplane::from_stacked(u), std::move(report)};
}

inline SparseSolution solve_sparse(const Dataset& ds, const SolverConfig& cfg) {
    return solve_sparse(build_augmented(ds), ds.labels(), cfg);
}

/// Number of weights with |w_j| > threshold.
inline std::size_t count_nonzero(const Vector& w, double threshold = 1e-4) {
    return static_cast<std::size_t>((w.array().abs() > threshold).count());
}

} // namespace lpsvm
