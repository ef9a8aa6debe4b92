#pragma once

// Regularization-parameter choice rules.
//
// Both selectors are generic over a caller-supplied solve callback, so the same
// code serves the PSVM (phi = (1/2)|Hu - e|^2, psi = (1/2)|u|^2) and the sparse
// solver (phi = weighted positive-part hinge, psi = |w|_p^p + (1/2) gamma^2).

#include "lpsvm/psvm.hpp"
#include "lpsvm/sparse.hpp"
#include "lpsvm/types.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <vector>

namespace lpsvm {

/// Result of solving at a given beta: the minimizer and its two functional values.
struct Probe {
    Vector u;
    double phi = 0.0;
    double psi = 0.0;
};

template <class F>
concept ProbeFunction = std::invocable<F, double> && std::convertible_to<std::invoke_result_t<F, double>, Probe>;

template <class F>
concept DiscrepancyFunction = std::invocable<F, double> && std::convertible_to<std::invoke_result_t<F, double>, double>;

// ---------------------------------------------------------------------------
// Balancing principle

struct BalancingConfig {
    double mu = 1.0;          ///< ratio of the Gamma-prior shape parameters
    double beta0 = 1.0;
    double tol = 1e-4;
    int max_iter = 30;
    double beta_tilde0 = 0.0; ///< shift added to phi
    double beta_tilde1 = 0.0; ///< shift added to psi

    void validate() const {
        if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be a positive finite number");
        if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw ConfigError("beta0 must be a positive finite number");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
        if (!(beta_tilde0 >= 0.0) || !(beta_tilde1 >= 0.0)) throw ConfigError("prior shifts must be nonnegative");
    }
};

struct BalancingStep {
    double beta;
    double phi;
    double psi;
};

struct BalancingResult {
    double beta = 0.0;
    std::vector<BalancingStep> trajectory;
    bool converged = false;
    bool oscillation = false; ///< two-cycle detected; beta is the mean of the last two iterates
};

/// Fixed-point iteration beta <- (phi(u_beta) + b0) / (mu (psi(u_beta) + b1)).
///
/// Stops once |beta_{k+1} - beta_k| <= tol * min(beta_k, beta_{k+1}); that bound
/// makes |beta_k mu (psi_k + b1) - (phi_k + b0)| <= tol (phi_k + b0) hold exactly
/// at the last probed point.
template <ProbeFunction Solve>
BalancingResult balancing_select(Solve&& solve, const BalancingConfig& cfg) {
    cfg.validate();
    BalancingResult out;
    double beta = cfg.beta0;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < cfg.max_iter; ++k) {
        const Probe probe = solve(beta);
        if (!std::isfinite(probe.phi) || !std::isfinite(probe.psi) || probe.phi < 0.0 || probe.psi < 0.0)
            throw Error("solver returned invalid functional values at beta = " + std::to_string(beta));
        out.trajectory.push_back({beta, probe.phi, probe.psi});
        const double denom = probe.psi + cfg.beta_tilde1;
        if (denom <= 0.0) throw Error("psi + beta_tilde1 vanished at beta = " + std::to_string(beta));
        const double next = (probe.phi + cfg.beta_tilde0) / (cfg.mu * denom);
        if (!(next > 0.0) || !std::isfinite(next))
            throw Error("balancing update left (0, inf) after beta = " + std::to_string(beta) +
                        "; the fixed-point equation may have no solution for this mu");
        if (std::abs(next - beta) <= cfg.tol * std::min(beta, next)) {
            out.beta = next;
            out.converged = true;
            return out;
        }
        if (k >= 1 && std::abs(next / previous - 1.0) <= 1e-6) {
            out.beta = 0.5 * (beta + next);
            out.oscillation = true;
            return out;
        }
        previous = beta;
        beta = next;
    }
    out.beta = beta;
    return out;
}

/// Relative balancing residual |beta mu (psi + b1) - (phi + b0)| / (phi + b0).
inline double balancing_residual(double beta, const Probe& probe, const BalancingConfig& cfg) {
    const double lhs = beta * cfg.mu * (probe.psi + cfg.beta_tilde1);
    const double rhs = probe.phi + cfg.beta_tilde0;
    return std::abs(lhs - rhs) / rhs;
}

// ---------------------------------------------------------------------------
// Morozov discrepancy principle

struct MorozovConfig {
    double delta = 0.0; ///< noise level; the target for phi is delta^2 / 2
    double beta_lo = 1e-6;
    double beta_hi = 1e6;
    double tol = 1e-3;
    int max_iter = 200;

    double target() const { return 0.5 * delta * delta; }

    void validate() const {
        if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be a positive finite number");
        if (!(beta_lo > 0.0) || !(beta_hi > beta_lo) || !std::isfinite(beta_hi))
            throw ConfigError("bracket must satisfy 0 < beta_lo < beta_hi < inf");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    }
};

struct MorozovResult {
    double beta = 0.0;
    double phi = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotone = true; ///< false if a probe fell outside the bracket values
};

/// Bisection (in log beta) for phi(u_beta) = delta^2 / 2.
template <DiscrepancyFunction Phi>
MorozovResult morozov_select(Phi&& phi_of, const MorozovConfig& cfg) {
    cfg.validate();
    const double target = cfg.target();
    double lo = cfg.beta_lo;
    double hi = cfg.beta_hi;
    double f_lo = phi_of(lo) - target;
    double f_hi = phi_of(hi) - target;
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) throw Error("discrepancy is not finite at the bracket ends");

    MorozovResult best{lo, f_lo + target, 0, false, true};
    if (std::abs(f_hi) < std::abs(f_lo)) best = {hi, f_hi + target, 0, false, true};
    if (std::abs(best.phi - target) <= cfg.tol * target) {
        best.converged = true;
        return best;
    }
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw Error("bracket does not straddle the discrepancy target " + std::to_string(target));

    bool monotone = true;
    for (int k = 1; k <= cfg.max_iter; ++k) {
        const double mid = std::sqrt(lo * hi);
        const double f_mid = phi_of(mid) - target;
        if (!std::isfinite(f_mid)) throw Error("discrepancy is not finite at beta = " + std::to_string(mid));
        if (f_mid < std::min(f_lo, f_hi) || f_mid > std::max(f_lo, f_hi)) monotone = false;
        if (std::abs(f_mid) < std::abs(best.phi - target)) best = {mid, f_mid + target, k, false, monotone};
        best.iterations = k;
        best.monotone = monotone;
        if (std::abs(f_mid) <= cfg.tol * target) {
            best = {mid, f_mid + target, k, true, monotone};
            return best;
        }
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Ready-made probes

/// PSVM at beta (nu = 1/beta): phi = (1/2)|Hu - e|^2, psi = (1/2)|u|^2.
inline auto psvm_probe(const Matrix& h) {
    return [&h](double beta) {
        const Vector u = solve_psvm(h, 1.0 / beta).stacked();
        return Probe{u, 0.5 * (h * u - Vector::Ones(h.rows())).squaredNorm(), 0.5 * u.squaredNorm()};
    };
}

/// Sparse solver at beta with the remaining settings of `cfg`.
inline auto sparse_probe(const Matrix& h, const Vector& labels, SolverConfig cfg) {
    return [&h, &labels, cfg](double beta) {
        SolverConfig at = cfg;
        at.beta = beta;
        const Vector u = solve_sparse(h, labels, at).hyperplane.stacked();
        const Vector s = build_S(labels, cfg.alpha);
        return Probe{u, data_fit(h, s, u, cfg.gamma_mode), regularizer(u, cfg.p, cfg.weight_mode)};
    };
}

} // namespace lpsvm
