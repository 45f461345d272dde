#pragma once

#include <vector>

#include "rgp/common.hpp"

namespace rgp {

/// Gaussian kernel k(x, y) = exp(−γ‖x − y‖²).
struct KernelConfig {
    double gamma = 1.0;

    static KernelConfig make(double gamma);
    double operator()(const RowVector& x, const RowVector& y) const;
};

/// γ = 1/d̄², d̄ the mean Euclidean distance over all ordered pairs of rows
/// (the i = j zero terms included, divisor n(n−1)).
KernelConfig gamma_from_data(const Matrix& X);

/// Unbiased MMD² estimate: within-set sums over i ≠ j, cross term over all pairs.
double mmd2_unbiased(const Matrix& X, const Matrix& Y, const KernelConfig& cfg);

/// ∂ mmd2_unbiased / ∂X, same shape as X. γ is held constant.
Matrix mmd2_grad_x(const Matrix& X, const Matrix& Y, const KernelConfig& cfg);

/// C_ij = ‖x_i − y_j‖².
Matrix cost_matrix(const Matrix& X, const Matrix& Y);

struct TransportPlan {
    Matrix plan;               // m × n, entries ≥ 0
    double cost = 0.0;         // ⟨plan, C⟩_F
    double neg_entropy = 0.0;  // Σ plan_ij log plan_ij, with 0 log 0 = 0
    int iterations = 0;        // at the requested ε
    int warm_iterations = 0;   // spent in ε-scaling warm-up stages
    bool converged = false;
    double marginal_error = 0.0;      // max |row sum − a| after the last iteration
    std::vector<double> cost_trace;   // ⟨plan_t, C⟩ per iteration when requested
    std::vector<double> dual_trace;   // ⟨f_t, a⟩ + ⟨g_t, b⟩ per iteration when requested
};

struct SinkhornOptions {
    double epsilon = 0.01;
    int max_iter = 1000;
    double tol = 1e-6;
    bool log_domain = true;
    bool record_trace = false;
    bool eps_scaling = true;  // log-domain only: warm-start potentials over ε = max C, max C/2, ...
};

/// Entropic OT by alternating marginal scaling. The log-domain variant keeps
/// dual potentials and uses log-sum-exp, so small ε on unit-scale costs is safe;
/// the plain variant scales K = exp(−C/ε) directly and throws NumericalError
/// when K underflows.
TransportPlan sinkhorn(const Matrix& C, const Vector& a, const Vector& b,
                       const SinkhornOptions& opts = {});

Vector uniform_weights(Eigen::Index n);

}  // namespace rgp
