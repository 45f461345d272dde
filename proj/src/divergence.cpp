#include "rgp/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rgp {

namespace {

void check_same_cols(const Matrix& X, const Matrix& Y) {
    if (X.cols() != Y.cols())
        throw InvalidArgument("dimension mismatch: " + std::to_string(X.cols()) + " vs " +
                              std::to_string(Y.cols()) + " columns");
}

// Pairwise squared distances computed per pair (no ‖x‖²+‖y‖²−2xᵀy expansion),
// so coincident points give exactly 0.
Matrix pairwise_sq_dists(const Matrix& X, const Matrix& Y) {
    const Matrix Xt = X.transpose();
    const Matrix Yt = Y.transpose();
    Matrix D(X.rows(), Y.rows());
    for (Eigen::Index j = 0; j < Yt.cols(); ++j)
        for (Eigen::Index i = 0; i < Xt.cols(); ++i) D(i, j) = (Xt.col(i) - Yt.col(j)).squaredNorm();
    return D;
}

Matrix kernel_matrix(const Matrix& X, const Matrix& Y, double gamma) {
    return (-gamma * pairwise_sq_dists(X, Y).array()).exp().matrix();
}

void check_mmd_inputs(const Matrix& X, const Matrix& Y) {
    check_same_cols(X, Y);
    require(X.rows() >= 2 && Y.rows() >= 2, "MMD estimator needs at least 2 rows per sample");
}

void check_simplex(const Vector& w, Eigen::Index n, const char* name) {
    require(w.size() == n, std::string("marginal ") + name + " has wrong length");
    require((w.array() >= 0.0).all(), std::string("marginal ") + name + " has negative entries");
    require(std::abs(w.sum() - 1.0) <= 1e-12, std::string("marginal ") + name + " does not sum to 1");
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
    const double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

double neg_entropy(const Matrix& P) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j)
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            const double p = P(i, j);
            if (p > 0.0) s += p * std::log(p);
        }
    return s;
}

struct LogState {
    Vector f, g;
    Matrix P;
};

// Alternating log-sum-exp updates at a fixed ε, warm-started from st.
void log_stage(const Matrix& C, const Vector& log_a, const Vector& log_b, const Vector& a, const Vector& b,
               double eps, int max_iter, double tol, bool record, LogState& st, TransportPlan& out) {
    const Eigen::Index m = C.rows(), n = C.cols();
    Vector buf_n(n), buf_m(m);
    out.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        for (Eigen::Index i = 0; i < m; ++i) {
            buf_n = (st.g - C.row(i).transpose()) / eps;
            st.f[i] = eps * (log_a[i] - log_sum_exp(buf_n));
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            buf_m = (st.f - C.col(j)) / eps;
            st.g[j] = eps * (log_b[j] - log_sum_exp(buf_m));
        }
        st.P = ((st.f.replicate(1, n) + st.g.transpose().replicate(m, 1) - C) / eps).array().exp().matrix();
        if (!st.P.allFinite()) throw NumericalError("sinkhorn produced non-finite plan entries");
        ++out.iterations;
        out.marginal_error = (st.P.rowwise().sum() - a).cwiseAbs().maxCoeff();
        if (record) {
            out.cost_trace.push_back(st.P.cwiseProduct(C).sum());
            out.dual_trace.push_back(a.dot(st.f) + b.dot(st.g));
        }
        if (out.marginal_error <= tol) {
            out.converged = true;
            return;
        }
    }
}

TransportPlan sinkhorn_log(const Matrix& C, const Vector& a, const Vector& b, const SinkhornOptions& o) {
    const Vector log_a = a.array().log();
    const Vector log_b = b.array().log();
    LogState st{Vector::Zero(C.rows()), Vector::Zero(C.cols()), Matrix()};
    TransportPlan out;
    if (o.eps_scaling) {
        TransportPlan warm;
        for (double e = std::max(C.maxCoeff(), o.epsilon); e > 2.0 * o.epsilon; e *= 0.5)
            log_stage(C, log_a, log_b, a, b, e, std::min(o.max_iter, 100), o.tol, false, st, warm);
        out.warm_iterations = warm.iterations;
    }
    log_stage(C, log_a, log_b, a, b, o.epsilon, o.max_iter, o.tol, o.record_trace, st, out);
    out.plan = std::move(st.P);
    return out;
}

TransportPlan sinkhorn_plain(const Matrix& C, const Vector& a, const Vector& b, const SinkhornOptions& o) {
    const Matrix K = (-C / o.epsilon).array().exp().matrix();
    const auto fail = [] {
        return NumericalError("sinkhorn scaling underflowed or diverged (epsilon too small for the "
                              "cost scale); use the log-domain mode");
    };
    if ((K.rowwise().sum().array() == 0.0).any() || (K.colwise().sum().array() == 0.0).any()) throw fail();
    Vector u = Vector::Ones(C.rows()), v = Vector::Ones(C.cols());
    TransportPlan out;
    Matrix P;
    for (int it = 1; it <= o.max_iter; ++it) {
        u = a.array() / (K * v).array();
        v = b.array() / (K.transpose() * u).array();
        if (!u.allFinite() || !v.allFinite()) throw fail();
        P = u.asDiagonal() * K * v.asDiagonal();
        out.iterations = it;
        out.marginal_error = (P.rowwise().sum() - a).cwiseAbs().maxCoeff();
        if (!std::isfinite(out.marginal_error)) throw fail();
        if (o.record_trace) {
            out.cost_trace.push_back(P.cwiseProduct(C).sum());
            out.dual_trace.push_back(o.epsilon * (a.dot(u.array().log().matrix()) + b.dot(v.array().log().matrix())));
        }
        if (out.marginal_error <= o.tol) {
            out.converged = true;
            break;
        }
    }
    out.plan = std::move(P);
    return out;
}

}  // namespace

KernelConfig KernelConfig::make(double gamma) {
    require(std::isfinite(gamma) && gamma > 0.0, "kernel gamma must be finite and > 0");
    return KernelConfig{gamma};
}

double KernelConfig::operator()(const RowVector& x, const RowVector& y) const {
    return std::exp(-gamma * (x - y).squaredNorm());
}

KernelConfig gamma_from_data(const Matrix& X) {
    require(X.rows() >= 2, "bandwidth heuristic needs at least 2 rows");
    const Eigen::Index n = X.rows();
    const Matrix Xt = X.transpose();
    // Sum over i < j, doubled: identical to the ordered-pair sum.
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) total += (Xt.col(i) - Xt.col(j)).norm();
    const double mean_dist = 2.0 * total / (static_cast<double>(n) * static_cast<double>(n - 1));
    if (!(mean_dist > 0.0)) throw DegenerateData("all rows are identical; mean pairwise distance is 0");
    return KernelConfig::make(1.0 / (mean_dist * mean_dist));
}

double mmd2_unbiased(const Matrix& X, const Matrix& Y, const KernelConfig& cfg) {
    check_mmd_inputs(X, Y);
    const double m = static_cast<double>(X.rows());
    const double n = static_cast<double>(Y.rows());
    Matrix Kxx = kernel_matrix(X, X, cfg.gamma);
    Matrix Kyy = kernel_matrix(Y, Y, cfg.gamma);
    Kxx.diagonal().setZero();
    Kyy.diagonal().setZero();
    const double kxy = kernel_matrix(X, Y, cfg.gamma).sum();
    return Kxx.sum() / (m * (m - 1.0)) + Kyy.sum() / (n * (n - 1.0)) - 2.0 * kxy / (m * n);
}

Matrix mmd2_grad_x(const Matrix& X, const Matrix& Y, const KernelConfig& cfg) {
    check_mmd_inputs(X, Y);
    const double m = static_cast<double>(X.rows());
    const double n = static_cast<double>(Y.rows());
    const double g = cfg.gamma;
    Matrix Kxx = kernel_matrix(X, X, g);
    Kxx.diagonal().setZero();
    const Matrix Kxy = kernel_matrix(X, Y, g);
    // Σ_j K_aj (x_a − w_j) = (K 1)_a x_a − (K W)_a
    const Matrix within = Kxx.rowwise().sum().asDiagonal() * X - Kxx * X;
    const Matrix cross = Kxy.rowwise().sum().asDiagonal() * X - Kxy * Y;
    return (-4.0 * g / (m * (m - 1.0))) * within + (4.0 * g / (m * n)) * cross;
}

Matrix cost_matrix(const Matrix& X, const Matrix& Y) {
    check_same_cols(X, Y);
    return pairwise_sq_dists(X, Y);
}

TransportPlan sinkhorn(const Matrix& C, const Vector& a, const Vector& b, const SinkhornOptions& opts) {
    require(C.rows() >= 1 && C.cols() >= 1, "cost matrix is empty");
    require(opts.epsilon > 0.0 && std::isfinite(opts.epsilon), "sinkhorn epsilon must be > 0");
    require(opts.max_iter >= 1, "sinkhorn max_iter must be >= 1");
    check_simplex(a, C.rows(), "a");
    check_simplex(b, C.cols(), "b");
    require(C.allFinite(), "cost matrix has non-finite entries");

    TransportPlan out = opts.log_domain ? sinkhorn_log(C, a, b, opts) : sinkhorn_plain(C, a, b, opts);
    out.cost = out.plan.cwiseProduct(C).sum();
    out.neg_entropy = neg_entropy(out.plan);
    return out;
}

Vector uniform_weights(Eigen::Index n) {
    require(n >= 1, "need at least one point");
    return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

}  // namespace rgp
