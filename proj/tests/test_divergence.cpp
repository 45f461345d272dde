#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rgp/divergence.hpp"

using namespace rgp;

namespace {

Matrix col(std::initializer_list<double> v) {
    Matrix M(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) M(i++, 0) = x;
    return M;
}

}  // namespace

TEST(GammaFromData, HandValues) {
    EXPECT_DOUBLE_EQ(gamma_from_data(col({0, 2})).gamma, 0.25);
    EXPECT_NEAR(gamma_from_data(col({0, 1, 2})).gamma, 9.0 / 16.0, 1e-15);
    EXPECT_THROW(gamma_from_data(col({3, 3})), DegenerateData);
    EXPECT_THROW(gamma_from_data(col({3})), InvalidArgument);
}

TEST(Kernel, Bounds) {
    const auto k = KernelConfig::make(0.7);
    Rng rng(1);
    const Matrix A = oracle::random_matrix(20, 3, rng);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        EXPECT_EQ(k(A.row(i), A.row(i)), 1.0);
        for (Eigen::Index j = 0; j < A.rows(); ++j) {
            EXPECT_GT(k(A.row(i), A.row(j)), 0.0);
            EXPECT_LE(k(A.row(i), A.row(j)), 1.0);
        }
    }
    EXPECT_THROW(KernelConfig::make(0.0), InvalidArgument);
}

TEST(Mmd2, HandCases) {
    const auto k = KernelConfig::make(1.0);
    const Matrix a = col({0.3, 0.3});
    EXPECT_EQ(mmd2_unbiased(a, a, k), 0.0);
    EXPECT_NEAR(mmd2_unbiased(col({0, 0}), col({1, 1}), k), 2.0 - 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(2.0 - 2.0 * std::exp(-1.0), 1.26424, 1e-5);
}

TEST(Mmd2, MatchesNaiveOracle) {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const Matrix X = oracle::random_matrix(7, 3, rng), Y = oracle::random_matrix(5, 3, rng, 1.5);
        EXPECT_NEAR(mmd2_unbiased(X, Y, KernelConfig::make(0.4)), oracle::mmd2(X, Y, 0.4), 1e-13);
    }
}

TEST(Mmd2, RowPermutationInvariance) {
    Rng rng(3);
    const Matrix X = oracle::random_matrix(9, 2, rng), Y = oracle::random_matrix(6, 2, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> px(9), py(6);
    px.setIdentity();
    py.setIdentity();
    std::shuffle(px.indices().data(), px.indices().data() + 9, rng);
    std::shuffle(py.indices().data(), py.indices().data() + 6, rng);
    const auto k = KernelConfig::make(0.5);
    EXPECT_NEAR(mmd2_unbiased(px * X, py * Y, k), mmd2_unbiased(X, Y, k), 1e-14);
}

TEST(Mmd2, RejectsBadShapes) {
    const auto k = KernelConfig::make(1.0);
    EXPECT_THROW(mmd2_unbiased(Matrix::Zero(3, 2), Matrix::Zero(3, 3), k), InvalidArgument);
    EXPECT_THROW(mmd2_unbiased(Matrix::Zero(1, 2), Matrix::Zero(3, 2), k), InvalidArgument);
}

TEST(Mmd2, UnbiasedUnderNull) {
    Rng rng(4);
    const auto k = KernelConfig::make(0.5);
    const int trials = 300;
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double v = mmd2_unbiased(oracle::random_matrix(100, 2, rng), oracle::random_matrix(100, 2, rng), k);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sq / trials - mean * mean) / (trials - 1));
    EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(Mmd2Grad, MatchesFiniteDifferences) {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        Matrix X = oracle::random_matrix(5, 3, rng);
        const Matrix Y = oracle::random_matrix(5, 3, rng);
        const auto k = KernelConfig::make(0.3);
        const Matrix g = mmd2_grad_x(X, Y, k);
        const Matrix fd = oracle::fd_matrix(X, [&] { return mmd2_unbiased(X, Y, k); });
        EXPECT_LE(oracle::rel_err(g.reshaped(), fd.reshaped()), 1e-5);
    }
}

TEST(Mmd2Grad, SymmetricConfigurationIsAntisymmetric) {
    const Matrix X = col({-0.7, 0.7});
    const Matrix g = mmd2_grad_x(X, X, KernelConfig::make(1.0));
    EXPECT_NEAR(g(0, 0), -g(1, 0), 1e-15);
}

TEST(Mmd2Grad, FarCrossTermVanishes) {
    const Matrix X = col({0.0, 0.5}), Y = col({100.0, 101.0});
    const auto k = KernelConfig::make(1.0);
    const Matrix g = mmd2_grad_x(X, Y, k);
    // within-X term only: d/dx_a (2/(m(m-1))) Σ_{i≠j} k = (2/2)·2·(−2γ)k(x_a − x_b)
    const double kab = std::exp(-0.25);
    EXPECT_NEAR(g(0, 0), -2.0 * kab * (0.0 - 0.5), 1e-15);
    EXPECT_NEAR(g(1, 0), -2.0 * kab * (0.5 - 0.0), 1e-15);
}

TEST(CostMatrix, Values) {
    EXPECT_EQ(cost_matrix(col({0}), col({0}))(0, 0), 0.0);
    const Matrix C = cost_matrix(col({0, 1}), col({2}));
    EXPECT_EQ(C(0, 0), 4.0);
    EXPECT_EQ(C(1, 0), 1.0);
    Rng rng(6);
    const Matrix A = oracle::random_matrix(4, 3, rng), B = oracle::random_matrix(6, 3, rng);
    EXPECT_TRUE(cost_matrix(A, B).isApprox(cost_matrix(B, A).transpose(), 0.0));
    EXPECT_THROW(cost_matrix(A, Matrix::Zero(2, 2)), InvalidArgument);
}

TEST(Sinkhorn, ZeroCostGivesUniformPlan) {
    const auto tp = sinkhorn(Matrix::Zero(2, 2), uniform_weights(2), uniform_weights(2));
    EXPECT_EQ(tp.cost, 0.0);
    EXPECT_TRUE(tp.converged);
    EXPECT_TRUE(tp.plan.isApprox(Matrix::Constant(2, 2, 0.25), 1e-12));
}

TEST(Sinkhorn, AntiDiagonalCostGivesDiagonalPlan) {
    Matrix C(2, 2);
    C << 0, 1, 1, 0;
    for (bool log_domain : {true, false}) {
        SinkhornOptions o;
        o.log_domain = log_domain;
        const auto tp = sinkhorn(C, uniform_weights(2), uniform_weights(2), o);
        EXPECT_NEAR(tp.plan(0, 0), 0.5, 1e-6);
        EXPECT_NEAR(tp.plan(1, 1), 0.5, 1e-6);
        EXPECT_LT(tp.plan(0, 1), 1e-6);
        EXPECT_LE(tp.cost, 0.01);
    }
}

TEST(Sinkhorn, MarginalsAndLpGap) {
    Rng rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Matrix C(4, 4);
        for (Eigen::Index i = 0; i < 16; ++i) C.data()[i] = u(rng);
        const double lp = oracle::lp_assignment_cost(C);
        double prev_gap = INFINITY;
        for (double eps : {0.1, 0.01, 0.005}) {
            SinkhornOptions o;
            o.epsilon = eps;
            o.max_iter = 100000;
            const auto tp = sinkhorn(C, uniform_weights(4), uniform_weights(4), o);
            ASSERT_TRUE(tp.converged);
            EXPECT_LE((tp.plan.rowwise().sum() - uniform_weights(4)).cwiseAbs().maxCoeff(), 1e-6);
            EXPECT_LE((tp.plan.colwise().sum().transpose() - uniform_weights(4)).cwiseAbs().maxCoeff(), 1e-6);
            EXPECT_GE(tp.cost, 0.0);
            EXPECT_TRUE((tp.plan.array() >= 0.0).all());
            const double gap = std::abs(tp.cost - lp);
            EXPECT_LE(gap, prev_gap + 1e-9) << "eps=" << eps;
            prev_gap = gap;
        }
        EXPECT_LE(prev_gap, 1e-2);
    }
}

TEST(Sinkhorn, LogAndPlainAgree) {
    Rng rng(8);
    const Matrix C = cost_matrix(oracle::random_matrix(6, 2, rng), oracle::random_matrix(5, 2, rng));
    SinkhornOptions o;
    o.epsilon = 0.5;
    o.tol = 1e-13;
    o.max_iter = 100000;
    const auto a = sinkhorn(C, uniform_weights(6), uniform_weights(5), o);
    o.log_domain = false;
    const auto b = sinkhorn(C, uniform_weights(6), uniform_weights(5), o);
    EXPECT_TRUE(a.plan.isApprox(b.plan, 1e-8));
}

TEST(Sinkhorn, PlainModeUnderflowAdvisesLogDomain) {
    Matrix C(2, 2);
    C << 0, 1000, 1000, 0;
    Matrix D = C;
    D(0, 0) = 1000;  // a full row of large costs underflows exp(−C/ε)
    SinkhornOptions o;
    o.log_domain = false;
    o.epsilon = 0.01;
    try {
        sinkhorn(D, uniform_weights(2), uniform_weights(2), o);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("log-domain"), std::string::npos);
    }
    o.log_domain = true;
    EXPECT_NO_THROW(sinkhorn(D, uniform_weights(2), uniform_weights(2), o));
}

TEST(Sinkhorn, RejectsNonSimplexMarginals) {
    Vector bad(2);
    bad << 0.6, 0.6;
    EXPECT_THROW(sinkhorn(Matrix::Zero(2, 2), bad, uniform_weights(2)), InvalidArgument);
    bad << 1.5, -0.5;
    EXPECT_THROW(sinkhorn(Matrix::Zero(2, 2), bad, uniform_weights(2)), InvalidArgument);
    SinkhornOptions o;
    o.epsilon = 0.0;
    EXPECT_THROW(sinkhorn(Matrix::Zero(2, 2), uniform_weights(2), uniform_weights(2), o), InvalidArgument);
}

TEST(Sinkhorn, DualTraceNonDecreasing) {
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (bool log_domain : {true, false}) {
        for (int t = 0; t < 10; ++t) {
            Matrix C(5, 5);
            for (Eigen::Index i = 0; i < 25; ++i) C.data()[i] = u(rng);
            SinkhornOptions o;
            o.epsilon = 0.05;
            o.record_trace = true;
            o.tol = 1e-12;
            o.max_iter = 200;
            o.log_domain = log_domain;
            const auto tp = sinkhorn(C, uniform_weights(5), uniform_weights(5), o);
            ASSERT_EQ(tp.dual_trace.size(), static_cast<std::size_t>(tp.iterations));
            for (std::size_t i = 1; i < tp.dual_trace.size(); ++i)
                EXPECT_GE(tp.dual_trace[i], tp.dual_trace[i - 1] - 1e-12) << "trial " << t << " iter " << i;
            EXPECT_NEAR(tp.cost_trace.back(), tp.cost, 1e-12);
        }
    }
}

TEST(Sinkhorn, EpsScalingMatchesColdStart) {
    Rng rng(10);
    const Matrix C = cost_matrix(oracle::random_matrix(6, 2, rng), oracle::random_matrix(6, 2, rng));
    SinkhornOptions o;
    o.epsilon = 0.2;
    o.tol = 1e-12;
    o.max_iter = 100000;
    const auto warm = sinkhorn(C, uniform_weights(6), uniform_weights(6), o);
    o.eps_scaling = false;
    const auto cold = sinkhorn(C, uniform_weights(6), uniform_weights(6), o);
    EXPECT_TRUE(warm.converged && cold.converged);
    EXPECT_EQ(cold.warm_iterations, 0);
    EXPECT_TRUE(warm.plan.isApprox(cold.plan, 1e-9));
}
