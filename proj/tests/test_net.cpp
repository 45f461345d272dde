#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rgp/net.hpp"

using namespace rgp;

namespace {

MlpParams single(double w, double b, Activation act) {
    Layer L;
    L.W = Matrix::Constant(1, 1, w);
    L.b = Vector::Constant(1, b);
    L.act = act;
    return MlpParams{{L}};
}

// Sum of ⟨U, forward(net, X)⟩, the scalar whose gradient backward() returns.
double pairing(const MlpParams& net, const Matrix& X, const Matrix& U) {
    return forward(net, X).cwiseProduct(U).sum();
}

}  // namespace

TEST(Forward, IdentityLayerIsIdentityMap) {
    Layer L{Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity()};
    const MlpParams net{{L}};
    Rng rng(1);
    const Matrix X = oracle::random_matrix(4, 3, rng);
    EXPECT_EQ(forward(net, X), X);
}

TEST(Forward, AffineHandValue) {
    Matrix X(1, 1);
    X << 3.0;
    EXPECT_EQ(forward(single(2.0, 1.0, Activation::identity()), X)(0, 0), 7.0);
}

TEST(Forward, TanhSaturates) {
    Matrix X(1, 1);
    X << 50.0;
    EXPECT_NEAR(forward(single(1.0, 0.0, Activation::tanh()), X)(0, 0), 1.0, 1e-15);
}

TEST(Forward, LeakyReluHandValues) {
    Matrix X(2, 1);
    X << -2.0, 3.0;
    const Matrix Y = forward(single(1.0, 0.0, Activation::leaky_relu(0.1)), X);
    EXPECT_DOUBLE_EQ(Y(0, 0), -0.2);
    EXPECT_DOUBLE_EQ(Y(1, 0), 3.0);
}

TEST(Forward, IdentityNetworkEqualsProductOfAffineMaps) {
    auto net = init_params({5, 7, 3}, {Activation::identity(), Activation::identity()}, 3);
    auto& L = net.layers;
    L[0].b.setConstant(0.3);
    L[1].b.setConstant(-0.2);
    Rng rng(2);
    const Matrix X = oracle::random_matrix(6, 5, rng);
    Matrix direct = X * L[0].W.transpose();
    direct.rowwise() += L[0].b.transpose();
    direct = direct * L[1].W.transpose();
    direct.rowwise() += L[1].b.transpose();
    EXPECT_TRUE(forward(net, X).isApprox(direct, 1e-14));
}

TEST(Forward, RejectsDimensionMismatch) {
    const auto net = init_params({4, 2}, {Activation::identity()}, 1);
    EXPECT_THROW(forward(net, Matrix::Zero(3, 5)), InvalidArgument);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
    const auto net = default_encoder(4, 2, 5);
    Rng rng(3);
    const auto r = backward(net, oracle::random_matrix(5, 4, rng), Matrix::Zero(5, 2));
    EXPECT_EQ(r.params.squared_norm(), 0.0);
    EXPECT_EQ(r.input.norm(), 0.0);
}

TEST(Backward, MatchesFiniteDifferencesOnRandomNets) {
    Rng rng(4);
    std::uniform_int_distribution<int> width(2, 9), depth(1, 3), batch(1, 6);
    for (int t = 0; t < 20; ++t) {
        const int layers = depth(rng);
        std::vector<int> dims{width(rng)};
        std::vector<Activation> acts;
        for (int l = 0; l < layers; ++l) {
            dims.push_back(width(rng));
            const bool last = l + 1 == layers;
            acts.push_back(last ? Activation::identity()
                                : (t % 2 == 0 ? Activation::leaky_relu(0.01) : Activation::tanh()));
        }
        MlpParams net = init_params(dims, acts, 100 + static_cast<std::uint64_t>(t));
        for (auto& L : net.layers) L.b = oracle::random_matrix(L.b.size(), 1, rng, 0.1);
        const int B = batch(rng);
        Matrix X = oracle::random_matrix(B, dims.front(), rng);
        const Matrix U = oracle::random_matrix(B, dims.back(), rng);

        const auto r = backward(net, X, U);
        const auto fd_p = oracle::fd_params(net, [&] { return pairing(net, X, U); });
        EXPECT_LE(oracle::rel_err(oracle::flatten(r.params), fd_p), 1e-5) << "instance " << t;
        const Matrix fd_x = oracle::fd_matrix(X, [&] { return pairing(net, X, U); });
        EXPECT_LE(oracle::rel_err(r.input.reshaped(), fd_x.reshaped()), 1e-5) << "instance " << t;
    }
}

TEST(Backward, FourEightThreeNetBatchFive) {
    Rng rng(5);
    MlpParams net = init_params({4, 8, 3}, {Activation::leaky_relu(0.01), Activation::identity()}, 9);
    Matrix X = oracle::random_matrix(5, 4, rng);
    const Matrix U = oracle::random_matrix(5, 3, rng);
    const auto r = backward(net, X, U);
    EXPECT_LE(oracle::rel_err(oracle::flatten(r.params), oracle::fd_params(net, [&] { return pairing(net, X, U); })),
              1e-5);
}

TEST(Backward, LeakySlopeScalesWeightGradient) {
    const double s = 0.05;
    const auto net = single(1.0, 0.0, Activation::leaky_relu(s));
    Matrix Xpos(3, 1), Xneg(3, 1);
    Xpos << 1.0, 2.0, 0.5;
    Xneg = -Xpos;
    const Matrix U = Matrix::Ones(3, 1);
    const double gpos = backward(net, Xpos, U).params.dW[0](0, 0);
    const double gneg = backward(net, Xneg, U).params.dW[0](0, 0);
    EXPECT_NEAR(gneg, -s * gpos, 1e-15);
}

TEST(Backward, CachedAndUncachedAgree) {
    const auto net = default_encoder(3, 2, 7);
    Rng rng(6);
    const Matrix X = oracle::random_matrix(4, 3, rng), U = oracle::random_matrix(4, 2, rng);
    const auto a = backward(net, X, U);
    const auto b = backward(net, forward_cached(net, X), U);
    EXPECT_EQ(oracle::flatten(a.params), oracle::flatten(b.params));
    EXPECT_EQ(a.input, b.input);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    auto net = default_encoder(3, 2, 1);
    const auto before = oracle::flatten(MlpGrads{{net.layers[0].W, net.layers[1].W, net.layers[2].W},
                                                 {net.layers[0].b, net.layers[1].b, net.layers[2].b}});
    auto st = AdamState::make(net, 1e-3);
    adam_step(st, net, MlpGrads::zeros_like(net));
    const auto after = oracle::flatten(MlpGrads{{net.layers[0].W, net.layers[1].W, net.layers[2].W},
                                                {net.layers[0].b, net.layers[1].b, net.layers[2].b}});
    EXPECT_EQ(before, after);
    EXPECT_EQ(st.step_count, 1);
}

TEST(Adam, FirstStepHandValue) {
    auto net = single(0.5, 0.0, Activation::identity());
    auto st = AdamState::make(net, 0.001);
    auto g = MlpGrads::zeros_like(net);
    g.dW[0](0, 0) = 1.0;
    adam_step(st, net, g);
    // m̂ = 1, v̂ = 1 → Δ = −lr/(1 + ε̂)
    EXPECT_NEAR(net.layers[0].W(0, 0) - 0.5, -0.001 / (1.0 + 1e-8), 1e-15);
    EXPECT_NEAR(net.layers[0].W(0, 0) - 0.5, -0.001, 1e-10);
}

TEST(Adam, ConstantGradientStepApproachesLr) {
    auto net = single(0.0, 0.0, Activation::identity());
    auto st = AdamState::make(net, 0.01);
    auto g = MlpGrads::zeros_like(net);
    g.dW[0](0, 0) = -3.7;
    double prev = 0.0, last_step = 0.0;
    for (int i = 0; i < 200; ++i) {
        adam_step(st, net, g);
        last_step = net.layers[0].W(0, 0) - prev;
        prev = net.layers[0].W(0, 0);
        EXPECT_GT(last_step, 0.0);
    }
    EXPECT_NEAR(last_step, 0.01, 1e-9);
}

TEST(Adam, ZeroLrUpdatesMomentsOnly) {
    auto net = default_encoder(3, 2, 2);
    const Matrix W0 = net.layers[0].W;
    auto st = AdamState::make(net, 0.0);
    Rng rng(7);
    auto g = MlpGrads::zeros_like(net);
    for (auto& dW : g.dW) dW = oracle::random_matrix(dW.rows(), dW.cols(), rng);
    adam_step(st, net, g);
    EXPECT_EQ(net.layers[0].W, W0);
    EXPECT_GT(st.first_moment.squared_norm(), 0.0);
    for (const auto& v : st.second_moment.dW) EXPECT_TRUE((v.array() >= 0.0).all());
}

TEST(Adam, NonFiniteGradientThrows) {
    auto net = single(1.0, 0.0, Activation::identity());
    auto st = AdamState::make(net, 1e-3);
    auto g = MlpGrads::zeros_like(net);
    g.db[0][0] = std::nan("");
    EXPECT_THROW(adam_step(st, net, g), NumericalError);
    EXPECT_EQ(net.layers[0].W(0, 0), 1.0);
}

TEST(Init, GlorotBoundsZeroBiasesAndSeeds) {
    const auto a = init_params({6, 4}, {Activation::identity()}, 17);
    const auto b = init_params({6, 4}, {Activation::identity()}, 17);
    const auto c = init_params({6, 4}, {Activation::identity()}, 18);
    const double bound = std::sqrt(6.0 / 10.0);
    EXPECT_EQ(a.layers[0].W.rows(), 4);
    EXPECT_EQ(a.layers[0].W.cols(), 6);
    EXPECT_LE(a.layers[0].W.cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(a.layers[0].b, Vector::Zero(4));
    EXPECT_EQ(a.layers[0].W, b.layers[0].W);
    EXPECT_NE(a.layers[0].W, c.layers[0].W);
    EXPECT_THROW(init_params({6}, {}, 1), InvalidArgument);
    EXPECT_THROW(init_params({6, 4}, {}, 1), InvalidArgument);
}

TEST(Init, DefaultArchitectures) {
    EXPECT_EQ(default_hidden_width(6), 16);
    EXPECT_EQ(default_hidden_width(279), 558);
    const auto enc = default_encoder(6, 4, 1);
    const auto dec = default_decoder(4, 6, 2);
    ASSERT_EQ(enc.layers.size(), 3u);
    EXPECT_EQ(enc.in_dim(), 6);
    EXPECT_EQ(enc.out_dim(), 4);
    EXPECT_EQ(dec.in_dim(), 4);
    EXPECT_EQ(dec.out_dim(), 6);
    EXPECT_EQ(dec.layers[0].W.rows(), 16);
    EXPECT_EQ(enc.layers[2].act, Activation::identity());
    EXPECT_EQ(enc.layers[0].act, Activation::leaky_relu(0.01));
    EXPECT_EQ(enc.param_count(), 6u * 16 + 16 + 16 * 16 + 16 + 16 * 4 + 4);
}

TEST(Activation, TextRoundTrip) {
    for (const auto& a : {Activation::identity(), Activation::tanh(), Activation::leaky_relu(0.2)})
        EXPECT_EQ(parse_activation(to_string(a)), a);
    EXPECT_THROW(parse_activation("relu"), InvalidArgument);
}
