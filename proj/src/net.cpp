#include "rgp/net.hpp"

#include <algorithm>
#include <cmath>

#include "rgp/format.hpp"

namespace rgp {

namespace {

Matrix apply_act(const Activation& act, const Matrix& pre) {
    switch (act.kind) {
        case ActKind::Identity: return pre;
        case ActKind::LeakyReLU: {
            const double s = act.slope;
            return pre.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
        }
        case ActKind::Tanh: return pre.array().tanh().matrix();
    }
    return pre;
}

// dL/dpre given dL/dout, elementwise.
Matrix act_backward(const Activation& act, const Matrix& pre, const Matrix& out_grad) {
    switch (act.kind) {
        case ActKind::Identity: return out_grad;
        case ActKind::LeakyReLU: {
            const double s = act.slope;
            return out_grad.binaryExpr(pre, [s](double g, double v) { return v > 0.0 ? g : s * g; });
        }
        case ActKind::Tanh:
            return (out_grad.array() * (1.0 - pre.array().tanh().square())).matrix();
    }
    return out_grad;
}

void check_input(const MlpParams& params, const Matrix& X) {
    require(!params.layers.empty(), "network has no layers");
    if (X.cols() != params.in_dim())
        throw InvalidArgument("input has " + std::to_string(X.cols()) + " columns, network expects " +
                              std::to_string(params.in_dim()));
}

}  // namespace

std::string to_string(const Activation& act) {
    switch (act.kind) {
        case ActKind::Identity: return "identity";
        case ActKind::Tanh: return "tanh";
        case ActKind::LeakyReLU: return "leaky_relu:" + format_double(act.slope);
    }
    return "?";
}

Activation parse_activation(const std::string& text) {
    if (text == "identity") return Activation::identity();
    if (text == "tanh") return Activation::tanh();
    const std::string prefix = "leaky_relu";
    if (text.rfind(prefix, 0) == 0) {
        if (text.size() == prefix.size()) return Activation::leaky_relu();
        if (text[prefix.size()] == ':') {
            if (auto s = parse_double(std::string_view(text).substr(prefix.size() + 1)))
                return Activation::leaky_relu(*s);
        }
    }
    throw InvalidArgument("unknown activation '" + text + "'");
}

Eigen::Index MlpParams::in_dim() const { return layers.empty() ? 0 : layers.front().W.cols(); }
Eigen::Index MlpParams::out_dim() const { return layers.empty() ? 0 : layers.back().W.rows(); }

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
    return n;
}

void MlpParams::validate() const {
    require(!layers.empty(), "network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        require(L.W.rows() >= 1 && L.W.cols() >= 1, "layer " + std::to_string(l) + " is empty");
        require(L.b.size() == L.W.rows(), "layer " + std::to_string(l) + " bias length mismatch");
        if (l > 0)
            require(L.W.cols() == layers[l - 1].W.rows(),
                    "layer " + std::to_string(l) + " input width does not match previous output");
    }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    for (const auto& l : p.layers) {
        g.dW.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
        g.db.push_back(Vector::Zero(l.b.size()));
    }
    return g;
}

bool MlpGrads::all_finite() const {
    return std::all_of(dW.begin(), dW.end(), [](const Matrix& m) { return m.allFinite(); }) &&
           std::all_of(db.begin(), db.end(), [](const Vector& v) { return v.allFinite(); });
}

double MlpGrads::squared_norm() const {
    double s = 0.0;
    for (const auto& m : dW) s += m.squaredNorm();
    for (const auto& v : db) s += v.squaredNorm();
    return s;
}

ForwardCache forward_cached(const MlpParams& params, const Matrix& X) {
    check_input(params, X);
    ForwardCache cache;
    cache.inputs.reserve(params.layers.size());
    cache.pre.reserve(params.layers.size());
    Matrix h = X;
    for (const auto& L : params.layers) {
        Matrix pre = h * L.W.transpose();
        pre.rowwise() += L.b.transpose();
        Matrix next = apply_act(L.act, pre);
        cache.inputs.push_back(std::move(h));
        cache.pre.push_back(std::move(pre));
        h = std::move(next);
    }
    cache.output = std::move(h);
    return cache;
}

Matrix forward(const MlpParams& params, const Matrix& X) {
    check_input(params, X);
    Matrix h = X;
    for (const auto& L : params.layers) {
        Matrix pre = h * L.W.transpose();
        pre.rowwise() += L.b.transpose();
        h = apply_act(L.act, pre);
    }
    return h;
}

BackwardResult backward(const MlpParams& params, const ForwardCache& cache, const Matrix& upstream) {
    require(cache.pre.size() == params.layers.size(), "forward cache does not match network");
    require(upstream.rows() == cache.output.rows() && upstream.cols() == cache.output.cols(),
            "upstream gradient shape does not match network output");
    BackwardResult out;
    out.params = MlpGrads::zeros_like(params);
    Matrix grad = upstream;
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& L = params.layers[l];
        const Matrix dpre = act_backward(L.act, cache.pre[l], grad);
        out.params.dW[l].noalias() = dpre.transpose() * cache.inputs[l];
        out.params.db[l] = dpre.colwise().sum().transpose();
        grad.noalias() = dpre * L.W;
    }
    out.input = std::move(grad);
    return out;
}

BackwardResult backward(const MlpParams& params, const Matrix& X, const Matrix& upstream) {
    return backward(params, forward_cached(params, X), upstream);
}

AdamState AdamState::make(const MlpParams& params, double lr) {
    require(lr >= 0.0 && std::isfinite(lr), "learning rate must be >= 0");
    AdamState s;
    s.lr = lr;
    s.first_moment = MlpGrads::zeros_like(params);
    s.second_moment = MlpGrads::zeros_like(params);
    return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads) {
    const std::size_t n = params.layers.size();
    require(grads.dW.size() == n && grads.db.size() == n && state.first_moment.dW.size() == n,
            "gradient layout does not match network");
    if (!grads.all_finite()) throw NumericalError("non-finite gradient passed to adam_step");

    ++state.step_count;
    const double b1 = state.beta1, b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    const double lr = state.lr, eps = state.eps_hat;

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        require(param.size() == g.size(), "gradient shape does not match parameter");
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < n; ++l) {
        update(params.layers[l].W, grads.dW[l], state.first_moment.dW[l], state.second_moment.dW[l]);
        update(params.layers[l].b, grads.db[l], state.first_moment.db[l], state.second_moment.db[l]);
    }
}

MlpParams init_params(const std::vector<int>& dims, const std::vector<Activation>& acts,
                      std::uint64_t seed) {
    require(dims.size() >= 2, "need at least one layer (two dims)");
    require(acts.size() == dims.size() - 1, "need one activation per layer");
    for (int d : dims) require(d >= 1, "layer widths must be >= 1");

    Rng rng(seed);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> u(-bound, bound);
        Layer L{Matrix(out, in), Vector::Zero(out), acts[l]};
        // row-major fill so the draw order matches the checkpoint layout
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j) L.W(i, j) = u(rng);
        p.layers.push_back(std::move(L));
    }
    return p;
}

int default_hidden_width(int input_dim) { return std::max(2 * input_dim, 16); }

MlpParams default_encoder(int input_dim, int latent_dim, std::uint64_t seed, double slope) {
    const int h = default_hidden_width(input_dim);
    return init_params({input_dim, h, h, latent_dim},
                       {Activation::leaky_relu(slope), Activation::leaky_relu(slope), Activation::identity()},
                       seed);
}

MlpParams default_decoder(int latent_dim, int input_dim, std::uint64_t seed, double slope) {
    const int h = default_hidden_width(input_dim);
    return init_params({latent_dim, h, h, input_dim},
                       {Activation::leaky_relu(slope), Activation::leaky_relu(slope), Activation::identity()},
                       seed);
}

}  // namespace rgp
