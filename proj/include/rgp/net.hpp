#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgp/common.hpp"

namespace rgp {

enum class ActKind { Identity, LeakyReLU, Tanh };

struct Activation {
    ActKind kind = ActKind::Identity;
    double slope = 0.0;  // LeakyReLU only

    static Activation identity() { return {ActKind::Identity, 0.0}; }
    static Activation leaky_relu(double slope = 0.01) { return {ActKind::LeakyReLU, slope}; }
    static Activation tanh() { return {ActKind::Tanh, 0.0}; }

    bool operator==(const Activation&) const = default;
};

/// "identity", "tanh", "leaky_relu:<slope>".
std::string to_string(const Activation& act);
Activation parse_activation(const std::string& text);

/// y = act(W x + b); W is out × in.
struct Layer {
    Matrix W;
    Vector b;
    Activation act;
};

struct MlpParams {
    std::vector<Layer> layers;

    Eigen::Index in_dim() const;
    Eigen::Index out_dim() const;
    std::size_t param_count() const;
    /// Throws InvalidArgument if layer shapes do not chain.
    void validate() const;
};

/// Same layout as MlpParams, used for gradients and Adam moments.
struct MlpGrads {
    std::vector<Matrix> dW;
    std::vector<Vector> db;

    static MlpGrads zeros_like(const MlpParams& p);
    bool all_finite() const;
    double squared_norm() const;
};

/// Activations kept from a forward pass: inputs[l] feeds layer l, pre[l] is W x + b.
struct ForwardCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
    Matrix output;
};

/// X is batch × in (rows are samples).
Matrix forward(const MlpParams& params, const Matrix& X);
ForwardCache forward_cached(const MlpParams& params, const Matrix& X);

struct BackwardResult {
    MlpGrads params;
    Matrix input;  // batch × in
};

/// Gradients of ⟨upstream, forward(params, X)⟩.
BackwardResult backward(const MlpParams& params, const Matrix& X, const Matrix& upstream);
BackwardResult backward(const MlpParams& params, const ForwardCache& cache, const Matrix& upstream);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    long step_count = 0;
    MlpGrads first_moment;
    MlpGrads second_moment;

    static AdamState make(const MlpParams& params, double lr);
};

/// Bias-corrected Adam update, in place. Throws NumericalError on non-finite grads.
void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads);

/// Glorot-uniform weights in ±sqrt(6/(fan_in+fan_out)), zero biases.
/// dims has one more entry than acts.
MlpParams init_params(const std::vector<int>& dims, const std::vector<Activation>& acts,
                      std::uint64_t seed);

/// in → h → h → out with h = max(2·in, 16) for the encoder; the decoder mirrors
/// the encoder widths. Hidden layers use LeakyReLU, the output layer Identity.
int default_hidden_width(int input_dim);
MlpParams default_encoder(int input_dim, int latent_dim, std::uint64_t seed, double slope = 0.01);
MlpParams default_decoder(int latent_dim, int input_dim, std::uint64_t seed, double slope = 0.01);

}  // namespace rgp
