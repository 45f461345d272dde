#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rgp/common.hpp"
#include "rgp/divergence.hpp"
#include "rgp/net.hpp"
#include "rgp/sampler.hpp"

namespace rgp {

enum class Objective { Rgp, DoubleMmd, Sinkhorn };

std::string to_string(Objective obj);
/// "rgp", "double-mmd", "sinkhorn".
Objective parse_objective(const std::string& text);

struct TrainConfig {
    Objective objective = Objective::Rgp;
    double lambda = 1.0;
    double epsilon = 0.01;  // Sinkhorn only
    double lr = 1e-3;
    int batch_size = 256;
    int epochs = 500;
    std::uint64_t seed = 0;

    TargetKind target_kind = TargetKind::GiHS;
    int latent_dim = 4;
    std::optional<double> radius;        // calibrated when empty
    std::optional<double> inner_radius;  // UbHS only; calibrated when empty
    std::optional<double> gamma;         // from training data when empty

    double leaky_slope = 0.01;
    int sinkhorn_max_iter = 1000;
    double sinkhorn_tol = 1e-6;

    void validate() const;
};

/// Fixed radii when set, otherwise the default quantile calibration seeded from cfg.seed.
TargetSpec resolve_target(const TrainConfig& cfg);

struct LossTerms {
    double term1 = 0.0;  // MMD² or transport term
    double term2 = 0.0;  // reconstruction (mean squared error or data-space MMD²)
    double total = 0.0;
};

struct ObjectiveResult {
    LossTerms terms;
    MlpGrads encoder_grads;
    MlpGrads decoder_grads;
    bool transport_converged = true;
};

/// MMD²(f(X), Z) + (λ/n) Σ ‖x_i − g(f(x_i))‖².
ObjectiveResult objective_rgp(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                              const Matrix& Z, double lambda, const KernelConfig& kernel);

/// MMD²(f(X), Z) + λ·MMD²(g(f(X)), X).
ObjectiveResult objective_double_mmd(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                                     const Matrix& Z, double lambda, const KernelConfig& latent_kernel,
                                     const KernelConfig& data_kernel);

/// ⟨P, C⟩ + ε Σ P log P + (λ/n) Σ ‖x_i − g(f(x_i))‖² with P solved on C = cost_matrix(f(X), Z)
/// under uniform marginals, then held fixed for the gradient.
ObjectiveResult objective_sinkhorn(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                                   const Matrix& Z, double lambda, const SinkhornOptions& opts);

/// Same loss for a caller-supplied plan; exact gradient of this function of the weights.
ObjectiveResult objective_sinkhorn_with_plan(const MlpParams& encoder, const MlpParams& decoder,
                                             const Matrix& X, const Matrix& Z, double lambda,
                                             double epsilon, const Matrix& plan);

struct TrainReport {
    std::vector<LossTerms> epochs;  // batch means per epoch
    double wall_time_seconds = 0.0;
    std::size_t steps = 0;
    std::size_t unconverged_transport = 0;
    std::vector<std::string> warnings;
};

struct TrainResult {
    MlpParams encoder;
    MlpParams decoder;
    TargetSpec target;
    KernelConfig kernel;
    TrainReport report;
};

/// Called once per mini-batch with 0-based epoch and batch indices and the target draw used.
using BatchObserver = std::function<void(int epoch, std::size_t batch, const Matrix& z_batch)>;

/// X holds standardized training rows (normals only).
TrainResult train(const Matrix& X, const TrainConfig& cfg, const BatchObserver& observer = {});

/// epoch,term1,term2,total
void write_report_csv(std::ostream& out, const TrainReport& report);

}  // namespace rgp
