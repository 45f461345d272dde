#include "rgp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rgp/format.hpp"

namespace rgp {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

void check_batch(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X, const Matrix& Z) {
    require(X.rows() == Z.rows(), "data and target batches differ in size");
    require(X.cols() == encoder.in_dim(), "batch width does not match encoder input");
    require(Z.cols() == encoder.out_dim(), "target width does not match encoder output");
    require(decoder.in_dim() == encoder.out_dim() && decoder.out_dim() == encoder.in_dim(),
            "decoder does not mirror encoder dimensions");
}

// Backprop a latent gradient and a reconstruction gradient through both nets.
void backprop_pair(const MlpParams& encoder, const MlpParams& decoder, const ForwardCache& enc,
                   const ForwardCache& dec, const Matrix& latent_grad, const Matrix& recon_grad,
                   ObjectiveResult& out) {
    BackwardResult db = backward(decoder, dec, recon_grad);
    BackwardResult eb = backward(encoder, enc, latent_grad + db.input);
    out.decoder_grads = std::move(db.params);
    out.encoder_grads = std::move(eb.params);
}

}  // namespace

std::string to_string(Objective obj) {
    switch (obj) {
        case Objective::Rgp: return "rgp";
        case Objective::DoubleMmd: return "double-mmd";
        case Objective::Sinkhorn: return "sinkhorn";
    }
    return "?";
}

Objective parse_objective(const std::string& text) {
    if (text == "rgp") return Objective::Rgp;
    if (text == "double-mmd") return Objective::DoubleMmd;
    if (text == "sinkhorn") return Objective::Sinkhorn;
    throw InvalidArgument("unknown objective '" + text + "' (expected rgp|double-mmd|sinkhorn)");
}

void TrainConfig::validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be > 0");
    require(std::isfinite(lr) && lr > 0.0, "learning rate must be > 0");
    require(batch_size >= 2, "batch size must be >= 2");
    require(epochs >= 1, "epochs must be >= 1");
    require(latent_dim >= 1, "latent dim must be >= 1");
    require(leaky_slope >= 0.0 && leaky_slope < 1.0, "leaky slope must lie in [0, 1)");
    require(sinkhorn_max_iter >= 1 && sinkhorn_tol > 0.0, "invalid sinkhorn settings");
    if (radius) require(*radius > 0.0, "radius must be > 0");
    if (gamma) require(*gamma > 0.0, "gamma must be > 0");
}

TargetSpec resolve_target(const TrainConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, 0));
    if (cfg.target_kind == TargetKind::UoHS) return TargetSpec::make(TargetKind::UoHS, cfg.latent_dim, cfg.radius.value_or(1.0));
    if (cfg.target_kind == TargetKind::UbHS) {
        const double outer = cfg.radius ? *cfg.radius
                                        : calibrate_radius(TargetKind::UiHS, cfg.latent_dim, kShellOuterQuantile,
                                                           kDefaultTrialCount, rng);
        const double inner = cfg.inner_radius ? *cfg.inner_radius
                                              : calibrate_radius(TargetKind::UiHS, cfg.latent_dim, kShellInnerQuantile,
                                                                 kDefaultTrialCount, rng);
        return TargetSpec::make(TargetKind::UbHS, cfg.latent_dim, outer, inner);
    }
    const double r = cfg.radius ? *cfg.radius
                                : calibrate_radius(cfg.target_kind, cfg.latent_dim, kOuterQuantile, kDefaultTrialCount, rng);
    return TargetSpec::make(cfg.target_kind, cfg.latent_dim, r);
}

ObjectiveResult objective_rgp(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                              const Matrix& Z, double lambda, const KernelConfig& kernel) {
    check_batch(encoder, decoder, X, Z);
    const double n = static_cast<double>(X.rows());
    const ForwardCache enc = forward_cached(encoder, X);
    const ForwardCache dec = forward_cached(decoder, enc.output);
    const Matrix diff = dec.output - X;

    ObjectiveResult out;
    out.terms.term1 = mmd2_unbiased(enc.output, Z, kernel);
    out.terms.term2 = diff.squaredNorm() / n;
    out.terms.total = out.terms.term1 + lambda * out.terms.term2;
    backprop_pair(encoder, decoder, enc, dec, mmd2_grad_x(enc.output, Z, kernel), (2.0 * lambda / n) * diff, out);
    return out;
}

ObjectiveResult objective_double_mmd(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                                     const Matrix& Z, double lambda, const KernelConfig& latent_kernel,
                                     const KernelConfig& data_kernel) {
    check_batch(encoder, decoder, X, Z);
    const ForwardCache enc = forward_cached(encoder, X);
    const ForwardCache dec = forward_cached(decoder, enc.output);

    ObjectiveResult out;
    out.terms.term1 = mmd2_unbiased(enc.output, Z, latent_kernel);
    out.terms.term2 = mmd2_unbiased(dec.output, X, data_kernel);
    out.terms.total = out.terms.term1 + lambda * out.terms.term2;
    backprop_pair(encoder, decoder, enc, dec, mmd2_grad_x(enc.output, Z, latent_kernel),
                  lambda * mmd2_grad_x(dec.output, X, data_kernel), out);
    return out;
}

ObjectiveResult objective_sinkhorn_with_plan(const MlpParams& encoder, const MlpParams& decoder,
                                             const Matrix& X, const Matrix& Z, double lambda,
                                             double epsilon, const Matrix& plan) {
    check_batch(encoder, decoder, X, Z);
    require(plan.rows() == X.rows() && plan.cols() == Z.rows(), "plan shape does not match batch");
    const double n = static_cast<double>(X.rows());
    const ForwardCache enc = forward_cached(encoder, X);
    const ForwardCache dec = forward_cached(decoder, enc.output);
    const Matrix& F = enc.output;
    const Matrix diff = dec.output - X;

    double plogp = 0.0;
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
        for (Eigen::Index i = 0; i < plan.rows(); ++i)
            if (plan(i, j) > 0.0) plogp += plan(i, j) * std::log(plan(i, j));

    ObjectiveResult out;
    out.terms.term1 = plan.cwiseProduct(cost_matrix(F, Z)).sum() + epsilon * plogp;
    out.terms.term2 = diff.squaredNorm() / n;
    out.terms.total = out.terms.term1 + lambda * out.terms.term2;
    // ∂/∂F_i Σ_j P_ij ‖F_i − Z_j‖² = 2 (Σ_j P_ij) F_i − 2 (P Z)_i
    const Matrix latent_grad = 2.0 * (plan.rowwise().sum().asDiagonal() * F - plan * Z);
    backprop_pair(encoder, decoder, enc, dec, latent_grad, (2.0 * lambda / n) * diff, out);
    return out;
}

ObjectiveResult objective_sinkhorn(const MlpParams& encoder, const MlpParams& decoder, const Matrix& X,
                                   const Matrix& Z, double lambda, const SinkhornOptions& opts) {
    check_batch(encoder, decoder, X, Z);
    const Matrix F = forward(encoder, X);
    const TransportPlan tp =
        sinkhorn(cost_matrix(F, Z), uniform_weights(F.rows()), uniform_weights(Z.rows()), opts);
    ObjectiveResult out = objective_sinkhorn_with_plan(encoder, decoder, X, Z, lambda, opts.epsilon, tp.plan);
    out.transport_converged = tp.converged;
    return out;
}

TrainResult train(const Matrix& X, const TrainConfig& cfg, const BatchObserver& observer) {
    cfg.validate();
    require(X.rows() >= 2, "training needs at least 2 rows");
    require(X.allFinite(), "training data has non-finite entries");
    const auto start = std::chrono::steady_clock::now();
    const auto n = static_cast<std::size_t>(X.rows());
    const int m = static_cast<int>(X.cols());

    TrainResult res;
    res.target = resolve_target(cfg);
    res.kernel = cfg.gamma ? KernelConfig::make(*cfg.gamma) : gamma_from_data(X);
    res.encoder = default_encoder(m, cfg.latent_dim, derive_seed(cfg.seed, 1), cfg.leaky_slope);
    res.decoder = default_decoder(cfg.latent_dim, m, derive_seed(cfg.seed, 2), cfg.leaky_slope);
    Rng rng(derive_seed(cfg.seed, 3));

    AdamState enc_opt = AdamState::make(res.encoder, cfg.lr);
    AdamState dec_opt = AdamState::make(res.decoder, cfg.lr);
    SinkhornOptions sk;
    sk.epsilon = cfg.epsilon;
    sk.max_iter = cfg.sinkhorn_max_iter;
    sk.tol = cfg.sinkhorn_tol;

    // Balanced batches: ⌈n/bs⌉ of them, sizes differing by at most one, each ≥ 2.
    const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    const std::size_t n_batches = std::max<std::size_t>(1, std::min((n + bs - 1) / bs, n / 2));

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        LossTerms acc;
        std::size_t offset = 0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t size = n / n_batches + (b < n % n_batches ? 1 : 0);
            Matrix xb(static_cast<Eigen::Index>(size), m);
            for (std::size_t i = 0; i < size; ++i) xb.row(static_cast<Eigen::Index>(i)) = X.row(order[offset + i]);
            offset += size;
            const Matrix zb = sample(res.target, size, rng).points;
            if (observer) observer(epoch, b, zb);

            ObjectiveResult r;
            switch (cfg.objective) {
                case Objective::Rgp: r = objective_rgp(res.encoder, res.decoder, xb, zb, cfg.lambda, res.kernel); break;
                case Objective::DoubleMmd:
                    r = objective_double_mmd(res.encoder, res.decoder, xb, zb, cfg.lambda, res.kernel, res.kernel);
                    break;
                case Objective::Sinkhorn: r = objective_sinkhorn(res.encoder, res.decoder, xb, zb, cfg.lambda, sk); break;
            }
            if (!std::isfinite(r.terms.total) || !r.encoder_grads.all_finite() || !r.decoder_grads.all_finite()) {
                std::ostringstream msg;
                msg << "non-finite loss or gradient at epoch " << epoch + 1 << " batch " << b + 1
                    << ": term1=" << format_double(r.terms.term1) << " term2=" << format_double(r.terms.term2)
                    << " total=" << format_double(r.terms.total);
                throw NumericalError(msg.str());
            }
            if (!r.transport_converged) ++res.report.unconverged_transport;
            adam_step(enc_opt, res.encoder, r.encoder_grads);
            adam_step(dec_opt, res.decoder, r.decoder_grads);
            ++res.report.steps;
            acc.term1 += r.terms.term1;
            acc.term2 += r.terms.term2;
            acc.total += r.terms.total;
        }
        const double nb = static_cast<double>(n_batches);
        res.report.epochs.push_back({acc.term1 / nb, acc.term2 / nb, acc.total / nb});
    }
    if (res.report.unconverged_transport > 0)
        res.report.warnings.push_back(std::to_string(res.report.unconverged_transport) +
                                      " sinkhorn solves hit max_iter; gradients used the last iterate");
    res.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
    out << "epoch,term1,term2,total\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const auto& t = report.epochs[e];
        out << e + 1 << ',' << format_double(t.term1) << ',' << format_double(t.term2) << ','
            << format_double(t.total) << '\n';
    }
}

}  // namespace rgp
