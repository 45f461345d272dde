#include "rgp/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rgp {

std::string to_string(ScoreMode mode) { return mode == ScoreMode::Hard ? "hard" : "soft"; }

ScoreMode parse_score_mode(const std::string& text) {
    if (text == "hard") return ScoreMode::Hard;
    if (text == "soft") return ScoreMode::Soft;
    throw InvalidArgument("unknown score mode '" + text + "' (expected hard|soft)");
}

void ScoreModel::validate() const {
    encoder.validate();
    require(encoder.out_dim() == spec.dim, "encoder output does not match target dim");
    require(projected_train.rows() >= 1, "score model has no projected training rows");
    require(projected_train.cols() == spec.dim, "projected training rows do not match target dim");
    if (mode == ScoreMode::Soft) {
        require(k >= 1, "k must be >= 1");
        require(k <= projected_train.rows(), "k exceeds the number of training rows");
    }
    require(threshold_quantile > 0.0 && threshold_quantile < 1.0, "threshold quantile must lie in (0, 1)");
}

ScoreModel ScoreModel::build(const MlpParams& encoder, const TargetSpec& spec, const Matrix& X_train,
                             ScoreMode mode, int k, double p) {
    return from_projection(encoder, spec, forward(encoder, X_train), mode, k, p);
}

ScoreModel ScoreModel::from_projection(const MlpParams& encoder, const TargetSpec& spec, const Matrix& projected,
                                       ScoreMode mode, int k, double p) {
    ScoreModel m;
    m.encoder = encoder;
    m.spec = spec;
    m.projected_train = projected;
    m.mode = mode;
    m.k = k;
    m.threshold_quantile = p;
    m.validate();
    if (mode == ScoreMode::Soft) require(k < projected.rows(), "leave-one-out calibration needs k < n");
    m.threshold = calibrate_threshold(training_scores(m), p);
    m.calibrated = true;
    return m;
}

double hard_score_latent(const TargetSpec& spec, const RowVector& z) {
    const double norm = z.norm();
    switch (spec.kind) {
        case TargetKind::UoHS: return std::abs(norm - spec.radius);
        case TargetKind::GiHS:
        case TargetKind::UiHS: return norm;
        case TargetKind::UbHS: return (norm - spec.radius) * (norm - spec.inner_radius);
    }
    return norm;
}

double knn_score_latent(const Matrix& reference, const RowVector& z, int k, Eigen::Index skip) {
    const Eigen::Index n = reference.rows() - (skip >= 0 ? 1 : 0);
    require(k >= 1 && k <= n, "k must lie in [1, number of reference rows]");
    require(z.size() == reference.cols(), "latent width does not match reference rows");
    std::vector<std::pair<double, Eigen::Index>> d;
    d.reserve(static_cast<std::size_t>(reference.rows()));
    for (Eigen::Index i = 0; i < reference.rows(); ++i)
        if (i != skip) d.emplace_back((reference.row(i) - z).norm(), i);
    // pair ordering breaks distance ties by the lower row index
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += d[static_cast<std::size_t>(i)].first;
    return s / k;
}

double hard_score(const ScoreModel& model, const RowVector& x) {
    return hard_score_latent(model.spec, forward(model.encoder, x));
}

double soft_score(const ScoreModel& model, const RowVector& x) {
    return knn_score_latent(model.projected_train, forward(model.encoder, x), model.k);
}

Vector score_latent(const ScoreModel& model, const Matrix& Z) {
    Vector s(Z.rows());
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        s[i] = model.mode == ScoreMode::Hard ? hard_score_latent(model.spec, Z.row(i))
                                             : knn_score_latent(model.projected_train, Z.row(i), model.k);
    return s;
}

Vector score(const ScoreModel& model, const Matrix& X) {
    if (X.rows() == 0) return Vector(0);
    return score_latent(model, forward(model.encoder, X));
}

Vector training_scores(const ScoreModel& model) {
    const Matrix& P = model.projected_train;
    Vector s(P.rows());
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        s[i] = model.mode == ScoreMode::Hard ? hard_score_latent(model.spec, P.row(i))
                                             : knn_score_latent(P, P.row(i), model.k, i);
    return s;
}

double calibrate_threshold(const Vector& train_scores, double p) {
    require(train_scores.size() >= 1, "cannot calibrate a threshold on empty scores");
    require(p > 0.0 && p < 1.0, "threshold quantile must lie in (0, 1)");
    std::vector<double> v(train_scores.data(), train_scores.data() + train_scores.size());
    const auto n = v.size();
    // small slack so products like 0.7·10 do not round up past the integer
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, n) - 1;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
    return v[idx];
}

std::vector<Label> apply_threshold(const Vector& scores, double threshold) {
    std::vector<Label> out(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        out[static_cast<std::size_t>(i)] = scores[i] > threshold ? Label::Abnormal : Label::Normal;
    return out;
}

Classification classify(const ScoreModel& model, const Matrix& X) {
    if (!model.calibrated) throw InvalidArgument("score model threshold is not calibrated");
    Classification c;
    c.scores = score(model, X);
    c.labels = apply_threshold(c.scores, model.threshold);
    return c;
}

}  // namespace rgp
