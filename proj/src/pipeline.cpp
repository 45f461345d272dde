#include "rgp/pipeline.hpp"

#include <algorithm>

#include "rgp/format.hpp"

namespace rgp {

ModeEval evaluate_mode(const ScoreModel& model, const Matrix& X_test, const std::vector<Label>& labels,
                       Label positive) {
    const Classification c = classify(model, X_test);
    ModeEval out;
    out.eval = evaluate(c.scores, c.labels, labels, positive);
    out.f1_abnormal = f1(c.labels, labels, Label::Abnormal).f1;
    out.f1_normal = f1(c.labels, labels, Label::Normal).f1;
    out.threshold = model.threshold;
    return out;
}

Experiment run_experiment(const LabeledDataset& ds, const Manifest& manifest, const TrainConfig& cfg) {
    Experiment ex;
    ex.split = one_class_split(ds, manifest.train_fraction, cfg.seed);
    ex.trained = train(ex.split.train.features, cfg);
    const Matrix projected = forward(ex.trained.encoder, ex.split.train.features);
    const auto& labels = *ex.split.test.labels;
    for (ScoreMode mode : {ScoreMode::Hard, ScoreMode::Soft}) {
        const ScoreModel model =
            ScoreModel::from_projection(ex.trained.encoder, ex.trained.target, projected, mode, manifest.k, manifest.p);
        (mode == ScoreMode::Hard ? ex.hard : ex.soft) =
            evaluate_mode(model, ex.split.test.features, labels, manifest.f1_positive);
    }
    return ex;
}

Checkpoint make_checkpoint(const TrainResult& trained, const TrainConfig& cfg, const Standardizer& standardizer,
                           const Matrix& X_train_std, const Manifest& manifest) {
    Checkpoint ck;
    ck.config = cfg;
    ck.target = trained.target;
    ck.kernel = trained.kernel;
    ck.standardizer = standardizer;
    ck.encoder = trained.encoder;
    ck.decoder = trained.decoder;
    ck.projected_train = forward(trained.encoder, X_train_std);
    ck.meta = {
        {"dataset", manifest.name},
        {"mode", to_string(manifest.mode)},
        {"k", std::to_string(manifest.k)},
        {"p", format_double(manifest.p)},
        {"f1_positive", to_string(manifest.f1_positive)},
        {"train_fraction", format_double(manifest.train_fraction)},
    };
    return ck;
}

Matrix prepare_features(const Checkpoint& ckpt, const LabeledDataset& ds) {
    const auto& want = ckpt.standardizer.input_columns;
    Matrix raw(ds.features.rows(), static_cast<Eigen::Index>(want.size()));
    for (std::size_t j = 0; j < want.size(); ++j) {
        const auto it = std::find(ds.columns.begin(), ds.columns.end(), want[j]);
        if (it == ds.columns.end()) throw InvalidArgument("data is missing feature column '" + want[j] + "'");
        raw.col(static_cast<Eigen::Index>(j)) = ds.features.col(it - ds.columns.begin());
    }
    return ckpt.standardizer.apply(raw);
}

ScoreModel score_model_from(const Checkpoint& ckpt, ScoreMode mode, int k, double p) {
    return ScoreModel::from_projection(ckpt.encoder, ckpt.target, ckpt.projected_train, mode, k, p);
}

}  // namespace rgp
