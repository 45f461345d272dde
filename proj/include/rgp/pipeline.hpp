#pragma once

#include <cstdint>

#include "rgp/checkpoint.hpp"
#include "rgp/config.hpp"
#include "rgp/dataio.hpp"
#include "rgp/metrics.hpp"
#include "rgp/scoring.hpp"
#include "rgp/trainer.hpp"

namespace rgp {

struct ModeEval {
    EvalResult eval;           // F1 for the requested positive class, plus AUC
    double f1_abnormal = 0.0;  // F1 with abnormal as positive
    double f1_normal = 0.0;    // F1 with normal as positive
    double threshold = 0.0;
};

struct Experiment {
    OneClassSplit split;
    TrainResult trained;
    ModeEval hard;
    ModeEval soft;
};

ModeEval evaluate_mode(const ScoreModel& model, const Matrix& X_test, const std::vector<Label>& labels,
                       Label positive);

/// Split with `cfg.seed`, train, then score the test split in both modes.
Experiment run_experiment(const LabeledDataset& ds, const Manifest& manifest, const TrainConfig& cfg);

/// Bundles a trained model with the split's standardizer and projected training rows.
Checkpoint make_checkpoint(const TrainResult& trained, const TrainConfig& cfg, const Standardizer& standardizer,
                           const Matrix& X_train_std, const Manifest& manifest);

/// Reorders/selects the checkpoint's input columns from a loaded dataset, then standardizes.
Matrix prepare_features(const Checkpoint& ckpt, const LabeledDataset& ds);

/// Score model from a checkpoint, calibrated on its stored projections.
ScoreModel score_model_from(const Checkpoint& ckpt, ScoreMode mode, int k, double p);

}  // namespace rgp
