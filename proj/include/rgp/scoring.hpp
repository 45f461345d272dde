#pragma once

#include <string>
#include <vector>

#include "rgp/common.hpp"
#include "rgp/net.hpp"
#include "rgp/sampler.hpp"

namespace rgp {

enum class ScoreMode { Hard, Soft };

std::string to_string(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& text);

struct ScoreModel {
    MlpParams encoder;
    TargetSpec spec;
    Matrix projected_train;  // f(x_i) for every training row
    ScoreMode mode = ScoreMode::Soft;
    int k = 3;
    double threshold_quantile = 0.9;
    double threshold = 0.0;
    bool calibrated = false;

    /// Projects X_train, validates, and calibrates the threshold on the training scores.
    static ScoreModel build(const MlpParams& encoder, const TargetSpec& spec, const Matrix& X_train,
                            ScoreMode mode, int k, double p);
    /// As build, with the training projections already computed.
    static ScoreModel from_projection(const MlpParams& encoder, const TargetSpec& spec, const Matrix& projected,
                                      ScoreMode mode, int k, double p);
    void validate() const;
};

/// Boundary score of a latent point against the target support.
/// UoHS |‖z‖ − r|, GiHS/UiHS ‖z‖, UbHS (‖z‖ − r)(‖z‖ − r′).
double hard_score_latent(const TargetSpec& spec, const RowVector& z);
/// Mean distance from z to its k nearest rows of `reference`, ties to the lower row index.
/// `skip` excludes one reference row (leave-one-out); pass -1 to keep all.
double knn_score_latent(const Matrix& reference, const RowVector& z, int k, Eigen::Index skip = -1);

double hard_score(const ScoreModel& model, const RowVector& x);
double soft_score(const ScoreModel& model, const RowVector& x);

/// Scores for each row of X under model.mode.
Vector score(const ScoreModel& model, const Matrix& X);
/// Same, for rows already in latent space.
Vector score_latent(const ScoreModel& model, const Matrix& Z);

/// Scores of the training rows themselves. In soft mode each row's own
/// projection is left out, so the scores match the test-time situation.
Vector training_scores(const ScoreModel& model);

/// ⌈p·n⌉-th smallest score (1-indexed).
double calibrate_threshold(const Vector& train_scores, double p);

struct Classification {
    Vector scores;
    std::vector<Label> labels;
};

/// abnormal iff score > threshold.
Classification classify(const ScoreModel& model, const Matrix& X);
std::vector<Label> apply_threshold(const Vector& scores, double threshold);

}  // namespace rgp
