#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "rgp/dataio.hpp"
#include "rgp/metrics.hpp"
#include "rgp/scoring.hpp"
#include "rgp/trainer.hpp"

namespace rgp {

/// Ordered so that echoes are stable.
using KeyValues = std::map<std::string, std::string>;

/// "key = value" lines; '#' starts a comment; later keys override earlier ones.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<input>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies recognized training keys (objective, lambda, epsilon, lr, batch_size,
/// epochs, seed, target, latent_dim, radius, inner_radius, gamma, leaky_slope,
/// sinkhorn_max_iter, sinkhorn_tol) and returns whatever was not recognized.
KeyValues apply_train_keys(TrainConfig& cfg, const KeyValues& kv);
KeyValues train_config_keys(const TrainConfig& cfg);

/// Dataset manifest: where the CSV is, how to label it, and per-dataset defaults.
struct Manifest {
    std::string name;
    std::filesystem::path data;  // resolved against the manifest's directory
    CsvSchema schema;
    double train_fraction = 0.5;
    int k = 3;
    double p = 0.9;
    ScoreMode mode = ScoreMode::Soft;
    Label f1_positive = Label::Abnormal;
    TrainConfig train;
};

/// Unknown keys are rejected.
Manifest parse_manifest(const KeyValues& kv, const std::filesystem::path& base_dir, const std::string& name);
Manifest load_manifest(const std::filesystem::path& path);

/// Number parsing with a field name in the error message.
double parse_real(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);

}  // namespace rgp
