#pragma once

#include <filesystem>
#include <iosfwd>

#include "rgp/config.hpp"
#include "rgp/dataio.hpp"
#include "rgp/divergence.hpp"
#include "rgp/net.hpp"
#include "rgp/sampler.hpp"
#include "rgp/trainer.hpp"

namespace rgp {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to score new raw rows.
struct Checkpoint {
    TrainConfig config;
    TargetSpec target;
    KernelConfig kernel;
    Standardizer standardizer;
    MlpParams encoder;
    MlpParams decoder;
    Matrix projected_train;
    KeyValues meta;  // free-form: dataset name, score defaults
};

/// Text layout: a version line, key=value header, then networks and the
/// projected training matrix with row-major 17-digit values.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_mlp(std::ostream& out, const std::string& name, const MlpParams& params);
MlpParams read_mlp(std::istream& in, const std::string& name);

}  // namespace rgp
