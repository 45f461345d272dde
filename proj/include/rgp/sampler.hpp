#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rgp/common.hpp"

namespace rgp {

/// The four bounded latent targets: Gaussian in hypersphere, uniform in
/// hypersphere, uniform between two hyperspheres, uniform on a hypersphere.
enum class TargetKind { GiHS, UiHS, UbHS, UoHS };

std::string to_string(TargetKind kind);
/// Case-insensitive; accepts "gihs", "uihs", "ubhs", "uohs".
TargetKind parse_target_kind(std::string_view name);

struct TargetSpec {
    TargetKind kind = TargetKind::UoHS;
    int dim = 1;
    double radius = 1.0;
    double inner_radius = 0.0;  // only meaningful for UbHS

    /// Validates the invariants and zeroes inner_radius for non-UbHS kinds.
    static TargetSpec make(TargetKind kind, int dim, double radius, double inner_radius = 0.0);

    /// True when ‖z‖ lies in the support of this target (1e-9 relative slack).
    bool in_support(double norm) const;
};

struct SampleBatch {
    Matrix points;  // n × dim
    TargetSpec spec;
    std::size_t base_draws = 0;  // draws from the base distribution, including rejected ones
};

// Quantiles used to derive default radii from the untruncated base distributions.
inline constexpr double kOuterQuantile = 0.9;
inline constexpr double kShellOuterQuantile = 0.95;
inline constexpr double kShellInnerQuantile = 0.05;
inline constexpr std::size_t kDefaultTrialCount = 100000;

/// ⌈p·trial_count⌉-th smallest ℓ2 norm among trial_count draws from N(0, I_d)
/// (GiHS) or U(−1,1)^d (UiHS).
double calibrate_radius(TargetKind kind, int dim, double p, std::size_t trial_count, Rng& rng);

/// Target with radii calibrated the standard way: p=0.9 for GiHS/UiHS,
/// p=0.95/0.05 on the uniform-cube base for UbHS, r=1 for UoHS.
TargetSpec default_target(TargetKind kind, int dim, Rng& rng,
                          std::size_t trial_count = kDefaultTrialCount);

SampleBatch sample(const TargetSpec& spec, std::size_t n, Rng& rng);

/// Uniform-in-ball by hypercube rejection. Acceptance rate is the volume
/// ratio, so this is only practical for small dim; kept as a reference.
Matrix sample_ball_by_rejection(int dim, double radius, std::size_t n, Rng& rng,
                                std::size_t* base_draws = nullptr);

/// Upper bound on Pr(‖z‖ ≥ r) for z ~ N(0, I_d); requires r > sqrt(d).
double prop1_bound(int dim, double r);
/// Upper bound d/(3t²) on Pr(‖z‖ ≥ r·t) for z ~ U(−r, r)^d; may exceed 1.
double prop2_bound(int dim, double t);
/// Volume of the unit d-ball over the volume of [−1, 1]^d.
double volume_ratio_eta(int dim);
/// Points per unit volume when n samples fill the support; +inf for UoHS.
double density(const TargetSpec& spec, std::size_t n);

/// One row per sample, '.' decimal, 17 significant digits.
void write_samples_csv(std::ostream& out, const SampleBatch& batch, bool header);

}  // namespace rgp
