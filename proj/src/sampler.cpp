#include "rgp/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "rgp/format.hpp"

namespace rgp {

namespace {

constexpr double kSupportRelTol = 1e-9;

void fill_gaussian(Eigen::Ref<RowVector> row, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = normal(rng);
}

// Uniform direction on the unit sphere.
RowVector unit_direction(int dim, Rng& rng) {
    RowVector g(dim);
    double norm = 0.0;
    do {
        fill_gaussian(g, rng);
        norm = g.norm();
    } while (norm == 0.0);
    return g / norm;
}

std::size_t quantile_index(double p, std::size_t count) {
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(count) - 1e-9));
    return std::clamp<std::size_t>(k, 1, count) - 1;
}

}  // namespace

std::string to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::GiHS: return "gihs";
        case TargetKind::UiHS: return "uihs";
        case TargetKind::UbHS: return "ubhs";
        case TargetKind::UoHS: return "uohs";
    }
    return "?";
}

TargetKind parse_target_kind(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gihs") return TargetKind::GiHS;
    if (lower == "uihs") return TargetKind::UiHS;
    if (lower == "ubhs") return TargetKind::UbHS;
    if (lower == "uohs") return TargetKind::UoHS;
    throw InvalidArgument("unknown target kind '" + std::string(name) + "' (expected gihs|uihs|ubhs|uohs)");
}

TargetSpec TargetSpec::make(TargetKind kind, int dim, double radius, double inner_radius) {
    require(dim >= 1, "target dim must be >= 1");
    require(std::isfinite(radius) && radius > 0.0, "target radius must be > 0");
    TargetSpec spec{kind, dim, radius, 0.0};
    if (kind == TargetKind::UbHS) {
        require(inner_radius > 0.0 && inner_radius < radius,
                "ubhs requires 0 < inner radius < radius");
        spec.inner_radius = inner_radius;
    }
    return spec;
}

bool TargetSpec::in_support(double norm) const {
    const double slack = kSupportRelTol * radius;
    switch (kind) {
        case TargetKind::GiHS:
        case TargetKind::UiHS: return norm <= radius + slack;
        case TargetKind::UbHS:
            return norm <= radius + slack && norm >= inner_radius - kSupportRelTol * inner_radius;
        case TargetKind::UoHS: return std::abs(norm - radius) <= slack;
    }
    return false;
}

double calibrate_radius(TargetKind kind, int dim, double p, std::size_t trial_count, Rng& rng) {
    require(p > 0.0 && p < 1.0, "calibration probability must lie in (0, 1)");
    require(trial_count >= 1000, "calibration needs at least 1000 trials");
    require(dim >= 1, "dim must be >= 1");
    require(kind == TargetKind::GiHS || kind == TargetKind::UiHS,
            "radius calibration applies to gihs/uihs base distributions only");

    std::vector<double> norms(trial_count);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (auto& out : norms) {
        double sq = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double v = kind == TargetKind::GiHS ? normal(rng) : uniform(rng);
            sq += v * v;
        }
        out = std::sqrt(sq);
    }
    const auto k = quantile_index(p, trial_count);
    std::nth_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(k), norms.end());
    return norms[k];
}

TargetSpec default_target(TargetKind kind, int dim, Rng& rng, std::size_t trial_count) {
    switch (kind) {
        case TargetKind::GiHS:
        case TargetKind::UiHS:
            return TargetSpec::make(kind, dim, calibrate_radius(kind, dim, kOuterQuantile, trial_count, rng));
        case TargetKind::UbHS: {
            const double outer = calibrate_radius(TargetKind::UiHS, dim, kShellOuterQuantile, trial_count, rng);
            const double inner = calibrate_radius(TargetKind::UiHS, dim, kShellInnerQuantile, trial_count, rng);
            return TargetSpec::make(kind, dim, outer, inner);
        }
        case TargetKind::UoHS: return TargetSpec::make(kind, dim, 1.0);
    }
    throw InvalidArgument("unknown target kind");
}

SampleBatch sample(const TargetSpec& spec, std::size_t n, Rng& rng) {
    require(n >= 1, "sample count must be >= 1");
    require(spec.dim >= 1 && spec.radius > 0.0, "invalid target spec");
    const int d = spec.dim;
    const double r = spec.radius;
    SampleBatch batch{Matrix(static_cast<Eigen::Index>(n), d), spec, 0};
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    switch (spec.kind) {
        case TargetKind::GiHS: {
            // Rejection from N(0, I_d): keep draws inside the radius-r ball.
            RowVector z(d);
            for (std::size_t i = 0; i < n; ++i) {
                do {
                    fill_gaussian(z, rng);
                    ++batch.base_draws;
                } while (z.norm() > r);
                batch.points.row(static_cast<Eigen::Index>(i)) = z;
            }
            break;
        }
        case TargetKind::UiHS: {
            for (std::size_t i = 0; i < n; ++i) {
                const RowVector u = unit_direction(d, rng);
                const double s = r * std::pow(unit(rng), 1.0 / d);
                batch.points.row(static_cast<Eigen::Index>(i)) = s * u;
            }
            batch.base_draws = n;
            break;
        }
        case TargetKind::UbHS: {
            // Radius by inverse transform of F(s) ∝ s^d − r′^d on [r′, r],
            // written relative to r so large d does not overflow.
            const double ratio_d = std::pow(spec.inner_radius / r, d);
            for (std::size_t i = 0; i < n; ++i) {
                const RowVector u = unit_direction(d, rng);
                const double w = ratio_d + unit(rng) * (1.0 - ratio_d);
                const double s = std::clamp(r * std::pow(w, 1.0 / d), spec.inner_radius, r);
                batch.points.row(static_cast<Eigen::Index>(i)) = s * u;
            }
            batch.base_draws = n;
            break;
        }
        case TargetKind::UoHS: {
            for (std::size_t i = 0; i < n; ++i)
                batch.points.row(static_cast<Eigen::Index>(i)) = r * unit_direction(d, rng);
            batch.base_draws = n;
            break;
        }
    }
    return batch;
}

Matrix sample_ball_by_rejection(int dim, double radius, std::size_t n, Rng& rng,
                                std::size_t* base_draws) {
    require(dim >= 1 && radius > 0.0, "invalid ball");
    std::uniform_real_distribution<double> cube(-radius, radius);
    Matrix out(static_cast<Eigen::Index>(n), dim);
    RowVector z(dim);
    std::size_t draws = 0;
    for (std::size_t i = 0; i < n; ++i) {
        do {
            for (int j = 0; j < dim; ++j) z[j] = cube(rng);
            ++draws;
        } while (z.norm() > radius);
        out.row(static_cast<Eigen::Index>(i)) = z;
    }
    if (base_draws) *base_draws = draws;
    return out;
}

double prop1_bound(int dim, double r) {
    require(dim >= 1, "dim must be >= 1");
    require(r > std::sqrt(static_cast<double>(dim)), "prop1 bound requires r > sqrt(dim)");
    const double alpha = std::sqrt(dim + 2.0 * r * r) - std::sqrt(static_cast<double>(dim));
    return std::exp(-0.5 * alpha);
}

double prop2_bound(int dim, double t) {
    require(dim >= 1, "dim must be >= 1");
    require(t > 0.0, "prop2 bound requires t > 0");
    return dim / (3.0 * t * t);
}

double volume_ratio_eta(int dim) {
    require(dim >= 1, "dim must be >= 1");
    const double d = dim;
    const double log_eta = 0.5 * d * std::log(M_PI) - std::log(d) - (d - 1.0) * std::log(2.0) - std::lgamma(0.5 * d);
    return std::exp(log_eta);
}

double density(const TargetSpec& spec, std::size_t n) {
    require(n >= 1, "n must be >= 1");
    const double d = spec.dim;
    // log of Γ(d/2+1)/π^{d/2}, the inverse unit-ball volume
    const double log_inv_unit_ball = std::lgamma(0.5 * d + 1.0) - 0.5 * d * std::log(M_PI);
    switch (spec.kind) {
        case TargetKind::GiHS:
        case TargetKind::UiHS:
            return static_cast<double>(n) * std::exp(log_inv_unit_ball - d * std::log(spec.radius));
        case TargetKind::UbHS: {
            const double shell = std::pow(spec.radius, d) - std::pow(spec.inner_radius, d);
            return static_cast<double>(n) * std::exp(log_inv_unit_ball) / shell;
        }
        case TargetKind::UoHS: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

void write_samples_csv(std::ostream& out, const SampleBatch& batch, bool header) {
    const auto& pts = batch.points;
    if (header) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) out << (j ? "," : "") << 'z' << j;
        out << '\n';
    }
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) out << (j ? "," : "") << format_double(pts(i, j));
        out << '\n';
    }
}

}  // namespace rgp
