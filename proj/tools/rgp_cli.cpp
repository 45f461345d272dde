// rgp: sample targets, train, score, evaluate, export projections, and compare point sets.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rgp/checkpoint.hpp"
#include "rgp/config.hpp"
#include "rgp/dataio.hpp"
#include "rgp/divergence.hpp"
#include "rgp/format.hpp"
#include "rgp/metrics.hpp"
#include "rgp/pipeline.hpp"
#include "rgp/sampler.hpp"
#include "rgp/scoring.hpp"
#include "rgp/trainer.hpp"

namespace fs = std::filesystem;
using namespace rgp;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::uint64_t env_seed() {
    const char* s = std::getenv("RGP_SEED");
    if (!s || !*s) return 0;
    return static_cast<std::uint64_t>(parse_integer("RGP_SEED", s));
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    fn(out);
    if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

// Uses a "label" column automatically when the header has one.
LabeledDataset load_rows(const std::string& path, const std::optional<std::string>& label_column,
                         const std::vector<std::string>& abnormal_values) {
    CsvSchema schema;
    if (!abnormal_values.empty()) schema.abnormal_values = abnormal_values;
    if (label_column) {
        schema.label_column = label_column;
    } else {
        std::ifstream in(path);
        if (!in) throw InvalidArgument("cannot open '" + path + "'");
        std::string header;
        std::getline(in, header);
        std::stringstream ss(header);
        std::string cell;
        while (std::getline(ss, cell, ','))
            if (cell == "label" || cell == "label\r") schema.label_column = "label";
    }
    LabeledDataset ds = load_csv(fs::path(path), schema);
    if (ds.rejected_rows > 0) std::cerr << "note: skipped " << ds.rejected_rows << " unusable rows\n";
    return ds;
}

struct ScoreFlags {
    std::string checkpoint;
    std::string data;
    std::optional<std::string> mode;
    std::optional<int> k;
    std::optional<double> p;
    std::optional<std::string> label_column;
    std::vector<std::string> abnormal_values;
};

void add_score_flags(CLI::App* cmd, ScoreFlags& f, bool data_required = true) {
    cmd->add_option("--checkpoint,-c", f.checkpoint, "Checkpoint written by train")->required()->check(CLI::ExistingFile);
    auto* data = cmd->add_option("--data,-d", f.data, "CSV with the training feature columns")->check(CLI::ExistingFile);
    if (data_required) data->required();
    cmd->add_option("--mode", f.mode, "hard|soft (default: checkpoint setting)")
        ->check(CLI::IsMember({"hard", "soft"}));
    cmd->add_option("--k", f.k, "Neighbours for soft scores")->check(CLI::PositiveNumber);
    cmd->add_option("--p", f.p, "Training-score quantile used as threshold")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--label-column", f.label_column, "Label column name (default: 'label' if present)");
    cmd->add_option("--abnormal-values", f.abnormal_values, "Raw label values meaning abnormal")->delimiter(',');
}

std::string meta_or(const Checkpoint& ck, const std::string& key, const std::string& fallback) {
    const auto it = ck.meta.find(key);
    return it == ck.meta.end() ? fallback : it->second;
}

ScoreModel model_for(const Checkpoint& ck, const ScoreFlags& f) {
    const ScoreMode mode = parse_score_mode(f.mode.value_or(meta_or(ck, "mode", "soft")));
    const int k = f.k.value_or(static_cast<int>(parse_integer("k", meta_or(ck, "k", "3"))));
    const double p = f.p.value_or(parse_real("p", meta_or(ck, "p", "0.9")));
    return score_model_from(ck, mode, k, p);
}

// ---- subcommands -----------------------------------------------------------

struct SampleArgs {
    std::string kind;
    int dim = 0;
    std::optional<double> r;
    std::optional<double> r_inner;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    bool header = false;
};

void cmd_sample(const SampleArgs& a) {
    const TargetKind kind = parse_target_kind(a.kind);
    Rng rng(a.seed);
    TargetSpec spec;
    if (kind == TargetKind::UbHS) {
        if (a.r.has_value() != a.r_inner.has_value())
            throw InvalidArgument("ubhs needs both --r and --r-inner, or neither for calibrated radii");
        spec = a.r ? TargetSpec::make(kind, a.dim, *a.r, *a.r_inner) : default_target(kind, a.dim, rng);
    } else {
        if (a.r_inner) throw InvalidArgument("--r-inner applies to ubhs only");
        spec = a.r ? TargetSpec::make(kind, a.dim, *a.r) : default_target(kind, a.dim, rng);
    }
    const SampleBatch batch = sample(spec, a.n, rng);
    with_output(a.out, [&](std::ostream& os) { write_samples_csv(os, batch, a.header); });
}

struct TrainArgs {
    std::string manifest;
    std::string config;
    std::string out;
    std::optional<std::string> objective;
    std::optional<double> lambda, epsilon, lr, train_fraction, radius, inner_radius, gamma;
    std::optional<int> batch_size, epochs, latent_dim;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> target;
};

void cmd_train(const TrainArgs& a) {
    Manifest m = load_manifest(a.manifest);
    TrainConfig cfg = m.train;
    cfg.seed = env_seed();
    if (!a.config.empty()) {
        KeyValues kv = read_key_values(a.config);
        KeyValues rest = apply_train_keys(cfg, kv);
        for (const auto& [key, value] : rest) {
            if (key == "train_fraction") m.train_fraction = parse_real(key, value);
            else if (key == "k") m.k = static_cast<int>(parse_integer(key, value));
            else if (key == "p") m.p = parse_real(key, value);
            else if (key == "mode") m.mode = parse_score_mode(value);
            else if (key == "f1_positive") m.f1_positive = parse_label(value);
            else throw InvalidArgument("unknown config key '" + key + "'");
        }
    }
    if (a.objective) cfg.objective = parse_objective(*a.objective);
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.epsilon) cfg.epsilon = *a.epsilon;
    if (a.lr) cfg.lr = *a.lr;
    if (a.batch_size) cfg.batch_size = *a.batch_size;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.latent_dim) cfg.latent_dim = *a.latent_dim;
    if (a.seed) cfg.seed = *a.seed;
    if (a.target) cfg.target_kind = parse_target_kind(*a.target);
    if (a.radius) cfg.radius = *a.radius;
    if (a.inner_radius) cfg.inner_radius = *a.inner_radius;
    if (a.gamma) cfg.gamma = *a.gamma;
    if (a.train_fraction) m.train_fraction = *a.train_fraction;
    cfg.validate();

    const LabeledDataset ds = load_csv(m.data, m.schema);
    if (ds.rejected_rows > 0) std::cerr << "note: skipped " << ds.rejected_rows << " unusable rows\n";
    const OneClassSplit split = one_class_split(ds, m.train_fraction, cfg.seed);
    if (!split.train.standardizer->dropped.empty())
        std::cerr << "note: dropped " << split.train.standardizer->dropped.size() << " constant columns\n";

    const TrainResult trained = train(split.train.features, cfg);
    const Checkpoint ck = make_checkpoint(trained, cfg, *split.train.standardizer, split.train.features, m);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    save_checkpoint(dir / "model.ckpt", ck);
    with_output((dir / "report.csv").string(), [&](std::ostream& os) { write_report_csv(os, trained.report); });
    with_output((dir / "train.csv").string(), [&](std::ostream& os) { write_csv(os, split.raw_train); });
    with_output((dir / "test.csv").string(), [&](std::ostream& os) { write_csv(os, split.raw_test); });

    for (const auto& w : trained.report.warnings) std::cerr << "warning: " << w << '\n';
    const LossTerms& last = trained.report.epochs.back();
    std::cout << "term1=" << format_double(last.term1) << '\n'
              << "term2=" << format_double(last.term2) << '\n'
              << "total=" << format_double(last.total) << '\n'
              << "checkpoint=" << (dir / "model.ckpt").string() << '\n';
}

void cmd_score(const ScoreFlags& f, const std::string& out, const std::string& latent_out) {
    const Checkpoint ck = load_checkpoint(f.checkpoint);
    const ScoreModel model = model_for(ck, f);
    const LabeledDataset ds = load_rows(f.data, f.label_column, f.abnormal_values);
    const Matrix X = prepare_features(ck, ds);
    const Matrix Z = X.rows() ? forward(model.encoder, X) : Matrix(0, ck.target.dim);
    const Vector scores = score_latent(model, Z);
    const auto labels = apply_threshold(scores, model.threshold);
    with_output(out, [&](std::ostream& os) {
        os << "row_id,raw_score,predicted_label\n";
        for (Eigen::Index i = 0; i < scores.size(); ++i)
            os << i << ',' << format_double(scores[i]) << ',' << to_string(labels[static_cast<std::size_t>(i)]) << '\n';
    });
    if (!latent_out.empty()) {
        std::vector<std::string> header;
        for (Eigen::Index j = 0; j < Z.cols(); ++j) header.push_back("z" + std::to_string(j));
        with_output(latent_out, [&](std::ostream& os) { write_matrix_csv(os, Z, header); });
    }
}

void cmd_eval(const ScoreFlags& f, const std::optional<std::string>& positive) {
    const Checkpoint ck = load_checkpoint(f.checkpoint);
    const ScoreModel model = model_for(ck, f);
    const LabeledDataset ds = load_rows(f.data, f.label_column, f.abnormal_values);
    if (!ds.labels) throw InvalidArgument("eval needs a label column");
    const Label pos = parse_label(positive.value_or(meta_or(ck, "f1_positive", "abnormal")));
    const ModeEval r = evaluate_mode(model, prepare_features(ck, ds), *ds.labels, pos);
    write_report(std::cout, r.eval);
}

void cmd_project(const ScoreFlags& f, const std::string& out) {
    const Checkpoint ck = load_checkpoint(f.checkpoint);
    if (ck.target.dim != 2) throw InvalidArgument("projection export requires latent dim 2");
    Matrix Z;
    std::vector<std::string> tags;
    if (!f.data.empty()) {
        const LabeledDataset ds = load_rows(f.data, f.label_column, f.abnormal_values);
        Z = forward(ck.encoder, prepare_features(ck, ds));
        for (std::size_t i = 0; i < ds.rows(); ++i)
            tags.push_back(ds.labels ? to_string((*ds.labels)[i]) : "data");
    }
    with_output(out, [&](std::ostream& os) {
        os << "z0,z1,split_tag\n";
        const Matrix& P = ck.projected_train;
        for (Eigen::Index i = 0; i < P.rows(); ++i)
            os << format_double(P(i, 0)) << ',' << format_double(P(i, 1)) << ",train\n";
        for (Eigen::Index i = 0; i < Z.rows(); ++i)
            os << format_double(Z(i, 0)) << ',' << format_double(Z(i, 1)) << ',' << tags[static_cast<std::size_t>(i)]
               << '\n';
    });
}

struct DiagArgs {
    bool mmd = false;
    bool sinkhorn = false;
    std::vector<std::string> files;
    std::optional<double> gamma;
    double epsilon = 0.01;
    int max_iter = 1000;
    double tol = 1e-6;
    bool plain = false;
};

void cmd_diag(const DiagArgs& a) {
    if (a.mmd == a.sinkhorn) throw InvalidArgument("choose exactly one of --mmd or --sinkhorn");
    const Matrix X = read_matrix_csv(fs::path(a.files.at(0)));
    const Matrix Y = read_matrix_csv(fs::path(a.files.at(1)));
    if (X.cols() != Y.cols()) throw InvalidArgument("files have different column counts");
    if (a.mmd) {
        KernelConfig k;
        if (a.gamma) {
            k = KernelConfig::make(*a.gamma);
        } else {
            Matrix both(X.rows() + Y.rows(), X.cols());
            both << X, Y;
            k = gamma_from_data(both);
        }
        std::cout << "mmd2=" << format_double(mmd2_unbiased(X, Y, k)) << '\n'
                  << "gamma=" << format_double(k.gamma) << '\n';
        return;
    }
    SinkhornOptions o;
    o.epsilon = a.epsilon;
    o.max_iter = a.max_iter;
    o.tol = a.tol;
    o.log_domain = !a.plain;
    const TransportPlan tp = sinkhorn(cost_matrix(X, Y), uniform_weights(X.rows()), uniform_weights(Y.rows()), o);
    std::cout << "cost=" << format_double(tp.cost) << '\n'
              << "entropic_cost=" << format_double(tp.cost + a.epsilon * tp.neg_entropy) << '\n'
              << "iterations=" << tp.iterations << '\n'
              << "converged=" << (tp.converged ? "true" : "false") << '\n'
              << "marginal_error=" << format_double(tp.marginal_error) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restricted generative projection for one-class anomaly detection"};
    app.require_subcommand(1);

    std::uint64_t default_seed = 0;
    try {
        default_seed = env_seed();
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    SampleArgs sa;
    sa.seed = default_seed;
    auto* sample_cmd = app.add_subcommand("sample", "Draw points from a bounded target distribution");
    sample_cmd->add_option("--kind", sa.kind, "gihs|uihs|ubhs|uohs")->required();
    sample_cmd->add_option("--dim", sa.dim, "Dimension")->required()->check(CLI::PositiveNumber);
    sample_cmd->add_option("--r", sa.r, "Outer radius (default: calibrated; 1 for uohs)");
    sample_cmd->add_option("--r-inner", sa.r_inner, "Inner radius (ubhs)");
    sample_cmd->add_option("--n", sa.n, "Number of points")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sa.seed, "Seed (default: $RGP_SEED or 0)");
    sample_cmd->add_option("--out,-o", sa.out, "Output CSV (default: stdout)");
    sample_cmd->add_flag("--header", sa.header, "Write a z0..z{d-1} header row");

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train encoder/decoder on the normal rows of a dataset");
    train_cmd->add_option("--manifest,-m", ta.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--config", ta.config, "key=value overrides (flags win)")->check(CLI::ExistingFile);
    train_cmd->add_option("--out,-o", ta.out, "Output directory")->required();
    train_cmd->add_option("--objective", ta.objective, "rgp|double-mmd|sinkhorn")
        ->check(CLI::IsMember({"rgp", "double-mmd", "sinkhorn"}));
    train_cmd->add_option("--lambda", ta.lambda, "Reconstruction weight")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--epsilon", ta.epsilon, "Entropic regularization (sinkhorn)")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", ta.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch-size", ta.batch_size, "Mini-batch size")->check(CLI::Range(2, 1 << 30));
    train_cmd->add_option("--epochs", ta.epochs, "Epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--latent-dim", ta.latent_dim, "Latent dimension")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", ta.seed, "Seed (default: $RGP_SEED or 0)");
    train_cmd->add_option("--target", ta.target, "gihs|uihs|ubhs|uohs");
    train_cmd->add_option("--radius", ta.radius, "Fixed target radius")->check(CLI::PositiveNumber);
    train_cmd->add_option("--inner-radius", ta.inner_radius, "Fixed inner radius (ubhs)")->check(CLI::PositiveNumber);
    train_cmd->add_option("--gamma", ta.gamma, "Fixed kernel gamma")->check(CLI::PositiveNumber);
    train_cmd->add_option("--train-fraction", ta.train_fraction, "Share of normal rows used for training")
        ->check(CLI::Range(0.0, 1.0));

    ScoreFlags score_flags;
    std::string score_out, latent_out;
    auto* score_cmd = app.add_subcommand("score", "Score rows with a trained checkpoint");
    add_score_flags(score_cmd, score_flags);
    score_cmd->add_option("--out,-o", score_out, "Score CSV (default: stdout)");
    score_cmd->add_option("--latent-out", latent_out, "Also write f(x) rows here");

    ScoreFlags eval_flags;
    std::optional<std::string> positive;
    auto* eval_cmd = app.add_subcommand("eval", "Report AUC and F1 on a labeled CSV");
    add_score_flags(eval_cmd, eval_flags);
    eval_cmd->add_option("--positive", positive, "Positive class for F1: normal|abnormal")
        ->check(CLI::IsMember({"normal", "abnormal"}));

    ScoreFlags project_flags;
    std::string project_out;
    auto* project_cmd = app.add_subcommand("project", "Export 2-D latent coordinates for plotting");
    add_score_flags(project_cmd, project_flags, false);
    project_cmd->add_option("--out,-o", project_out, "Output CSV (default: stdout)");

    DiagArgs da;
    auto* diag_cmd = app.add_subcommand("diag", "MMD² or Sinkhorn cost between two numeric CSV files");
    auto* mmd_flag = diag_cmd->add_flag("--mmd", da.mmd, "Unbiased MMD² with a Gaussian kernel");
    auto* sk_flag = diag_cmd->add_flag("--sinkhorn", da.sinkhorn, "Entropic OT cost, uniform weights");
    mmd_flag->excludes(sk_flag);
    diag_cmd->add_option("files", da.files, "Two CSV files")->required()->expected(2)->check(CLI::ExistingFile);
    diag_cmd->add_option("--gamma", da.gamma, "Kernel gamma (default: from both files)")->check(CLI::PositiveNumber);
    diag_cmd->add_option("--epsilon", da.epsilon, "Sinkhorn epsilon")->check(CLI::PositiveNumber);
    diag_cmd->add_option("--max-iter", da.max_iter, "Sinkhorn iteration cap")->check(CLI::PositiveNumber);
    diag_cmd->add_option("--tol", da.tol, "Sinkhorn marginal tolerance")->check(CLI::PositiveNumber);
    diag_cmd->add_flag("--plain", da.plain, "Plain-domain scaling instead of log-domain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*sample_cmd) cmd_sample(sa);
        else if (*train_cmd) cmd_train(ta);
        else if (*score_cmd) cmd_score(score_flags, score_out, latent_out);
        else if (*eval_cmd) cmd_eval(eval_flags, positive);
        else if (*project_cmd) cmd_project(project_flags, project_out);
        else if (*diag_cmd) cmd_diag(da);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
