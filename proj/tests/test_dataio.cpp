#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rgp/checkpoint.hpp"
#include "rgp/config.hpp"
#include "rgp/dataio.hpp"
#include "rgp/format.hpp"

using namespace rgp;

namespace {

LabeledDataset from_text(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    return load_csv(in, schema, "t");
}

LabeledDataset synthetic(std::size_t normals, std::size_t abnormals, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds;
    ds.features = oracle::random_matrix(static_cast<Eigen::Index>(normals + abnormals), 3, rng);
    ds.columns = {"a", "b", "c"};
    std::vector<Label> y(normals, Label::Normal);
    y.insert(y.end(), abnormals, Label::Abnormal);
    ds.labels = y;
    return ds;
}

}  // namespace

TEST(LoadCsv, PlainNumericNoLabels) {
    CsvSchema s;
    s.has_header = false;
    const auto ds = from_text("1,2\n3,4\n5,6\n", s);
    EXPECT_EQ(ds.features.rows(), 3);
    EXPECT_EQ(ds.features.cols(), 2);
    EXPECT_FALSE(ds.labels.has_value());
    EXPECT_EQ(ds.features(2, 1), 6.0);
    EXPECT_EQ(ds.columns, (std::vector<std::string>{"c0", "c1"}));
}

TEST(LoadCsv, BadCellRejectsRow) {
    CsvSchema s;
    s.label_column = "y";
    const auto ds = from_text("x1,x2,y\n1,2,normal\n3,oops,abnormal\n5,6,abnormal\n7,8\n", s);
    EXPECT_EQ(ds.rows(), 2u);
    EXPECT_EQ(ds.rejected_rows, 2u);
    EXPECT_EQ(ds.count(Label::Abnormal), 1u);
}

TEST(LoadCsv, LabelMapAndIndexColumn) {
    CsvSchema s;
    s.label_column = "0";
    s.has_header = false;
    s.abnormal_values = {"anomaly"};
    s.normal_values = {"normal"};
    const auto ds = from_text("anomaly,1.5\nnormal,2.5\nweird,3.5\n", s);
    ASSERT_TRUE(ds.labels);
    EXPECT_EQ(*ds.labels, (std::vector<Label>{Label::Abnormal, Label::Normal}));
    EXPECT_EQ(ds.rejected_rows, 1u);
    EXPECT_EQ(ds.features.cols(), 1);
}

TEST(LoadCsv, NothingSurvivesThrows) {
    CsvSchema s;
    s.has_header = false;
    EXPECT_THROW(from_text("a,b\n", s), InvalidArgument);
}

TEST(Standardize, HandCaseAndConstantColumn) {
    Matrix X(2, 2);
    X << 0.0, 5.0, 2.0, 5.0;
    const auto st = fit_standardizer(X, {true, true}, {"x", "const"});
    EXPECT_EQ(st.kept_columns(), std::vector<std::string>{"x"});
    EXPECT_EQ(st.dropped, std::vector<std::string>{"const"});
    EXPECT_EQ(st.means[0], 1.0);
    EXPECT_EQ(st.stds[0], 1.0);
    const Matrix Y = st.apply(X);
    EXPECT_EQ(Y.cols(), 1);
    EXPECT_EQ(Y(0, 0), -1.0);
    EXPECT_EQ(Y(1, 0), 1.0);
}

TEST(Standardize, FittedRowsHaveZeroMean) {
    const auto ds = synthetic(80, 20, 1);
    std::vector<bool> mask(100, false);
    for (std::size_t i = 0; i < 60; ++i) mask[i] = true;
    const auto z = standardize(ds, mask);
    const Matrix fit_rows = z.features.topRows(60);
    EXPECT_LE(fit_rows.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
    const Vector var = (fit_rows.rowwise() - fit_rows.colwise().mean()).colwise().squaredNorm() / 60.0;
    EXPECT_LE((var.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Split, Proportions) {
    const auto sp = one_class_split(synthetic(100, 20, 2), 0.5, 7);
    EXPECT_EQ(sp.train.rows(), 50u);
    EXPECT_EQ(sp.train.count(Label::Abnormal), 0u);
    EXPECT_EQ(sp.test.count(Label::Normal), 50u);
    EXPECT_EQ(sp.test.count(Label::Abnormal), 20u);
    EXPECT_THROW(one_class_split(synthetic(100, 20, 2), 1.0, 7), InvalidArgument);
    EXPECT_THROW(one_class_split(synthetic(100, 20, 2), 0.0, 7), InvalidArgument);
}

TEST(Split, DeterministicPerSeed) {
    const auto ds = synthetic(60, 10, 3);
    const auto a = one_class_split(ds, 0.5, 11), b = one_class_split(ds, 0.5, 11), c = one_class_split(ds, 0.5, 12);
    EXPECT_EQ(a.raw_train.features, b.raw_train.features);
    EXPECT_EQ(a.test.features, b.test.features);
    EXPECT_NE(a.raw_train.features, c.raw_train.features);
}

TEST(Split, NoAbnormalEverInTrain) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ds = synthetic(40, 15, seed);
        const auto sp = one_class_split(ds, 0.6, seed);
        EXPECT_EQ(sp.train.count(Label::Abnormal), 0u);
        EXPECT_EQ(sp.raw_train.count(Label::Abnormal), 0u);
        EXPECT_EQ(sp.train.rows() + sp.test.rows(), ds.rows());
    }
}

TEST(Csv, SeventeenDigitRoundTripIsBitExact) {
    auto ds = synthetic(30, 5, 4);
    ds.features(0, 0) = 0.1 + 0.2;
    ds.features(1, 1) = 1e-300;
    ds.features(2, 2) = -123456789.123456789;
    std::ostringstream out;
    write_csv(out, ds);
    CsvSchema s;
    s.label_column = "label";
    const auto back = from_text(out.str(), s);
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(*back.labels, *ds.labels);
    EXPECT_EQ(back.columns, ds.columns);
}

TEST(Csv, MatrixHeaderDetection) {
    std::istringstream with("z0,z1\n1,2\n3,4\n"), without("1,2\n3,4\n");
    EXPECT_EQ(read_matrix_csv(with).rows(), 2);
    EXPECT_EQ(read_matrix_csv(without).rows(), 2);
    std::istringstream bad("1,2\n3,x\n");
    EXPECT_THROW(read_matrix_csv(bad), InvalidArgument);
}

TEST(Format, ParseDouble) {
    EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
    EXPECT_EQ(parse_double(" +2.5\r"), 2.5);
    EXPECT_FALSE(parse_double("1.5x"));
    EXPECT_FALSE(parse_double(""));
}

TEST(Config, KeyValuesAndTrainKeys) {
    std::istringstream in("# comment\nlambda = 0.5\nepochs=7\ntarget = ubhs\nradius = auto\nmystery = 1\n");
    const auto kv = parse_key_values(in);
    TrainConfig c;
    c.radius = 3.0;
    const auto rest = apply_train_keys(c, kv);
    EXPECT_EQ(c.lambda, 0.5);
    EXPECT_EQ(c.epochs, 7);
    EXPECT_EQ(c.target_kind, TargetKind::UbHS);
    EXPECT_FALSE(c.radius.has_value());
    EXPECT_EQ(rest.size(), 1u);
    EXPECT_EQ(rest.count("mystery"), 1u);
    TrainConfig d;
    apply_train_keys(d, train_config_keys(c));
    EXPECT_EQ(train_config_keys(d), train_config_keys(c));
    std::istringstream bad("lambda = many\n");
    TrainConfig e;
    EXPECT_THROW(apply_train_keys(e, parse_key_values(bad)), InvalidArgument);
}

TEST(Config, ManifestParsing) {
    std::istringstream in("data = x.csv\nlabel_column = label\nk = 5\np = 0.8\nf1_positive = normal\nlr = 0.01\n");
    const auto m = parse_manifest(parse_key_values(in), "/tmp/base", "demo");
    EXPECT_EQ(m.data, std::filesystem::path("/tmp/base/x.csv"));
    EXPECT_EQ(m.k, 5);
    EXPECT_EQ(m.p, 0.8);
    EXPECT_EQ(m.f1_positive, Label::Normal);
    EXPECT_EQ(m.train.lr, 0.01);
    std::istringstream unknown("data = x.csv\nbogus = 1\n");
    EXPECT_THROW(parse_manifest(parse_key_values(unknown), "/tmp", "demo"), InvalidArgument);
}

TEST(Config, ShippedManifestsLoad) {
    for (const char* name : {"thyroid", "abalone", "arrhythmia"}) {
        const auto m = load_manifest(std::filesystem::path(RGP_DATA_DIR) / (std::string(name) + ".manifest"));
        EXPECT_TRUE(std::filesystem::exists(m.data)) << name;
        EXPECT_EQ(m.train_fraction, 0.5);
    }
}

TEST(Checkpoint, RoundTripIsBitExact) {
    Checkpoint ck;
    ck.config.lambda = 0.1 + 0.2;
    ck.config.radius = 1.2345678901234567;
    ck.config.objective = Objective::Sinkhorn;
    ck.target = TargetSpec::make(TargetKind::UbHS, 2, 2.5, 0.75);
    ck.kernel = KernelConfig::make(1.0 / 3.0);
    Matrix X(4, 3);
    Rng rng(5);
    X = oracle::random_matrix(4, 3, rng);
    ck.standardizer = fit_standardizer(X, std::vector<bool>(4, true), {"a", "b", "c"});
    ck.encoder = default_encoder(3, 2, 1);
    ck.decoder = default_decoder(2, 3, 2);
    ck.encoder.layers[1].b = oracle::random_matrix(ck.encoder.layers[1].b.size(), 1, rng);
    ck.projected_train = forward(ck.encoder, ck.standardizer.apply(X));
    ck.meta = {{"dataset", "demo"}, {"k", "3"}};

    std::ostringstream out;
    write_checkpoint(out, ck);
    std::istringstream in(out.str());
    const Checkpoint back = read_checkpoint(in);
    std::ostringstream again;
    write_checkpoint(again, back);
    EXPECT_EQ(out.str(), again.str());
    EXPECT_EQ(back.encoder.layers[1].b, ck.encoder.layers[1].b);
    EXPECT_EQ(back.decoder.layers[2].W, ck.decoder.layers[2].W);
    EXPECT_EQ(back.projected_train, ck.projected_train);
    EXPECT_EQ(back.standardizer.means, ck.standardizer.means);
    EXPECT_EQ(back.target.inner_radius, 0.75);
    EXPECT_EQ(back.config.lambda, ck.config.lambda);
    EXPECT_EQ(back.config.objective, Objective::Sinkhorn);
    EXPECT_EQ(back.meta, ck.meta);
}

TEST(Checkpoint, RejectsWrongVersionAndTruncation) {
    std::istringstream wrong("rgp-checkpoint 99\n");
    EXPECT_THROW(read_checkpoint(wrong), InvalidArgument);
    Checkpoint ck;
    ck.target = TargetSpec::make(TargetKind::GiHS, 2, 1.0);
    ck.standardizer = fit_standardizer(Matrix::Identity(2, 2), {true, true}, {"a", "b"});
    ck.encoder = default_encoder(2, 2, 1);
    ck.decoder = default_decoder(2, 2, 2);
    ck.projected_train = Matrix::Zero(2, 2);
    std::ostringstream out;
    write_checkpoint(out, ck);
    const std::string text = out.str();
    std::istringstream cut(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_checkpoint(cut), InvalidArgument);
}
