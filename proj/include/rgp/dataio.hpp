#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rgp/common.hpp"

namespace rgp {

struct CsvSchema {
    /// Column name, or a 0-based index when the file has no header.
    std::optional<std::string> label_column;
    char delimiter = ',';
    bool has_header = true;
    /// Raw label values meaning abnormal; everything else is normal unless
    /// normal_values is non-empty, in which case unknown values reject the row.
    std::vector<std::string> abnormal_values{"abnormal", "1"};
    std::vector<std::string> normal_values;
};

/// Per-column z-score fitted on a subset of rows. Zero-variance columns are dropped.
struct Standardizer {
    std::vector<std::string> input_columns;  // all feature columns seen at fit time
    std::vector<Eigen::Index> kept;          // indices into input_columns
    Vector means;                            // over kept columns
    Vector stds;                             // population std, kept columns
    std::vector<std::string> dropped;

    std::vector<std::string> kept_columns() const;
    /// X has input_columns.size() columns; result has kept.size().
    Matrix apply(const Matrix& X) const;
};

/// Fits on rows where mask is true (≥ 2 rows).
Standardizer fit_standardizer(const Matrix& X, const std::vector<bool>& mask,
                              const std::vector<std::string>& columns);

struct LabeledDataset {
    std::string name;
    Matrix features;                          // n × m
    std::optional<std::vector<Label>> labels;
    std::vector<std::string> columns;         // m names
    std::size_t rejected_rows = 0;
    std::optional<Standardizer> standardizer;  // set once standardized

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t count(Label l) const;
};

/// Rows with an unparseable or missing feature cell, wrong width, or an
/// unmapped label are skipped and counted. Throws if nothing survives.
LabeledDataset load_csv(std::istream& in, const CsvSchema& schema, const std::string& name = "");
LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Z-scores every column with statistics from the masked rows; drops constant columns.
LabeledDataset standardize(const LabeledDataset& ds, const std::vector<bool>& fit_on);

/// Selects rows by index, keeping columns and labels.
LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

struct OneClassSplit {
    LabeledDataset train;  // normals only, standardized
    LabeledDataset test;   // remaining normals then all abnormals, standardized with train stats
    LabeledDataset raw_train;
    LabeledDataset raw_test;
};

/// Seeded shuffle of the normal rows; the first round(train_fraction·n_normal) train.
OneClassSplit one_class_split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

/// Header row of column names (plus "label" when labels are present), 17-digit values.
void write_csv(std::ostream& out, const LabeledDataset& ds, bool with_labels = true);
/// Plain numeric matrix, no labels. Header of column names if provided.
void write_matrix_csv(std::ostream& out, const Matrix& M, const std::vector<std::string>& header = {});

/// Numeric CSV; a first line that does not parse as numbers is taken as a header.
/// Every other cell must parse.
Matrix read_matrix_csv(std::istream& in, char delimiter = ',');
Matrix read_matrix_csv(const std::filesystem::path& path, char delimiter = ',');

}  // namespace rgp
