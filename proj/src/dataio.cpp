#include "rgp/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "rgp/format.hpp"

namespace rgp {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<double> parse_finite(const std::string& s) {
    auto v = parse_double(s);
    if (v && !std::isfinite(*v)) return std::nullopt;
    return v;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t width) {
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

std::vector<std::string> Standardizer::kept_columns() const {
    std::vector<std::string> out;
    for (auto j : kept) out.push_back(input_columns[static_cast<std::size_t>(j)]);
    return out;
}

Matrix Standardizer::apply(const Matrix& X) const {
    require(X.cols() == static_cast<Eigen::Index>(input_columns.size()),
            "data has " + std::to_string(X.cols()) + " feature columns, expected " +
                std::to_string(input_columns.size()));
    Matrix out(X.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const auto j = static_cast<Eigen::Index>(c);
        out.col(j) = (X.col(kept[c]).array() - means[j]) / stds[j];
    }
    return out;
}

Standardizer fit_standardizer(const Matrix& X, const std::vector<bool>& mask,
                              const std::vector<std::string>& columns) {
    require(mask.size() == static_cast<std::size_t>(X.rows()), "fit mask length does not match rows");
    require(columns.size() == static_cast<std::size_t>(X.cols()), "column names do not match width");
    const auto n_fit = std::count(mask.begin(), mask.end(), true);
    require(n_fit >= 2, "standardization needs at least 2 fitting rows");

    Standardizer s;
    s.input_columns = columns;
    std::vector<double> means, stds;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (mask[static_cast<std::size_t>(i)]) sum += X(i, j);
        const double mean = sum / static_cast<double>(n_fit);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (mask[static_cast<std::size_t>(i)]) ss += (X(i, j) - mean) * (X(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n_fit));
        if (sd > 0.0) {
            s.kept.push_back(j);
            means.push_back(mean);
            stds.push_back(sd);
        } else {
            s.dropped.push_back(columns[static_cast<std::size_t>(j)]);
        }
    }
    if (s.kept.empty()) throw DegenerateData("every feature column is constant on the fitting rows");
    s.means = Eigen::Map<Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
    s.stds = Eigen::Map<Vector>(stds.data(), static_cast<Eigen::Index>(stds.size()));
    return s;
}

std::size_t LabeledDataset::count(Label l) const {
    if (!labels) return 0;
    return static_cast<std::size_t>(std::count(labels->begin(), labels->end(), l));
}

LabeledDataset load_csv(std::istream& in, const CsvSchema& schema, const std::string& name) {
    std::string line;
    std::vector<std::string> header;
    std::vector<std::string> first_data;
    bool have_first = false;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        if (schema.has_header) header = split(line, schema.delimiter);
        else {
            first_data = split(line, schema.delimiter);
            have_first = true;
        }
        break;
    }
    const std::size_t width = schema.has_header ? header.size() : first_data.size();
    if (width == 0) throw InvalidArgument("'" + name + "' is empty");
    if (!schema.has_header)
        for (std::size_t j = 0; j < width; ++j) header.push_back("c" + std::to_string(j));

    std::optional<std::size_t> label_idx;
    if (schema.label_column) {
        const auto it = std::find(header.begin(), header.end(), *schema.label_column);
        if (it != header.end()) label_idx = static_cast<std::size_t>(it - header.begin());
        else if (auto v = parse_double(*schema.label_column); v && *v >= 0 && *v < static_cast<double>(width) &&
                                                             *v == std::floor(*v))
            label_idx = static_cast<std::size_t>(*v);
        else throw InvalidArgument("label column '" + *schema.label_column + "' not found");
    }

    LabeledDataset ds;
    ds.name = name;
    for (std::size_t j = 0; j < width; ++j)
        if (!label_idx || j != *label_idx) ds.columns.push_back(header[j]);
    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;

    auto consume = [&](const std::vector<std::string>& cells) {
        if (cells.size() != width) {
            ++ds.rejected_rows;
            return;
        }
        std::vector<double> row;
        row.reserve(width);
        Label lab = Label::Normal;
        for (std::size_t j = 0; j < width; ++j) {
            if (label_idx && j == *label_idx) {
                if (contains(schema.abnormal_values, cells[j])) lab = Label::Abnormal;
                else if (!schema.normal_values.empty() && !contains(schema.normal_values, cells[j])) {
                    ++ds.rejected_rows;
                    return;
                }
                continue;
            }
            const auto v = parse_finite(cells[j]);
            if (!v) {
                ++ds.rejected_rows;
                return;
            }
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
        labels.push_back(lab);
    };

    if (have_first) consume(first_data);
    while (std::getline(in, line))
        if (!blank(line)) consume(split(line, schema.delimiter));

    if (rows.empty()) throw InvalidArgument("'" + name + "' has no usable rows");
    require(!ds.columns.empty(), "'" + name + "' has no feature columns");
    ds.features = rows_to_matrix(rows, ds.columns.size());
    if (label_idx) ds.labels = std::move(labels);
    return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    auto in = open_or_throw(path);
    return load_csv(in, schema, path.stem().string());
}

LabeledDataset standardize(const LabeledDataset& ds, const std::vector<bool>& fit_on) {
    LabeledDataset out = ds;
    Standardizer s = fit_standardizer(ds.features, fit_on, ds.columns);
    out.features = s.apply(ds.features);
    out.columns = s.kept_columns();
    out.standardizer = std::move(s);
    return out;
}

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.name = ds.name;
    out.columns = ds.columns;
    out.standardizer = ds.standardizer;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
    std::vector<Label> labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < ds.rows(), "row index out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(rows[i]));
        if (ds.labels) labels.push_back((*ds.labels)[rows[i]]);
    }
    if (ds.labels) out.labels = std::move(labels);
    return out;
}

OneClassSplit one_class_split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
    require(ds.labels.has_value(), "one-class split needs labels");
    require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
    std::vector<std::size_t> normals, abnormals;
    for (std::size_t i = 0; i < ds.rows(); ++i)
        ((*ds.labels)[i] == Label::Normal ? normals : abnormals).push_back(i);
    require(!abnormals.empty(), "one-class split needs at least one abnormal row");

    Rng rng(seed);
    std::shuffle(normals.begin(), normals.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(normals.size())));
    require(n_train >= 2 && n_train < normals.size(), "too few normal rows for the requested split");

    std::vector<std::size_t> train_rows(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(normals.begin() + static_cast<std::ptrdiff_t>(n_train), normals.end());
    test_rows.insert(test_rows.end(), abnormals.begin(), abnormals.end());

    OneClassSplit out;
    out.raw_train = take_rows(ds, train_rows);
    out.raw_test = take_rows(ds, test_rows);
    Standardizer s = fit_standardizer(out.raw_train.features, std::vector<bool>(train_rows.size(), true), ds.columns);
    out.train = out.raw_train;
    out.test = out.raw_test;
    out.train.features = s.apply(out.raw_train.features);
    out.test.features = s.apply(out.raw_test.features);
    out.train.columns = out.test.columns = s.kept_columns();
    out.train.standardizer = s;
    out.test.standardizer = std::move(s);
    return out;
}

void write_csv(std::ostream& out, const LabeledDataset& ds, bool with_labels) {
    const bool labels = with_labels && ds.labels.has_value();
    for (std::size_t j = 0; j < ds.columns.size(); ++j) out << (j ? "," : "") << ds.columns[j];
    if (labels) out << ",label";
    out << '\n';
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) out << (j ? "," : "") << format_double(ds.features(i, j));
        if (labels) out << ',' << ((*ds.labels)[static_cast<std::size_t>(i)] == Label::Abnormal ? "abnormal" : "normal");
        out << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const Matrix& M, const std::vector<std::string>& header) {
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
        out << '\n';
    }
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
        out << '\n';
    }
}

Matrix read_matrix_csv(std::istream& in, char delimiter) {
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto cells = split(line, delimiter);
        std::vector<double> row;
        bool ok = true;
        for (const auto& c : cells) {
            const auto v = parse_finite(c);
            if (!v) {
                ok = false;
                break;
            }
            row.push_back(*v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw InvalidArgument("non-numeric cell on line " + std::to_string(line_no));
        }
        first = false;
        if (rows.empty()) width = row.size();
        else if (row.size() != width)
            throw InvalidArgument("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                                  " cells, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidArgument("no numeric rows found");
    return rows_to_matrix(rows, width);
}

Matrix read_matrix_csv(const std::filesystem::path& path, char delimiter) {
    auto in = open_or_throw(path);
    return read_matrix_csv(in, delimiter);
}

}  // namespace rgp
