#include "rgp/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "rgp/format.hpp"

namespace rgp {

double auc(const Vector& scores, const std::vector<Label>& labels) {
    const auto n = static_cast<std::size_t>(scores.size());
    require(labels.size() == n, "scores and labels differ in length");
    require(scores.allFinite(), "auc needs finite scores");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Abnormal));
    const std::size_t n_neg = n - n_pos;
    require(n_pos > 0 && n_neg > 0, "auc needs both normal and abnormal rows");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of 1-based midranks over abnormal rows.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == Label::Abnormal) rank_sum += midrank;
        i = j;
    }
    const double p = static_cast<double>(n_pos), q = static_cast<double>(n_neg);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

EvalResult f1(const std::vector<Label>& predictions, const std::vector<Label>& labels, Label positive) {
    require(predictions.size() == labels.size(), "predictions and labels differ in length");
    require(!labels.empty(), "f1 needs at least one row");
    EvalResult r;
    r.positive = positive;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = predictions[i] == positive;
        const bool truth = labels[i] == positive;
        if (pred && truth) ++r.tp;
        else if (pred) ++r.fp;
        else if (truth) ++r.fn;
        else ++r.tn;
    }
    const double tp = static_cast<double>(r.tp);
    r.precision = r.tp + r.fp ? tp / static_cast<double>(r.tp + r.fp) : 0.0;
    r.recall = r.tp + r.fn ? tp / static_cast<double>(r.tp + r.fn) : 0.0;
    const std::size_t denom = 2 * r.tp + r.fp + r.fn;
    r.f1 = r.tp > 0 ? 2.0 * tp / static_cast<double>(denom) : 0.0;
    return r;
}

EvalResult evaluate(const Vector& scores, const std::vector<Label>& predictions,
                    const std::vector<Label>& labels, Label positive) {
    EvalResult r = f1(predictions, labels, positive);
    r.auc = auc(scores, labels);
    return r;
}

std::string to_string(Label label) { return label == Label::Abnormal ? "abnormal" : "normal"; }

Label parse_label(const std::string& text) {
    if (text == "abnormal" || text == "1") return Label::Abnormal;
    if (text == "normal" || text == "0") return Label::Normal;
    throw InvalidArgument("unknown label '" + text + "' (expected normal|abnormal)");
}

void write_report(std::ostream& out, const EvalResult& r) {
    out << "auc=" << format_double(r.auc) << '\n'
        << "f1=" << format_double(r.f1) << '\n'
        << "precision=" << format_double(r.precision) << '\n'
        << "recall=" << format_double(r.recall) << '\n'
        << "tp=" << r.tp << '\n'
        << "fp=" << r.fp << '\n'
        << "tn=" << r.tn << '\n'
        << "fn=" << r.fn << '\n';
}

}  // namespace rgp
