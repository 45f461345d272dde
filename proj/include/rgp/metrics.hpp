#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgp/common.hpp"

namespace rgp {

struct EvalResult {
    double auc = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    Label positive = Label::Abnormal;
};

/// Probability that an abnormal row outscores a normal one, ties worth 0.5.
/// O(n log n) via midranks. Throws if either class is absent.
double auc(const Vector& scores, const std::vector<Label>& labels);

/// Confusion counts and precision/recall/F1 for the given positive class.
/// Zero denominators yield 0. auc is left at 0.
EvalResult f1(const std::vector<Label>& predictions, const std::vector<Label>& labels,
              Label positive = Label::Abnormal);

/// f1 plus auc from raw scores.
EvalResult evaluate(const Vector& scores, const std::vector<Label>& predictions,
                    const std::vector<Label>& labels, Label positive = Label::Abnormal);

std::string to_string(Label label);
Label parse_label(const std::string& text);

/// auc=, f1=, precision=, recall=, tp=, fp=, tn=, fn= one per line.
void write_report(std::ostream& out, const EvalResult& r);

}  // namespace rgp
