#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rgp {

// Rows are observations throughout the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Rng = std::mt19937_64;

enum class Label : std::uint8_t { Normal = 0, Abnormal = 1 };

// Bad input or violated precondition. The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Data that cannot support the requested statistic (e.g. all rows identical).
class DegenerateData : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// NaN/inf or underflow during an iterative computation. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

}  // namespace rgp
