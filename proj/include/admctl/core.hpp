#pragma once

#include <charconv>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace admctl {

/// Thrown for ill-formed inputs (bad scenario parameters, malformed files,
/// probability mass out of range). The CLI maps it to exit code 2.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a requested model would exceed the configured memory cap.
/// The CLI maps it to exit code 3.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when non-finite values reach the solver. CLI exit code 1.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix. Small and deliberately minimal: every matrix in
/// this project is either a per-stage transition block or a report grid, so
/// a full linear-algebra dependency would be dead weight.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double &operator()(int r, int c) {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * cols_,
                static_cast<std::size_t>(cols_)};
    }
    std::span<double> row(int r) {
        return {data_.data() + static_cast<std::size_t>(r) * cols_,
                static_cast<std::size_t>(cols_)};
    }

    const std::vector<double> &data() const { return data_; }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Shortest decimal representation that round-trips the exact double.
/// Locale-independent; used for every numeric field we emit so that repeated
/// runs are byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

} // namespace admctl
