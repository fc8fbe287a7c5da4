#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pusmi {

/// Samples are stored one per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.3.1";

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (bad sizes, empty grids, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Matrix or vector dimensions disagree.
class ShapeError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Malformed input file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Not enough samples of some class to honour a sampling request.
class CapacityError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Linear solves, quadrature or training that failed numerically.
class NumericError : public Error {
public:
    using Error::Error;
};

using Rng = std::mt19937_64;

/// Independent sub-stream seed for (seed, stream). splitmix64 finaliser.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
}

/// Class prior p(y = +1). The negative prior is always derived.
class ClassPrior {
public:
    explicit ClassPrior(double theta_p) : theta_p_(theta_p) {
        if (!(theta_p > 0.0 && theta_p < 1.0))
            throw PreconditionError("class prior must lie in (0, 1), got " + std::to_string(theta_p));
    }
    double theta_p() const noexcept { return theta_p_; }
    double theta_n() const noexcept { return 1.0 - theta_p_; }
    double ratio() const noexcept { return theta_p_ / (1.0 - theta_p_); }

    friend bool operator==(const ClassPrior&, const ClassPrior&) = default;

private:
    double theta_p_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

}  // namespace pusmi
