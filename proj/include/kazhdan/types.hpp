#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kazhdan {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IntMatrix = Matrix<std::int64_t>;
using IntVector = Vector<std::int64_t>;

// Invalid arguments: bad (family, rank), unknown root, wrong family.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A configured cap (ball size, Weyl group size, table range) was exceeded.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix realization requested for a type without Steinberg matrices here.
struct UnsupportedRealization : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Elements from different group-ring contexts were combined.
struct ContextMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

// Internal invariant broken (e.g. a product missing from a ball).
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* code_version = "1.0.0";

}  // namespace kazhdan
