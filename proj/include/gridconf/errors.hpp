#pragma once
#include <stdexcept>
#include <string>

namespace gridconf {

/// Malformed record in a dataset or config file. Message carries file:line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structurally invalid network or configuration (duplicate ids, disconnected
/// full graph, wrong open-set size, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on the operating topology failed (traversal / radiality).
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Action applied to an edge that is already open.
struct InvalidActionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite parameter or gradient encountered during training.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gridconf
