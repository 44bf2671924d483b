#pragma once

#include <stdexcept>

namespace parnoise {

/// A computation that was set up correctly but failed numerically
/// (singular system, non-convergence, too many failed replications).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace parnoise
