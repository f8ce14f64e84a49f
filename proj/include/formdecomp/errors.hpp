#pragma once

#include <stdexcept>
#include <string>

namespace formdecomp {

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Condition number above the invertibility threshold (1e8).
struct IllConditioned : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Majorant vanishes on a nonzero pair; the gauge ratio is unbounded.
struct DegenerateFamily : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace formdecomp
