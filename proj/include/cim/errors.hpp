#pragma once

#include <stdexcept>
#include <string>

namespace cim {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid arguments or physically infeasible parameters.
struct domain_error : error {
    using error::error;
};

// Malformed configuration or input file (CLI exit code 2).
struct config_error : error {
    using error::error;
};

// Numerical divergence or degeneracy (CLI exit code 3).
struct divergence_error : error {
    using error::error;
};

// Exact-oracle budget exceeded (CLI exit code 4).
struct budget_error : error {
    using error::error;
};

} // namespace cim
