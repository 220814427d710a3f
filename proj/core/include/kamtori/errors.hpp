#ifndef KAMTORI_ERRORS_HPP
#define KAMTORI_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace kamtori {

// Exit-code classes used by the CLI: 1 usage, 2 math/resonance, 3 budget.
struct math_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// |omega . nu| vanished (to tolerance) at some lattice vector, or a
// continued-fraction remainder underflowed: the input is rational at
// working precision.
struct resonance_error : math_error {
    resonance_error(const std::string& what, std::vector<long long> nu = {})
        : math_error(what), witness(std::move(nu)) {}
    std::vector<long long> witness;
};

// omega (or eps) fails a profile or Mel'nikov condition needed by the run.
struct inadmissible_error : math_error {
    inadmissible_error(const std::string& what, std::vector<long long> nu,
                       int scale, double margin)
        : math_error(what), witness(std::move(nu)), scale(scale), margin(margin) {}
    std::vector<long long> witness;
    int scale = -1;
    double margin = 0.0;
};

// x^2 hit a self-energy eigenvalue exactly.
struct singular_divisor_error : math_error {
    using math_error::math_error;
};

// A lambda-underbar left the admissible sign configuration.
struct negative_self_energy_error : math_error {
    using math_error::math_error;
};

// Enumeration exceeded its configured cap.
struct budget_error : std::runtime_error {
    budget_error(const std::string& what, std::size_t cap)
        : std::runtime_error(what), cap(cap) {}
    std::size_t cap = 0;
};

// Malformed model document or config.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kamtori

#endif
