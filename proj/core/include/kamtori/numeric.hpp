#ifndef KAMTORI_NUMERIC_HPP
#define KAMTORI_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kamtori {

// Extended precision for convergents and small divisors; cancellation in
// |omega . nu| grows with 2^n.
using Real = long double;

constexpr double kResonanceTol = 1e-12;
constexpr double kConvergenceTol = 1e-9;

// Partial sum of a (possibly divergent) series together with its last
// increment.  Convergence is claimed only when the increment is below tol.
struct TruncatedSum {
    Real value = 0;
    Real last_increment = 0;
    int terms = 0;

    bool converged(Real tol = kConvergenceTol) const {
        return std::fabs((double)last_increment) < (double)tol;
    }
    void add(Real term) {
        value += term;
        last_increment = term;
        ++terms;
    }
};

inline long long one_norm(std::span<const long long> nu) {
    long long s = 0;
    for (long long c : nu) s += c < 0 ? -c : c;
    return s;
}
inline long long one_norm(std::span<const int> nu) {
    long long s = 0;
    for (int c : nu) s += c < 0 ? -c : c;
    return s;
}

// Ordinary least squares y = a + b x; returns {a, b}.
std::pair<double, double> ols_fit(std::span<const double> x, std::span<const double> y);

// Slope of log|y| against log x, skipping non-positive y.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// FNV-1a, used to derive artifact file names from configs.
std::uint64_t fnv1a(const std::string& s);

// Full-precision scientific formatting (17 significant digits), the CSV
// number format everywhere.
std::string format_g17(double v);

} // namespace kamtori

#endif
