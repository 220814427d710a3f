#ifndef KAMTORI_VERIFY_HPP
#define KAMTORI_VERIFY_HPP

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kamtori/diophantine.hpp"
#include "kamtori/expansion.hpp"
#include "kamtori/multiscale.hpp"
#include "kamtori/trees.hpp"

namespace kamtori {

struct CheckResult {
    std::string name;
    bool pass = false;
    double observed = 0;
    double threshold = 0;
    std::string detail;
    double ms = 0;
};

struct VerificationSuite {
    std::vector<CheckResult> checks;

    bool all_pass() const;
    void merge(VerificationSuite other);
    nlohmann::json to_json() const;
    static VerificationSuite from_json(const nlohmann::json& j);
};

struct ResidualFit {
    int K = 0;
    std::vector<double> eps;
    std::vector<double> sup_residual;
    double slope = 0;
};

// Sup-norm residual over a uniform psi-grid per eps, with the log-log slope
// per truncation order.
std::vector<ResidualFit> residual_scan(const FourierModel& model,
                                       const RotationVector& omega,
                                       const BryunoProfile& profile,
                                       const std::vector<int>& K_list,
                                       const std::vector<double>& eps_list,
                                       int grid_per_dim = 32);

struct DecayFit {
    double kappa = 0;            // minus the fitted slope
    int shells = 0;
    std::vector<double> shell_norm;   // per |nu| shell, max coefficient
};

// Least-squares decay rate of log max|h| per |nu|_1 shell.  Throws
// math_error when fewer than two shells are populated.
DecayFit decay_fit(const TorusExpansion& exp);

struct ProductBoundPoint {
    int k = 0;
    double max_log_product = 0;   // max over trees of sum log ||g||
    double budget = 0;            // 4 N k B(omega)
};

struct ProductBoundReport {
    std::vector<ProductBoundPoint> points;
    double fitted_intercept = 0;
    double fitted_slope = 0;      // per-k growth
    double slope_budget = 0;      // 4 N B(omega)
    bool pass = false;
};

// Max over order-k trees of the log propagator product against the
// 4 N k B(omega) budget of the trigonometric-polynomial bound.
ProductBoundReport product_bound_audit(const FourierModel& model,
                                       const RotationVector& omega,
                                       const BryunoProfile& profile, int k_max,
                                       const EnumerationOptions& opt = {});

struct SuiteConfig {
    std::set<std::string> scope;    // empty = no checks; "default" = all
    const FourierModel* model = nullptr;        // maximal-torus model
    const FourierModel* mixed_model = nullptr;  // s > 0 model, optional
    std::vector<Real> omega;
    double C0 = 0.2;
    double eps = 1e-3;
    std::uint64_t seed = 1;
    int counting_k_max = 4;
    std::size_t measure_samples = 2000;
    // test hook: overrides the profile's comparison sequence
    std::optional<std::vector<Real>> gamma_star_override;
};

// Consolidated pass/fail run of the lemma-level checks: counting, cluster
// bounds, self-energy symmetries, closeness, propagator bounds, Whitney
// differentiability, decay, residual scaling and the measure fit.
VerificationSuite lemma_suite(const SuiteConfig& cfg);

} // namespace kamtori

#endif
