#ifndef KAMTORI_MULTISCALE_HPP
#define KAMTORI_MULTISCALE_HPP

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kamtori/arithmetic.hpp"
#include "kamtori/model.hpp"

namespace kamtori {

// C^2 bump with plateau |x| < C0^2/4 and support |x| <= C0^2, rescaled per
// scale by beta^-2 gamma*_n^-2.  beta = 1/4.
struct CutoffFamily {
    double C0 = 0;
    double beta = 0.25;
    const BryunoProfile* profile = nullptr;

    double chi(double x) const;
    double chi_n(double x, int n) const;
    double psi_n(double x, int n) const { return 1.0 - chi_n(x, n); }
};

struct WhitneyCheck {
    std::string name;
    double observed = 0;
    double bound = 0;
    bool pass = false;
};

struct WhitneyReport {
    std::vector<WhitneyCheck> checks;
    bool all_pass() const;
};

// Per-scale self-energy data: the matrices M^[<=n](x), the propagator
// divisors and propagators, and the self-energy scalars lambda-underbar
// produced by the scale recursion.  Cluster sums are truncated at degree
// k_max (default 2) in eps.
class SelfEnergyState {
public:
    SelfEnergyState(const FourierModel& model, const RotationVector& omega,
                    const BryunoProfile& profile, double eps, int k_max = 2);

    const FourierModel& model() const { return *model_; }
    const BryunoProfile& profile() const { return profile_; }
    double eps() const { return eps_; }
    int k_max() const { return k_max_; }
    int scales_built() const { return (int)lambda_.size() - 1; }

    // Runs the self-energy recursion lambda^[n]_j = eig_j(M^[<=n]) at
    // x = sqrt(lambda^[n-1]_j) up to the requested scale.
    void build_to(int n);

    const std::vector<double>& lambda_under(int n) const;

    // Delta^[n](x): harmonic-type mean of the divisors (x^2 - lambda_j)^2.
    // strict = singular error on an exact hit; otherwise the limit 0.
    double divisor(double x, int n, bool strict = true) const;

    // Self-energy matrices (degree-truncated cluster sums with their
    // cutoff prefactors).
    Eigen::MatrixXcd M_at(int p, double x) const;     // M^[p](x)
    Eigen::MatrixXcd M_leq(int n, double x) const;    // sum_{p<=n}

    // g^[n](x); zero matrix when the scalar cutoff prefactor vanishes.
    // When nonzero, the Lemma-8 lower bound on the dressed divisors is
    // asserted and its violation throws with context.
    Eigen::MatrixXcd propagator(double x, int n) const;
    Eigen::MatrixXcd propagator_leq(double x, int n) const;

    double propagator_norm_bound(int n) const;   // K1 C0^-2 gamma*_n^-2

    // |lambda^[n] - lambda^[n-1]| / eps^2, maximised over j, for n >= 1.
    std::vector<double> closeness_ratios() const;

    // Finite-difference audits of the Whitney bounds in x and eps.
    WhitneyReport whitney_x(double x, int n, double h) const;
    WhitneyReport whitney_eps(double x, int n, double deps) const;

    // Per scale: lambda values and M^[<=n] on a probe grid.
    nlohmann::json dump(const std::vector<double>& probe_xs) const;

    const CutoffFamily& cutoffs() const { return cut_; }

private:
    const FourierModel* model_;
    RotationVector omega_;
    BryunoProfile profile_;
    double eps_;
    int k_max_;
    bool all_positive_;   // elliptic configuration: all a_i > 0, eps > 0
    CutoffFamily cut_;

    std::vector<std::vector<double>> lambda_;              // per scale, size d
    std::vector<std::vector<Eigen::VectorXcd>> evecs_;     // continuation data

    double divisor_with(double x, const std::vector<double>& lam, bool strict) const;
    // cutoff prefactor prod_{q<=p} chi_q for the scale-p cluster class; the
    // q = p factor uses the previous scale's self-energies
    double prefactor(int p, double x) const;
    Eigen::MatrixXcd internal_line(double y, int p) const;
    Eigen::MatrixXcd cluster_sum(int p, double x) const;
};

// Finite-difference check of the omega-Whitney bound (3.30)-style: compares
// M^[<=n](omega.nu) across two admissible rotation vectors.
WhitneyReport whitney_omega(const FourierModel& model, const RotationVector& om1,
                            const RotationVector& om2, const BryunoProfile& prof1,
                            const BryunoProfile& prof2, double eps, int n,
                            const std::vector<int>& nu);

} // namespace kamtori

#endif
