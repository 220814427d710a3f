#ifndef KAMTORI_DIOPHANTINE_HPP
#define KAMTORI_DIOPHANTINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kamtori/arithmetic.hpp"
#include "kamtori/model.hpp"
#include "kamtori/multiscale.hpp"

namespace kamtori {

// The omega-independent comparison sequence gamma*_n = 2^{-n(r+1/2)}
// renormalised to Gamma-bar*_r = 1, used by the measure scans.
BryunoProfile reference_profile(int r, Real C0, int n_max = 12);

struct MelnikovCondition {
    std::vector<long long> nu;
    int n = 0;          // self-energy scale
    int i = 0, j = -1;  // eigenvalue indices (j = -1: first condition)
    int si = 1, sj = 1; // sign choices
    double margin = 0;  // |value| - threshold, negative = violated
};

struct AdmissibilityReport {
    bool admissible = true;
    long long conditions_checked = 0;
    std::optional<MelnikovCondition> first_violation;
};

// First and second Mel'nikov conditions |omega.nu +- sqrt(lambda_i)
// (+- sqrt(lambda_j))| >= C0 gamma*_{n(nu)} over 0 < |nu| <= nu_max and
// scales n <= n_max.  theorem2 profiles restrict to n(nu) >= n0, n >= n0.
AdmissibilityReport check_melnikov(const RotationVector& omega, double eps,
                                   const SelfEnergyState& state,
                                   long long nu_max, int n_max);

struct MeasureSweepPoint {
    double parameter = 0;        // C0 or eps0
    double excluded_fraction = 0;
    double stat_error = 0;       // binomial
};

struct MeasureEstimate {
    std::vector<MeasureSweepPoint> points;
    double fit_exponent = 0;     // slope of log(excluded) vs log(parameter)
    double fit_log_c = 0;
    double fit_residual = 0;     // rms residual of the fit
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::string to_csv() const;
};

struct OmegaScanOptions {
    std::size_t samples = 100'000;
    std::uint64_t seed = 1;
    long long nu_max = 64;
    int threads = 1;
    // degree-1 self-energies: lambda ~ eps a_j, the scan approximation
};

// Fraction of omega in [lo,hi]^r failing profile admissibility or the
// (degree-1, interval-widened) Mel'nikov conditions, swept over C0.
MeasureEstimate excluded_measure_omega(int r, double lo, double hi,
                                       const std::vector<double>& C0_sweep,
                                       double eps, const FourierModel& model,
                                       const OmegaScanOptions& opt = {});

struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
};

struct CantorSweepPoint {
    double eps0 = 0;
    int n0 = 0;            // -1: no conditions imposed
    double window = 0;     // length of (eps0/4, eps0]
    double excluded = 0;   // G(eps0)
    double ratio = 0;      // G(eps0) / eps0
};

struct CantorSet {
    std::vector<Interval> kept;          // first window
    std::vector<CantorSweepPoint> sweep;
    std::string intervals_csv() const;
    std::string sweep_csv() const;
};

// Excises from (eps0/4, eps0] the eps violating the theorem2 Mel'nikov
// conditions with degree-1 self-energies; repeats across halvings of eps0.
CantorSet epsilon_cantor_set(const RotationVector& omega, const FourierModel& model,
                             double C0, double eps0, long long nu_max = 64,
                             int halvings = 4);

struct ActionSpaceEstimate {
    std::size_t samples = 0, admissible = 0, skipped = 0;
    double domain_volume = 0;
    double image_measure = 0;        // integral of |det dA/domega| over kept set
    double complement_measure = 0;
    double max_shift = 0;            // max |A - omega| over samples
    double min_det = 0, max_det = 0;
    std::uint64_t seed = 0;
};

struct ActionScanOptions {
    std::size_t samples = 400;
    std::uint64_t seed = 1;
    int K = 2;
    double fd_step = 1e-4;
    double max_skip_fraction = 0.2;
};

// Maximal-torus (r = d) action-space map: Monte-Carlo measure of the image
// of the admissible set under omega -> A(omega) = omega + (omega.d_psi) a,
// Jacobian by admissible-pair finite differences.
ActionSpaceEstimate action_space_measure(const FourierModel& model, double lo,
                                         double hi, double C0, double eps,
                                         const ActionScanOptions& opt = {});

} // namespace kamtori

#endif
