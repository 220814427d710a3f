#ifndef KAMTORI_ARITHMETIC_HPP
#define KAMTORI_ARITHMETIC_HPP

#include <optional>
#include <span>
#include <vector>

#include "kamtori/numeric.hpp"

namespace kamtori {

// ---------------------------------------------------------------------------
// Continued fractions and the one-dimensional Bryuno function.

struct ContinuedFraction {
    Real value = 0;                              // x in (0,1)
    std::vector<long long> partial_quotients;    // a_1, a_2, ...
    std::vector<long long> p;                    // numerators,   p[0]=0
    std::vector<long long> q;                    // denominators, q[0]=1
};

// Partial quotients and convergents of an irrational x in (0,1).
// Throws resonance_error if a Gauss-map remainder underflows.
ContinuedFraction continued_fraction(Real x, int depth);

// Truncated orbit sum of the Yoccoz functional equation: iterate the Gauss
// map, accumulating beta_{k-1} * (-log x_k).  Non-decreasing in depth.
TruncatedSum bryuno_function(Real x, int depth);

// D = sum log(q_{n+1}) / q_n over the available convergents.
TruncatedSum d_sum(const ContinuedFraction& cf);

// ---------------------------------------------------------------------------
// Lattice small divisors.

// Smallest n >= 0 with |nu|_1 <= 2^n; guarantees 2^(n-1) < |nu| <= 2^n.
int scale_of(std::span<const long long> nu);
int scale_of(std::span<const int> nu);
int scale_of_norm(long long norm);

// A frequency vector omega together with its small-divisor sequence
//   alpha_n = inf { |omega . nu| : 0 < |nu|_1 <= 2^n },
// computed by exhaustive lattice enumeration and cached.  Integer vectors
// are measured in the 1-norm throughout.
class RotationVector {
public:
    explicit RotationVector(std::vector<Real> components);

    int dim() const { return (int)comp_.size(); }
    const std::vector<Real>& components() const { return comp_; }
    std::vector<double> components_d() const;

    // alpha_0..alpha_n_max; extends the cache as needed.  Throws
    // resonance_error (with the witness nu) if a divisor vanishes.
    const std::vector<Real>& alpha_sequence(int n_max) const;
    Real alpha(int n) const;

    // gamma_n = alpha_n / C0.
    std::vector<Real> gamma_sequence(Real C0, int n_max) const;

    Real dot(std::span<const long long> nu) const;
    Real dot(std::span<const int> nu) const;

private:
    std::vector<Real> comp_;
    mutable std::vector<Real> alpha_;   // grown on demand, guarded by callers
};

// Exact minimiser search used by RotationVector; exposed for tests.  Returns
// the infimum of |omega . nu| over 0 < |nu|_1 <= radius and the witness.
std::pair<Real, std::vector<long long>>
min_divisor_in_ball(std::span<const Real> omega, long long radius);

// B = sum 2^(-n) log(1/alpha_n), n = 0..n_max.
TruncatedSum generalized_bryuno_sum(std::span<const Real> alpha, int n_max);

// ---------------------------------------------------------------------------
// Comparison profiles.

enum class ProfileMode { theorem1, theorem2 };

// The comparison sequence gamma*_n with its derived sums.  alpha*_n is
// C0 * gamma*_n.
struct BryunoProfile {
    Real C0 = 0;
    int r = 0;
    ProfileMode mode = ProfileMode::theorem1;
    int n0 = 0;                       // theorem2 damping threshold; -1 = none
    std::vector<Real> gamma_star;

    Real gamma(int n) const;          // clamped at the last computed entry
    int depth() const { return (int)gamma_star.size(); }

    TruncatedSum B_star() const;      // sum 2^(-n) log(1/alpha*_n)
    TruncatedSum Gamma_star(int p) const;      // sum alpha*_n 2^(np)
    TruncatedSum Gamma_bar_star(int p) const;  // sum gamma*_n 2^(np)
};

struct ProfileOptions {
    int n_max = 12;
    // theorem1: custom sequence overrides the default
    //   gamma*_n = min(gamma_n, 2^{-n(r+1/2)}) renormalised to Gamma-bar*_r = 1.
    std::optional<std::vector<Real>> custom_gamma_star;
    bool use_gamma_directly = false;  // maximal-torus shortcut: gamma* = gamma
    // theorem2: Lambda0 = eps0 * a_s fixes n0 as the first n with
    //   C0 gamma_{n+1} < 2 sqrt(Lambda0).
    Real Lambda0 = 0;
};

// Builds the profile and checks omega-admissibility (alpha_n >= C0 gamma*_n
// for every computed n); throws inadmissible_error at the first violation.
BryunoProfile make_profile(const RotationVector& omega, Real C0, ProfileMode mode,
                           const ProfileOptions& opt = {});

// Scale of a divisor x against the profile's cutoff ladder: the first n with
// |x| > beta C0 gamma*_n / 2 (the scale window a propagator at x can open),
// clamped to the profile depth.  beta = 1/4 throughout.
int line_scale(Real x, const BryunoProfile& prof, Real beta = 0.25L);

// ---------------------------------------------------------------------------
// The two-sided comparison between B(omega) and D(omega) for r = 2,
// with constants assembled from the sum q_n^{-1} terms of the proof.
struct Lemma1Bracket {
    Real B = 0;        // generalized Bryuno sum of the normalised vector
    Real D = 0;        // sum log q_{n+1} / q_n
    Real C1 = 0;
    Real C2 = 0;
    bool holds = false;
    Real ratio = 0;    // normalised ratio alpha = min/max of |omega_i|
};

Lemma1Bracket lemma1_bracket(const RotationVector& omega, int alpha_depth,
                             int cf_depth);

} // namespace kamtori

#endif
