#include "kamtori/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

std::pair<double, double> ols_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0 || n < 2) return {sy / std::max<std::size_t>(n, 1), 0.0};
    const double b = (n * sxy - sx * sy) / den;
    const double a = (sy - b * sx) / n;
    return {a, b};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return ols_fit(lx, ly).second;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------

ContinuedFraction continued_fraction(Real x, int depth) {
    if (!(x > 0 && x < 1)) throw math_error("continued_fraction: x must lie in (0,1)");
    if (depth < 1) throw math_error("continued_fraction: depth must be >= 1");
    ContinuedFraction cf;
    cf.value = x;
    cf.p = {0};
    cf.q = {1};
    long long pm1 = 1, qm1 = 0;   // p_{-1}, q_{-1}
    Real rem = x;
    for (int k = 0; k < depth - 1; ++k) {
        if (rem < (Real)kResonanceTol) {
            std::ostringstream os;
            os << "continued_fraction: remainder underflow at quotient " << k + 1
               << " (input rational at working precision)";
            throw resonance_error(os.str());
        }
        const Real inv = 1 / rem;
        const long long a = (long long)std::floor((double)inv);
        rem = inv - (Real)a;
        cf.partial_quotients.push_back(a);
        const long long pn = a * cf.p.back() + pm1;
        const long long qn = a * cf.q.back() + qm1;
        pm1 = cf.p.back();
        qm1 = cf.q.back();
        cf.p.push_back(pn);
        cf.q.push_back(qn);
    }
    return cf;
}

TruncatedSum bryuno_function(Real x, int depth) {
    if (!(x > 0 && x < 1)) throw math_error("bryuno_function: x must lie in (0,1)");
    TruncatedSum sum;
    Real beta = 1;    // beta_{-1}
    Real xk = x;
    for (int k = 0; k < depth; ++k) {
        if (xk < (Real)kResonanceTol)
            throw resonance_error("bryuno_function: Gauss-map remainder underflow");
        sum.add(beta * -std::log(xk));
        beta *= xk;
        const Real inv = 1 / xk;
        xk = inv - std::floor((double)inv);
    }
    return sum;
}

TruncatedSum d_sum(const ContinuedFraction& cf) {
    if (cf.q.size() < 2) throw math_error("d_sum: need at least 2 convergents");
    TruncatedSum sum;
    for (std::size_t n = 0; n + 1 < cf.q.size(); ++n)
        sum.add(std::log((Real)cf.q[n + 1]) / (Real)cf.q[n]);
    return sum;
}

// ---------------------------------------------------------------------------

int scale_of_norm(long long norm) {
    if (norm <= 0) throw math_error("scale_of: zero vector");
    int n = 0;
    long long bound = 1;
    while (bound < norm) {
        bound <<= 1;
        ++n;
    }
    return n;
}
int scale_of(std::span<const long long> nu) { return scale_of_norm(one_norm(nu)); }
int scale_of(std::span<const int> nu) { return scale_of_norm(one_norm(nu)); }

namespace {

// Recursive sweep over the 1-norm ball of the given radius.  Only the
// half-space with first nonzero component positive is visited (|omega . nu|
// is even under nu -> -nu).
void sweep(std::span<const Real> omega, long long radius, std::vector<long long>& nu,
           std::size_t idx, long long budget, bool nonzero, Real partial,
           Real& best, std::vector<long long>& best_nu) {
    if (idx == omega.size()) {
        if (!nonzero) return;
        const Real v = std::fabs((double)partial);
        if (v < best) {
            best = v;
            best_nu = nu;
        }
        return;
    }
    const long long lo = nonzero ? -budget : 0;   // canonical half-space
    for (long long c = lo; c <= budget; ++c) {
        nu[idx] = c;
        sweep(omega, radius, nu, idx + 1, budget - (c < 0 ? -c : c),
              nonzero || c != 0, partial + (Real)c * omega[idx], best, best_nu);
    }
    nu[idx] = 0;
}

} // namespace

std::pair<Real, std::vector<long long>>
min_divisor_in_ball(std::span<const Real> omega, long long radius) {
    std::vector<long long> nu(omega.size(), 0), best_nu;
    Real best = std::numeric_limits<Real>::infinity();
    sweep(omega, radius, nu, 0, radius, false, 0, best, best_nu);
    return {best, best_nu};
}

RotationVector::RotationVector(std::vector<Real> components) : comp_(std::move(components)) {
    if (comp_.empty()) throw math_error("RotationVector: empty component list");
}

std::vector<double> RotationVector::components_d() const {
    return std::vector<double>(comp_.begin(), comp_.end());
}

Real RotationVector::dot(std::span<const long long> nu) const {
    Real s = 0;
    for (std::size_t i = 0; i < comp_.size(); ++i) s += (Real)nu[i] * comp_[i];
    return s;
}
Real RotationVector::dot(std::span<const int> nu) const {
    Real s = 0;
    for (std::size_t i = 0; i < comp_.size(); ++i) s += (Real)nu[i] * comp_[i];
    return s;
}

const std::vector<Real>& RotationVector::alpha_sequence(int n_max) const {
    for (int n = (int)alpha_.size(); n <= n_max; ++n) {
        auto [val, nu] = min_divisor_in_ball(comp_, 1ll << n);
        if (val < (Real)kResonanceTol) {
            std::ostringstream os;
            os << "alpha_sequence: resonance at scale " << n;
            throw resonance_error(os.str(), nu);
        }
        alpha_.push_back(val);
    }
    return alpha_;
}

Real RotationVector::alpha(int n) const {
    alpha_sequence(n);
    return alpha_[n];
}

std::vector<Real> RotationVector::gamma_sequence(Real C0, int n_max) const {
    if (!(C0 > 0)) throw math_error("gamma_sequence: C0 must be positive");
    const auto& a = alpha_sequence(n_max);
    std::vector<Real> g(n_max + 1);
    for (int n = 0; n <= n_max; ++n) g[n] = a[n] / C0;
    return g;
}

TruncatedSum generalized_bryuno_sum(std::span<const Real> alpha, int n_max) {
    TruncatedSum sum;
    const int last = std::min<int>(n_max, (int)alpha.size() - 1);
    for (int n = 0; n <= last; ++n)
        sum.add(std::exp2((Real)-n) * std::log(1 / alpha[n]));
    return sum;
}

// ---------------------------------------------------------------------------

Real BryunoProfile::gamma(int n) const {
    if (gamma_star.empty()) throw math_error("BryunoProfile: empty profile");
    if (n < 0) n = 0;
    if (n >= (int)gamma_star.size()) n = (int)gamma_star.size() - 1;
    return gamma_star[n];
}

TruncatedSum BryunoProfile::B_star() const {
    TruncatedSum s;
    for (std::size_t n = 0; n < gamma_star.size(); ++n)
        s.add(std::exp2(-(Real)n) * std::log(1 / (C0 * gamma_star[n])));
    return s;
}

TruncatedSum BryunoProfile::Gamma_star(int p) const {
    TruncatedSum s;
    for (std::size_t n = 0; n < gamma_star.size(); ++n)
        s.add(C0 * gamma_star[n] * std::exp2((Real)(n * p)));
    return s;
}

TruncatedSum BryunoProfile::Gamma_bar_star(int p) const {
    TruncatedSum s;
    for (std::size_t n = 0; n < gamma_star.size(); ++n)
        s.add(gamma_star[n] * std::exp2((Real)(n * p)));
    return s;
}

BryunoProfile make_profile(const RotationVector& omega, Real C0, ProfileMode mode,
                           const ProfileOptions& opt) {
    if (!(C0 > 0)) throw math_error("make_profile: C0 must be positive");
    const int r = omega.dim();
    const int n_max = opt.n_max;
    const std::vector<Real> gamma = omega.gamma_sequence(C0, n_max);

    BryunoProfile prof;
    prof.C0 = C0;
    prof.r = r;
    prof.mode = mode;
    prof.n0 = -1;

    if (mode == ProfileMode::theorem1) {
        if (opt.custom_gamma_star) {
            prof.gamma_star = *opt.custom_gamma_star;
        } else if (opt.use_gamma_directly) {
            prof.gamma_star = gamma;
        } else {
            // min(gamma_n, 2^{-n(r+1/2)}) renormalised so Gamma-bar*_r = 1;
            // keeps B* and Gamma*_r finite for any Bryuno omega.
            std::vector<Real> raw(n_max + 1);
            for (int n = 0; n <= n_max; ++n)
                raw[n] = std::min(gamma[n], std::exp2(-(Real)n * ((Real)r + 0.5L)));
            Real Z = 0;
            for (int n = 0; n <= n_max; ++n) Z += raw[n] * std::exp2((Real)(n * r));
            prof.gamma_star.resize(n_max + 1);
            for (int n = 0; n <= n_max; ++n) prof.gamma_star[n] = raw[n] / Z;
        }
    } else {
        // theorem2: damp gamma_n by 2^{-n(r+1)} from the scale n0 where the
        // minimal divisor crosses 2 sqrt(Lambda0).
        if (!(opt.Lambda0 > 0)) throw math_error("make_profile: theorem2 needs Lambda0 > 0");
        const Real thr = 2 * std::sqrt(opt.Lambda0);
        int n0 = -1;
        for (int n = 0; n + 1 <= n_max; ++n) {
            if (C0 * gamma[n + 1] < thr) { n0 = n; break; }
        }
        prof.n0 = n0;   // -1: divisors never reach the threshold, no damping
        prof.gamma_star.resize(n_max + 1);
        for (int n = 0; n <= n_max; ++n) {
            Real g = gamma[n];
            if (n0 >= 0 && n >= n0) g *= std::exp2(-(Real)n * (Real)(r + 1));
            prof.gamma_star[n] = g;
        }
    }

    for (std::size_t i = 1; i < prof.gamma_star.size(); ++i) {
        if (prof.gamma_star[i] > prof.gamma_star[i - 1])
            throw math_error("make_profile: gamma* must be non-increasing");
    }
    for (int n = 0; n <= n_max; ++n) {
        if (gamma[n] < prof.gamma_star[n] * (1 - 1e-15L)) {
            std::ostringstream os;
            os << "make_profile: omega inadmissible at scale " << n;
            throw inadmissible_error(os.str(), {}, n,
                                     (double)(gamma[n] - prof.gamma_star[n]));
        }
    }
    return prof;
}

int line_scale(Real x, const BryunoProfile& prof, Real beta) {
    const Real ax = std::fabs((double)x);
    for (int n = 0; n < prof.depth(); ++n) {
        if (ax > beta * prof.C0 * prof.gamma_star[n] / 2) return n;
    }
    return prof.depth();
}

// ---------------------------------------------------------------------------

Lemma1Bracket lemma1_bracket(const RotationVector& omega, int alpha_depth,
                             int cf_depth) {
    if (omega.dim() != 2) throw math_error("lemma1_bracket: needs r = 2");
    const Real w1 = std::fabs((double)omega.components()[0]);
    const Real w2 = std::fabs((double)omega.components()[1]);
    const Real hi = std::max(w1, w2), lo = std::min(w1, w2);
    if (!(lo > 0)) throw resonance_error("lemma1_bracket: zero component");

    Lemma1Bracket br;
    br.ratio = lo / hi;

    // Work with the normalised vector (1, alpha); both sides of the bracket
    // are computed for it, as in the proof.
    RotationVector norm({1, br.ratio});
    const auto& alpha = norm.alpha_sequence(alpha_depth);
    br.B = generalized_bryuno_sum(alpha, alpha_depth).value;

    const ContinuedFraction cf = continued_fraction(br.ratio, cf_depth);
    br.D = d_sum(cf).value;

    // C2 collects the log2/q_n slack of each dyadic block plus the scales
    // preceding the first block; C1 the quarter-weighted terms of blocks that
    // collapse (r_{n+1} = r_n) and so never contribute to B.
    Real sum_inv_q = 0;
    for (long long q : cf.q) sum_inv_q += 1 / (Real)q;
    std::vector<int> rn(cf.q.size());
    for (std::size_t n = 0; n < cf.q.size(); ++n)
        rn[n] = scale_of_norm(2 * cf.q[n]);
    Real empty = 0;
    for (std::size_t n = 0; n + 1 < cf.q.size(); ++n)
        if (rn[n + 1] == rn[n])
            empty += std::log((Real)cf.q[n + 1]) / (Real)cf.q[n];
    br.C1 = 0.25L * empty + 0.25L * std::log((Real)2) * sum_inv_q;
    Real pre = 0;   // scales below r_0 contribute at most log(1/alpha_m) each
    for (int m = 0; m < rn[0] && m <= alpha_depth; ++m)
        pre += std::exp2((Real)-m) * std::log(1 / alpha[m]);
    br.C2 = std::log((Real)2) * sum_inv_q + pre;

    br.holds = (br.D / 4 - br.C1 <= br.B + 1e-12L) && (br.B <= br.D + br.C2 + 1e-12L);
    return br;
}

} // namespace kamtori
