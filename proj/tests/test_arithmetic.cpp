#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kamtori/arithmetic.hpp"
#include "kamtori/errors.hpp"

using namespace kamtori;

namespace {
const Real kGolden = (std::sqrt((Real)5) - 1) / 2;       // (sqrt5-1)/2
const Real kPhi = (std::sqrt((Real)5) + 1) / 2;
const Real kSqrt2m1 = std::sqrt((Real)2) - 1;
} // namespace

TEST_CASE("continued fraction of the golden fractional part") {
    const ContinuedFraction cf = continued_fraction(kGolden, 6);
    REQUIRE(cf.q.size() == 6);
    for (long long a : cf.partial_quotients) CHECK(a == 1);
    CHECK(cf.q == std::vector<long long>({1, 1, 2, 3, 5, 8}));
}

TEST_CASE("continued fraction of sqrt2 - 1") {
    const ContinuedFraction cf = continued_fraction(kSqrt2m1, 4);
    for (long long a : cf.partial_quotients) CHECK(a == 2);
    CHECK(cf.q == std::vector<long long>({1, 2, 5, 12}));
}

TEST_CASE("rational input raises a resonance error") {
    CHECK_THROWS_AS(continued_fraction(0.5L, 3), resonance_error);
}

TEST_CASE("convergent inequalities and monotonicity") {
    for (Real x : {kGolden, kSqrt2m1, (Real)0.3183098861837906715L}) {
        const ContinuedFraction cf = continued_fraction(x, 12);
        for (std::size_t n = 2; n < cf.q.size(); ++n) CHECK(cf.q[n] > cf.q[n - 1]);
        for (std::size_t n = 0; n + 1 < cf.q.size(); ++n) {
            const Real err = std::fabs((double)(x * cf.q[n] - cf.p[n]));
            CHECK(err > 0.5L / cf.q[n + 1]);
            CHECK(err < 1.0L / cf.q[n + 1]);
        }
        // convergents alternate around x
        for (std::size_t n = 0; n + 1 < cf.q.size(); ++n) {
            const Real sn = (Real)cf.p[n] / cf.q[n] - x;
            const Real sn1 = (Real)cf.p[n + 1] / cf.q[n + 1] - x;
            CHECK(sn * sn1 < 0);
        }
    }
}

TEST_CASE("Bryuno function fixed points of the Gauss map") {
    // 1/g = g mod 1, so B(g) = (-log g)/(1 - g); same for sqrt2 - 1
    const Real expect_g = -std::log(kGolden) / (1 - kGolden);
    CHECK(std::fabs((double)(bryuno_function(kGolden, 40).value - expect_g)) < 1e-6);
    const Real expect_s = -std::log(kSqrt2m1) / (1 - kSqrt2m1);
    CHECK(std::fabs((double)(bryuno_function(kSqrt2m1, 40).value - expect_s)) < 1e-6);
}

TEST_CASE("Bryuno orbit sum is non-decreasing in depth") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.01, 0.99);
    for (int i = 0; i < 20; ++i) {
        const Real x = (Real)uni(rng);
        Real prev = 0;
        for (int depth = 1; depth <= 6; ++depth) {
            const Real v = bryuno_function(x, depth).value;
            CHECK(v >= prev - 1e-18L);
            prev = v;
        }
    }
}

TEST_CASE("d_sum evaluates log q_{n+1} / q_n directly") {
    const ContinuedFraction cf = continued_fraction(kGolden, 6);
    const Real expect = std::log((Real)1) / 1 + std::log((Real)2) / 1 +
                        std::log((Real)3) / 2 + std::log((Real)5) / 3 +
                        std::log((Real)8) / 5;
    CHECK(std::fabs((double)(d_sum(cf).value - expect)) < 1e-15);
}

TEST_CASE("d_sum diverges on Liouville-like denominators") {
    ContinuedFraction cf;
    cf.q = {1};
    for (int n = 1; n <= 10; ++n)
        cf.q.push_back((long long)std::llround(std::exp((double)n * n / 4)));
    Real prev = 0;
    for (std::size_t depth = 2; depth <= cf.q.size(); ++depth) {
        ContinuedFraction part;
        part.q.assign(cf.q.begin(), cf.q.begin() + depth);
        part.p.assign(depth, 0);
        const Real v = d_sum(part).value;
        CHECK(v > prev);          // monotone, unbounded growth
        prev = v;
    }
    CHECK(prev > 5.0L);
}

TEST_CASE("d_sum needs two convergents") {
    ContinuedFraction cf;
    cf.q = {1};
    cf.p = {0};
    CHECK_THROWS_AS(d_sum(cf), math_error);
}

TEST_CASE("alpha sequence by brute force for (1, phi)") {
    RotationVector omega({1, kPhi});
    const auto& alpha = omega.alpha_sequence(5);
    CHECK(std::fabs((double)(alpha[0] - 1)) < 1e-15);             // +-e1, +-e2
    CHECK(std::fabs((double)(alpha[1] - (kPhi - 1))) < 1e-15);    // nu = (-1, 1)
    for (int n = 1; n <= 5; ++n) CHECK(alpha[n] <= alpha[n - 1]);
}

TEST_CASE("resonant omega is reported with a witness") {
    RotationVector omega({1, 2});
    try {
        omega.alpha_sequence(2);
        FAIL("expected resonance");
    } catch (const resonance_error& e) {
        REQUIRE(e.witness.size() == 2);
        CHECK(e.witness[0] + 2 * e.witness[1] == 0);
        CHECK(one_norm(std::span<const long long>(e.witness)) <= 4);
    }
}

TEST_CASE("scale_of") {
    CHECK(scale_of_norm(1) == 0);
    CHECK(scale_of_norm(3) == 2);
    CHECK(scale_of_norm(8) == 3);
    CHECK_THROWS_AS(scale_of_norm(0), math_error);
    // 2^{n-1} < |nu| <= 2^n
    for (long long m = 1; m <= 70; ++m) {
        const int n = scale_of_norm(m);
        CHECK(m <= (1ll << n));
        if (n > 0) CHECK(m > (1ll << (n - 1)));
    }
}

TEST_CASE("generalized Bryuno sum closed forms") {
    SUBCASE("alpha = 1 gives zero") {
        std::vector<Real> a(10, 1.0L);
        CHECK(generalized_bryuno_sum(a, 9).value == 0.0L);
    }
    SUBCASE("Diophantine profile 2^{-n tau} C0") {
        const Real tau = 1.5, C0 = 0.3;
        std::vector<Real> a(64);
        for (int n = 0; n < 64; ++n) a[n] = std::exp2(-tau * n) * C0;
        const Real expect = 2 * tau * std::log((Real)2) + 2 * std::log(1 / C0);
        CHECK(std::fabs((double)(generalized_bryuno_sum(a, 63).value - expect)) < 1e-9);
    }
}

TEST_CASE("every divisor in the ball respects alpha_n") {
    RotationVector omega({1, kPhi});
    const auto& alpha = omega.alpha_sequence(5);
    for (int n = 0; n <= 5; ++n) {
        const long long R = 1ll << n;
        for (long long n1 = -R; n1 <= R; ++n1)
            for (long long n2 = -R; n2 <= R; ++n2) {
                if (n1 == 0 && n2 == 0) continue;
                if (std::llabs(n1) + std::llabs(n2) > R) continue;
                const std::vector<long long> nu = {n1, n2};
                CHECK(std::fabs((double)omega.dot(std::span<const long long>(nu))) >=
                      (double)alpha[n] - 1e-18);
            }
    }
}

TEST_CASE("divisor below C0 gamma_n forces |nu| > 2^n") {
    RotationVector omega({1, kPhi});
    const Real C0 = 0.2;
    const auto gamma = omega.gamma_sequence(C0, 8);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long long> pick(-300, 300);
    int hits = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        const std::vector<long long> nu = {pick(rng), pick(rng)};
        const long long norm = one_norm(std::span<const long long>(nu));
        if (norm == 0) continue;
        const Real x = std::fabs((double)omega.dot(std::span<const long long>(nu)));
        for (int n = 0; n <= 8; ++n) {
            if (x < C0 * gamma[n]) {
                ++hits;
                CHECK(norm > (1ll << n));
            }
        }
    }
    CHECK(hits > 0);
}

TEST_CASE("Lemma 1 bracket for the golden and sqrt2 vectors") {
    for (std::vector<Real> comps :
         {std::vector<Real>{1, kPhi}, std::vector<Real>{1, std::sqrt((Real)2)}}) {
        RotationVector omega(comps);
        const Lemma1Bracket br = lemma1_bracket(omega, 10, 20);
        CHECK(br.holds);
        CHECK(br.B > 0);
        CHECK(br.D > 0);
        CHECK(br.D / 4 - br.C1 <= br.B);
        CHECK(br.B <= br.D + br.C2);
    }
}

TEST_CASE("default profile is normalised and admissible") {
    RotationVector omega({1, kPhi});
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1);
    CHECK(std::fabs((double)(prof.Gamma_bar_star(2).value - 1)) < 1e-12);
    const auto gamma = omega.gamma_sequence(0.2L, prof.depth() - 1);
    for (int n = 0; n < prof.depth(); ++n) CHECK(gamma[n] >= prof.gamma_star[n]);
    CHECK(prof.B_star().value > 0);
    // Gamma*_{p+1} > Gamma*_p wherever finite
    for (int p = 0; p <= 3; ++p)
        CHECK(prof.Gamma_star(p + 1).value > prof.Gamma_star(p).value);
}

TEST_CASE("maximal-torus shortcut keeps gamma itself") {
    RotationVector omega({1, kPhi});
    ProfileOptions opt;
    opt.use_gamma_directly = true;
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1, opt);
    const auto gamma = omega.gamma_sequence(0.2L, prof.depth() - 1);
    for (int n = 0; n < prof.depth(); ++n)
        CHECK(std::fabs((double)(prof.gamma_star[n] - gamma[n])) < 1e-18);
}

TEST_CASE("theorem2 damping threshold scans the gamma sequence") {
    RotationVector omega({1, kPhi});
    const Real C0 = 0.1;
    ProfileOptions opt;
    opt.Lambda0 = 1e-3L;   // eps0 * a_s
    const BryunoProfile prof = make_profile(omega, C0, ProfileMode::theorem2, opt);
    const auto gamma = omega.gamma_sequence(C0, prof.depth() - 1);
    const Real thr = 2 * std::sqrt(opt.Lambda0);
    int expect = -1;
    for (int n = 0; n + 1 < prof.depth(); ++n)
        if (C0 * gamma[n + 1] < thr) { expect = n; break; }
    CHECK(prof.n0 == expect);
    REQUIRE(prof.n0 >= 0);
    for (int n = 0; n < prof.n0; ++n)
        CHECK(std::fabs((double)(prof.gamma_star[n] - gamma[n])) < 1e-18);
    for (int n = prof.n0; n < prof.depth(); ++n)
        CHECK(std::fabs((double)(prof.gamma_star[n] -
                                 gamma[n] * std::exp2(-3.0L * n))) < 1e-18);
}

TEST_CASE("inadmissible custom profile reports the first violating scale") {
    RotationVector omega({1, kPhi});
    ProfileOptions opt;
    std::vector<Real> bad(13, 100.0L);
    opt.custom_gamma_star = bad;
    try {
        make_profile(omega, 0.2L, ProfileMode::theorem1, opt);
        FAIL("expected inadmissibility");
    } catch (const inadmissible_error& e) {
        CHECK(e.scale == 0);
    }
}

TEST_CASE("line scale ladder") {
    RotationVector omega({1, kPhi});
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1);
    CHECK(line_scale(1.0L, prof) == 0);
    // below half the deepest threshold the scale clamps at the profile depth
    CHECK(line_scale(1e-30L, prof) == prof.depth());
    // non-decreasing as |x| shrinks
    int prev = 0;
    for (Real x = 1; x > 1e-12L; x /= 2) {
        const int n = line_scale(x, prof);
        CHECK(n >= prev);
        prev = n;
    }
}
