#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"

using namespace kamtori;
using nlohmann::json;

namespace {

const Real kPhi = (std::sqrt((Real)5) + 1) / 2;

FourierModel mixed11() {
    return load_model(json::parse(R"({"r":1,"s":1,"kappa0":0.5,"beta0":[0],
        "modes":[{"nu":[0],"mu":[1],"re":-0.5},{"nu":[1],"mu":[1],"re":0.5}]})"));
}

FourierModel mixed12() {
    return load_model(json::parse(R"({"r":1,"s":2,"kappa0":0.5,"beta0":[0,0],
        "modes":[{"nu":[0],"mu":[1,0],"re":-0.5},
                 {"nu":[0],"mu":[0,1],"re":-1.0},
                 {"nu":[1],"mu":[1,0],"re":0.5},
                 {"nu":[1],"mu":[0,1],"re":0.5}]})"));
}

FourierModel mixed12_hyp() {
    return load_model(json::parse(R"({"r":1,"s":2,"kappa0":0.5,"beta0":[0,0],
        "modes":[{"nu":[0],"mu":[1,0],"re":0.5},
                 {"nu":[0],"mu":[0,1],"re":1.0},
                 {"nu":[1],"mu":[1,0],"re":0.5},
                 {"nu":[1],"mu":[0,1],"re":0.5}]})"));
}

FourierModel maximal2() {
    return load_model(json::parse(R"({"r":2,"s":0,"kappa0":0.5,"beta0":[],
        "modes":[{"nu":[1,0],"mu":[],"re":0.5},{"nu":[1,1],"mu":[],"re":0.5}]})"));
}

} // namespace

TEST_CASE("reference profile is normalised") {
    const BryunoProfile prof = reference_profile(2, 0.1L);
    CHECK(std::fabs((double)(prof.Gamma_bar_star(2).value - 1)) < 1e-12);
}

TEST_CASE("maximal sector reduces the conditions to profile admissibility") {
    const FourierModel model = maximal2();
    RotationVector omega({1, kPhi});
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1);
    SelfEnergyState state(model, omega, prof, 1e-3);
    state.build_to(3);
    const AdmissibilityReport rep = check_melnikov(omega, 1e-3, state, 16, 3);
    CHECK(rep.admissible);
    CHECK(rep.conditions_checked > 0);
}

TEST_CASE("eps = 0 collapses the second conditions onto the first") {
    const FourierModel model = mixed11();
    RotationVector omega({1.2L});
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1);
    SelfEnergyState s0(model, omega, prof, 0.0);
    s0.build_to(2);
    const AdmissibilityReport rep = check_melnikov(omega, 0.0, s0, 16, 2);
    CHECK(rep.admissible);
}

TEST_CASE("a constructed near-resonance is reported with its margin") {
    const FourierModel model = mixed11();
    RotationVector omega({1.0L});
    const BryunoProfile prof = make_profile(omega, 0.2L, ProfileMode::theorem1);
    // sqrt(eps a_1) = omega . 1 up to a hair: first Mel'nikov violation
    const double eps = (1.0 - 1e-4) * (1.0 - 1e-4) / model.hessian_eigs[0];
    SelfEnergyState state(model, omega, prof, eps, 1);
    state.build_to(2);
    const AdmissibilityReport rep = check_melnikov(omega, eps, state, 8, 2);
    REQUIRE_FALSE(rep.admissible);
    REQUIRE(rep.first_violation.has_value());
    CHECK(rep.first_violation->margin < 0);
    CHECK(one_norm(std::span<const long long>(rep.first_violation->nu)) == 1);
}

TEST_CASE("excluded measure vanishes as C0 goes to zero") {
    const FourierModel model = maximal2();
    OmegaScanOptions opt;
    opt.samples = 2000;
    opt.seed = 42;
    const MeasureEstimate est =
        excluded_measure_omega(2, 1.0, 2.0, {1e-5}, 1e-3, model, opt);
    CHECK(est.points[0].excluded_fraction < 0.01);
}

TEST_CASE("excluded fraction is monotone in C0 and roughly linear") {
    const FourierModel model = mixed12();
    OmegaScanOptions opt;
    opt.samples = 20000;
    opt.seed = 7;
    const MeasureEstimate est = excluded_measure_omega(
        2, 1.0, 2.0, {0.05, 0.1, 0.2}, 1e-3, model, opt);
    REQUIRE(est.points.size() == 3);
    CHECK(est.points[0].excluded_fraction <= est.points[1].excluded_fraction);
    CHECK(est.points[1].excluded_fraction <= est.points[2].excluded_fraction);
    CHECK(est.fit_exponent > 0.6);
    CHECK(est.fit_exponent < 1.4);
    // threading must not change the estimate
    OmegaScanOptions opt4 = opt;
    opt4.threads = 4;
    const MeasureEstimate est4 = excluded_measure_omega(
        2, 1.0, 2.0, {0.05, 0.1, 0.2}, 1e-3, model, opt4);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(est4.points[i].excluded_fraction ==
              est.points[i].excluded_fraction);
}

TEST_CASE("doubling nu_max moves the estimate less than the profile tail") {
    const FourierModel model = mixed12();
    OmegaScanOptions a, b;
    a.samples = b.samples = 5000;
    a.seed = b.seed = 9;
    a.nu_max = 32;
    b.nu_max = 64;
    const MeasureEstimate ea =
        excluded_measure_omega(2, 1.0, 2.0, {0.1}, 1e-3, model, a);
    const MeasureEstimate eb =
        excluded_measure_omega(2, 1.0, 2.0, {0.1}, 1e-3, model, b);
    // tail bound: sum_{n > n_cut} gamma*_n 2^{n(r-1)} at r = 2
    const BryunoProfile prof = reference_profile(2, 0.1L);
    const int n_cut = scale_of_norm(32);
    double tail = 0;
    for (int n = n_cut + 1; n < prof.depth(); ++n)
        tail += (double)(prof.gamma_star[n] * std::exp2((Real)n));
    CHECK(std::fabs(ea.points[0].excluded_fraction -
                    eb.points[0].excluded_fraction) <= 4 * tail + 3e-3);
}

TEST_CASE("sample floor is enforced") {
    const FourierModel model = maximal2();
    OmegaScanOptions opt;
    opt.samples = 10;
    CHECK_THROWS_AS(excluded_measure_omega(2, 1.0, 2.0, {0.1}, 0, model, opt),
                    math_error);
}

TEST_CASE("maximal sector keeps the whole eps window") {
    const FourierModel model = maximal2();
    RotationVector omega({1, kPhi});
    const CantorSet cs = epsilon_cantor_set(omega, model, 0.1, 0.4);
    REQUIRE(cs.kept.size() == 1);
    CHECK(cs.kept[0].lo == doctest::Approx(0.1));
    CHECK(cs.kept[0].hi == doctest::Approx(0.4));
    for (const auto& pt : cs.sweep) CHECK(pt.ratio == 0.0);
}

TEST_CASE("hyperbolic configuration keeps full measure") {
    const FourierModel model = mixed12_hyp();
    RotationVector omega({0.35L});
    const CantorSet cs = epsilon_cantor_set(omega, model, 0.1, 0.4);
    for (const auto& pt : cs.sweep) {
        CHECK(pt.excluded == 0.0);
        CHECK(pt.ratio == 0.0);
    }
}

TEST_CASE("cantor sweep produces merged intervals and csv") {
    const FourierModel model = mixed12();
    RotationVector omega({0.35L});
    const CantorSet cs = epsilon_cantor_set(omega, model, 0.1, 0.4, 64, 4);
    REQUIRE(cs.sweep.size() == 5);
    double kept = 0;
    for (const auto& iv : cs.kept) {
        CHECK(iv.hi >= iv.lo);
        kept += iv.length();
    }
    CHECK(kept == doctest::Approx(0.3 - cs.sweep[0].excluded).epsilon(1e-9));
    CHECK(cs.sweep_csv().find("eps0,n0,window,excluded,ratio") == 0);
    CHECK(cs.intervals_csv().find("lo,hi") == 0);
}

TEST_CASE("action-space map at eps = 0") {
    const FourierModel model = maximal2();
    ActionScanOptions opt;
    opt.samples = 60;
    opt.seed = 3;
    const ActionSpaceEstimate est = action_space_measure(model, 1.0, 2.0, 0.1, 0.0, opt);
    CHECK(est.max_shift == 0.0);
    CHECK(est.min_det == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(est.max_det == doctest::Approx(1.0).epsilon(1e-9));
    const double excluded_frac =
        1.0 - (double)est.admissible / (double)est.samples;
    CHECK(est.complement_measure ==
          doctest::Approx(est.domain_volume * excluded_frac).epsilon(1e-9));
}

TEST_CASE("action-space Jacobian stays near the identity for small eps") {
    const FourierModel model = maximal2();
    ActionScanOptions opt;
    opt.samples = 40;
    opt.seed = 3;
    const double eps = 2e-3;
    const ActionSpaceEstimate est = action_space_measure(model, 1.0, 2.0, 0.1, eps, opt);
    CHECK(est.max_shift <= 10 * eps);
    CHECK(est.min_det > 1 - 100 * eps);
    CHECK(est.max_det < 1 + 100 * eps);
}
