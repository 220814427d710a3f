#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kamtori/errors.hpp"
#include "kamtori/model.hpp"

using namespace kamtori;
using nlohmann::json;

namespace {

json maximal_doc() {
    return json::parse(R"({"r":2,"s":0,"kappa0":0.5,"beta0":[],
        "modes":[{"nu":[1,0],"mu":[],"re":0.5},{"nu":[1,1],"mu":[],"re":0.5}]})");
}

} // namespace

TEST_CASE("maximal-torus model loads with degree 2") {
    const FourierModel m = load_model(maximal_doc());
    CHECK(m.r == 2);
    CHECK(m.s == 0);
    CHECK(m.N == 2);
    CHECK(m.modes.size() == 4);   // conjugates auto-completed
}

TEST_CASE("f0 identically zero is rejected as a degenerate Hessian") {
    // cos(alpha) cos(beta) has no nu = 0 modes
    const json doc = json::parse(R"({"r":1,"s":1,"beta0":[0],
        "modes":[{"nu":[1],"mu":[1],"re":0.25},{"nu":[1],"mu":[-1],"re":0.25}]})");
    CHECK_THROWS_AS(load_model(doc), math_error);
}

TEST_CASE("cos(beta) + cos(alpha+beta) gives a_1 = -1") {
    const json doc = json::parse(R"({"r":1,"s":1,"beta0":[0],
        "modes":[{"nu":[0],"mu":[1],"re":0.5},{"nu":[1],"mu":[1],"re":0.5}]})");
    const FourierModel m = load_model(doc);
    REQUIRE(m.hessian_eigs.size() == 1);
    CHECK(m.hessian_eigs[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("non-stationary beta0 is rejected") {
    const json doc = json::parse(R"({"r":1,"s":1,"beta0":[1.0],
        "modes":[{"nu":[0],"mu":[1],"re":0.5},{"nu":[1],"mu":[1],"re":0.5}]})");
    CHECK_THROWS_AS(load_model(doc), math_error);
}

TEST_CASE("reality violation is rejected") {
    const json doc = json::parse(R"({"r":1,"s":0,"beta0":[],
        "modes":[{"nu":[1],"mu":[],"re":0.5,"im":0.1},
                 {"nu":[-1],"mu":[],"re":0.5,"im":0.1}]})");
    CHECK_THROWS_AS(load_model(doc), math_error);
}

TEST_CASE("schema errors") {
    CHECK_THROWS_AS(load_model(json::parse(R"({"r":1})")), schema_error);
    CHECK_THROWS_AS(load_model(json::parse(
                        R"({"r":1,"s":1,"beta0":[],"modes":[]})")),
                    schema_error);
}

TEST_CASE("exact partial derivatives") {
    // f = cos(beta): d2/dbeta2 at 0 is -1
    const json doc1 = json::parse(R"({"r":1,"s":1,"beta0":[0],
        "modes":[{"nu":[0],"mu":[1],"re":0.5},{"nu":[1],"mu":[1],"re":0.25}]})");
    const FourierModel m1 = load_model(doc1);
    const std::vector<double> a0 = {0.0}, b0 = {0.0};
    {
        const int dd[2] = {1, 1};
        // contribution of cos(beta) is -1; cos(alpha+beta) adds -1/2 at 0
        CHECK(m1.eval_partial(a0, b0, dd) == doctest::Approx(-1.5).epsilon(1e-12));
    }
    {
        const int dd[2] = {0, 1};   // d_alpha d_beta of cos(alpha+beta)/2
        CHECK(m1.eval_partial(a0, b0, dd) == doctest::Approx(-0.5).epsilon(1e-12));
    }
}

TEST_CASE("derivatives agree with central finite differences") {
    const json doc = json::parse(R"({"r":2,"s":1,"kappa0":0.4,"beta0":[0],
        "modes":[{"nu":[0,0],"mu":[1],"re":-0.5},
                 {"nu":[1,0],"mu":[1],"re":0.3,"im":0.1},
                 {"nu":[1,1],"mu":[-1],"re":0.2}]})");
    const FourierModel m = load_model(doc);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-3, 3);
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> alpha = {uni(rng), uni(rng)};
        std::vector<double> beta = {uni(rng)};
        for (int g = 0; g < 3; ++g) {
            const int dd[1] = {g};
            const double exact = m.eval_partial(alpha, beta, dd);
            auto shift = [&](double s) {
                std::vector<double> a = alpha, b = beta;
                if (g < 2)
                    a[g] += s;
                else
                    b[g - 2] += s;
                return m.eval_partial(a, b, {});
            };
            const double fd = (shift(h) - shift(-h)) / (2 * h);
            CHECK(std::fabs(exact - fd) < 1e-8);
        }
    }
}

TEST_CASE("evaluations are real for real angles") {
    const FourierModel m = load_model(maximal_doc());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> alpha = {uni(rng), uni(rng)};
        const Complex v = m.eval_partial_c(alpha, {}, {});
        CHECK(std::fabs(v.imag()) < 1e-14);
    }
}

TEST_CASE("gradient Fourier coefficients carry the i nu factor") {
    const FourierModel m = load_model(maximal_doc());
    // d_alpha1 f at mode (1,0): i * 1 * 0.5; reconstruct by quadrature
    const int samples = 64;
    Complex acc = 0;
    for (int i = 0; i < samples; ++i)
        for (int j = 0; j < samples; ++j) {
            const std::vector<double> alpha = {2 * M_PI * i / samples,
                                               2 * M_PI * j / samples};
            const int dd[1] = {0};
            acc += m.eval_partial_c(alpha, {}, dd) *
                   std::polar(1.0, -alpha[0]);
        }
    acc /= (double)(samples * samples);
    CHECK(std::abs(acc - Complex(0, 0.5)) < 1e-12);
}
