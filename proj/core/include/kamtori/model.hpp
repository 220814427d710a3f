#ifndef KAMTORI_MODEL_HPP
#define KAMTORI_MODEL_HPP

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kamtori/numeric.hpp"

namespace kamtori {

using Complex = std::complex<double>;

// One Fourier mode of the perturbation: coefficient of e^{i(nu.alpha + mu.beta)}.
struct Mode {
    std::vector<int> nu;   // r components
    std::vector<int> mu;   // s components
    Complex c;

    // Full d-vector (nu, mu); the derivative weight of the mode.
    std::vector<double> w(int r, int s) const;
    long long norm1() const { return one_norm(std::span<const int>(nu)) +
                                     one_norm(std::span<const int>(mu)); }
};

// A trigonometric-polynomial perturbation f(alpha, beta) with the derived
// data at the stationary point beta0: the nu=0 average f_0, its Hessian and
// eigenvalues a_1 <= ... <= a_s.
class FourierModel {
public:
    int r = 0, s = 0;
    double kappa0 = 1.0;
    std::vector<double> beta0;
    std::vector<Mode> modes;           // conjugate-closed, no constant term
    int N = 0;                         // max |nu|+|mu| over modes
    double F0 = 0;                     // max |c|, stored only

    Eigen::MatrixXd hessian;           // d^2_beta f_0(beta0), s x s
    std::vector<double> hessian_eigs;  // ascending

    int d() const { return r + s; }

    // Partial derivative of f at (alpha, beta); deriv lists component
    // indices in 0..d-1, repeated per order.
    Complex eval_partial_c(std::span<const double> alpha, std::span<const double> beta,
                           std::span<const int> deriv) const;
    double eval_partial(std::span<const double> alpha, std::span<const double> beta,
                        std::span<const int> deriv) const;

    std::vector<double> gradient(std::span<const double> alpha,
                                 std::span<const double> beta) const;

    // e^{i mu . beta0} c_w, the node coefficient used by the expansions.
    Complex node_coefficient(const Mode& m) const;
};

// Validates and completes a model document:
//   { "r": int, "s": int, "kappa0": float, "beta0": [floats],
//     "modes": [ { "nu": [ints], "mu": [ints], "re": float, "im": float } ] }
// Conjugate modes are auto-completed when absent.  Throws schema_error on
// malformed documents, resonance-style math_errors on reality violations,
// non-stationary beta0 or a singular Hessian.
FourierModel load_model(const nlohmann::json& doc);
FourierModel load_model_file(const std::string& path);

// Evaluation point on the perturbed torus.
struct TorusPoint {
    std::vector<double> psi;   // r
    std::vector<double> a;     // r
    std::vector<double> b;     // s
    std::vector<double> A;     // r
    std::vector<double> B;     // s
};

} // namespace kamtori

#endif
