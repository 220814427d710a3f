#ifndef KAMTORI_EXPANSION_HPP
#define KAMTORI_EXPANSION_HPP

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kamtori/arithmetic.hpp"
#include "kamtori/model.hpp"

namespace kamtori {

using ModeKey = std::vector<int>;                       // nu in Z^r
using CoeffMap = std::map<ModeKey, Eigen::VectorXcd>;   // nu -> C^d

// Order-by-order Fourier coefficients h^(k)_nu of the conjugation
// (a, b): first r components the angle sector, last s the normal sector.
// h^(k) is the exact eps^k Taylor coefficient, so one expansion serves every
// eps in range.
struct TorusExpansion {
    const FourierModel* model = nullptr;
    std::vector<double> omega;
    BryunoProfile profile;
    int K = 0;
    std::vector<CoeffMap> orders;   // orders[k-1] = h^(k)

    const CoeffMap& order(int k) const { return orders.at(k - 1); }

    // a, b and the action components A = omega + (omega.d_psi) a,
    // B = (omega.d_psi) b at given psi and eps.
    TorusPoint evaluate(std::span<const double> psi, double eps) const;

    // R(psi) = (omega.d_psi)^2 h + eps grad f(psi + a, beta0 + b), evaluated
    // with the order-K truncation; d components.
    std::vector<double> residual(std::span<const double> psi, double eps) const;

    // CSV rows "k,nu...,component,re,im".
    std::string dump_csv() const;
};

struct ExpandOptions {
    int K_max_guard = 12;
    bool check_admissibility = true;
    // relative tolerance for the angle-sector zero-mode consistency check
    double zero_mode_tol = 1e-8;
};

// Solves the order-k equations of motion of the Hamiltonian flow:
// for nu != 0, h^(k)_nu = [Taylor-Fourier assembly]_nu / (omega.nu)^2;
// the angle zero mode is gauged to 0 and the normal zero mode solved
// through the Hessian of f_0.
TorusExpansion expand_torus(const FourierModel& model, const RotationVector& omega,
                            const BryunoProfile& profile, int K,
                            const ExpandOptions& opt = {});

struct CrossCheckReport {
    int k = 0;
    ModeKey nu;
    Complex tree_sum;      // per component gamma, see values
    Complex recursion;
    double rel_err = 0;
    bool pass = false;
};

// Sums tree values over the order-k trees with root momentum nu and compares
// against the recursion coefficient, component by component; the worst
// component is reported.  Pins the diagrammatic conventions.
CrossCheckReport tree_sum_crosscheck(const FourierModel& model,
                                     const RotationVector& omega,
                                     const BryunoProfile& profile,
                                     int k, const ModeKey& nu,
                                     double rel_tol = 1e-9);

} // namespace kamtori

#endif
