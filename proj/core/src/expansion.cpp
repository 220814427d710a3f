#include "kamtori/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "kamtori/errors.hpp"
#include "kamtori/trees.hpp"

namespace kamtori {

namespace {

using ScalarMap = std::map<ModeKey, Complex>;

ModeKey add_keys(const ModeKey& a, const ModeKey& b) {
    ModeKey out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}
bool is_zero(const ModeKey& k) {
    return std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
}

// phi_w^(j)_nu = i (w . h^(j)_nu): the insertion series of mode w.
ScalarMap phi_of(const std::vector<double>& w, const CoeffMap& h_k) {
    ScalarMap out;
    for (const auto& [nu, vec] : h_k) {
        Complex dot = 0;
        for (int g = 0; g < (int)w.size(); ++g) dot += w[g] * vec[g];
        if (dot != 0.0) out[nu] = Complex(0, 1) * dot;
    }
    return out;
}

// Per-mode state of the convolution exponential E_w = exp*(phi_w), carried
// order by order with the power-series recurrence q E^(q) = sum j phi^(j) E^(q-j).
struct ExpSeries {
    std::vector<ScalarMap> E;     // E[0] = delta_{nu,0}
    std::vector<ScalarMap> phi;   // phi[0] unused (phi starts at order 1)

    void init(int r) {
        E.assign(1, ScalarMap{});
        E[0][ModeKey((std::size_t)r, 0)] = 1.0;
        phi.assign(1, ScalarMap{});
    }
    void push(ScalarMap phi_q) {
        phi.push_back(std::move(phi_q));
        const int q = (int)phi.size() - 1;
        ScalarMap Eq;
        for (int j = 1; j <= q; ++j) {
            if (phi[j].empty()) continue;
            for (const auto& [kp, vp] : phi[j])
                for (const auto& [ke, ve] : E[q - j])
                    Eq[add_keys(kp, ke)] += (double)j * vp * ve;
        }
        for (auto& [k, v] : Eq) v /= (double)q;
        E.push_back(std::move(Eq));
    }
    void repush_last(ScalarMap phi_q) {
        phi.pop_back();
        E.pop_back();
        push(std::move(phi_q));
    }
};

} // namespace

TorusExpansion expand_torus(const FourierModel& model, const RotationVector& omega,
                            const BryunoProfile& profile, int K,
                            const ExpandOptions& opt) {
    if (omega.dim() != model.r)
        throw math_error("expand_torus: omega dimension must equal model r");
    if (K < 1 || K > opt.K_max_guard)
        throw math_error("expand_torus: K out of range");

    const int r = model.r, s = model.s, d = model.d();
    TorusExpansion exp;
    exp.model = &model;
    exp.omega = omega.components_d();
    exp.profile = profile;
    exp.K = K;
    exp.orders.resize(K);

    Eigen::FullPivLU<Eigen::MatrixXd> hess_lu;
    if (s > 0) hess_lu.compute(model.hessian);

    std::vector<ExpSeries> series(model.modes.size());
    std::vector<std::vector<double>> wvec(model.modes.size());
    std::vector<Complex> ncoef(model.modes.size());
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
        series[i].init(r);
        wvec[i] = model.modes[i].w(r, s);
        ncoef[i] = model.node_coefficient(model.modes[i]);
    }

    auto divisor_checked = [&](const ModeKey& nu) -> Real {
        std::vector<long long> nl(nu.begin(), nu.end());
        const Real x = omega.dot(std::span<const long long>(nl));
        const Real ax = std::fabs((double)x);
        if (ax < (Real)kResonanceTol) {
            std::ostringstream os;
            os << "expand_torus: resonant divisor";
            throw resonance_error(os.str(), nl);
        }
        if (opt.check_admissibility) {
            const int n = scale_of(std::span<const long long>(nl));
            const Real bound = profile.C0 * profile.gamma(n);
            if (ax < bound) {
                std::ostringstream os;
                os << "expand_torus: Mel'nikov violation at scale " << n;
                throw inadmissible_error(os.str(), nl, n, (double)(bound - ax));
            }
        }
        return x;
    };

    // force assembly at eps-order q: T_{nu,gamma} = sum_w c_w e^{i mu.beta0}
    // (i w_gamma) E_w^(q)_{nu - nu_w}
    auto assemble_T = [&](int q) -> CoeffMap {
        CoeffMap T;
        for (std::size_t i = 0; i < model.modes.size(); ++i) {
            if (q >= (int)series[i].E.size()) continue;
            const ModeKey nw(model.modes[i].nu.begin(), model.modes[i].nu.end());
            for (const auto& [ke, ve] : series[i].E[q]) {
                const ModeKey nu = add_keys(nw, ke);
                auto it = T.find(nu);
                if (it == T.end())
                    it = T.emplace(nu, Eigen::VectorXcd::Zero(d)).first;
                const Complex base = ncoef[i] * ve;
                for (int g = 0; g < d; ++g)
                    it->second[g] += base * Complex(0, wvec[i][g]);
            }
        }
        return T;
    };

    for (int k = 1; k <= K; ++k) {
        const CoeffMap T = assemble_T(k - 1);
        CoeffMap& hk = exp.orders[k - 1];
        for (const auto& [nu, force] : T) {
            if (is_zero(nu)) continue;
            const Real x = divisor_checked(nu);
            hk[nu] = force / (double)(x * x);
        }

        // Zero mode: provisional E at order k (with h^(k)_0 = 0), then the
        // Hessian solve for the normal sector; the angle row must vanish by
        // the Hamiltonian structure.
        for (std::size_t i = 0; i < model.modes.size(); ++i)
            series[i].push(phi_of(wvec[i], hk));
        const CoeffMap Tk = assemble_T(k);
        const ModeKey zero((std::size_t)r, 0);
        auto itz = Tk.find(zero);
        if (itz != Tk.end()) {
            double scale = 1e-300;
            for (const auto& [nu, v] : Tk) scale = std::max(scale, v.norm());
            for (int g = 0; g < r; ++g) {
                if (std::abs(itz->second[g]) > opt.zero_mode_tol * scale) {
                    std::ostringstream os;
                    os << "expand_torus: angle zero mode not closed at order " << k
                       << " (|T_0|=" << std::abs(itz->second[g]) << ")";
                    throw math_error(os.str());
                }
            }
            if (s > 0) {
                Eigen::VectorXcd R = itz->second.tail(s);
                if (R.norm() > 0) {
                    Eigen::VectorXcd b0 = Eigen::VectorXcd::Zero(s);
                    b0.real() = -hess_lu.solve(R.real().eval());
                    b0.imag() = -hess_lu.solve(R.imag().eval());
                    Eigen::VectorXcd h0 = Eigen::VectorXcd::Zero(d);
                    h0.tail(s) = b0;
                    hk[zero] = h0;
                    for (std::size_t i = 0; i < model.modes.size(); ++i)
                        series[i].repush_last(phi_of(wvec[i], hk));
                }
            }
        }
    }
    return exp;
}

TorusPoint TorusExpansion::evaluate(std::span<const double> psi, double eps) const {
    const int r = model->r, s = model->s;
    TorusPoint pt;
    pt.psi.assign(psi.begin(), psi.end());
    pt.a.assign(r, 0.0);
    pt.b.assign(s, 0.0);
    pt.A.assign(omega.begin(), omega.end());
    pt.B.assign(s, 0.0);
    double epsk = 1.0;
    for (int k = 1; k <= K; ++k) {
        epsk *= eps;
        for (const auto& [nu, vec] : orders[k - 1]) {
            double arg = 0, xdn = 0;
            for (int i = 0; i < r; ++i) {
                arg += nu[i] * psi[i];
                xdn += nu[i] * omega[i];
            }
            const Complex e = std::polar(1.0, arg);
            for (int i = 0; i < r; ++i) {
                pt.a[i] += epsk * (vec[i] * e).real();
                pt.A[i] += epsk * (Complex(0, xdn) * vec[i] * e).real();
            }
            for (int i = 0; i < s; ++i) {
                pt.b[i] += epsk * (vec[r + i] * e).real();
                pt.B[i] += epsk * (Complex(0, xdn) * vec[r + i] * e).real();
            }
        }
    }
    return pt;
}

std::vector<double> TorusExpansion::residual(std::span<const double> psi,
                                             double eps) const {
    const int r = model->r, s = model->s, d = model->d();
    const TorusPoint pt = evaluate(psi, eps);
    std::vector<double> R(d, 0.0);
    double epsk = 1.0;
    for (int k = 1; k <= K; ++k) {
        epsk *= eps;
        for (const auto& [nu, vec] : orders[k - 1]) {
            double arg = 0, xdn = 0;
            for (int i = 0; i < r; ++i) {
                arg += nu[i] * psi[i];
                xdn += nu[i] * omega[i];
            }
            const Complex e = std::polar(1.0, arg);
            for (int g = 0; g < d; ++g)
                R[g] += epsk * (-(xdn * xdn) * vec[g] * e).real();
        }
    }
    std::vector<double> alpha(r), beta(s);
    for (int i = 0; i < r; ++i) alpha[i] = psi[i] + pt.a[i];
    for (int i = 0; i < s; ++i) beta[i] = model->beta0[i] + pt.b[i];
    for (int g = 0; g < d; ++g) {
        const int idx[1] = {g};
        R[g] += eps * model->eval_partial(alpha, beta, idx);
    }
    return R;
}

std::string TorusExpansion::dump_csv() const {
    std::ostringstream os;
    os << "k";
    for (int i = 0; i < model->r; ++i) os << ",nu" << i;
    os << ",component,re,im\n";
    for (int k = 1; k <= K; ++k) {
        for (const auto& [nu, vec] : orders[k - 1]) {
            for (int g = 0; g < model->d(); ++g) {
                if (vec[g] == 0.0) continue;
                os << k;
                for (int c : nu) os << "," << c;
                os << "," << g << "," << format_g17(vec[g].real()) << ","
                   << format_g17(vec[g].imag()) << "\n";
            }
        }
    }
    return os.str();
}

CrossCheckReport tree_sum_crosscheck(const FourierModel& model,
                                     const RotationVector& omega,
                                     const BryunoProfile& profile,
                                     int k, const ModeKey& nu,
                                     double rel_tol) {
    CrossCheckReport rep;
    rep.k = k;
    rep.nu = nu;
    const TorusExpansion exp = expand_torus(model, omega, profile, k);
    Eigen::VectorXcd rec = Eigen::VectorXcd::Zero(model.d());
    auto it = exp.order(k).find(nu);
    if (it != exp.order(k).end()) rec = it->second;

    const Eigen::VectorXcd tree = sum_tree_values(model, omega, k, nu);

    rep.pass = true;
    rep.rel_err = 0;
    for (int g = 0; g < model.d(); ++g) {
        const double denom = std::max(std::abs(rec[g]), 1e-30);
        const double err = std::abs(tree[g] - rec[g]) / denom;
        if (err > rep.rel_err) {
            rep.rel_err = err;
            rep.tree_sum = tree[g];
            rep.recursion = rec[g];
        }
        if (err > rel_tol) rep.pass = false;
    }
    return rep;
}

} // namespace kamtori
