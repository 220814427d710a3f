#include "kamtori/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

class Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

} // namespace

bool VerificationSuite::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

void VerificationSuite::merge(VerificationSuite other) {
    for (auto& c : other.checks) checks.push_back(std::move(c));
}

nlohmann::json VerificationSuite::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const CheckResult& c : checks)
        out.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"observed", c.observed},
                       {"threshold", c.threshold},
                       {"detail", c.detail},
                       {"ms", c.ms}});
    return {{"checks", out}, {"all_pass", all_pass()}};
}

VerificationSuite VerificationSuite::from_json(const nlohmann::json& j) {
    VerificationSuite s;
    for (const auto& jc : j.at("checks"))
        s.checks.push_back({jc.at("name").get<std::string>(), jc.at("pass").get<bool>(),
                            jc.at("observed").get<double>(),
                            jc.at("threshold").get<double>(),
                            jc.at("detail").get<std::string>(), jc.at("ms").get<double>()});
    return s;
}

std::vector<ResidualFit> residual_scan(const FourierModel& model,
                                       const RotationVector& omega,
                                       const BryunoProfile& profile,
                                       const std::vector<int>& K_list,
                                       const std::vector<double>& eps_list,
                                       int grid_per_dim) {
    const int K_top = std::max(1, *std::max_element(K_list.begin(), K_list.end()));
    const TorusExpansion full = expand_torus(model, omega, profile, K_top);

    std::vector<ResidualFit> fits;
    for (int K : K_list) {
        TorusExpansion trunc = full;
        trunc.K = K;
        trunc.orders.resize(K);
        ResidualFit fit;
        fit.K = K;
        for (double eps : eps_list) {
            double sup = 0;
            std::vector<double> psi(model.r, 0.0);
            std::vector<int> idx(model.r, 0);
            const double step = 2 * M_PI / grid_per_dim;
            bool done = false;
            while (!done) {
                for (int i = 0; i < model.r; ++i) psi[i] = idx[i] * step;
                const std::vector<double> R = trunc.residual(psi, eps);
                for (double v : R) sup = std::max(sup, std::fabs(v));
                int i = 0;
                for (; i < model.r; ++i) {
                    if (++idx[i] < grid_per_dim) break;
                    idx[i] = 0;
                }
                done = i == model.r;
            }
            fit.eps.push_back(eps);
            fit.sup_residual.push_back(sup);
        }
        fit.slope = loglog_slope(fit.eps, fit.sup_residual);
        fits.push_back(std::move(fit));
    }
    return fits;
}

DecayFit decay_fit(const TorusExpansion& exp) {
    std::map<long long, double> shell;
    for (int k = 1; k <= exp.K; ++k) {
        for (const auto& [nu, vec] : exp.order(k)) {
            long long norm = 0;
            for (int c : nu) norm += std::abs(c);
            if (norm == 0) continue;
            double mx = 0;
            for (int g = 0; g < vec.size(); ++g) mx = std::max(mx, std::abs(vec[g]));
            auto it = shell.find(norm);
            if (it == shell.end())
                shell[norm] = mx;
            else
                it->second = std::max(it->second, mx);
        }
    }
    if (shell.size() < 2) throw math_error("decay_fit: fewer than two |nu| shells");
    DecayFit fit;
    fit.shells = (int)shell.size();
    std::vector<double> xs, ys;
    for (const auto& [norm, mx] : shell) {
        fit.shell_norm.push_back(mx);
        if (mx > 0) {
            xs.push_back((double)norm);
            ys.push_back(std::log(mx));
        }
    }
    fit.kappa = -ols_fit(xs, ys).second;
    return fit;
}

ProductBoundReport product_bound_audit(const FourierModel& model,
                                       const RotationVector& omega,
                                       const BryunoProfile& profile, int k_max,
                                       const EnumerationOptions& opt) {
    ProductBoundReport rep;
    const int depth = profile.depth() - 1;
    const TruncatedSum B = generalized_bryuno_sum(omega.alpha_sequence(depth), depth);
    rep.slope_budget = 4.0 * model.N * (double)B.value;

    // frozen self-energies: the audit depends on the cutoff prefactors only
    SelfEnergyState state(model, omega, profile, 0.0);
    CutoffFamily cut = state.cutoffs();

    for (int k = 1; k <= k_max; ++k) {
        double worst = -1e300;
        for_each_tree(model, k, {}, [&](const Tree& t) {
            double logprod = 0;
            for (int v = 0; v < t.size(); ++v) {
                std::vector<long long> nl(t.momentum[v].begin(), t.momentum[v].end());
                if (one_norm(std::span<const long long>(nl)) == 0) continue;
                const double x = (double)omega.dot(std::span<const long long>(nl));
                const int n = line_scale((Real)x, profile);
                double pref = 1.0;
                for (int q = 0; q < n; ++q) pref *= cut.chi_n(x * x, q);
                pref *= 1.0 - cut.chi_n(x * x, n);
                if (pref <= 0) pref = 1.0;   // window boundary: bare bound
                logprod += std::log(pref / (x * x));
            }
            worst = std::max(worst, logprod);
        }, opt);
        rep.points.push_back({k, worst, 4.0 * model.N * k * (double)B.value});
    }
    std::vector<double> xs, ys;
    for (const auto& p : rep.points) {
        xs.push_back(p.k);
        ys.push_back(p.max_log_product);
    }
    auto [a, b] = ols_fit(xs, ys);
    rep.fitted_intercept = a;
    rep.fitted_slope = b;
    rep.pass = b <= rep.slope_budget + 1e-9;
    return rep;
}

namespace {

bool in_scope(const SuiteConfig& cfg, const std::string& name) {
    if (cfg.scope.count("default")) return true;
    return cfg.scope.count(name) > 0;
}

void push(VerificationSuite& suite, const Stopwatch& sw, const std::string& name,
          bool pass, double observed, double threshold, std::string detail = {}) {
    suite.checks.push_back({name, pass, observed, threshold, std::move(detail), sw.ms()});
}

} // namespace

VerificationSuite lemma_suite(const SuiteConfig& cfg) {
    VerificationSuite suite;
    if (cfg.scope.empty()) return suite;
    if (!cfg.model) throw math_error("lemma_suite: no model configured");

    const FourierModel& model = *cfg.model;
    RotationVector omega(cfg.omega);
    ProfileOptions popt;
    if (cfg.gamma_star_override) popt.custom_gamma_star = cfg.gamma_star_override;
    BryunoProfile profile;
    try {
        profile = make_profile(omega, (Real)cfg.C0, ProfileMode::theorem1, popt);
    } catch (const inadmissible_error& e) {
        // corrupted comparison sequence: report the violation with its witness
        Stopwatch sw;
        if (in_scope(cfg, "counting"))
            push(suite, sw, "counting.lemma3-4", false, (double)e.scale, 0, e.what());
        push(suite, sw, "profile.admissibility", false, (double)e.scale, 0, e.what());
        return suite;
    }

    if (in_scope(cfg, "counting")) {
        Stopwatch sw;
        CountingReport rep;
        try {
            for (int k = 1; k <= cfg.counting_k_max; ++k) {
                for_each_tree(model, k, {}, [&](const Tree& t) {
                    Tree scaled = t;
                    assign_scales(scaled, omega, profile);
                    check_counting(scaled, profile.mode, rep);
                });
            }
            std::string detail = rep.violations.empty()
                                     ? std::string{}
                                     : rep.violations.front().what;
            push(suite, sw, "counting.lemma3-4", rep.pass, (double)rep.violations.size(),
                 0, detail);
        } catch (const std::exception& e) {
            push(suite, sw, "counting.lemma3-4", false, -1, 0, e.what());
        }
    }

    const FourierModel* mixed = cfg.mixed_model ? cfg.mixed_model : nullptr;

    if (in_scope(cfg, "symmetry") && mixed) {
        Stopwatch sw;
        RotationVector om1({cfg.omega[0]});
        const BryunoProfile prof1 = make_profile(om1, (Real)cfg.C0, ProfileMode::theorem1);
        SelfEnergyState state(*mixed, om1, prof1, cfg.eps);
        state.build_to(4);
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> uni(-0.5, 0.5);
        double worst_h = 0, worst_t = 0;
        for (int probe = 0; probe < 40; ++probe) {
            const double x = probe < 20 ? uni(rng) * 1e-4 : uni(rng);
            for (int n = 0; n <= 4; ++n) {
                const Eigen::MatrixXcd M = state.M_leq(n, x);
                const Eigen::MatrixXcd Mm = state.M_leq(n, -x);
                worst_h = std::max(worst_h, (M - M.adjoint()).norm());
                worst_t = std::max(worst_t, (M.transpose() - Mm).norm());
            }
        }
        push(suite, sw, "selfenergy.hermitian", worst_h <= 1e-12, worst_h, 1e-12);
        push(suite, sw, "selfenergy.transpose", worst_t <= 1e-12, worst_t, 1e-12);
    }

    if (in_scope(cfg, "closeness") && mixed) {
        Stopwatch sw;
        RotationVector om1({cfg.omega[0]});
        const BryunoProfile prof1 = make_profile(om1, (Real)cfg.C0, ProfileMode::theorem1);
        SelfEnergyState state(*mixed, om1, prof1, cfg.eps);
        state.build_to(4);
        const std::vector<double> ratios = state.closeness_ratios();
        bool decaying = true;
        for (std::size_t i = 1; i < ratios.size(); ++i)
            if (ratios[i] > ratios[i - 1] + 1e-12) decaying = false;
        const double worst = *std::max_element(ratios.begin(), ratios.end());
        push(suite, sw, "selfenergy.closeness", decaying && worst < 1e4, worst, 1e4);
    }

    if (in_scope(cfg, "whitney") && mixed) {
        Stopwatch sw;
        RotationVector om1({cfg.omega[0]});
        const BryunoProfile prof1 = make_profile(om1, (Real)cfg.C0, ProfileMode::theorem1);
        SelfEnergyState state(*mixed, om1, prof1, cfg.eps);
        state.build_to(2);
        const WhitneyReport wx = state.whitney_x(1e-5, 2, 1e-6);
        const WhitneyReport we = state.whitney_eps(0, 2, cfg.eps / 8);
        bool pass = wx.all_pass() && we.all_pass();
        push(suite, sw, "whitney.finite-difference", pass,
             wx.checks.empty() ? 0 : wx.checks.front().observed, 0);
    }

    if (in_scope(cfg, "product_bound")) {
        Stopwatch sw;
        const ProductBoundReport rep =
            product_bound_audit(model, omega, profile, std::min(cfg.counting_k_max, 4));
        push(suite, sw, "propagator.product-bound", rep.pass, rep.fitted_slope,
             rep.slope_budget);
    }

    if (in_scope(cfg, "decay")) {
        Stopwatch sw;
        try {
            const TorusExpansion exp = expand_torus(model, omega, profile, 5);
            const DecayFit fit = decay_fit(exp);
            push(suite, sw, "coefficients.decay", fit.kappa >= model.kappa0 / 2,
                 fit.kappa, model.kappa0 / 2);
        } catch (const std::exception& e) {
            push(suite, sw, "coefficients.decay", false, -1, 0, e.what());
        }
    }

    if (in_scope(cfg, "residual")) {
        Stopwatch sw;
        const std::vector<double> eps_list = {1e-3, 2e-3, 4e-3, 8e-3};
        const auto fits = residual_scan(model, omega, profile, {2}, eps_list, 16);
        const double slope = fits.front().slope;
        push(suite, sw, "residual.slope", std::fabs(slope - 3.0) <= 0.2, slope, 3.0);
    }

    if (in_scope(cfg, "measure")) {
        Stopwatch sw;
        OmegaScanOptions mopt;
        mopt.samples = cfg.measure_samples;
        mopt.seed = cfg.seed;
        const MeasureEstimate est = excluded_measure_omega(
            2, 1.0, 2.0, {0.05, 0.1, 0.2}, cfg.eps,
            mixed ? *mixed : model, mopt);
        const bool pass = est.fit_exponent >= 0.6 && est.fit_exponent <= 1.4;
        push(suite, sw, "measure.C0-linearity", pass, est.fit_exponent, 1.0);
    }

    return suite;
}

} // namespace kamtori
