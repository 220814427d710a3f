#include "kamtori/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "kamtori/errors.hpp"
#include "kamtori/expansion.hpp"

namespace kamtori {

BryunoProfile reference_profile(int r, Real C0, int n_max) {
    BryunoProfile prof;
    prof.C0 = C0;
    prof.r = r;
    prof.mode = ProfileMode::theorem1;
    prof.n0 = -1;
    std::vector<Real> raw(n_max + 1);
    Real Z = 0;
    for (int n = 0; n <= n_max; ++n) {
        raw[n] = std::exp2(-(Real)n * ((Real)r + 0.5L));
        Z += raw[n] * std::exp2((Real)(n * r));
    }
    prof.gamma_star.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) prof.gamma_star[n] = raw[n] / Z;
    return prof;
}

namespace {

// sqrt of a possibly negative self-energy: imaginary for hyperbolic
// directions, where the conditions hold automatically.
std::complex<double> lam_sqrt(double lam) {
    return lam >= 0 ? std::complex<double>(std::sqrt(lam), 0)
                    : std::complex<double>(0, std::sqrt(-lam));
}

void enumerate_half_ball(int r, long long nu_max,
                         const std::function<void(const std::vector<long long>&)>& fn) {
    std::vector<long long> nu(r, 0);
    std::function<void(int, long long, bool)> rec = [&](int idx, long long budget,
                                                        bool nonzero) {
        if (idx == r) {
            if (nonzero) fn(nu);
            return;
        }
        const long long lo = nonzero ? -budget : 0;
        for (long long c = lo; c <= budget; ++c) {
            nu[idx] = c;
            rec(idx + 1, budget - std::llabs(c), nonzero || c != 0);
        }
        nu[idx] = 0;
    };
    rec(0, nu_max, false);
}

} // namespace

AdmissibilityReport check_melnikov(const RotationVector& omega, double eps,
                                   const SelfEnergyState& state,
                                   long long nu_max, int n_max) {
    (void)eps;
    const BryunoProfile& prof = state.profile();
    const int d = state.model().d();
    const int n0 = prof.mode == ProfileMode::theorem2 ? prof.n0 : 0;
    AdmissibilityReport rep;
    if (prof.mode == ProfileMode::theorem2 && n0 < 0) return rep;   // nothing imposed

    enumerate_half_ball(omega.dim(), nu_max, [&](const std::vector<long long>& nu) {
        if (!rep.admissible) return;
        const int nnu = scale_of(std::span<const long long>(nu));
        if (nnu < n0) return;
        const double x = (double)omega.dot(std::span<const long long>(nu));
        const double thr = (double)(prof.C0 * prof.gamma(nnu));
        for (int n = n0; n <= n_max; ++n) {
            const std::vector<double>& lam = state.lambda_under(n);
            for (int i = 0; i < d; ++i) {
                const std::complex<double> si = lam_sqrt(lam[i]);
                for (int s1 = -1; s1 <= 1; s1 += 2) {
                    ++rep.conditions_checked;
                    const double v1 = std::abs(x + (double)s1 * si);
                    if (v1 < thr) {
                        rep.admissible = false;
                        rep.first_violation =
                            MelnikovCondition{nu, n, i, -1, s1, 1, v1 - thr};
                        return;
                    }
                    for (int j = 0; j < d; ++j) {
                        const std::complex<double> sj = lam_sqrt(lam[j]);
                        for (int s2 = -1; s2 <= 1; s2 += 2) {
                            ++rep.conditions_checked;
                            const double v2 =
                                std::abs(x + (double)s1 * si + (double)s2 * sj);
                            if (v2 < thr) {
                                rep.admissible = false;
                                rep.first_violation =
                                    MelnikovCondition{nu, n, i, j, s1, s2, v2 - thr};
                                return;
                            }
                        }
                    }
                }
            }
        }
    });
    return rep;
}

std::string MeasureEstimate::to_csv() const {
    std::ostringstream os;
    os << "parameter,excluded_fraction,stat_error,fit_residual\n";
    for (const auto& p : points)
        os << format_g17(p.parameter) << "," << format_g17(p.excluded_fraction) << ","
           << format_g17(p.stat_error) << "," << format_g17(fit_residual) << "\n";
    return os.str();
}

namespace {

struct ScanTargets {
    // real shifted targets t with widths widen * C0 gamma*_{n(nu)}; t = 0
    // carries width 1x (profile admissibility), self-energy shifts 2x.
    std::vector<double> t;
    std::vector<double> widen;
};

ScanTargets scan_targets(const FourierModel& model, double eps) {
    ScanTargets tg;
    tg.t.push_back(0.0);
    tg.widen.push_back(1.0);
    std::vector<double> roots;
    for (double a : model.hessian_eigs) {
        const double lam = eps * a;
        if (lam > 0) roots.push_back(std::sqrt(lam));
    }
    auto push = [&](double v) {
        for (double known : tg.t)
            if (std::fabs(known - v) < 1e-15) return;
        tg.t.push_back(v);
        tg.widen.push_back(2.0);
    };
    for (double ri : roots)
        for (int s1 = -1; s1 <= 1; s1 += 2) {
            push(s1 * ri);
            for (double rj : roots)
                for (int s2 = -1; s2 <= 1; s2 += 2) {
                    const double v = s1 * ri + s2 * rj;
                    if (std::fabs(v) > 1e-15) push(v);
                }
        }
    return tg;
}

// Exact excluded test for r = 2 with component magnitudes >= lo > 2*width:
// only the integer nearest to (t - nu1 w1)/w2 can violate at each nu1.
bool omega_excluded_r2(double w1, double w2, const BryunoProfile& prof,
                       const ScanTargets& tg, long long nu_max) {
    for (long long nu1 = 0; nu1 <= nu_max; ++nu1) {
        for (std::size_t k = 0; k < tg.t.size(); ++k) {
            const double target = (tg.t[k] - nu1 * w1) / w2;
            const long long base = (long long)std::floor(target);
            for (long long nu2 = base; nu2 <= base + 1; ++nu2) {
                if (nu1 == 0 && nu2 <= 0) continue;
                const long long norm = nu1 + std::llabs(nu2);
                if (norm == 0 || norm > nu_max) continue;
                const int n = scale_of_norm(norm);
                const double width =
                    tg.widen[k] * (double)(prof.C0 * prof.gamma(n));
                if (std::fabs(nu1 * w1 + nu2 * w2 - tg.t[k]) < width) return true;
            }
        }
    }
    return false;
}

bool omega_excluded_general(const std::vector<double>& w, const BryunoProfile& prof,
                            const ScanTargets& tg, long long nu_max) {
    bool excluded = false;
    enumerate_half_ball((int)w.size(), nu_max, [&](const std::vector<long long>& nu) {
        if (excluded) return;
        double x = 0;
        for (std::size_t i = 0; i < w.size(); ++i) x += nu[i] * w[i];
        const int n = scale_of(std::span<const long long>(nu));
        for (std::size_t k = 0; k < tg.t.size(); ++k) {
            const double width = tg.widen[k] * (double)(prof.C0 * prof.gamma(n));
            if (std::fabs(x - tg.t[k]) < width || std::fabs(x + tg.t[k]) < width) {
                excluded = true;
                return;
            }
        }
    });
    return excluded;
}

} // namespace

MeasureEstimate excluded_measure_omega(int r, double lo, double hi,
                                       const std::vector<double>& C0_sweep,
                                       double eps, const FourierModel& model,
                                       const OmegaScanOptions& opt) {
    if (opt.samples < 100)
        throw math_error("excluded_measure_omega: sample size below statistical floor");
    if (!(lo > 0) || !(hi > lo))
        throw math_error("excluded_measure_omega: domain must satisfy 0 < lo < hi");

    // all samples drawn up front so threading cannot change the estimate
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> samples(opt.samples * (std::size_t)r);
    for (double& v : samples) v = uni(rng);

    const ScanTargets tg = scan_targets(model, eps);

    MeasureEstimate est;
    est.seed = opt.seed;
    est.samples = opt.samples;
    for (double C0 : C0_sweep) {
        const BryunoProfile prof = reference_profile(r, (Real)C0);
        std::vector<std::size_t> hits(std::max(opt.threads, 1), 0);
        auto worker = [&](int tid, std::size_t begin, std::size_t end) {
            std::size_t local = 0;
            for (std::size_t sidx = begin; sidx < end; ++sidx) {
                const double* w = &samples[sidx * r];
                bool ex;
                if (r == 2 && lo > 1e3 * (double)prof.C0 * (double)prof.gamma(0))
                    ex = omega_excluded_r2(w[0], w[1], prof, tg, opt.nu_max);
                else if (r == 2)
                    ex = omega_excluded_r2(w[0], w[1], prof, tg,
                                           std::min(opt.nu_max, (long long)1 << 10));
                else
                    ex = omega_excluded_general(std::vector<double>(w, w + r), prof,
                                                tg, std::min(opt.nu_max, (long long)32));
                if (ex) ++local;
            }
            hits[tid] = local;
        };
        const int T = std::max(opt.threads, 1);
        if (T == 1) {
            worker(0, 0, opt.samples);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (opt.samples + T - 1) / T;
            for (int t = 0; t < T; ++t)
                pool.emplace_back(worker, t, std::min<std::size_t>(t * chunk, opt.samples),
                                  std::min<std::size_t>((t + 1) * chunk, opt.samples));
            for (auto& th : pool) th.join();
        }
        std::size_t total = 0;
        for (std::size_t h : hits) total += h;
        MeasureSweepPoint pt;
        pt.parameter = C0;
        pt.excluded_fraction = (double)total / (double)opt.samples;
        pt.stat_error = std::sqrt(std::max(pt.excluded_fraction *
                                               (1 - pt.excluded_fraction), 1e-12) /
                                  (double)opt.samples);
        est.points.push_back(pt);
    }

    std::vector<double> xs, ys;
    for (const auto& p : est.points)
        if (p.excluded_fraction > 0) {
            xs.push_back(std::log(p.parameter));
            ys.push_back(std::log(p.excluded_fraction));
        }
    if (xs.size() >= 2) {
        auto [a, b] = ols_fit(xs, ys);
        est.fit_log_c = a;
        est.fit_exponent = b;
        double ss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (a + b * xs[i]);
            ss += e * e;
        }
        est.fit_residual = std::sqrt(ss / xs.size());
    }
    return est;
}

std::string CantorSet::intervals_csv() const {
    std::ostringstream os;
    os << "lo,hi\n";
    for (const Interval& iv : kept)
        os << format_g17(iv.lo) << "," << format_g17(iv.hi) << "\n";
    return os.str();
}

std::string CantorSet::sweep_csv() const {
    std::ostringstream os;
    os << "eps0,n0,window,excluded,ratio\n";
    for (const CantorSweepPoint& p : sweep)
        os << format_g17(p.eps0) << "," << p.n0 << "," << format_g17(p.window) << ","
           << format_g17(p.excluded) << "," << format_g17(p.ratio) << "\n";
    return os.str();
}

namespace {

std::vector<Interval> merge_intervals(std::vector<Interval> iv) {
    std::sort(iv.begin(), iv.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const Interval& i : iv) {
        if (!out.empty() && i.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, i.hi);
        else
            out.push_back(i);
    }
    return out;
}

} // namespace

CantorSet epsilon_cantor_set(const RotationVector& omega, const FourierModel& model,
                             double C0, double eps0, long long nu_max, int halvings) {
    if (model.s == 0) {
        // no eps-dependence in the conditions: everything is kept
        CantorSet cs;
        for (int h = 0; h <= halvings; ++h) {
            const double e0 = eps0 / std::exp2((double)h);
            cs.sweep.push_back({e0, -1, 0.75 * e0, 0.0, 0.0});
            if (h == 0) cs.kept.push_back({e0 / 4, e0});
        }
        return cs;
    }

    const double a_s = *std::max_element(model.hessian_eigs.begin(),
                                         model.hessian_eigs.end());
    CantorSet cs;
    for (int h = 0; h <= halvings; ++h) {
        const double e0 = eps0 / std::exp2((double)h);
        const double wlo = e0 / 4, whi = e0;
        CantorSweepPoint pt;
        pt.eps0 = e0;
        pt.window = whi - wlo;

        const double Lambda0 = e0 * a_s;
        BryunoProfile prof;
        int n0 = -1;
        if (Lambda0 > 0) {
            ProfileOptions popt;
            popt.Lambda0 = (Real)Lambda0;
            prof = make_profile(omega, (Real)C0, ProfileMode::theorem2, popt);
            n0 = prof.n0;
        }
        pt.n0 = n0;

        std::vector<Interval> excluded;
        if (n0 >= 0) {
            // degree-1 normal self-energies: sqrt(lambda) = sqrt(eps a_i);
            // collapse the scale ladder at the price of doubled widths
            std::vector<double> roots;
            for (double a : model.hessian_eigs)
                if (a > 0) roots.push_back(std::sqrt(a));
            std::vector<double> combos;
            auto push = [&](double c) {
                if (std::fabs(c) < 1e-15) return;
                for (double known : combos)
                    if (std::fabs(known - c) < 1e-15) return;
                combos.push_back(c);
            };
            for (double ri : roots)
                for (int s1 = -1; s1 <= 1; s1 += 2) {
                    push(s1 * ri);
                    for (double rj : roots)
                        for (int s2 = -1; s2 <= 1; s2 += 2) push(s1 * ri + s2 * rj);
                }

            enumerate_half_ball(omega.dim(), nu_max,
                                [&](const std::vector<long long>& nu) {
                const int nnu = scale_of(std::span<const long long>(nu));
                if (nnu < n0) return;
                const double x = (double)omega.dot(std::span<const long long>(nu));
                const double width = 2.0 * C0 * (double)prof.gamma(nnu);
                for (double c : combos) {
                    // |x + c sqrt(eps)| < width, solved in t = sqrt(eps); the
                    // sign-symmetric combo set covers the mirrored -nu too
                    const double t_lo = (-x - width) / c, t_hi = (-x + width) / c;
                    const double s_lo = std::min(t_lo, t_hi), s_hi = std::max(t_lo, t_hi);
                    if (s_hi <= 0) continue;
                    const double e_lo = std::max(s_lo, 0.0) * std::max(s_lo, 0.0);
                    const double e_hi = s_hi * s_hi;
                    const double clip_lo = std::max(e_lo, wlo);
                    const double clip_hi = std::min(e_hi, whi);
                    if (clip_hi > clip_lo) excluded.push_back({clip_lo, clip_hi});
                }
            });
        }
        excluded = merge_intervals(std::move(excluded));
        double exc = 0;
        for (const Interval& iv : excluded) exc += iv.length();
        pt.excluded = exc;
        pt.ratio = exc / e0;
        cs.sweep.push_back(pt);

        if (h == 0) {
            double cursor = wlo;
            for (const Interval& iv : excluded) {
                if (iv.lo > cursor) cs.kept.push_back({cursor, iv.lo});
                cursor = std::max(cursor, iv.hi);
            }
            if (cursor < whi) cs.kept.push_back({cursor, whi});
        }
    }
    return cs;
}

ActionSpaceEstimate action_space_measure(const FourierModel& model, double lo,
                                         double hi, double C0, double eps,
                                         const ActionScanOptions& opt) {
    if (model.s != 0)
        throw math_error("action_space_measure: maximal-torus mode needs r = d");
    const int r = model.r;
    ActionSpaceEstimate est;
    est.seed = opt.seed;
    est.samples = opt.samples;
    est.domain_volume = std::pow(hi - lo, r);
    est.min_det = 1e300;
    est.max_det = -1e300;

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> psi(r);
    for (int i = 0; i < r; ++i) psi[i] = 0.7 + 0.4 * i;

    auto try_A = [&](const std::vector<Real>& w, std::vector<double>& out) -> bool {
        try {
            RotationVector om(w);
            const BryunoProfile prof =
                make_profile(om, (Real)C0, ProfileMode::theorem1);
            const TorusExpansion exp = expand_torus(model, om, prof, opt.K);
            const TorusPoint pt = exp.evaluate(psi, eps);
            out = pt.A;
            return true;
        } catch (const math_error&) {
            return false;
        }
    };

    double image_sum = 0;
    std::size_t used = 0;
    for (std::size_t sidx = 0; sidx < opt.samples; ++sidx) {
        std::vector<Real> w(r);
        for (int i = 0; i < r; ++i) w[i] = (Real)uni(rng);
        std::vector<double> A0;
        if (!try_A(w, A0)) continue;
        ++est.admissible;
        double shift = 0;
        for (int i = 0; i < r; ++i) shift = std::max(shift, std::fabs(A0[i] - (double)w[i]));
        est.max_shift = std::max(est.max_shift, shift);

        Eigen::MatrixXd J(r, r);
        bool ok = true;
        for (int i = 0; i < r && ok; ++i) {
            std::vector<Real> wp = w, wm = w;
            wp[i] += (Real)opt.fd_step;
            wm[i] -= (Real)opt.fd_step;
            std::vector<double> Ap, Am;
            if (!try_A(wp, Ap) || !try_A(wm, Am)) {
                ok = false;
                break;
            }
            for (int k = 0; k < r; ++k)
                J(k, i) = (Ap[k] - Am[k]) / (2 * opt.fd_step);
        }
        if (!ok) {
            ++est.skipped;
            continue;
        }
        const double det = std::fabs(J.determinant());
        est.min_det = std::min(est.min_det, det);
        est.max_det = std::max(est.max_det, det);
        image_sum += det;
        ++used;
    }
    if (est.admissible > 0 &&
        (double)est.skipped > opt.max_skip_fraction * (double)est.admissible)
        throw math_error("action_space_measure: insufficient admissible pairs for differencing");
    if (used > 0) {
        // E[ 1_admissible |det J| ] * volume
        est.image_measure = est.domain_volume * image_sum / (double)opt.samples;
        est.complement_measure = est.domain_volume - est.image_measure;
    } else {
        est.image_measure = 0;
        est.complement_measure = est.domain_volume;
        est.min_det = est.max_det = 0;
    }
    return est;
}

} // namespace kamtori
