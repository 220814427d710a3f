#include "kamtori/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {
constexpr double kSingularTol = 1e-14;

double smoothstep5(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * t * (10 + t * (-15 + 6 * t));
}
} // namespace

double CutoffFamily::chi(double x) const {
    const double lo = C0 * C0 / 4, hi = C0 * C0;
    return 1.0 - smoothstep5((std::fabs(x) - lo) / (hi - lo));
}

double CutoffFamily::chi_n(double x, int n) const {
    const double g = (double)profile->gamma(n);
    return chi(x / (beta * beta * g * g));
}

bool WhitneyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const WhitneyCheck& c) { return c.pass; });
}

SelfEnergyState::SelfEnergyState(const FourierModel& model, const RotationVector& omega,
                                 const BryunoProfile& profile, double eps, int k_max)
    : model_(&model), omega_(omega), profile_(profile), eps_(eps), k_max_(k_max) {
    if (k_max_ < 1 || k_max_ > 2)
        throw math_error("SelfEnergyState: cluster truncation degree must be 1 or 2");
    cut_.C0 = (double)profile_.C0;
    cut_.profile = &profile_;

    all_positive_ = eps > 0;
    for (double a : model.hessian_eigs)
        if (a <= 0) all_positive_ = false;

    // initialization: lambda^[0]_j = 0 for j <= r, eps a_{j-r} beyond
    std::vector<double> lam0((std::size_t)model.d(), 0.0);
    std::vector<Eigen::VectorXcd> vec0((std::size_t)model.d());
    for (int j = 0; j < model.r; ++j) {
        vec0[j] = Eigen::VectorXcd::Zero(model.d());
        vec0[j][j] = 1.0;
    }
    if (model.s > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hessian);
        for (int i = 0; i < model.s; ++i) {
            lam0[model.r + i] = eps * es.eigenvalues()[i];
            vec0[model.r + i] = Eigen::VectorXcd::Zero(model.d());
            vec0[model.r + i].tail(model.s) = es.eigenvectors().col(i).cast<Complex>();
        }
    }
    lambda_.push_back(std::move(lam0));
    evecs_.push_back(std::move(vec0));
}

const std::vector<double>& SelfEnergyState::lambda_under(int n) const {
    if (n < 0 || n >= (int)lambda_.size())
        throw math_error("SelfEnergyState: scale not built");
    return lambda_[n];
}

double SelfEnergyState::divisor_with(double x, const std::vector<double>& lam,
                                     bool strict) const {
    const int d = model_->d();
    double sum = 0;
    for (double l : lam) {
        const double diff = x * x - l;
        if (std::fabs(diff) < kSingularTol) {
            if (strict) {
                std::ostringstream os;
                os << "propagator divisor singular: x^2 = " << x * x
                   << " hits a self-energy";
                throw singular_divisor_error(os.str());
            }
            return 0.0;
        }
        sum += 1.0 / (diff * diff);
    }
    return 1.0 / std::sqrt(sum / d);
}

double SelfEnergyState::divisor(double x, int n, bool strict) const {
    // theorem2 freezes the divisors below the threshold scale
    int use = n;
    if (profile_.mode == ProfileMode::theorem2 && profile_.n0 >= 0 && n <= profile_.n0)
        use = 0;
    return divisor_with(x, lambda_under(std::min(use, scales_built())), strict);
}

double SelfEnergyState::prefactor(int p, double x) const {
    double pref = 1.0;
    for (int q = 0; q <= p; ++q) {
        // the q = p cutoff argument uses the previous scale's self-energies
        int use = std::min(q, p - 1);
        if (use < 0) use = 0;
        use = std::min(use, scales_built());
        pref *= cut_.chi_n(divisor_with(x, lambda_under(use), false), q);
        if (pref == 0) return 0;
    }
    return pref;
}

// Scale-p line inside a cluster: the cutoff window times the inverse
// dressed divisors, diagonal in the self-energy eigenbasis.  The
// off-diagonal parts of M on internal lines only enter beyond the degree-2
// truncation.
Eigen::MatrixXcd SelfEnergyState::internal_line(double y, int p) const {
    const int d = model_->d();
    const int use = std::min(std::max(p, 0), scales_built());
    const std::vector<double>& lam = lambda_[use];

    double window = 1.0;
    for (int q = 0; q < p; ++q) {
        window *= cut_.chi_n(divisor_with(y, lam, false), q);
        if (window == 0) return Eigen::MatrixXcd::Zero(d, d);
    }
    window *= 1.0 - cut_.chi_n(divisor_with(y, lam, false), p);
    if (window == 0) return Eigen::MatrixXcd::Zero(d, d);

    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        const double diff = y * y - lam[j];
        if (std::fabs(diff) < kSingularTol)
            throw singular_divisor_error("internal line: y^2 hits a self-energy");
        G += (window / diff) * evecs_[use][j] * evecs_[use][j].adjoint();
    }
    return G;
}

Eigen::MatrixXcd SelfEnergyState::cluster_sum(int p, double x) const {
    const int d = model_->d(), r = model_->r;
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(d, d);
    if (p == 0) {
        // single-node clusters: the eps d^2_beta f_0 block
        for (const Mode& m : model_->modes) {
            if (std::any_of(m.nu.begin(), m.nu.end(), [](int v) { return v != 0; }))
                continue;
            const std::vector<double> w = m.w(r, model_->s);
            const Complex coef = -eps_ * model_->node_coefficient(m);
            for (int g = 0; g < d; ++g)
                for (int g2 = 0; g2 < d; ++g2) V(g, g2) += coef * w[g] * w[g2];
        }
        return V;
    }
    if (k_max_ < 2) return V;

    // two-node clusters with internal line on scale p-1: the path
    // configuration (enter below the lower node) and the side configuration
    // (both external lines at the upper node)
    for (const Mode& m1 : model_->modes) {
        for (const Mode& m2 : model_->modes) {
            bool opposite = true;
            for (int i = 0; i < r; ++i)
                if (m1.nu[i] + m2.nu[i] != 0) { opposite = false; break; }
            if (!opposite) continue;
            const std::vector<double> w1 = m1.w(r, model_->s);
            const std::vector<double> w2 = m2.w(r, model_->s);
            const Complex nodes = model_->node_coefficient(m1) * model_->node_coefficient(m2);
            std::vector<long long> nu2(m2.nu.begin(), m2.nu.end());
            const double xint = (double)omega_.dot(std::span<const long long>(nu2));

            const Eigen::MatrixXcd Gpath = internal_line(x + xint, p - 1);
            const Eigen::MatrixXcd Gside = internal_line(xint, p - 1);
            Complex kpath = 0, kside = 0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    kpath += w1[a] * Gpath(a, b) * w2[b];
                    kside += w1[a] * Gside(a, b) * w2[b];
                }
            kpath *= eps_ * eps_ * nodes;
            kside *= eps_ * eps_ * nodes;
            for (int g = 0; g < d; ++g)
                for (int g2 = 0; g2 < d; ++g2)
                    V(g, g2) += kpath * w1[g] * w2[g2] + kside * w1[g] * w1[g2];
        }
    }
    return V;
}

Eigen::MatrixXcd SelfEnergyState::M_at(int p, double x) const {
    const double pref = prefactor(p, x);
    if (pref == 0) return Eigen::MatrixXcd::Zero(model_->d(), model_->d());
    return pref * cluster_sum(p, x);
}

Eigen::MatrixXcd SelfEnergyState::M_leq(int n, double x) const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(model_->d(), model_->d());
    for (int p = 0; p <= n; ++p) M += M_at(p, x);
    return M;
}

Eigen::MatrixXcd SelfEnergyState::propagator(double x, int n) const {
    const int d = model_->d();
    double pref = 1.0;
    for (int q = 0; q < n; ++q) {
        pref *= cut_.chi_n(divisor(x, q, false), q);
        if (pref == 0) return Eigen::MatrixXcd::Zero(d, d);
    }
    pref *= 1.0 - cut_.chi_n(divisor(x, n, false), n);
    if (pref == 0) return Eigen::MatrixXcd::Zero(d, d);

    const Eigen::MatrixXcd M = M_leq(n, x);
    const std::vector<double>& lam = lambda_under(std::min(n, scales_built()));
    double min_under = 1e300;
    for (double l : lam) min_under = std::min(min_under, std::fabs(x * x - l));

    Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    double min_dressed = 1e300;
    for (int j = 0; j < d; ++j)
        min_dressed = std::min(min_dressed, std::fabs(x * x - es.eigenvalues()[j]));
    if (min_dressed < 0.5 * min_under - 1e-15) {
        std::ostringstream os;
        os << "propagator: dressed divisor below half the bare one at scale " << n
           << " (x=" << x << ", min dressed=" << min_dressed
           << ", min bare=" << min_under << "); eps outside validity";
        throw math_error(os.str());
    }
    if (min_dressed < kSingularTol)
        throw singular_divisor_error("propagator: x^2 - M singular");

    Eigen::MatrixXcd A = x * x * Eigen::MatrixXcd::Identity(d, d) - M;
    return pref * A.inverse();
}

Eigen::MatrixXcd SelfEnergyState::propagator_leq(double x, int n) const {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(model_->d(), model_->d());
    for (int p = 0; p <= n; ++p) G += propagator(x, p);
    return G;
}

double SelfEnergyState::propagator_norm_bound(int n) const {
    const double g = (double)profile_.gamma(n);
    const double K1 = 8.0 * std::sqrt((double)model_->d()) / (cut_.beta * cut_.beta);
    return K1 / (cut_.C0 * cut_.C0 * g * g);
}

void SelfEnergyState::build_to(int n) {
    const int d = model_->d(), r = model_->r;
    while (scales_built() < n) {
        const int next = scales_built() + 1;
        const std::vector<double>& prev = lambda_.back();
        std::vector<double> lam((std::size_t)d);
        std::vector<Eigen::VectorXcd> vecs((std::size_t)d);
        for (int j = 0; j < d; ++j) {
            const double xj = j < r ? 0.0 : std::sqrt(std::max(prev[j], 0.0));
            if (j >= r && prev[j] < 0 && all_positive_)
                throw negative_self_energy_error(
                    "self-energy recursion: lambda went negative in the elliptic configuration");
            Eigen::MatrixXcd M = M_leq(next, xj);
            Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
            // continuation: nearest eigenvalue, eigenvector overlap on ties
            int best = 0;
            double best_dist = 1e300;
            for (int i = 0; i < d; ++i) {
                const double dist = std::fabs(es.eigenvalues()[i] - prev[j]);
                if (dist < best_dist - 1e-14) {
                    best = i;
                    best_dist = dist;
                } else if (std::fabs(dist - best_dist) <= 1e-14) {
                    const double ov_new =
                        std::abs(es.eigenvectors().col(i).dot(evecs_.back()[j]));
                    const double ov_old =
                        std::abs(es.eigenvectors().col(best).dot(evecs_.back()[j]));
                    if (ov_new > ov_old) best = i;
                }
            }
            lam[j] = es.eigenvalues()[best];
            vecs[j] = es.eigenvectors().col(best);
            const double closeness = std::fabs(lam[j] - prev[j]) /
                                     std::max(eps_ * eps_, 1e-300);
            if (closeness > 1e8)
                throw math_error("self-energy recursion: closeness property violated");
        }
        lambda_.push_back(std::move(lam));
        evecs_.push_back(std::move(vecs));
    }
}

std::vector<double> SelfEnergyState::closeness_ratios() const {
    std::vector<double> out;
    for (std::size_t n = 1; n < lambda_.size(); ++n) {
        double worst = 0;
        for (std::size_t j = 0; j < lambda_[n].size(); ++j)
            worst = std::max(worst, std::fabs(lambda_[n][j] - lambda_[n - 1][j]));
        out.push_back(worst / std::max(eps_ * eps_, 1e-300));
    }
    return out;
}

WhitneyReport SelfEnergyState::whitney_x(double x, int n, double h) const {
    WhitneyReport rep;
    const double eps2 = eps_ * eps_;
    const Eigen::MatrixXcd Mm = M_leq(n, x - h), Mp = M_leq(n, x + h);
    const Eigen::MatrixXcd D1 = (Mp - Mm) / (2 * h);
    // generous constant: the bound is O(eps^2) with model-dependent prefactor
    const double B = 1e4 * (1.0 + model_->F0 * model_->F0) *
                     std::pow(propagator_norm_bound(n), 2);
    WhitneyCheck c1{"dM/dx <= B eps^2", D1.norm(), B * eps2, false};
    c1.pass = c1.observed <= c1.bound;
    rep.checks.push_back(c1);

    // first-order Taylor remainder decays faster than h on log-log
    std::vector<double> hs, rem;
    const Eigen::MatrixXcd M0 = M_leq(n, x);
    for (double hh = h; hh > h / 64; hh /= 2) {
        const Eigen::MatrixXcd D = (M_leq(n, x + hh) - M_leq(n, x - hh)) / (2 * hh);
        const Eigen::MatrixXcd R = M_leq(n, x + hh) - M0 - D1 * hh;
        (void)D;
        if (R.norm() > 0) {
            hs.push_back(hh);
            rem.push_back(R.norm());
        }
    }
    if (hs.size() >= 3) {
        const double slope = loglog_slope(hs, rem);
        WhitneyCheck c2{"Taylor remainder slope >= 1.5", slope, 1.5, slope >= 1.5};
        rep.checks.push_back(c2);
    }
    return rep;
}

WhitneyReport SelfEnergyState::whitney_eps(double x, int n, double deps) const {
    WhitneyReport rep;
    SelfEnergyState lo(*model_, omega_, profile_, eps_ - deps, k_max_);
    SelfEnergyState hi(*model_, omega_, profile_, eps_ + deps, k_max_);
    lo.build_to(n);
    hi.build_to(n);
    const double amin = model_->hessian_eigs.empty()
                            ? 0.0
                            : std::fabs(model_->hessian_eigs.front());
    double amax = 0;
    for (double a : model_->hessian_eigs) amax = std::max(amax, std::fabs(a));
    for (int j = model_->r; j < model_->d(); ++j) {
        const double der = (hi.lambda_under(n)[j] - lo.lambda_under(n)[j]) / (2 * deps);
        WhitneyCheck c{"B' <= |dlambda/deps| <= B  (normal sector)", std::fabs(der), 0, false};
        c.pass = std::fabs(der) >= amin / 2 && std::fabs(der) <= 2 * std::max(amax, 1e-300);
        c.bound = 2 * amax;
        rep.checks.push_back(c);
    }
    (void)x;
    return rep;
}

nlohmann::json SelfEnergyState::dump(const std::vector<double>& probe_xs) const {
    nlohmann::json out;
    out["eps"] = eps_;
    out["k_max"] = k_max_;
    out["scales"] = nlohmann::json::array();
    for (int n = 0; n <= scales_built(); ++n) {
        nlohmann::json jn;
        jn["n"] = n;
        jn["lambda"] = lambda_[n];
        jn["probes"] = nlohmann::json::array();
        for (double x : probe_xs) {
            const Eigen::MatrixXcd M = M_leq(n, x);
            nlohmann::json jp;
            jp["x"] = x;
            nlohmann::json rows = nlohmann::json::array();
            for (int i = 0; i < M.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int j = 0; j < M.cols(); ++j)
                    row.push_back({M(i, j).real(), M(i, j).imag()});
                rows.push_back(row);
            }
            jp["M"] = rows;
            jn["probes"].push_back(jp);
        }
        out["scales"].push_back(jn);
    }
    return out;
}

WhitneyReport whitney_omega(const FourierModel& model, const RotationVector& om1,
                            const RotationVector& om2, const BryunoProfile& prof1,
                            const BryunoProfile& prof2, double eps, int n,
                            const std::vector<int>& nu) {
    WhitneyReport rep;
    SelfEnergyState s1(model, om1, prof1, eps);
    SelfEnergyState s2(model, om2, prof2, eps);
    s1.build_to(n);
    s2.build_to(n);
    std::vector<long long> nl(nu.begin(), nu.end());
    const double x1 = (double)om1.dot(std::span<const long long>(nl));
    const double x2 = (double)om2.dot(std::span<const long long>(nl));
    double dw = 0;
    for (int i = 0; i < om1.dim(); ++i)
        dw = std::max(dw, std::fabs((double)(om1.components()[i] - om2.components()[i])));
    const double diff = (s2.M_leq(n, x2) - s1.M_leq(n, x1)).norm();
    const double nn = (double)one_norm(std::span<const long long>(nl));
    const double B = 1e6 * (1.0 + model.F0 * model.F0);
    WhitneyCheck c{"|M(omega') - M(omega)| <= B eps^2 |nu| |omega'-omega|",
                   diff, B * eps * eps * nn * dw, false};
    c.pass = c.observed <= c.bound;
    rep.checks.push_back(c);
    return rep;
}

} // namespace kamtori
