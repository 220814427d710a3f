#include "kamtori/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

constexpr double kStationarityTol = 1e-10;
constexpr double kZeroEigTol = 1e-10;
constexpr double kRealityTol = 1e-12;

std::vector<int> negate(const std::vector<int>& v) {
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
}

} // namespace

std::vector<double> Mode::w(int r, int s) const {
    std::vector<double> out((std::size_t)(r + s), 0.0);
    for (int i = 0; i < r; ++i) out[i] = nu[i];
    for (int i = 0; i < s; ++i) out[r + i] = mu[i];
    return out;
}

Complex FourierModel::node_coefficient(const Mode& m) const {
    double phase = 0;
    for (int i = 0; i < s; ++i) phase += m.mu[i] * beta0[i];
    return m.c * std::polar(1.0, phase);
}

Complex FourierModel::eval_partial_c(std::span<const double> alpha,
                                     std::span<const double> beta,
                                     std::span<const int> deriv) const {
    Complex sum = 0;
    for (const Mode& m : modes) {
        double arg = 0;
        for (int i = 0; i < r; ++i) arg += m.nu[i] * alpha[i];
        for (int i = 0; i < s; ++i) arg += m.mu[i] * beta[i];
        Complex term = m.c * std::polar(1.0, arg);
        for (int g : deriv) {
            const double wg = g < r ? (double)m.nu[g] : (double)m.mu[g - r];
            term *= Complex(0, wg);
        }
        sum += term;
    }
    return sum;
}

double FourierModel::eval_partial(std::span<const double> alpha,
                                  std::span<const double> beta,
                                  std::span<const int> deriv) const {
    return eval_partial_c(alpha, beta, deriv).real();
}

std::vector<double> FourierModel::gradient(std::span<const double> alpha,
                                           std::span<const double> beta) const {
    std::vector<double> g((std::size_t)d());
    for (int i = 0; i < d(); ++i) {
        const int idx[1] = {i};
        g[i] = eval_partial(alpha, beta, idx);
    }
    return g;
}

FourierModel load_model(const nlohmann::json& doc) {
    FourierModel m;
    try {
        m.r = doc.at("r").get<int>();
        m.s = doc.at("s").get<int>();
        m.kappa0 = doc.value("kappa0", 1.0);
        m.beta0 = doc.value("beta0", std::vector<double>{});
        if ((int)m.beta0.size() != m.s)
            throw schema_error("load_model: beta0 length must equal s");
        if (m.r < 1 || m.s < 0) throw schema_error("load_model: need r >= 1, s >= 0");

        std::map<std::pair<std::vector<int>, std::vector<int>>, Complex> table;
        for (const auto& jm : doc.at("modes")) {
            Mode mode;
            mode.nu = jm.at("nu").get<std::vector<int>>();
            mode.mu = jm.value("mu", std::vector<int>{});
            if ((int)mode.nu.size() != m.r || (int)mode.mu.size() != m.s)
                throw schema_error("load_model: mode index length mismatch");
            mode.c = Complex(jm.value("re", 0.0), jm.value("im", 0.0));
            auto key = std::make_pair(mode.nu, mode.mu);
            table[key] += mode.c;
        }
        // complete conjugates; validate reality where both are present
        auto work = table;
        for (const auto& [key, c] : work) {
            auto conj_key = std::make_pair(negate(key.first), negate(key.second));
            auto it = table.find(conj_key);
            if (it == table.end()) {
                table[conj_key] = std::conj(c);
            } else if (std::abs(it->second - std::conj(c)) > kRealityTol) {
                throw math_error("load_model: reality violated, c_{-nu,-mu} != conj(c_{nu,mu})");
            }
        }
        for (auto& [key, c] : table) {
            if (std::abs(c) == 0.0) continue;
            const bool zero_nu = std::all_of(key.first.begin(), key.first.end(),
                                             [](int v) { return v == 0; });
            const bool zero_mu = std::all_of(key.second.begin(), key.second.end(),
                                             [](int v) { return v == 0; });
            if (zero_nu && zero_mu) continue;   // constant term is dynamically inert
            Mode mode;
            mode.nu = key.first;
            mode.mu = key.second;
            mode.c = c;
            m.modes.push_back(std::move(mode));
        }
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(std::string("load_model: ") + e.what());
    }

    m.N = 0;
    m.F0 = 0;
    for (const Mode& mode : m.modes) {
        m.N = std::max<int>(m.N, (int)mode.norm1());
        // tightest F0 with |c| <= F0 e^{-kappa0 |w|}
        m.F0 = std::max(m.F0, std::abs(mode.c) * std::exp(m.kappa0 * mode.norm1()));
    }

    if (m.s > 0) {
        std::vector<double> no_alpha(m.r, 0.0);
        // stationarity of f_0 at beta0
        for (int j = 0; j < m.s; ++j) {
            Complex g = 0;
            for (const Mode& mode : m.modes) {
                if (std::any_of(mode.nu.begin(), mode.nu.end(), [](int v) { return v != 0; }))
                    continue;
                double arg = 0;
                for (int i = 0; i < m.s; ++i) arg += mode.mu[i] * m.beta0[i];
                g += mode.c * std::polar(1.0, arg) * Complex(0, mode.mu[j]);
            }
            if (std::abs(g) > kStationarityTol) {
                std::ostringstream os;
                os << "load_model: beta0 not stationary, |df0/dbeta_" << j
                   << "| = " << std::abs(g);
                throw math_error(os.str());
            }
        }
        m.hessian = Eigen::MatrixXd::Zero(m.s, m.s);
        for (int j = 0; j < m.s; ++j)
            for (int k = 0; k < m.s; ++k) {
                Complex h = 0;
                for (const Mode& mode : m.modes) {
                    if (std::any_of(mode.nu.begin(), mode.nu.end(),
                                    [](int v) { return v != 0; }))
                        continue;
                    double arg = 0;
                    for (int i = 0; i < m.s; ++i) arg += mode.mu[i] * m.beta0[i];
                    h += mode.c * std::polar(1.0, arg) *
                         Complex(0, mode.mu[j]) * Complex(0, mode.mu[k]);
                }
                m.hessian(j, k) = h.real();
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.hessian);
        m.hessian_eigs.assign(es.eigenvalues().data(),
                              es.eigenvalues().data() + m.s);
        for (double a : m.hessian_eigs) {
            if (std::fabs(a) < kZeroEigTol)
                throw math_error("load_model: degenerate Hessian, eigenvalue ~ 0");
        }
    }
    return m;
}

FourierModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("load_model_file: cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    return load_model(doc);
}

} // namespace kamtori
