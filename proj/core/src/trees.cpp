#include "kamtori/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

bool zero_key(const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int c) { return c == 0; });
}

// Builds per-line momenta, counts zero lines and derives the eps order
// (every zero-momentum line discounts the node directly below it).
void finish_tree(Tree& t, const FourierModel& model) {
    const int j = t.size();
    t.momentum.assign(j, std::vector<int>(model.r, 0));
    for (int v = j - 1; v >= 0; --v) {
        const Mode& m = model.modes[t.mode[v]];
        for (int i = 0; i < model.r; ++i) t.momentum[v][i] += m.nu[i];
        if (t.parent[v] >= 0)
            for (int i = 0; i < model.r; ++i)
                t.momentum[t.parent[v]][i] += t.momentum[v][i];
    }
    int zero_lines = 0;
    for (int v = 0; v < j; ++v)
        if (zero_key(t.momentum[v])) ++zero_lines;
    t.eps_order = j - zero_lines;
    t.scale.assign(j, -2);
}

// Subtree eps order = nodes below v (inclusive) minus zero lines strictly
// inside; used to reject insertions of the identically-vanishing h^(0).
int subtree_order(const Tree& t, int v) {
    int nodes = 0, zero = 0;
    std::function<void(int)> walk = [&](int u) {
        ++nodes;
        for (int c = 0; c < t.size(); ++c)
            if (t.parent[c] == u) {
                if (zero_key(t.momentum[c])) ++zero;
                walk(c);
            }
    };
    walk(v);
    return nodes - zero;
}

bool valid_zero_line_structure(const Tree& t) {
    for (int v = 0; v < t.size(); ++v) {
        if (!zero_key(t.momentum[v])) continue;
        // insertion order of the subtree below a zero line discounts the
        // node directly under it; order 0 would insert the vanishing h^(0)
        if (subtree_order(t, v) - 1 < 1) return false;
        // the resummed direct term: a zero line feeding a node whose single
        // insertion is again a zero line
        int children = 0, zero_children = 0;
        for (int c = 0; c < t.size(); ++c)
            if (t.parent[c] == v) {
                ++children;
                if (zero_key(t.momentum[c])) ++zero_children;
            }
        if (children == 1 && zero_children == 1) return false;
    }
    return true;
}

struct Generator {
    const FourierModel& model;
    int k;
    const std::vector<int>* target;   // nullptr = all momenta
    const std::function<void(const Tree&)>& fn;
    std::size_t budget;
    std::size_t emitted = 0;

    Tree t;

    void emit_if_valid() {
        Tree out = t;
        finish_tree(out, model);
        if (out.eps_order != k) return;
        if (target && out.momentum[0] != *target) return;
        if (model.s == 0) {
            for (const auto& mom : out.momentum)
                if (zero_key(mom)) return;
        } else if (!valid_zero_line_structure(out)) {
            return;
        }
        if (++emitted > budget)
            throw budget_error("enumerate_trees: budget exceeded", budget);
        fn(out);
    }

    // subtree with exactly n nodes whose root hangs from `par`
    void gen_subtree(int par, int n, const std::function<void()>& cont) {
        const int v = t.size();
        t.parent.push_back(par);
        t.mode.push_back(0);
        for (std::size_t m = 0; m < model.modes.size(); ++m) {
            t.mode[v] = (int)m;
            gen_children(v, n - 1, cont);
        }
        t.parent.pop_back();
        t.mode.pop_back();
    }

    // ordered children of v totalling `budget` nodes
    void gen_children(int v, int budget, const std::function<void()>& cont) {
        if (budget == 0) {
            cont();
            return;
        }
        for (int first = 1; first <= budget; ++first) {
            gen_subtree(v, first,
                        [&, budget, first] { gen_children_tail(v, budget - first, first, cont); });
        }
    }

    // remaining children after one of size `prev`; sizes are free (ordered
    // tuples, matching the 1/m! weights in the values)
    void gen_children_tail(int v, int budget, int, const std::function<void()>& cont) {
        gen_children(v, budget, cont);
    }

    void run() {
        const int j_max = model.s == 0 ? k : 2 * k;
        for (int j = k; j <= j_max; ++j)
            gen_subtree(-1, j, [&] { emit_if_valid(); });
    }
};

} // namespace

long long Tree::M() const {
    long long sum = 0;
    for (int v = 0; v < size(); ++v) {
        std::vector<long long> node_mode(momentum[v].begin(), momentum[v].end());
        for (int c = 0; c < size(); ++c)
            if (parent[c] == v)
                for (std::size_t i = 0; i < node_mode.size(); ++i)
                    node_mode[i] -= momentum[c][i];
        sum += one_norm(std::span<const long long>(node_mode));
    }
    return sum;
}

void for_each_tree(const FourierModel& model, int k, const std::vector<int>& nu,
                   const std::function<void(const Tree&)>& fn,
                   const EnumerationOptions& opt) {
    if (k < 1) throw math_error("enumerate_trees: order must be >= 1");
    Generator gen{model, k, nu.empty() ? nullptr : &nu, fn, opt.budget};
    gen.run();
}

std::vector<Tree> enumerate_trees(const FourierModel& model, int k,
                                  const std::vector<int>& nu,
                                  const EnumerationOptions& opt) {
    std::vector<Tree> out;
    for_each_tree(model, k, nu, [&](const Tree& t) { out.push_back(t); }, opt);
    return out;
}

Eigen::VectorXcd tree_value(const FourierModel& model, const RotationVector& omega,
                            const Tree& tree) {
    const int d = model.d();
    Eigen::MatrixXd minus_hess_inv;
    if (model.s > 0)
        minus_hess_inv = -model.hessian.inverse();

    std::function<Eigen::VectorXcd(int)> valvec = [&](int v) -> Eigen::VectorXcd {
        const Mode& m = model.modes[tree.mode[v]];
        const std::vector<double> w = m.w(model.r, model.s);
        Complex S = model.node_coefficient(m);
        int inserts = 0;
        for (int c = 0; c < tree.size(); ++c) {
            if (tree.parent[c] != v) continue;
            const Eigen::VectorXcd child = valvec(c);
            Complex dot = 0;
            for (int g = 0; g < d; ++g) dot += w[g] * child[g];
            S *= dot;
            ++inserts;
        }
        // node factor i^{1+m} c_w e^{i mu.beta0} / m!
        S *= std::pow(Complex(0, 1), 1 + inserts);
        for (int f = 2; f <= inserts; ++f) S /= (double)f;

        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d);
        if (zero_key(tree.momentum[v])) {
            for (int i = 0; i < model.s; ++i) {
                Complex acc = 0;
                for (int j2 = 0; j2 < model.s; ++j2)
                    acc += minus_hess_inv(i, j2) * w[model.r + j2];
                out[model.r + i] = acc * S;
            }
        } else {
            std::vector<long long> nl(tree.momentum[v].begin(), tree.momentum[v].end());
            const double x = (double)omega.dot(std::span<const long long>(nl));
            for (int g = 0; g < d; ++g) out[g] = S * w[g] / (x * x);
        }
        return out;
    };
    return valvec(0);
}

Eigen::VectorXcd sum_tree_values(const FourierModel& model,
                                 const RotationVector& omega, int k,
                                 const std::vector<int>& nu,
                                 const EnumerationOptions& opt) {
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(model.d());
    for_each_tree(model, k, nu,
                  [&](const Tree& t) { sum += tree_value(model, omega, t); }, opt);
    return sum;
}

void assign_scales(Tree& tree, const RotationVector& omega,
                   const BryunoProfile& profile) {
    for (int v = 0; v < tree.size(); ++v) {
        if (zero_key(tree.momentum[v])) {
            tree.scale[v] = -1;
            continue;
        }
        std::vector<long long> nl(tree.momentum[v].begin(), tree.momentum[v].end());
        tree.scale[v] = line_scale(omega.dot(std::span<const long long>(nl)), profile);
    }
}

ScaleStatistics scale_statistics(const Tree& tree) {
    ScaleStatistics st;
    st.M = tree.M();
    for (int v = 0; v < tree.size(); ++v) {
        if (tree.scale[v] == -2)
            throw math_error("scale_statistics: scales not assigned");
        if (tree.scale[v] < 0) continue;
        ++st.N[tree.scale[v]];
        ++st.lines;
    }
    return st;
}

std::vector<SelfEnergyCluster> detect_self_energy_clusters(const Tree& tree) {
    const int j = tree.size();
    std::vector<std::vector<int>> children(j);
    for (int v = 0; v < j; ++v)
        if (tree.parent[v] >= 0) children[tree.parent[v]].push_back(v);

    auto in_subtree = [&](int root, int node) {
        while (node >= 0) {
            if (node == root) return true;
            node = tree.parent[node];
        }
        return false;
    };

    std::vector<SelfEnergyCluster> found;
    for (int v = 0; v < j; ++v) {
        if (tree.scale[v] == -2)
            throw math_error("detect_self_energy_clusters: scales not assigned");
        for (int c = 0; c < j; ++c) {
            if (c == v || !in_subtree(v, c)) continue;
            if (tree.momentum[v] != tree.momentum[c]) continue;
            if (tree.scale[v] < 0 || tree.scale[c] < 0) continue;
            SelfEnergyCluster cl;
            cl.exit_line_node = v;
            cl.enter_line_node = c;
            bool ok = true;
            for (int u = 0; u < j && ok; ++u) {
                if (!in_subtree(v, u) || in_subtree(c, u)) continue;
                cl.nodes.push_back(u);
                if (u == v) continue;
                if (tree.scale[u] == -1) { ok = false; break; }   // zero line inside
                cl.n_T = std::max(cl.n_T, tree.scale[u]);
            }
            if (!ok) continue;
            const int ext = std::min(tree.scale[v], tree.scale[c]);
            if (cl.n_T >= ext) continue;
            for (int u : cl.nodes) {
                std::vector<long long> node_mode(tree.momentum[u].begin(),
                                                 tree.momentum[u].end());
                for (int c2 : children[u])
                    for (std::size_t i = 0; i < node_mode.size(); ++i)
                        node_mode[i] -= tree.momentum[c2][i];
                cl.M_T += one_norm(std::span<const long long>(node_mode));
            }
            found.push_back(std::move(cl));
        }
    }
    for (auto& a : found)
        for (const auto& b : found) {
            if (&a == &b || a.nodes.size() >= b.nodes.size()) continue;
            if (std::includes(b.nodes.begin(), b.nodes.end(), a.nodes.begin(),
                              a.nodes.end()))
                a.nested = true;
        }
    return found;
}

void check_counting(const Tree& tree, ProfileMode mode, CountingReport& report) {
    const ScaleStatistics st = scale_statistics(tree);
    ++report.trees_checked;
    for (const auto& [n, Nn] : st.N) {
        const double bound = 2.0 * std::exp2((double)-n) * (double)st.M;
        if ((double)Nn > bound + 1e-12) {
            report.pass = false;
            report.violations.push_back(
                {"tree: N_n > 2 * 2^-n * M", n, Nn, bound});
        }
    }
    for (const SelfEnergyCluster& cl : detect_self_energy_clusters(tree)) {
        ++report.clusters_checked;
        if (cl.n_T >= 0) {
            const double bound = std::exp2((double)cl.n_T - 1);
            if ((double)cl.M_T <= bound) {
                report.pass = false;
                report.violations.push_back(
                    {"cluster: M(T) <= 2^(n_T - 1)", cl.n_T, cl.M_T, bound});
            }
            std::map<int, int> Nn_T;
            for (int u : cl.nodes)
                if (u != cl.exit_line_node && tree.scale[u] >= 0) ++Nn_T[tree.scale[u]];
            for (const auto& [n, Nn] : Nn_T) {
                const double factor = mode == ProfileMode::theorem2
                                          ? std::exp2(-(double)n / 2)
                                          : std::exp2((double)-n);
                const double bound2 = 2.0 * factor * (double)cl.M_T;
                if ((double)Nn > bound2 + 1e-12) {
                    report.pass = false;
                    report.violations.push_back(
                        {"cluster: N_n(T) above counting bound", n, Nn, bound2});
                }
            }
        }
    }
}

std::string dump_tree(const FourierModel& model, const Tree& tree) {
    std::ostringstream os;
    for (int v = 0; v < tree.size(); ++v) {
        if (v) os << ' ';
        os << tree.parent[v];
    }
    os << " |";
    for (int v = 0; v < tree.size(); ++v) {
        const Mode& m = model.modes[tree.mode[v]];
        os << ' ';
        for (std::size_t i = 0; i < m.nu.size(); ++i)
            os << (i ? "," : "") << m.nu[i];
        if (!m.mu.empty()) {
            os << ';';
            for (std::size_t i = 0; i < m.mu.size(); ++i)
                os << (i ? "," : "") << m.mu[i];
        }
    }
    os << " |";
    for (int v = 0; v < tree.size(); ++v) os << ' ' << tree.scale[v];
    return os.str();
}

} // namespace kamtori
