#ifndef KAMTORI_TREES_HPP
#define KAMTORI_TREES_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kamtori/arithmetic.hpp"
#include "kamtori/model.hpp"

namespace kamtori {

// A rooted labeled tree of the Lindstedt expansion.  Node i carries a mode
// of the perturbation; the line above node i carries the momentum of its
// subtree.  Children are ordered (tree values include the 1/m! weights, so
// ordered enumeration needs no extra symmetry factors).
struct Tree {
    std::vector<int> parent;                    // parent[i]; -1 at the root
    std::vector<int> mode;                      // index into model.modes
    std::vector<std::vector<int>> momentum;     // momentum of line above node i
    std::vector<int> scale;                     // line scales; -1 on zero lines,
                                                // -2 before assignment
    int eps_order = 0;                          // nodes - internal zero lines

    int size() const { return (int)parent.size(); }
    long long M() const;                        // sum_v |nu_v|_1 (angle part)
    std::vector<int> root_momentum() const { return momentum[0]; }
};

struct EnumerationOptions {
    std::size_t budget = 10'000'000;   // emitted-tree cap
};

// Every order-k rooted tree with modes drawn from the model and root
// momentum nu.  k counts powers of eps: a tree with z internal zero-momentum
// normal-sector lines has k + z nodes.  At s = 0 zero-momentum lines are
// value-free and are skipped.  Throws budget_error past the cap.
void for_each_tree(const FourierModel& model, int k, const std::vector<int>& nu,
                   const std::function<void(const Tree&)>& fn,
                   const EnumerationOptions& opt = {});

std::vector<Tree> enumerate_trees(const FourierModel& model, int k,
                                  const std::vector<int>& nu,
                                  const EnumerationOptions& opt = {});

// Diagrammatic value of the tree, root propagator included: components
// gamma = 1..d of the contribution to h^(k)_nu.
Eigen::VectorXcd tree_value(const FourierModel& model, const RotationVector& omega,
                            const Tree& tree);

// Sum of tree values over all order-k trees with root momentum nu.
Eigen::VectorXcd sum_tree_values(const FourierModel& model,
                                 const RotationVector& omega, int k,
                                 const std::vector<int>& nu,
                                 const EnumerationOptions& opt = {});

// Fills Tree::scale from the divisor ladder of the profile.
void assign_scales(Tree& tree, const RotationVector& omega,
                   const BryunoProfile& profile);

struct ScaleStatistics {
    std::map<int, int> N;     // scale n -> number of lines on scale n
    long long M = 0;          // sum_v |nu_v|
    int lines = 0;            // lines carrying a scale
};
ScaleStatistics scale_statistics(const Tree& tree);

// A connected subgraph with one entering and one exiting line of equal
// momentum and internal scales strictly below the external ones.
struct SelfEnergyCluster {
    std::vector<int> nodes;
    int exit_line_node = -1;    // line above this node leaves the cluster
    int enter_line_node = -1;   // line above this node enters the cluster
    int n_T = -1;               // max internal scale; -1 if no internal lines
    long long M_T = 0;          // sum over cluster nodes of |nu_v|
    bool nested = false;        // contained in another detected cluster
};

// All candidate self-energy clusters of a scale-assigned tree.  Subgraphs
// with internal zero-momentum lines carry no scale and are not clusters.
std::vector<SelfEnergyCluster> detect_self_energy_clusters(const Tree& tree);

struct CountingViolation {
    std::string what;
    int scale = 0;
    long long lhs = 0;
    double rhs = 0;
};

struct CountingReport {
    bool pass = true;
    int trees_checked = 0;
    int clusters_checked = 0;
    std::vector<CountingViolation> violations;
};

// N_n <= K 2^{-n} M on the tree (K = 2), M(T) > 2^{n_T - 1} and the per-mode
// N_n(T) bound on every detected cluster (2^{-n/2} variant in theorem2 mode).
void check_counting(const Tree& tree, ProfileMode mode, CountingReport& report);

// One tree per line: parent array | mode labels | scale list.
std::string dump_tree(const FourierModel& model, const Tree& tree);

} // namespace kamtori

#endif
