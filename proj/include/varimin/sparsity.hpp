#pragma once

#include <optional>
#include <vector>

#include "varimin/discretize.hpp"

namespace varimin::sparsity {

/// Undirected simple graph on POP variables. No self-loops; adjacency kept
/// symmetric and sorted.
struct Graph {
    int n_vertices = 0;
    std::vector<std::vector<int>> adjacency;

    void add_edge(int i, int j);
    bool has_edge(int i, int j) const;
    int edge_count() const;
};

/// A family of variable cliques covering the POP variables, with every
/// element DOF set contained in some clique.
struct CliqueSet {
    std::vector<std::vector<int>> cliques;  ///< sorted variable-index lists
    std::vector<int> element_assignment;    ///< per element, containing clique
    std::optional<std::vector<int>> rip_ordering;  ///< permutation of cliques

    int max_size() const;
    double avg_size() const;
};

/// The finest clique family: distinct element DOF sets with subsets absorbed
/// into supersets. rip_ordering is filled when check_rip succeeds.
CliqueSet element_cliques(const discretize::DofMap& dm);

/// Edge (i, j) iff i and j co-occur in some element DOF set.
Graph csp_graph(const discretize::Pop& pop);
Graph csp_graph(const std::vector<std::vector<int>>& element_vars, int n_vars);

struct ChordalGraph {
    Graph graph;                      ///< supergraph of the input
    std::vector<int> elimination_order;  ///< perfect elimination ordering
};

/// Chordal extension via minimum-degree ordering with symbolic Cholesky
/// fill-in; degree ties broken by lowest vertex index.
ChordalGraph chordal_extend(const Graph& g);

/// Independent verifier: under `order`, every vertex's later neighbors form
/// a clique.
bool is_perfect_elimination_ordering(const Graph& g, const std::vector<int>& order);

/// Maximal cliques of a chordal graph from its elimination ordering. Throws
/// if the ordering is not a perfect elimination ordering. The returned
/// clique set has its RIP ordering filled from the clique tree.
CliqueSet maximal_cliques(const ChordalGraph& cg,
                          const std::vector<std::vector<int>>& element_vars);

/// Clique-tree RIP check: max-weight spanning tree of the clique
/// intersection graph, verified against the definition. Falls back to brute
/// force for at most 8 cliques. Returns a clique ordering or nullopt.
std::optional<std::vector<int>> check_rip(const std::vector<std::vector<int>>& cliques);

/// Direct verification of the running intersection property under `order`.
bool verify_rip(const std::vector<std::vector<int>>& cliques, const std::vector<int>& order);

/// Chordal-RIP pipeline: csp graph -> chordal extension -> maximal cliques.
CliqueSet chordal_rip_cliques(const discretize::Pop& pop);

}  // namespace varimin::sparsity
