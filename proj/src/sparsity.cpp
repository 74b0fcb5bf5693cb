#include "varimin/sparsity.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace varimin::sparsity {

void Graph::add_edge(int i, int j) {
    if (i == j) return;
    auto insert_sorted = [](std::vector<int>& v, int x) {
        auto it = std::lower_bound(v.begin(), v.end(), x);
        if (it == v.end() || *it != x) v.insert(it, x);
    };
    insert_sorted(adjacency[static_cast<std::size_t>(i)], j);
    insert_sorted(adjacency[static_cast<std::size_t>(j)], i);
}

bool Graph::has_edge(int i, int j) const {
    const auto& a = adjacency[static_cast<std::size_t>(i)];
    return std::binary_search(a.begin(), a.end(), j);
}

int Graph::edge_count() const {
    int c = 0;
    for (const auto& a : adjacency) c += static_cast<int>(a.size());
    return c / 2;
}

int CliqueSet::max_size() const {
    int s = 0;
    for (const auto& c : cliques) s = std::max(s, static_cast<int>(c.size()));
    return s;
}

double CliqueSet::avg_size() const {
    if (cliques.empty()) return 0.0;
    double s = 0.0;
    for (const auto& c : cliques) s += static_cast<double>(c.size());
    return s / static_cast<double>(cliques.size());
}

namespace {

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
    // both sorted
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

CliqueSet element_cliques(const discretize::DofMap& dm) {
    const int nel = static_cast<int>(dm.element_dofs.size());
    std::vector<std::vector<int>> sets;
    sets.reserve(static_cast<std::size_t>(nel));
    for (int e = 0; e < nel; ++e) sets.push_back(dm.free_dofs_of_element(e));

    // Distinct non-empty sets, subsets absorbed into supersets.
    std::vector<std::vector<int>> distinct = sets;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    distinct.erase(std::remove_if(distinct.begin(), distinct.end(),
                                  [](const auto& s) { return s.empty(); }),
                   distinct.end());
    std::vector<bool> absorbed(distinct.size(), false);
    for (std::size_t a = 0; a < distinct.size(); ++a)
        for (std::size_t b = 0; b < distinct.size(); ++b) {
            if (a == b || absorbed[a]) continue;
            if (distinct[a].size() < distinct[b].size() && is_subset(distinct[a], distinct[b]))
                absorbed[a] = true;
        }

    CliqueSet cs;
    for (std::size_t a = 0; a < distinct.size(); ++a)
        if (!absorbed[a]) cs.cliques.push_back(distinct[a]);

    cs.element_assignment.assign(static_cast<std::size_t>(nel), -1);
    for (int e = 0; e < nel; ++e) {
        if (sets[static_cast<std::size_t>(e)].empty()) continue;
        for (std::size_t k = 0; k < cs.cliques.size(); ++k)
            if (is_subset(sets[static_cast<std::size_t>(e)], cs.cliques[k])) {
                cs.element_assignment[static_cast<std::size_t>(e)] = static_cast<int>(k);
                break;
            }
    }
    cs.rip_ordering = check_rip(cs.cliques);
    return cs;
}

Graph csp_graph(const std::vector<std::vector<int>>& element_vars, int n_vars) {
    Graph g;
    g.n_vertices = n_vars;
    g.adjacency.resize(static_cast<std::size_t>(n_vars));
    for (const auto& ev : element_vars)
        for (std::size_t a = 0; a < ev.size(); ++a)
            for (std::size_t b = a + 1; b < ev.size(); ++b) g.add_edge(ev[a], ev[b]);
    return g;
}

Graph csp_graph(const discretize::Pop& pop) { return csp_graph(pop.element_vars, pop.n_vars); }

ChordalGraph chordal_extend(const Graph& g) {
    const int n = g.n_vertices;
    std::vector<std::set<int>> work(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        work[static_cast<std::size_t>(v)] =
            std::set<int>(g.adjacency[static_cast<std::size_t>(v)].begin(),
                          g.adjacency[static_cast<std::size_t>(v)].end());

    ChordalGraph out;
    out.graph = g;
    std::vector<bool> eliminated(static_cast<std::size_t>(n), false);
    for (int step = 0; step < n; ++step) {
        // minimum degree, ties broken by lowest vertex index
        int best = -1;
        std::size_t best_deg = 0;
        for (int v = 0; v < n; ++v) {
            if (eliminated[static_cast<std::size_t>(v)]) continue;
            std::size_t d = work[static_cast<std::size_t>(v)].size();
            if (best < 0 || d < best_deg) {
                best = v;
                best_deg = d;
            }
        }
        out.elimination_order.push_back(best);
        eliminated[static_cast<std::size_t>(best)] = true;
        const std::vector<int> nbrs(work[static_cast<std::size_t>(best)].begin(),
                                    work[static_cast<std::size_t>(best)].end());
        for (std::size_t a = 0; a < nbrs.size(); ++a)
            for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
                if (!work[static_cast<std::size_t>(nbrs[a])].count(nbrs[b])) {
                    work[static_cast<std::size_t>(nbrs[a])].insert(nbrs[b]);
                    work[static_cast<std::size_t>(nbrs[b])].insert(nbrs[a]);
                    out.graph.add_edge(nbrs[a], nbrs[b]);
                }
            }
        for (int u : nbrs) work[static_cast<std::size_t>(u)].erase(best);
    }
    return out;
}

bool is_perfect_elimination_ordering(const Graph& g, const std::vector<int>& order) {
    const int n = g.n_vertices;
    if (static_cast<int>(order.size()) != n) return false;
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
    for (int v = 0; v < n; ++v) {
        std::vector<int> later;
        for (int u : g.adjacency[static_cast<std::size_t>(v)])
            if (pos[static_cast<std::size_t>(u)] > pos[static_cast<std::size_t>(v)])
                later.push_back(u);
        for (std::size_t a = 0; a < later.size(); ++a)
            for (std::size_t b = a + 1; b < later.size(); ++b)
                if (!g.has_edge(later[a], later[b])) return false;
    }
    return true;
}

CliqueSet maximal_cliques(const ChordalGraph& cg,
                          const std::vector<std::vector<int>>& element_vars) {
    const Graph& g = cg.graph;
    if (!is_perfect_elimination_ordering(g, cg.elimination_order))
        throw std::invalid_argument("maximal_cliques: ordering is not a perfect elimination "
                                    "ordering (input not chordal?)");
    const int n = g.n_vertices;
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pos[static_cast<std::size_t>(cg.elimination_order[static_cast<std::size_t>(i)])] = i;

    std::vector<std::vector<int>> cand;
    for (int v = 0; v < n; ++v) {
        std::vector<int> c{v};
        for (int u : g.adjacency[static_cast<std::size_t>(v)])
            if (pos[static_cast<std::size_t>(u)] > pos[static_cast<std::size_t>(v)]) c.push_back(u);
        std::sort(c.begin(), c.end());
        cand.push_back(std::move(c));
    }
    // Keep only maximal candidates.
    std::sort(cand.begin(), cand.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
    CliqueSet cs;
    for (const auto& c : cand) {
        bool contained = false;
        for (const auto& kept : cs.cliques)
            if (kept.size() >= c.size() && kept != c && is_subset(c, kept)) {
                contained = true;
                break;
            }
        if (!contained &&
            std::find(cs.cliques.begin(), cs.cliques.end(), c) == cs.cliques.end())
            cs.cliques.push_back(c);
    }

    cs.element_assignment.assign(element_vars.size(), -1);
    for (std::size_t e = 0; e < element_vars.size(); ++e) {
        if (element_vars[e].empty()) continue;
        for (std::size_t k = 0; k < cs.cliques.size(); ++k)
            if (is_subset(element_vars[e], cs.cliques[k])) {
                cs.element_assignment[e] = static_cast<int>(k);
                break;
            }
        if (cs.element_assignment[e] < 0)
            throw std::logic_error("element DOF set not covered by any maximal clique");
    }
    cs.rip_ordering = check_rip(cs.cliques);
    return cs;
}

bool verify_rip(const std::vector<std::vector<int>>& cliques, const std::vector<int>& order) {
    if (order.size() != cliques.size()) return false;
    std::set<int> seen;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& ck = cliques[static_cast<std::size_t>(order[k])];
        if (k > 0) {
            std::vector<int> inter;
            for (int v : ck)
                if (seen.count(v)) inter.push_back(v);
            bool ok = false;
            for (std::size_t l = k; l-- > 0;) {
                if (is_subset(inter, cliques[static_cast<std::size_t>(order[l])])) {
                    ok = true;
                    break;
                }
            }
            if (!ok) return false;
        }
        seen.insert(ck.begin(), ck.end());
    }
    return true;
}

std::optional<std::vector<int>> check_rip(const std::vector<std::vector<int>>& cliques) {
    const int K = static_cast<int>(cliques.size());
    if (K == 0) return std::vector<int>{};
    if (K == 1) return std::vector<int>{0};

    // Max-weight spanning forest of the clique intersection graph (Prim with
    // restarts), then a root-first traversal order per tree.
    auto weight = [&](int a, int b) {
        std::vector<int> inter;
        std::set_intersection(cliques[static_cast<std::size_t>(a)].begin(),
                              cliques[static_cast<std::size_t>(a)].end(),
                              cliques[static_cast<std::size_t>(b)].begin(),
                              cliques[static_cast<std::size_t>(b)].end(),
                              std::back_inserter(inter));
        return static_cast<int>(inter.size());
    };

    std::vector<bool> in_tree(static_cast<std::size_t>(K), false);
    std::vector<int> order;
    std::vector<int> best_w(static_cast<std::size_t>(K), -1);
    for (int root = 0; root < K; ++root) {
        if (in_tree[static_cast<std::size_t>(root)]) continue;
        // grow one tree
        std::fill(best_w.begin(), best_w.end(), -1);
        in_tree[static_cast<std::size_t>(root)] = true;
        order.push_back(root);
        for (int v = 0; v < K; ++v)
            if (!in_tree[static_cast<std::size_t>(v)])
                best_w[static_cast<std::size_t>(v)] = weight(root, v);
        for (;;) {
            int pick = -1, pw = 0;
            for (int v = 0; v < K; ++v) {
                if (in_tree[static_cast<std::size_t>(v)]) continue;
                if (best_w[static_cast<std::size_t>(v)] > pw) {
                    pw = best_w[static_cast<std::size_t>(v)];
                    pick = v;
                }
            }
            if (pick < 0) break;  // rest of the component has weight 0
            in_tree[static_cast<std::size_t>(pick)] = true;
            order.push_back(pick);
            for (int v = 0; v < K; ++v)
                if (!in_tree[static_cast<std::size_t>(v)])
                    best_w[static_cast<std::size_t>(v)] =
                        std::max(best_w[static_cast<std::size_t>(v)], weight(pick, v));
        }
    }

    if (verify_rip(cliques, order)) return order;

    if (K <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(K));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            if (verify_rip(cliques, perm)) return perm;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return std::nullopt;
}

CliqueSet chordal_rip_cliques(const discretize::Pop& pop) {
    Graph g = csp_graph(pop);
    ChordalGraph cg = chordal_extend(g);
    return maximal_cliques(cg, pop.element_vars);
}

}  // namespace varimin::sparsity
