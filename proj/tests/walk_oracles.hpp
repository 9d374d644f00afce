#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "amble/k_shortest.hpp"

namespace amble::testing {

struct OracleWalk {
    routing::Length length;
    std::vector<int> nodes;
    auto operator<=>(const OracleWalk&) const = default;
};

/// All-pairs distances by Floyd-Warshall.
inline std::vector<std::vector<routing::Length>> all_pairs(const routing::Digraph& g) {
    const int n = g.size();
    std::vector<std::vector<routing::Length>> d(n, std::vector<routing::Length>(n, routing::kUnreachable));
    for (int i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& a : g.arcs()) d[a.from][a.to] = std::min(d[a.from][a.to], a.weight);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] != routing::kUnreachable && d[k][j] != routing::kUnreachable)
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

/// Every s -> t walk of length <= bound (walks may pass through t), sorted by
/// (length, node sequence). Parallel arcs yield distinct walks.
inline std::vector<OracleWalk> walks_up_to(const routing::Digraph& g, int s, int t, routing::Length bound,
                                           bool simple_only = false) {
    const auto d = all_pairs(g);
    std::vector<OracleWalk> out;
    std::vector<int> path{s};
    std::vector<int> on_path(static_cast<std::size_t>(g.size()), 0);
    on_path[s] = 1;
    auto dfs = [&](auto&& self, int v, routing::Length len) -> void {
        if (v == t) {
            out.push_back({len, path});
            if (simple_only) return;  // t is on the path from here on
        }
        for (int id : g.out_arcs(v)) {
            const auto& a = g.arc(id);
            const routing::Length next = len + a.weight;
            if (d[a.to][t] == routing::kUnreachable || next + d[a.to][t] > bound) continue;
            if (simple_only && on_path[a.to]) continue;
            path.push_back(a.to);
            ++on_path[a.to];
            self(self, a.to, next);
            --on_path[a.to];
            path.pop_back();
        }
    };
    dfs(dfs, s, 0);
    std::sort(out.begin(), out.end());
    return out;
}

/// Random strongly connected digraph: a Hamiltonian cycle plus random arcs,
/// some parallel, with weights in [1, max_weight].
inline routing::Digraph random_digraph(std::mt19937_64& rng, int n, int extra_arcs, routing::Length max_weight) {
    routing::Digraph g(n);
    std::uniform_int_distribution<routing::Length> w(1, max_weight);
    std::uniform_int_distribution<int> node(0, n - 1);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < n; ++i) g.add_arc(order[i], order[(i + 1) % n], w(rng));
    for (int e = 0; e < extra_arcs; ++e) {
        const int a = node(rng);
        const int b = node(rng);
        if (a != b) g.add_arc(a, b, w(rng));
    }
    return g;
}

/// Streamed walks from the enumerator, up to `limit`.
inline std::vector<OracleWalk> stream_walks(const routing::Digraph& g, int s, int t, std::size_t limit,
                                            bool simple_only = false) {
    routing::KShortestPaths ksp(g, s, t, simple_only);
    std::vector<OracleWalk> out;
    while (out.size() < limit) {
        auto w = ksp.next();
        if (!w) break;
        out.push_back({w->length, ksp.nodes(*w)});
    }
    return out;
}

/// Compare a stream prefix with the oracle: identical length sequences, and
/// identical walk sets within every length class the prefix fully covers.
/// Returns an empty string on agreement, else a description.
inline std::string compare_with_oracle(const std::vector<OracleWalk>& streamed,
                                       const std::vector<OracleWalk>& oracle) {
    if (streamed.size() > oracle.size()) return "stream longer than oracle";
    for (std::size_t i = 0; i < streamed.size(); ++i) {
        if (streamed[i].length != oracle[i].length) return "length mismatch at " + std::to_string(i);
    }
    std::map<routing::Length, std::multiset<std::vector<int>>> got;
    std::map<routing::Length, std::multiset<std::vector<int>>> want;
    for (const auto& w : streamed) got[w.length].insert(w.nodes);
    for (const auto& w : oracle) want[w.length].insert(w.nodes);
    const routing::Length last = streamed.empty() ? -1 : streamed.back().length;
    const bool stream_complete = streamed.size() == oracle.size();
    for (const auto& [len, walks] : got) {
        if (len == last && !stream_complete && streamed.size() < oracle.size() &&
            oracle[streamed.size()].length == last) {
            // Partially emitted class: every emitted walk must exist in the oracle.
            for (const auto& w : walks)
                if (!want[len].contains(w)) return "unknown walk in partial class";
            continue;
        }
        if (walks != want[len]) return "walk set mismatch at length " + std::to_string(len);
    }
    return {};
}

}  // namespace amble::testing
