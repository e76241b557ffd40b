// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgf/errors.hpp"
#include "sgf/io.hpp"

namespace sgf {

// An unlabeled scene-graph shape: object nodes carrying anonymous attribute
// slot counts, connected by a simple relation DAG. complexity = objects +
// edges + attribute slots. canonical_key is invariant under any relabeling
// of object indices, so equal keys mean isomorphic shapes.
struct StructureTemplate {
    int n_objects = 0;
    std::vector<int> attr_counts;                // one per object
    std::vector<std::pair<int, int>> edges;      // (src, dst) relation slots
    int complexity = 0;
    std::string canonical_key;

    int edge_count() const { return static_cast<int>(edges.size()); }
    int attr_total() const { return std::accumulate(attr_counts.begin(), attr_counts.end(), 0); }
};

struct EnumerationLimits {
    std::optional<int> max_objects;
    std::optional<int> max_edges;
    std::optional<int> max_attrs_per_object;
};

struct QueryConstraints {
    std::optional<int> n_objects;
    std::optional<int> min_edges;
    std::optional<int> max_edges;
};

inline constexpr std::uint64_t kDefaultStructureCeiling = 5'000'000;

namespace detail {

inline void validate_shape(int n, const std::vector<int>& attrs,
                           const std::vector<std::pair<int, int>>& edges) {
    if (n < 1) throw ValidationError("template needs at least one object");
    if (static_cast<int>(attrs.size()) != n) {
        throw ValidationError("attr_counts length " + std::to_string(attrs.size()) +
                              " != n_objects " + std::to_string(n));
    }
    for (int a : attrs) {
        if (a < 0) throw ValidationError("negative attribute count");
    }
    std::set<std::pair<int, int>> seen;
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (const auto& [s, d] : edges) {
        if (s < 0 || s >= n || d < 0 || d >= n) {
            throw ValidationError("edge endpoint out of range: (" + std::to_string(s) + "," +
                                  std::to_string(d) + ")");
        }
        if (s == d) throw ValidationError("self-loop at object " + std::to_string(s));
        if (!seen.emplace(s, d).second) {
            throw ValidationError("duplicate edge (" + std::to_string(s) + "," +
                                  std::to_string(d) + ")");
        }
        out[static_cast<std::size_t>(s)].push_back(d);
        ++indegree[static_cast<std::size_t>(d)];
    }
    // Kahn's algorithm; leftovers mean a cycle.
    std::vector<int> ready;
    for (int i = 0; i < n; ++i) {
        if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
    }
    int done = 0;
    while (!ready.empty()) {
        const int u = ready.back();
        ready.pop_back();
        ++done;
        for (int v : out[static_cast<std::size_t>(u)]) {
            if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
        }
    }
    if (done != n) throw ValidationError("relation edges contain a cycle");
}

// One weakly connected piece under a canonical labeling.
struct Component {
    int n = 0;
    std::vector<int> attrs;                   // in canonical order
    std::vector<std::pair<int, int>> edges;   // canonical indices, sorted
    int weight = 0;                           // n + |edges| + sum(attrs)
    std::string key;
};

inline std::string component_key_string(int n, const std::vector<int>& attrs,
                                        const std::vector<std::pair<int, int>>& edges) {
    // Vertex indices are zero-padded to a fixed width per component so no
    // key is a strict prefix of another; the cross-component sort relies
    // on that.
    int width = 1;
    for (int upper = 10; upper <= n - 1; upper *= 10) ++width;
    auto pad = [&](int value) {
        std::string s = std::to_string(value);
        return std::string(static_cast<std::size_t>(width) - s.size(), '0') + s;
    };
    std::string out = "v=" + std::to_string(n) + ";d=";
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(attrs[i]);
    }
    out += ";e=";
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) out += ',';
        out += pad(edges[i].first);
        out += '>';
        out += pad(edges[i].second);
    }
    return out;
}

// Canonical form of one weakly connected component.
//
// Vertices are partitioned by (attr count, in-degree, out-degree), the
// partition is refined by neighbor-cell signatures until stable, and the
// canonical labeling is the cell-respecting permutation minimizing the
// row-wise adjacency serialization, found by backtracking search. Vertices
// with identical attr counts and identical exact neighbor sets (twins) are
// interchangeable, so only one per twin class is branched on at any node.
class ComponentCanonicalizer {
public:
    ComponentCanonicalizer(std::vector<int> attrs,
                           const std::vector<std::pair<int, int>>& edges)
        : n_(static_cast<int>(attrs.size())), attrs_(std::move(attrs)) {
        in_.assign(static_cast<std::size_t>(n_), {});
        out_.assign(static_cast<std::size_t>(n_), {});
        for (const auto& [s, d] : edges) {
            out_[static_cast<std::size_t>(s)].push_back(d);
            in_[static_cast<std::size_t>(d)].push_back(s);
        }
        for (auto& v : in_) std::sort(v.begin(), v.end());
        for (auto& v : out_) std::sort(v.begin(), v.end());
    }

    Component run() {
        refine();
        compute_twins();

        position_of_.assign(static_cast<std::size_t>(n_), -1);
        vertex_at_.assign(static_cast<std::size_t>(n_), -1);
        cur_rows_.assign(static_cast<std::size_t>(n_), {});
        have_best_ = false;
        search(0);

        Component comp;
        comp.n = n_;
        comp.attrs.resize(static_cast<std::size_t>(n_));
        for (int v = 0; v < n_; ++v) {
            comp.attrs[static_cast<std::size_t>(best_position_[static_cast<std::size_t>(v)])] =
                attrs_[static_cast<std::size_t>(v)];
        }
        for (int v = 0; v < n_; ++v) {
            for (int w : out_[static_cast<std::size_t>(v)]) {
                comp.edges.emplace_back(best_position_[static_cast<std::size_t>(v)],
                                        best_position_[static_cast<std::size_t>(w)]);
            }
        }
        std::sort(comp.edges.begin(), comp.edges.end());
        comp.weight = n_ + static_cast<int>(comp.edges.size()) +
                      std::accumulate(comp.attrs.begin(), comp.attrs.end(), 0);
        comp.key = component_key_string(comp.n, comp.attrs, comp.edges);
        return comp;
    }

private:
    using Row = std::vector<int>;

    std::size_t idx(int v) const { return static_cast<std::size_t>(v); }

    void refine() {
        std::vector<int> order(static_cast<std::size_t>(n_));
        std::iota(order.begin(), order.end(), 0);
        auto triple = [&](int v) {
            return std::tuple<int, int, int>(attrs_[idx(v)], static_cast<int>(in_[idx(v)].size()),
                                             static_cast<int>(out_[idx(v)].size()));
        };
        std::sort(order.begin(), order.end(), [&](int a, int b) { return triple(a) < triple(b); });
        cell_of_.assign(static_cast<std::size_t>(n_), 0);
        int cells = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (i > 0 && triple(order[i]) != triple(order[i - 1])) ++cells;
            cell_of_[idx(order[i])] = cells;
        }
        cell_count_ = cells + 1;

        while (true) {
            std::vector<std::vector<std::pair<int, int>>> sig(static_cast<std::size_t>(n_));
            for (int v = 0; v < n_; ++v) {
                for (int w : out_[idx(v)]) sig[idx(v)].emplace_back(0, cell_of_[idx(w)]);
                for (int w : in_[idx(v)]) sig[idx(v)].emplace_back(1, cell_of_[idx(w)]);
                std::sort(sig[idx(v)].begin(), sig[idx(v)].end());
            }
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (cell_of_[idx(a)] != cell_of_[idx(b)]) return cell_of_[idx(a)] < cell_of_[idx(b)];
                return sig[idx(a)] < sig[idx(b)];
            });
            std::vector<int> new_cell(static_cast<std::size_t>(n_));
            int next = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (i > 0 && (cell_of_[idx(order[i])] != cell_of_[idx(order[i - 1])] ||
                              sig[idx(order[i])] != sig[idx(order[i - 1])])) {
                    ++next;
                }
                new_cell[idx(order[i])] = next;
            }
            const int new_count = next + 1;
            if (new_count == cell_count_) break;
            cell_of_ = std::move(new_cell);
            cell_count_ = new_count;
        }

        members_.assign(static_cast<std::size_t>(cell_count_), {});
        for (int v = 0; v < n_; ++v) members_[idx(cell_of_[idx(v)])].push_back(v);
    }

    void compute_twins() {
        twin_class_.assign(static_cast<std::size_t>(n_), 0);
        std::map<std::tuple<int, std::vector<int>, std::vector<int>>, int> classes;
        for (int v = 0; v < n_; ++v) {
            auto key = std::make_tuple(attrs_[idx(v)], in_[idx(v)], out_[idx(v)]);
            auto [it, inserted] = classes.emplace(std::move(key), static_cast<int>(classes.size()));
            twin_class_[idx(v)] = it->second;
        }
    }

    Row row_for(int vertex, int pos) const {
        Row row;
        for (int q = 0; q < pos; ++q) {
            const int u = vertex_at_[static_cast<std::size_t>(q)];
            if (std::binary_search(out_[idx(vertex)].begin(), out_[idx(vertex)].end(), u)) {
                row.push_back(2 * q + 1);  // vertex -> u
            }
            if (std::binary_search(in_[idx(vertex)].begin(), in_[idx(vertex)].end(), u)) {
                row.push_back(2 * q);  // u -> vertex
            }
        }
        std::sort(row.begin(), row.end());
        return row;
    }

    bool prefix_equals_best(int pos) const {
        for (int q = 0; q < pos; ++q) {
            if (cur_rows_[static_cast<std::size_t>(q)] != best_rows_[static_cast<std::size_t>(q)]) {
                return false;
            }
        }
        return true;
    }

    void search(int pos) {
        if (pos == n_) {
            if (!have_best_ || cur_rows_ < best_rows_) {
                best_rows_ = cur_rows_;
                best_position_ = position_of_;
                have_best_ = true;
            }
            return;
        }
        int cell = -1;
        for (int c = 0; c < cell_count_ && cell < 0; ++c) {
            for (int v : members_[static_cast<std::size_t>(c)]) {
                if (position_of_[idx(v)] < 0) { cell = c; break; }
            }
        }
        std::set<int> tried_twins;
        for (int v : members_[static_cast<std::size_t>(cell)]) {
            if (position_of_[idx(v)] >= 0) continue;
            if (!tried_twins.insert(twin_class_[idx(v)]).second) continue;
            Row row = row_for(v, pos);
            if (have_best_ && prefix_equals_best(pos) &&
                row > best_rows_[static_cast<std::size_t>(pos)]) {
                continue;  // every completion would exceed the current best
            }
            position_of_[idx(v)] = pos;
            vertex_at_[static_cast<std::size_t>(pos)] = v;
            cur_rows_[static_cast<std::size_t>(pos)] = std::move(row);
            search(pos + 1);
            position_of_[idx(v)] = -1;
            vertex_at_[static_cast<std::size_t>(pos)] = -1;
        }
    }

    int n_;
    std::vector<int> attrs_;
    std::vector<std::vector<int>> in_, out_;
    std::vector<int> cell_of_;
    int cell_count_ = 0;
    std::vector<std::vector<int>> members_;
    std::vector<int> twin_class_;

    std::vector<int> position_of_, vertex_at_;
    std::vector<Row> cur_rows_;
    std::vector<Row> best_rows_;
    std::vector<int> best_position_;
    bool have_best_ = false;
};

// Splits a validated shape into weakly connected components and returns each
// in canonical form.
inline std::vector<Component> canonical_components(int n, const std::vector<int>& attrs,
                                                   const std::vector<std::pair<int, int>>& edges) {
    // Union-find over weak connectivity.
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& [s, d] : edges) {
        const int a = find(s), b = find(d);
        if (a != b) parent[static_cast<std::size_t>(a)] = b;
    }
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < n; ++v) groups[find(v)].push_back(v);

    std::vector<Component> out;
    for (const auto& [root, verts] : groups) {
        std::map<int, int> local;
        std::vector<int> local_attrs;
        for (int v : verts) {
            local[v] = static_cast<int>(local_attrs.size());
            local_attrs.push_back(attrs[static_cast<std::size_t>(v)]);
        }
        std::vector<std::pair<int, int>> local_edges;
        for (const auto& [s, d] : edges) {
            auto is = local.find(s);
            if (is != local.end()) local_edges.emplace_back(is->second, local.at(d));
        }
        out.push_back(ComponentCanonicalizer(std::move(local_attrs), local_edges).run());
    }
    return out;
}

}  // namespace detail

// Relabeling-invariant key: canonical forms of the weak components, sorted
// and joined. Validates the shape first.
inline std::string canonical_key(const StructureTemplate& t) {
    detail::validate_shape(t.n_objects, t.attr_counts, t.edges);
    std::vector<detail::Component> comps =
        detail::canonical_components(t.n_objects, t.attr_counts, t.edges);
    std::vector<std::string> keys;
    keys.reserve(comps.size());
    for (const auto& c : comps) keys.push_back(c.key);
    std::sort(keys.begin(), keys.end());
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) out += '|';
        out += keys[i];
    }
    return out;
}

namespace detail {

// All canonical connected components of exact weight w under the limits.
inline std::vector<Component> enumerate_connected_components(int w, const EnumerationLimits& limits) {
    std::vector<Component> out;
    std::unordered_set<std::string> seen;

    const int v_cap = limits.max_objects ? std::min(*limits.max_objects, (w + 1) / 2) : (w + 1) / 2;
    for (int v = 1; v <= v_cap; ++v) {
        const int e_min = (v == 1) ? 0 : v - 1;
        int e_max = std::min(w - v, v * (v - 1) / 2);
        if (limits.max_edges) e_max = std::min(e_max, *limits.max_edges);
        for (int e = e_min; e <= e_max; ++e) {
            const int a = w - v - e;
            if (a < 0) continue;
            const int attr_cap = limits.max_attrs_per_object
                                     ? std::min(*limits.max_attrs_per_object, a)
                                     : a;
            if (static_cast<long long>(v) * attr_cap < a) continue;

            // Ordered vertex pairs, deterministic order.
            std::vector<std::pair<int, int>> pairs;
            for (int i = 0; i < v; ++i) {
                for (int j = 0; j < v; ++j) {
                    if (i != j) pairs.emplace_back(i, j);
                }
            }

            std::vector<int> chosen;
            std::vector<std::pair<int, int>> edge_set;

            // Attr compositions are enumerated per valid edge set.
            auto emit_with_attrs = [&]() {
                std::vector<int> attrs(static_cast<std::size_t>(v), 0);
                std::function<void(int, int)> rec = [&](int vertex, int remaining) {
                    if (vertex == v - 1) {
                        if (remaining > attr_cap) return;
                        attrs[static_cast<std::size_t>(vertex)] = remaining;
                        Component comp = ComponentCanonicalizer(attrs, edge_set).run();
                        if (seen.insert(comp.key).second) out.push_back(std::move(comp));
                        return;
                    }
                    const int hi = std::min(attr_cap, remaining);
                    for (int take = 0; take <= hi; ++take) {
                        attrs[static_cast<std::size_t>(vertex)] = take;
                        rec(vertex + 1, remaining - take);
                    }
                };
                rec(0, a);
            };

            auto acyclic_and_connected = [&]() {
                std::vector<int> indeg(static_cast<std::size_t>(v), 0);
                std::vector<std::vector<int>> adj(static_cast<std::size_t>(v));
                std::vector<int> comp_parent(static_cast<std::size_t>(v));
                std::iota(comp_parent.begin(), comp_parent.end(), 0);
                std::function<int(int)> find = [&](int x) {
                    while (comp_parent[static_cast<std::size_t>(x)] != x) {
                        comp_parent[static_cast<std::size_t>(x)] =
                            comp_parent[static_cast<std::size_t>(comp_parent[static_cast<std::size_t>(x)])];
                        x = comp_parent[static_cast<std::size_t>(x)];
                    }
                    return x;
                };
                int groups = v;
                for (const auto& [s, d] : edge_set) {
                    adj[static_cast<std::size_t>(s)].push_back(d);
                    ++indeg[static_cast<std::size_t>(d)];
                    const int x = find(s), y = find(d);
                    if (x != y) {
                        comp_parent[static_cast<std::size_t>(x)] = y;
                        --groups;
                    }
                }
                if (groups != 1) return false;
                std::vector<int> ready;
                for (int i = 0; i < v; ++i) {
                    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
                }
                int done = 0;
                while (!ready.empty()) {
                    const int u = ready.back();
                    ready.pop_back();
                    ++done;
                    for (int x : adj[static_cast<std::size_t>(u)]) {
                        if (--indeg[static_cast<std::size_t>(x)] == 0) ready.push_back(x);
                    }
                }
                return done == v;
            };

            std::function<void(std::size_t)> choose = [&](std::size_t start) {
                if (static_cast<int>(edge_set.size()) == e) {
                    if (acyclic_and_connected()) emit_with_attrs();
                    return;
                }
                const std::size_t need = static_cast<std::size_t>(e) - edge_set.size();
                for (std::size_t i = start; i + need <= pairs.size(); ++i) {
                    // Skip the reverse of an already-chosen edge: 2-cycles
                    // can never be acyclic.
                    const auto rev = std::make_pair(pairs[i].second, pairs[i].first);
                    if (std::find(edge_set.begin(), edge_set.end(), rev) != edge_set.end()) continue;
                    edge_set.push_back(pairs[i]);
                    choose(i + 1);
                    edge_set.pop_back();
                }
            };
            choose(0);
        }
    }
    return out;
}

}  // namespace detail

// Every isomorphism class of templates with the exact complexity, sorted by
// canonical key. Throws OverflowError beyond the ceiling rather than
// truncating.
inline std::vector<StructureTemplate> enumerate_structures(
    int complexity, const EnumerationLimits& limits = {},
    std::uint64_t ceiling = kDefaultStructureCeiling) {
    if (complexity < 1) {
        throw ValidationError("complexity must be >= 1, got " + std::to_string(complexity));
    }

    std::vector<detail::Component> catalog;
    for (int w = 1; w <= complexity; ++w) {
        std::vector<detail::Component> comps = detail::enumerate_connected_components(w, limits);
        catalog.insert(catalog.end(), std::make_move_iterator(comps.begin()),
                       std::make_move_iterator(comps.end()));
    }
    std::sort(catalog.begin(), catalog.end(),
              [](const detail::Component& a, const detail::Component& b) { return a.key < b.key; });

    const int max_objects = limits.max_objects ? *limits.max_objects : complexity;
    const int max_edges = limits.max_edges ? *limits.max_edges : complexity;

    std::vector<StructureTemplate> results;
    std::vector<const detail::Component*> stack;

    auto emit = [&]() {
        StructureTemplate t;
        t.complexity = complexity;
        for (const detail::Component* c : stack) {
            const int offset = t.n_objects;
            t.n_objects += c->n;
            t.attr_counts.insert(t.attr_counts.end(), c->attrs.begin(), c->attrs.end());
            for (const auto& [s, d] : c->edges) t.edges.emplace_back(s + offset, d + offset);
        }
        std::string key;
        for (std::size_t i = 0; i < stack.size(); ++i) {
            if (i) key += '|';
            key += stack[i]->key;
        }
        t.canonical_key = std::move(key);
        if (results.size() >= ceiling) {
            throw OverflowError("enumeration at complexity " + std::to_string(complexity) +
                                " exceeds ceiling " + std::to_string(ceiling));
        }
        results.push_back(std::move(t));
    };

    std::function<void(std::size_t, int, int, int)> compose = [&](std::size_t start, int remaining,
                                                                  int n_used, int e_used) {
        for (std::size_t i = start; i < catalog.size(); ++i) {
            const detail::Component& c = catalog[i];
            if (c.weight > remaining) continue;
            const int edges = static_cast<int>(c.edges.size());
            if (n_used + c.n > max_objects) continue;
            if (e_used + edges > max_edges) continue;
            stack.push_back(&c);
            if (c.weight == remaining) {
                emit();
            } else {
                compose(i, remaining - c.weight, n_used + c.n, e_used + edges);
            }
            stack.pop_back();
        }
    };
    compose(0, complexity, 0, 0);

    std::sort(results.begin(), results.end(),
              [](const StructureTemplate& a, const StructureTemplate& b) {
                  return a.canonical_key < b.canonical_key;
              });
    return results;
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

// Holds enumerated templates per complexity; queries come back in canonical
// key order. Immutable between store() calls, so concurrent reads are safe.
class StructureStore {
public:
    void store(int complexity, std::vector<StructureTemplate> templates,
               nlohmann::ordered_json provenance = nlohmann::ordered_json::object()) {
        std::set<std::string> keys;
        for (const StructureTemplate& t : templates) {
            if (t.complexity != complexity) {
                throw ValidationError("template complexity " + std::to_string(t.complexity) +
                                      " stored under " + std::to_string(complexity));
            }
            if (!keys.insert(t.canonical_key).second) {
                throw ValidationError("duplicate canonical key at complexity " +
                                      std::to_string(complexity) + ": " + t.canonical_key);
            }
        }
        std::sort(templates.begin(), templates.end(),
                  [](const StructureTemplate& a, const StructureTemplate& b) {
                      return a.canonical_key < b.canonical_key;
                  });
        by_complexity_[complexity] = std::move(templates);
        provenance_[complexity] = std::move(provenance);
    }

    bool has(int complexity) const { return by_complexity_.count(complexity) != 0; }

    std::vector<int> complexities() const {
        std::vector<int> out;
        for (const auto& [c, _] : by_complexity_) out.push_back(c);
        return out;
    }

    const std::vector<StructureTemplate>& all(int complexity) const {
        auto it = by_complexity_.find(complexity);
        if (it == by_complexity_.end()) {
            throw NotEnumeratedError("complexity " + std::to_string(complexity) +
                                     " not enumerated");
        }
        return it->second;
    }

    std::vector<StructureTemplate> query(int complexity, const QueryConstraints& q = {}) const {
        std::vector<StructureTemplate> out;
        for (const StructureTemplate& t : all(complexity)) {
            if (q.n_objects && t.n_objects != *q.n_objects) continue;
            if (q.min_edges && t.edge_count() < *q.min_edges) continue;
            if (q.max_edges && t.edge_count() > *q.max_edges) continue;
            out.push_back(t);
        }
        return out;
    }

    const nlohmann::ordered_json& provenance(int complexity) const {
        auto it = provenance_.find(complexity);
        if (it == provenance_.end()) {
            throw NotEnumeratedError("complexity " + std::to_string(complexity) +
                                     " not enumerated");
        }
        return it->second;
    }

    static std::string file_name(int complexity) {
        return "structures_c" + std::to_string(complexity) + ".jsonl";
    }

    // One file per complexity: a provenance header line, then one template
    // per line in canonical key order.
    void save_complexity(const std::string& dir, int complexity) const {
        const std::vector<StructureTemplate>& templates = all(complexity);
        nlohmann::ordered_json header;
        header["format"] = "sgf-structures-v1";
        header["complexity"] = complexity;
        header["count"] = templates.size();
        header["provenance"] = provenance(complexity);
        std::string content = header.dump();
        content += '\n';
        for (const StructureTemplate& t : templates) {
            nlohmann::ordered_json j;
            j["key"] = t.canonical_key;
            j["n_objects"] = t.n_objects;
            j["attr_counts"] = t.attr_counts;
            nlohmann::ordered_json edges = nlohmann::ordered_json::array();
            for (const auto& [s, d] : t.edges) edges.push_back({s, d});
            j["edges"] = std::move(edges);
            content += j.dump();
            content += '\n';
        }
        write_file_atomic((std::filesystem::path(dir) / file_name(complexity)).string(), content);
    }

    void save(const std::string& dir) const {
        for (const auto& [c, _] : by_complexity_) save_complexity(dir, c);
    }

    void load_complexity(const std::string& dir, int complexity) {
        const std::string path = (std::filesystem::path(dir) / file_name(complexity)).string();
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw NotEnumeratedError("complexity " + std::to_string(complexity) +
                                     " not enumerated (missing " + path + ")");
        }
        std::string line;
        int line_no = 0;
        nlohmann::json header;
        std::vector<StructureTemplate> templates;
        std::string prev_key;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (line_no == 1) {
                header = std::move(j);
                if (header.value("format", "") != "sgf-structures-v1" ||
                    header.value("complexity", -1) != complexity) {
                    throw ParseError(path + ": bad header");
                }
                continue;
            }
            StructureTemplate t;
            try {
                t.canonical_key = j.at("key").get<std::string>();
                t.n_objects = j.at("n_objects").get<int>();
                t.attr_counts = j.at("attr_counts").get<std::vector<int>>();
                for (const auto& e : j.at("edges")) {
                    t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
                }
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
            t.complexity = t.n_objects + t.edge_count() + t.attr_total();
            if (t.complexity != complexity) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": template complexity " +
                                 std::to_string(t.complexity) + " does not match file");
            }
            if (!prev_key.empty() && !(prev_key < t.canonical_key)) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": records not in strict canonical order");
            }
            prev_key = t.canonical_key;
            templates.push_back(std::move(t));
        }
        if (header.is_null()) throw ParseError(path + ": empty store file");
        if (templates.size() != header.value("count", std::size_t{0})) {
            throw ParseError(path + ": header count " +
                             std::to_string(header.value("count", std::size_t{0})) +
                             " != record count " + std::to_string(templates.size()));
        }
        by_complexity_[complexity] = std::move(templates);
        provenance_[complexity] = header.value("provenance", nlohmann::json::object());
    }

    // Loads every structures_c*.jsonl in the directory.
    void load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) return;
        std::vector<int> found;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("structures_c", 0) == 0 && name.size() > 17 &&
                name.substr(name.size() - 6) == ".jsonl") {
                const std::string digits = name.substr(12, name.size() - 18);
                try {
                    found.push_back(std::stoi(digits));
                } catch (...) {
                    continue;
                }
            }
        }
        std::sort(found.begin(), found.end());
        for (int c : found) load_complexity(dir, c);
    }

private:
    std::map<int, std::vector<StructureTemplate>> by_complexity_;
    std::map<int, nlohmann::ordered_json> provenance_;
};

}  // namespace sgf
