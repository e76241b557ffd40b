// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgf/errors.hpp"
#include "sgf/strings.hpp"

namespace sgf {

using ConceptId = std::string;

enum class Kind { object, attribute, relation, scene_attr };

inline std::string_view kind_name(Kind k) {
    switch (k) {
        case Kind::object: return "object";
        case Kind::attribute: return "attribute";
        case Kind::relation: return "relation";
        case Kind::scene_attr: return "scene_attr";
    }
    throw InternalError("unreachable kind");
}

inline Kind kind_from_name(std::string_view name) {
    if (name == "object") return Kind::object;
    if (name == "attribute") return Kind::attribute;
    if (name == "relation") return Kind::relation;
    if (name == "scene_attr") return Kind::scene_attr;
    throw ValidationError("unknown kind: '" + std::string(name) + "'");
}

// Canonical subcategory names. Anything else in an edge list or catalog file
// is rejected, which keeps file validation bit-exact.
inline constexpr std::array<std::string_view, 9> kAttributeSubcategories = {
    "color", "material", "texture", "architectural_style", "state",
    "shape", "size", "human_descriptor", "adjective"};

inline constexpr std::array<std::string_view, 6> kRelationSubcategories = {
    "spatial", "functional", "interactional", "social", "emotional", "symbolic"};

// Also the precedence order for scene attributes in captions.
inline constexpr std::array<std::string_view, 18> kSceneAttrSubcategories = {
    "artist", "genre", "painting_style", "painting_technique", "camera_model",
    "focal_length", "perspective", "aperture", "depth_of_field", "shot_scale",
    "location", "weather", "lighting", "camera_rig", "camera_movement",
    "video_editing_style", "temporal_span", "threed_attribute"};

inline bool known_subcategory(Kind kind, std::string_view sub) {
    auto has = [&](const auto& list) {
        return std::find(list.begin(), list.end(), sub) != list.end();
    };
    switch (kind) {
        case Kind::object: return sub.empty();
        case Kind::attribute: return has(kAttributeSubcategories);
        case Kind::relation: return has(kRelationSubcategories);
        case Kind::scene_attr: return has(kSceneAttrSubcategories);
    }
    return false;
}

// A concept category. Object nodes use plain "object"; entries of the other
// kinds carry a subcategory ("attribute:color", "relation:spatial",
// "scene_attr:lighting"). The roots of the flat non-object trees use the
// bare kind name.
struct Category {
    Kind kind = Kind::object;
    std::string subcategory;  // empty for object nodes and kind roots

    std::string str() const {
        std::string out(kind_name(kind));
        if (!subcategory.empty()) {
            out += ':';
            out += subcategory;
        }
        return out;
    }

    static Category parse(std::string_view text) {
        const std::size_t colon = text.find(':');
        if (colon == std::string_view::npos) return {kind_from_name(text), ""};
        Category c{kind_from_name(text.substr(0, colon)), std::string(text.substr(colon + 1))};
        if (c.kind == Kind::object) {
            throw ValidationError("object category takes no subcategory: '" + std::string(text) + "'");
        }
        if (c.subcategory.empty()) {
            throw ValidationError("empty subcategory in category: '" + std::string(text) + "'");
        }
        return c;
    }

    auto operator<=>(const Category&) const = default;
};

inline ConceptId make_concept_id(const Category& category, std::string_view lemma,
                                 std::string_view sense) {
    std::string id = category.str();
    id += '/';
    id += lemma;
    id += '#';
    id += sense;
    return id;
}

struct ConceptNode {
    ConceptId id;
    std::string lemma;
    std::string sense;
    Category category;
    std::optional<ConceptId> parent;  // absent only for category roots
    std::set<std::string> tags;
};

// The hypernym forest: one deep tree for objects plus flat two-level trees
// (kind root -> subcategory -> entries) for attributes, relations and scene
// attributes. Immutable once built; concurrent reads are safe.
class Taxonomy {
public:
    bool contains(const ConceptId& id) const { return nodes_.count(id) != 0; }

    const ConceptNode& node(const ConceptId& id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw ValidationError("unknown concept id: '" + id + "'");
        return it->second;
    }

    const std::vector<ConceptId>& children(const ConceptId& id) const {
        node(id);  // existence check
        static const std::vector<ConceptId> none;
        auto it = children_.find(id);
        return it == children_.end() ? none : it->second;
    }

    const std::map<std::string, ConceptId>& roots() const { return roots_; }

    std::optional<ConceptId> root_of(Kind kind) const {
        auto it = roots_.find(std::string(kind_name(kind)));
        if (it == roots_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<ConceptId> resolve(const Category& category, std::string_view lemma,
                                     std::string_view sense) const {
        auto it = key_index_.find(make_concept_id(category, lemma, sense));
        if (it == key_index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return nodes_.size(); }

    const std::map<ConceptId, ConceptNode>& nodes() const { return nodes_; }

    // Builder interface, used by build_tree / merge / from_json.
    void add_node(ConceptNode n) {
        if (nodes_.count(n.id)) {
            throw ValidationError("duplicate concept id: '" + n.id + "'");
        }
        if (!n.parent) {
            const std::string key(kind_name(n.category.kind));
            if (roots_.count(key)) {
                throw ValidationError("second root for kind '" + key + "': '" + n.id + "'");
            }
            roots_[key] = n.id;
        }
        nodes_.emplace(n.id, std::move(n));
    }

    // Sorts every child list by (lemma, sense) so traversal is deterministic,
    // and builds the (category, lemma, sense) resolution index. On duplicate
    // keys the first id in id order wins; validate() reports the duplicate.
    void finalize() {
        children_.clear();
        key_index_.clear();
        for (const auto& [id, n] : nodes_) {
            if (n.parent) children_[*n.parent].push_back(id);
            key_index_.emplace(make_concept_id(n.category, n.lemma, n.sense), id);
        }
        for (auto& [id, kids] : children_) {
            std::sort(kids.begin(), kids.end(), [&](const ConceptId& a, const ConceptId& b) {
                const ConceptNode& na = nodes_.at(a);
                const ConceptNode& nb = nodes_.at(b);
                return std::tie(na.lemma, na.sense) < std::tie(nb.lemma, nb.sense);
            });
        }
    }

private:
    std::map<ConceptId, ConceptNode> nodes_;
    std::map<std::string, ConceptId> roots_;  // kind name -> root id
    std::map<ConceptId, std::vector<ConceptId>> children_;
    std::map<std::string, ConceptId> key_index_;
};

// ---------------------------------------------------------------------------
// Sense-edge ingestion
// ---------------------------------------------------------------------------

struct SenseEdge {
    std::string child_lemma;
    std::string child_sense;
    std::string parent_lemma;
    std::string parent_sense;
    std::vector<std::string> tags;  // apply to the child
    int line = 0;
};

// TSV format, one hypernym edge per line:
//   child_lemma<TAB>child_sense<TAB>parent_lemma<TAB>parent_sense[<TAB>tags]
// tags are comma-separated; '#'-prefixed lines are comments; blank lines are
// skipped. Returned in file order, duplicates preserved.
inline std::vector<SenseEdge> load_sense_edges(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open sense-edge file: '" + path + "'");
    std::vector<SenseEdge> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 4 && fields.size() != 5) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 4 or 5 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        SenseEdge e;
        e.child_lemma = fields[0];
        e.child_sense = fields[1];
        e.parent_lemma = fields[2];
        e.parent_sense = fields[3];
        e.line = line_no;
        for (const std::string* f : {&e.child_lemma, &e.child_sense, &e.parent_lemma, &e.parent_sense}) {
            if (f->empty()) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": empty field");
            }
            if (f->find('#') != std::string::npos) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": '#' not allowed inside lemma/sense: '" + *f + "'");
            }
        }
        if (fields.size() == 5) {
            for (const std::string& t : split(fields[4], ',')) {
                const std::string tag = trim(t);
                if (!tag.empty()) e.tags.push_back(tag);
            }
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

struct BuildReport {
    int entries_seen = 0;
    int duplicate_parent_edges_dropped = 0;  // non-primary hypernyms
    int root_child_edges_dropped = 0;        // edges trying to give the root a parent
    int unreachable_nodes_dropped = 0;
    std::vector<std::string> collapsed_senses;  // "lemma#sense" removed by the sense rule
    std::size_t node_count = 0;
};

struct BuildResult {
    Taxonomy taxonomy;
    BuildReport report;
};

namespace detail {

struct LemmaSense {
    std::string lemma;
    std::string sense;
    auto operator<=>(const LemmaSense&) const = default;
    std::string str() const { return lemma + "#" + sense; }
};

}  // namespace detail

// Builds one tree of the given kind from raw sense edges, applying, in order:
//   (a) for a child listed with several parents, keep only the first-listed
//       (primary) hypernym edge;
//   (b) drop entries unreachable from the declared root (counted);
//   (c) where two or more senses of one lemma share the same parent, remove
//       those sense nodes and reattach their children to that parent,
//       repeating until no such group remains.
// For non-object kinds, depth-1 nodes name subcategories and deeper nodes
// inherit the subcategory of their depth-1 ancestor.
inline BuildResult build_tree(const std::vector<SenseEdge>& entries,
                              const std::string& root_lemma, const std::string& root_sense,
                              Kind kind) {
    using detail::LemmaSense;
    BuildResult result;
    BuildReport& report = result.report;
    report.entries_seen = static_cast<int>(entries.size());

    const LemmaSense root{root_lemma, root_sense};

    // (a) primary-parent retention, in file order.
    std::map<LemmaSense, LemmaSense> parent_of;
    std::map<LemmaSense, std::vector<std::string>> tags_of;
    std::vector<LemmaSense> order;  // children in first-seen order
    bool root_seen_as_parent = false;
    for (const SenseEdge& e : entries) {
        const LemmaSense child{e.child_lemma, e.child_sense};
        const LemmaSense parent{e.parent_lemma, e.parent_sense};
        if (parent == root) root_seen_as_parent = true;
        if (child == root) {
            ++report.root_child_edges_dropped;
            continue;
        }
        if (child == parent) {
            throw ValidationError("self-edge at line " + std::to_string(e.line) + ": '" +
                                  child.str() + "'");
        }
        auto [it, inserted] = parent_of.emplace(child, parent);
        if (!inserted) {
            ++report.duplicate_parent_edges_dropped;
            continue;
        }
        order.push_back(child);
        tags_of[child] = e.tags;
    }

    if (!entries.empty() && !root_seen_as_parent) {
        throw ValidationError("root '" + root.str() + "' never appears as a parent");
    }

    // Cycle check over the kept parent map (root has no parent, so any cycle
    // lies strictly among non-root entries).
    {
        std::map<LemmaSense, int> state;  // 0 unvisited, 1 on stack, 2 done
        for (const auto& [start, _] : parent_of) {
            if (state[start] != 0) continue;
            std::vector<LemmaSense> stack;
            LemmaSense cur = start;
            while (true) {
                if (cur == root || state[cur] == 2) break;
                if (state[cur] == 1) {
                    std::string witness;
                    bool in_cycle = false;
                    for (const auto& n : stack) {
                        if (n == cur) in_cycle = true;
                        if (in_cycle) witness += n.str() + " -> ";
                    }
                    witness += cur.str();
                    throw ValidationError("cycle among entries: " + witness);
                }
                state[cur] = 1;
                stack.push_back(cur);
                auto it = parent_of.find(cur);
                if (it == parent_of.end()) break;  // dangles; unreachable later
                cur = it->second;
            }
            for (const auto& n : stack) state[n] = 2;
        }
    }

    // (b) reachability from the root, walking child -> parent chains.
    std::set<LemmaSense> reachable{root};
    std::map<LemmaSense, bool> memo;
    for (const LemmaSense& child : order) {
        std::vector<LemmaSense> chain;
        LemmaSense cur = child;
        bool hit = false;
        while (true) {
            if (cur == root) { hit = true; break; }
            auto mit = memo.find(cur);
            if (mit != memo.end()) { hit = mit->second; break; }
            chain.push_back(cur);
            auto pit = parent_of.find(cur);
            if (pit == parent_of.end()) { hit = false; break; }
            cur = pit->second;
        }
        for (const LemmaSense& n : chain) {
            memo[n] = hit;
            if (hit) reachable.insert(n);
        }
    }
    for (const LemmaSense& child : order) {
        if (!reachable.count(child)) ++report.unreachable_nodes_dropped;
    }

    // Children map over the reachable tree.
    std::map<LemmaSense, std::vector<LemmaSense>> kids;
    for (const LemmaSense& child : order) {
        if (reachable.count(child)) kids[parent_of[child]].push_back(child);
    }

    // (c) same-parent sense collapse, to fixpoint.
    std::set<LemmaSense> removed;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<LemmaSense> parents;
        parents.push_back(root);
        for (const auto& [p, _] : kids) {
            if (p != root) parents.push_back(p);
        }
        for (const LemmaSense& p : parents) {
            if (removed.count(p)) continue;
            auto kit = kids.find(p);
            if (kit == kids.end()) continue;
            std::map<std::string, std::vector<LemmaSense>> by_lemma;
            for (const LemmaSense& c : kit->second) {
                if (!removed.count(c)) by_lemma[c.lemma].push_back(c);
            }
            for (auto& [lemma, senses] : by_lemma) {
                if (senses.size() < 2) continue;
                changed = true;
                for (const LemmaSense& s : senses) {
                    removed.insert(s);
                    report.collapsed_senses.push_back(s.str());
                    auto skids = kids.find(s);
                    if (skids != kids.end()) {
                        for (const LemmaSense& grandchild : skids->second) {
                            if (!removed.count(grandchild)) {
                                kids[p].push_back(grandchild);
                                parent_of[grandchild] = p;
                            }
                        }
                    }
                }
            }
        }
    }

    // Depth-based categories for the flat non-object trees. Depth-1 nodes
    // name subcategories and must come from the canonical lists.
    std::map<LemmaSense, std::string> subcategory_of;
    if (kind != Kind::object) {
        // BFS from root over surviving children.
        std::vector<LemmaSense> frontier{root};
        subcategory_of[root] = "";
        while (!frontier.empty()) {
            std::vector<LemmaSense> next;
            for (const LemmaSense& p : frontier) {
                auto kit = kids.find(p);
                if (kit == kids.end()) continue;
                for (const LemmaSense& c : kit->second) {
                    if (removed.count(c)) continue;
                    if (p == root && !known_subcategory(kind, c.lemma)) {
                        throw ValidationError("unknown " + std::string(kind_name(kind)) +
                                              " subcategory '" + c.lemma + "'");
                    }
                    subcategory_of[c] = (p == root) ? c.lemma : subcategory_of[p];
                    next.push_back(c);
                }
            }
            frontier = std::move(next);
        }
    }

    auto category_for = [&](const LemmaSense& n, bool is_root) -> Category {
        if (kind == Kind::object) return {Kind::object, ""};
        if (is_root) return {kind, ""};
        return {kind, subcategory_of.at(n)};
    };

    Taxonomy& tax = result.taxonomy;
    {
        ConceptNode rn;
        rn.lemma = root.lemma;
        rn.sense = root.sense;
        rn.category = category_for(root, true);
        rn.id = make_concept_id(rn.category, rn.lemma, rn.sense);
        tax.add_node(std::move(rn));
    }
    for (const LemmaSense& child : order) {
        if (!reachable.count(child) || removed.count(child)) continue;
        const LemmaSense parent = parent_of[child];
        ConceptNode n;
        n.lemma = child.lemma;
        n.sense = child.sense;
        n.category = category_for(child, false);
        n.id = make_concept_id(n.category, n.lemma, n.sense);
        const Category parent_cat = category_for(parent, parent == root);
        n.parent = make_concept_id(parent_cat, parent.lemma, parent.sense);
        for (const std::string& t : tags_of[child]) n.tags.insert(t);
        tax.add_node(std::move(n));
    }
    tax.finalize();
    report.node_count = tax.size();
    return result;
}

// Disjoint union of per-kind trees into one forest.
inline Taxonomy merge(const std::vector<Taxonomy>& parts) {
    Taxonomy out;
    for (const Taxonomy& part : parts) {
        for (const auto& [id, n] : part.nodes()) out.add_node(n);
    }
    out.finalize();
    return out;
}

// Pre-order listing of a node and all of its descendants; children are
// visited in their deterministic (lemma, sense) order.
inline std::vector<ConceptId> subtree(const Taxonomy& tax, const ConceptId& id) {
    tax.node(id);  // existence check
    std::vector<ConceptId> out;
    std::vector<ConceptId> stack{id};
    while (!stack.empty()) {
        ConceptId cur = std::move(stack.back());
        stack.pop_back();
        const auto& kids = tax.children(cur);
        out.push_back(std::move(cur));
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct TaxonomyReport {
    // Kind totals count concept entries: for objects everything below the
    // root, for other kinds everything below the subcategory level.
    std::map<std::string, std::size_t> category_counts;
    std::size_t orphan_count = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline TaxonomyReport validate(const Taxonomy& tax) {
    TaxonomyReport report;
    std::map<std::string, int> key_seen;
    std::size_t edge_count = 0;

    for (const auto& [id, n] : tax.nodes()) {
        const std::string key = n.category.str() + "/" + n.lemma + "#" + n.sense;
        if (++key_seen[key] == 2) {
            report.violations.push_back("duplicate (lemma, sense, category): " + key);
        }
        if (n.parent) {
            ++edge_count;
            if (!tax.contains(*n.parent)) {
                ++report.orphan_count;
                report.violations.push_back("orphan: '" + id + "' names missing parent '" +
                                            *n.parent + "'");
                continue;
            }
            const ConceptNode& p = tax.node(*n.parent);
            if (p.category.kind != n.category.kind) {
                report.violations.push_back("kind mismatch: '" + id + "' under '" + *n.parent + "'");
            }
        } else {
            auto root = tax.roots().find(std::string(kind_name(n.category.kind)));
            if (root == tax.roots().end() || root->second != id) {
                ++report.orphan_count;
                report.violations.push_back("non-root node without parent: '" + id + "'");
            }
        }

        const bool structural =
            !n.parent || (n.category.kind != Kind::object && n.category.subcategory == n.lemma &&
                          tax.contains(*n.parent) && !tax.node(*n.parent).parent);
        if (!structural) {
            report.category_counts[std::string(kind_name(n.category.kind))]++;
            if (!n.category.subcategory.empty()) report.category_counts[n.category.str()]++;
        }
    }

    if (edge_count != tax.size() - tax.roots().size()) {
        report.violations.push_back("edge count " + std::to_string(edge_count) + " != nodes " +
                                    std::to_string(tax.size()) + " - roots " +
                                    std::to_string(tax.roots().size()));
    }

    // Parent chains must terminate at a root.
    for (const auto& [id, n] : tax.nodes()) {
        std::set<ConceptId> seen;
        const ConceptNode* cur = &n;
        while (cur->parent) {
            if (!seen.insert(cur->id).second) {
                report.violations.push_back("parent cycle through '" + id + "'");
                break;
            }
            if (!tax.contains(*cur->parent)) break;  // already reported as orphan
            cur = &tax.node(*cur->parent);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json taxonomy_to_json(const Taxonomy& tax) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& [id, n] : tax.nodes()) {
        nlohmann::ordered_json j;
        j["id"] = n.id;
        j["lemma"] = n.lemma;
        j["sense"] = n.sense;
        j["category"] = n.category.str();
        if (n.parent) j["parent"] = *n.parent;
        j["tags"] = n.tags;
        nodes.push_back(std::move(j));
    }
    nlohmann::ordered_json roots = nlohmann::ordered_json::object();
    for (const auto& [kind, id] : tax.roots()) roots[kind] = id;
    nlohmann::ordered_json out;
    out["nodes"] = std::move(nodes);
    out["roots"] = std::move(roots);
    return out;
}

inline Taxonomy taxonomy_from_json(const nlohmann::json& j, const std::string& context) {
    try {
        Taxonomy tax;
        for (const auto& item : j.at("nodes")) {
            ConceptNode n;
            n.id = item.at("id").get<std::string>();
            n.lemma = item.at("lemma").get<std::string>();
            n.sense = item.at("sense").get<std::string>();
            n.category = Category::parse(item.at("category").get<std::string>());
            if (item.contains("parent")) n.parent = item.at("parent").get<std::string>();
            if (item.contains("tags")) {
                for (const auto& t : item.at("tags")) n.tags.insert(t.get<std::string>());
            }
            tax.add_node(std::move(n));
        }
        tax.finalize();
        if (j.contains("roots")) {
            for (const auto& [kind, id] : j.at("roots").items()) {
                auto it = tax.roots().find(kind);
                if (it == tax.roots().end() || it->second != id.get<std::string>()) {
                    throw ValidationError(context + ": declared root for '" + kind +
                                          "' does not match the parentless node");
                }
            }
        }
        return tax;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(context + ": " + e.what());
    }
}

inline void save_taxonomy(const Taxonomy& tax, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write taxonomy file: '" + path + "'");
    out << taxonomy_to_json(tax).dump(2) << "\n";
}

inline Taxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open taxonomy file: '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return taxonomy_from_json(j, path);
}

}  // namespace sgf
