// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgf/catalog.hpp"
#include "sgf/errors.hpp"
#include "sgf/rng.hpp"
#include "sgf/structure.hpp"

namespace sgf {

struct SceneObject {
    int index = 0;
    ConceptId concept_id;
    std::vector<ConceptId> attributes;
};

struct SceneRelation {
    int src = 0;
    int dst = 0;
    ConceptId concept_id;
};

// A populated structure: concrete concepts on every object node, attribute
// slot and relation edge.
struct SceneGraph {
    std::vector<SceneObject> objects;
    std::vector<SceneRelation> relations;

    int complexity() const {
        int total = static_cast<int>(objects.size() + relations.size());
        for (const auto& o : objects) total += static_cast<int>(o.attributes.size());
        return total;
    }

    bool operator==(const SceneGraph& other) const {
        if (objects.size() != other.objects.size() || relations.size() != other.relations.size()) {
            return false;
        }
        for (std::size_t i = 0; i < objects.size(); ++i) {
            if (objects[i].index != other.objects[i].index ||
                objects[i].concept_id != other.objects[i].concept_id ||
                objects[i].attributes != other.objects[i].attributes) {
                return false;
            }
        }
        for (std::size_t i = 0; i < relations.size(); ++i) {
            if (relations[i].src != other.relations[i].src ||
                relations[i].dst != other.relations[i].dst ||
                relations[i].concept_id != other.relations[i].concept_id) {
                return false;
            }
        }
        return true;
    }
};

struct SceneAttribute {
    std::string subcategory;
    ConceptId concept_id;
};

struct SceneAttributeSet {
    std::vector<SceneAttribute> items;  // ordered by subcategory precedence

    bool operator==(const SceneAttributeSet& other) const {
        if (items.size() != other.items.size()) return false;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].subcategory != other.items[i].subcategory ||
                items[i].concept_id != other.items[i].concept_id) {
                return false;
            }
        }
        return true;
    }
};

// Checks SceneGraph invariants against the taxonomy behind the view's
// catalog: index contiguity, category kinds, simple acyclic relations.
inline void validate_scene_graph(const SceneGraph& g, const Taxonomy& tax) {
    const int n = static_cast<int>(g.objects.size());
    if (n < 1) throw ValidationError("scene graph needs at least one object");
    std::vector<int> attr_counts;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        const SceneObject& o = g.objects[static_cast<std::size_t>(i)];
        if (o.index != i) {
            throw ValidationError("object indices must be 0..n-1 in order, found " +
                                  std::to_string(o.index) + " at position " + std::to_string(i));
        }
        if (tax.node(o.concept_id).category.kind != Kind::object) {
            throw ValidationError("object slot holds non-object concept '" + o.concept_id + "'");
        }
        for (const ConceptId& a : o.attributes) {
            if (tax.node(a).category.kind != Kind::attribute) {
                throw ValidationError("attribute slot holds non-attribute concept '" + a + "'");
            }
        }
        attr_counts.push_back(static_cast<int>(o.attributes.size()));
    }
    for (const SceneRelation& r : g.relations) {
        if (tax.node(r.concept_id).category.kind != Kind::relation) {
            throw ValidationError("relation slot holds non-relation concept '" + r.concept_id + "'");
        }
        edges.emplace_back(r.src, r.dst);
    }
    detail::validate_shape(n, attr_counts, edges);
}

// Fills a structure template from the view's pools. Draw order is pinned:
// object concepts in index order, then each object's attribute slots
// (without replacement within the object), then relation concepts in
// template edge order. Objects draw with replacement, so duplicates happen
// and the realizer's ordinal rule handles them.
inline SceneGraph populate(const StructureTemplate& t, const CatalogView& view, SeededRng& rng) {
    detail::validate_shape(t.n_objects, t.attr_counts, t.edges);

    const std::vector<ConceptId>& objects = view.objects();
    if (objects.empty()) {
        throw ValidationError("scope too narrow: no object entries in view");
    }
    const std::vector<ConceptId> attr_pool = view.attribute_pool();
    int max_attr_slots = 0;
    for (int a : t.attr_counts) max_attr_slots = std::max(max_attr_slots, a);
    if (static_cast<int>(attr_pool.size()) < max_attr_slots) {
        throw ValidationError("scope too narrow: template needs " +
                              std::to_string(max_attr_slots) +
                              " distinct attribute entries, view has " +
                              std::to_string(attr_pool.size()));
    }
    const std::vector<ConceptId> rel_pool = view.relation_pool();
    if (!t.edges.empty() && rel_pool.empty()) {
        throw ValidationError("scope too narrow: no relation entries in view");
    }

    SceneGraph g;
    for (int i = 0; i < t.n_objects; ++i) {
        SceneObject o;
        o.index = i;
        o.concept_id = objects[rng.bounded(objects.size())];
        g.objects.push_back(std::move(o));
    }
    for (int i = 0; i < t.n_objects; ++i) {
        const int want = t.attr_counts[static_cast<std::size_t>(i)];
        std::vector<ConceptId> remaining = attr_pool;
        for (int k = 0; k < want; ++k) {
            const std::size_t pick = rng.bounded(remaining.size());
            g.objects[static_cast<std::size_t>(i)].attributes.push_back(remaining[pick]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }
    for (const auto& [s, d] : t.edges) {
        SceneRelation r;
        r.src = s;
        r.dst = d;
        r.concept_id = rel_pool[rng.bounded(rel_pool.size())];
        g.relations.push_back(std::move(r));
    }
    return g;
}

// Draws k ~ U[lo, hi] scene attributes over distinct subcategories whose
// entries admit the target; items come back in subcategory precedence order.
inline SceneAttributeSet sample_scene_attributes(const CatalogView& view, int lo, int hi,
                                                 Target target, SeededRng& rng) {
    if (lo < 0 || lo > hi) {
        throw ValidationError("bad scene attribute range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    const std::vector<std::string> admissible = view.admissible_scene_attr_subcategories(target);
    if (hi > static_cast<int>(admissible.size())) {
        throw ValidationError("scene attribute range upper bound " + std::to_string(hi) +
                              " exceeds admissible subcategory count " +
                              std::to_string(admissible.size()) + " for target '" +
                              std::string(target_name(target)) + "'");
    }

    const int k = lo + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(hi - lo) + 1));
    std::vector<std::string> pool = admissible;
    std::vector<std::string> chosen;
    for (int i = 0; i < k; ++i) {
        const std::size_t pick = rng.bounded(pool.size());
        chosen.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    // Precedence order, not draw order.
    std::map<std::string, std::size_t> precedence;
    for (std::size_t i = 0; i < kSceneAttrSubcategories.size(); ++i) {
        precedence[std::string(kSceneAttrSubcategories[i])] = i;
    }
    std::sort(chosen.begin(), chosen.end(), [&](const std::string& a, const std::string& b) {
        return precedence.at(a) < precedence.at(b);
    });

    SceneAttributeSet out;
    for (const std::string& sub : chosen) {
        const std::vector<ConceptId> entries = view.scene_attr_entries(sub, target);
        SceneAttribute item;
        item.subcategory = sub;
        item.concept_id = entries[rng.bounded(entries.size())];
        out.items.push_back(std::move(item));
    }
    return out;
}

// Grows a seed graph to exactly target_complexity, preserving the seed
// verbatim at indices 0..n-1. The complexity deficit is filled by sampling
// a structure from the store and populating it fresh; with probability 1/2
// the addition is attached to the seed, otherwise it stays a disconnected
// component. Attachment spends one element of the deficit on a linking
// relation between a new object and a uniformly chosen seed object (either
// direction keeps the graph acyclic, so a coin picks one); a deficit of one
// attaches as a single attribute on a seed object instead.
inline SceneGraph expand_seed_graph(const SceneGraph& seed, int target_complexity,
                                    const CatalogView& view, const StructureStore& store,
                                    SeededRng& rng) {
    validate_scene_graph(seed, *view.source->taxonomy);
    const int deficit = target_complexity - seed.complexity();
    if (deficit < 0) {
        throw ValidationError("seed complexity " + std::to_string(seed.complexity()) +
                              " exceeds target " + std::to_string(target_complexity));
    }
    if (deficit == 0) return seed;

    const std::vector<ConceptId> rel_pool = view.relation_pool();
    const std::vector<ConceptId> attr_pool = view.attribute_pool();
    bool attach = rng.coin_flip();

    if (attach && deficit == 1) {
        // Objects that still have an unused attribute available.
        std::vector<int> eligible;
        for (const SceneObject& o : seed.objects) {
            std::set<ConceptId> used(o.attributes.begin(), o.attributes.end());
            for (const ConceptId& a : attr_pool) {
                if (!used.count(a)) {
                    eligible.push_back(o.index);
                    break;
                }
            }
        }
        if (eligible.empty()) {
            attach = false;  // fall back to a disconnected addition
        } else {
            SceneGraph out = seed;
            const int obj = eligible[rng.bounded(eligible.size())];
            std::set<ConceptId> used(out.objects[static_cast<std::size_t>(obj)].attributes.begin(),
                                     out.objects[static_cast<std::size_t>(obj)].attributes.end());
            std::vector<ConceptId> candidates;
            for (const ConceptId& a : attr_pool) {
                if (!used.count(a)) candidates.push_back(a);
            }
            out.objects[static_cast<std::size_t>(obj)].attributes.push_back(
                candidates[rng.bounded(candidates.size())]);
            return out;
        }
    }
    if (attach && deficit >= 2 && rel_pool.empty()) {
        attach = false;  // cannot link without relation entries
    }

    const int piece_complexity = attach ? deficit - 1 : deficit;
    const std::vector<StructureTemplate> choices = store.query(piece_complexity);
    if (choices.empty()) {
        throw NotEnumeratedError("no structures available at complexity " +
                                 std::to_string(piece_complexity));
    }
    const StructureTemplate& piece = choices[rng.bounded(choices.size())];
    const SceneGraph grown = populate(piece, view, rng);

    SceneGraph out = seed;
    const int offset = static_cast<int>(seed.objects.size());
    for (const SceneObject& o : grown.objects) {
        SceneObject copy = o;
        copy.index += offset;
        out.objects.push_back(std::move(copy));
    }
    for (const SceneRelation& r : grown.relations) {
        SceneRelation copy = r;
        copy.src += offset;
        copy.dst += offset;
        out.relations.push_back(std::move(copy));
    }
    if (attach) {
        const int new_obj = offset + static_cast<int>(rng.bounded(grown.objects.size()));
        const int seed_obj = static_cast<int>(rng.bounded(seed.objects.size()));
        SceneRelation link;
        if (rng.coin_flip()) {
            link.src = new_obj;
            link.dst = seed_obj;
        } else {
            link.src = seed_obj;
            link.dst = new_obj;
        }
        link.concept_id = rel_pool[rng.bounded(rel_pool.size())];
        out.relations.push_back(std::move(link));
    }
    return out;
}

}  // namespace sgf
