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
#include "sgf/taxonomy.hpp"

namespace sgf {

enum class Media { any, image, video, threed };

inline Media media_from_name(std::string_view name) {
    if (name == "any") return Media::any;
    if (name == "image") return Media::image;
    if (name == "video") return Media::video;
    if (name == "threed") return Media::threed;
    throw ValidationError("unknown media: '" + std::string(name) + "'");
}

inline std::string_view media_name(Media m) {
    switch (m) {
        case Media::any: return "any";
        case Media::image: return "image";
        case Media::video: return "video";
        case Media::threed: return "threed";
    }
    throw InternalError("unreachable media");
}

enum class Target { image, video, threed };

inline Target target_from_name(std::string_view name) {
    if (name == "image") return Target::image;
    if (name == "video") return Target::video;
    if (name == "threed") return Target::threed;
    throw ValidationError("unknown target: '" + std::string(name) + "'");
}

inline std::string_view target_name(Target t) {
    switch (t) {
        case Target::image: return "image";
        case Target::video: return "video";
        case Target::threed: return "threed";
    }
    throw InternalError("unreachable target");
}

inline bool media_admits(Media m, Target t) {
    if (m == Media::any) return true;
    switch (t) {
        case Target::image: return m == Media::image;
        case Target::video: return m == Media::video;
        case Target::threed: return m == Media::threed;
    }
    return false;
}

// The sampling pools: per-category ordered entry lists resolved against a
// taxonomy. Entry order is file order with duplicates dropped. Immutable
// after load.
struct Catalog {
    const Taxonomy* taxonomy = nullptr;
    std::map<std::string, std::vector<ConceptId>> entries;  // category -> ids
    std::map<std::string, std::size_t> declared_counts;     // optional, reported not enforced
    std::map<ConceptId, std::set<std::string>> extra_tags;  // catalog-file tags per entry
    std::map<ConceptId, Media> media;                       // scene-attribute gate

    std::set<std::string> effective_tags(const ConceptId& id) const {
        std::set<std::string> tags = taxonomy->node(id).tags;
        auto it = extra_tags.find(id);
        if (it != extra_tags.end()) tags.insert(it->second.begin(), it->second.end());
        return tags;
    }

    Media media_of(const ConceptId& id) const {
        auto it = media.find(id);
        return it == media.end() ? Media::any : it->second;
    }
};

struct CountMismatch {
    std::string category;
    std::size_t declared = 0;
    std::size_t actual = 0;
};

// Each file is either a JSON array of {lemma, sense, category, tags?, media?}
// or an object {declared_counts?: {...}, entries: [...]}.
inline Catalog load_catalog(const Taxonomy& tax, const std::vector<std::string>& paths) {
    Catalog cat;
    cat.taxonomy = &tax;
    std::vector<std::string> unknown;
    std::map<std::string, std::set<ConceptId>> seen;

    for (const std::string& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open catalog file: '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        const nlohmann::json* items = &doc;
        if (doc.is_object()) {
            if (doc.contains("declared_counts")) {
                for (const auto& [k, v] : doc.at("declared_counts").items()) {
                    cat.declared_counts[k] = v.get<std::size_t>();
                }
            }
            if (!doc.contains("entries")) {
                throw ParseError(path + ": object form requires an 'entries' array");
            }
            items = &doc.at("entries");
        }
        if (!items->is_array()) throw ParseError(path + ": expected a JSON array of entries");

        for (const auto& item : *items) {
            std::string lemma, sense, category_text;
            try {
                lemma = item.at("lemma").get<std::string>();
                sense = item.at("sense").get<std::string>();
                category_text = item.at("category").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ": entry missing lemma/sense/category: " + e.what());
            }
            const Category category = Category::parse(category_text);
            if (!known_subcategory(category.kind, category.subcategory)) {
                throw ValidationError(path + ": unknown subcategory '" + category.str() + "'");
            }
            auto id = tax.resolve(category, lemma, sense);
            if (!id) {
                if (unknown.size() < 10) {
                    unknown.push_back(category.str() + "/" + lemma + "#" + sense);
                }
                continue;
            }
            if (!seen[category.str()].insert(*id).second) continue;  // dedup
            cat.entries[category.str()].push_back(*id);
            if (item.contains("tags")) {
                for (const auto& t : item.at("tags")) {
                    cat.extra_tags[*id].insert(t.get<std::string>());
                }
            }
            if (item.contains("media")) {
                if (category.kind != Kind::scene_attr) {
                    throw ValidationError(path + ": media gate only applies to scene attributes ('" +
                                          lemma + "')");
                }
                cat.media[*id] = media_from_name(item.at("media").get<std::string>());
            }
        }
    }

    if (!unknown.empty()) {
        std::string msg = "catalog names unknown concepts (first " +
                          std::to_string(unknown.size()) + "):";
        for (const std::string& u : unknown) msg += " " + u;
        throw ValidationError(msg);
    }
    return cat;
}

// Differences between declared and loaded counts; informational only.
inline std::vector<CountMismatch> reconcile_declared_counts(const Catalog& cat) {
    std::vector<CountMismatch> out;
    for (const auto& [category, declared] : cat.declared_counts) {
        std::size_t actual = 0;
        if (category == "object" || category == "attribute" || category == "relation" ||
            category == "scene_attr") {
            for (const auto& [cat_name, ids] : cat.entries) {
                if (cat_name == category || cat_name.rfind(category + ":", 0) == 0) {
                    actual += ids.size();
                }
            }
        } else {
            auto it = cat.entries.find(category);
            actual = it == cat.entries.end() ? 0 : it->second.size();
        }
        if (actual != declared) out.push_back({category, declared, actual});
    }
    return out;
}

// The sampling scope. Subtree include/exclude and tag requirements apply to
// objects; the non-object pools are filtered by subcategory allow-lists.
struct ScopeSpec {
    std::vector<ConceptId> include_subtrees;
    std::vector<ConceptId> exclude_subtrees;
    std::set<std::string> required_tags;
    std::optional<std::set<std::string>> allowed_attribute_subcategories;
    std::optional<std::set<std::string>> allowed_relation_subcategories;
    std::optional<std::set<std::string>> allowed_scene_attr_subcategories;

    bool empty() const {
        return include_subtrees.empty() && exclude_subtrees.empty() && required_tags.empty() &&
               !allowed_attribute_subcategories && !allowed_relation_subcategories &&
               !allowed_scene_attr_subcategories;
    }
};

class CatalogView {
public:
    const Catalog* source = nullptr;
    std::map<std::string, std::vector<ConceptId>> resolved;

    const std::vector<ConceptId>& category_entries(const std::string& category) const {
        static const std::vector<ConceptId> none;
        auto it = resolved.find(category);
        return it == resolved.end() ? none : it->second;
    }

    const std::vector<ConceptId>& objects() const { return category_entries("object"); }

    // Flattened pools in canonical subcategory order.
    std::vector<ConceptId> attribute_pool() const { return pool(Kind::attribute, kAttributeSubcategories); }
    std::vector<ConceptId> relation_pool() const { return pool(Kind::relation, kRelationSubcategories); }

    std::vector<ConceptId> scene_attr_entries(std::string_view subcategory, Target target) const {
        std::vector<ConceptId> out;
        for (const ConceptId& id :
             category_entries("scene_attr:" + std::string(subcategory))) {
            if (media_admits(source->media_of(id), target)) out.push_back(id);
        }
        return out;
    }

    std::vector<std::string> admissible_scene_attr_subcategories(Target target) const {
        std::vector<std::string> out;
        for (std::string_view sub : kSceneAttrSubcategories) {
            if (!scene_attr_entries(sub, target).empty()) out.emplace_back(sub);
        }
        return out;
    }

private:
    template <typename List>
    std::vector<ConceptId> pool(Kind kind, const List& subcategories) const {
        std::vector<ConceptId> out;
        for (std::string_view sub : subcategories) {
            const auto& ids =
                category_entries(std::string(kind_name(kind)) + ":" + std::string(sub));
            out.insert(out.end(), ids.begin(), ids.end());
        }
        return out;
    }
};

inline CatalogView scope_filter(const Catalog& cat, const ScopeSpec& spec) {
    const Taxonomy& tax = *cat.taxonomy;
    for (const auto& list : {spec.include_subtrees, spec.exclude_subtrees}) {
        for (const ConceptId& id : list) {
            if (!tax.contains(id)) throw ValidationError("scope names unknown id: '" + id + "'");
        }
    }

    std::set<ConceptId> include_set, exclude_set;
    for (const ConceptId& id : spec.include_subtrees) {
        const auto ids = subtree(tax, id);
        include_set.insert(ids.begin(), ids.end());
    }
    for (const ConceptId& id : spec.exclude_subtrees) {
        const auto ids = subtree(tax, id);
        exclude_set.insert(ids.begin(), ids.end());
    }

    CatalogView view;
    view.source = &cat;
    for (const auto& [category, ids] : cat.entries) {
        const Category cat_parsed = Category::parse(category);
        if (cat_parsed.kind == Kind::object) {
            std::vector<ConceptId> kept;
            for (const ConceptId& id : ids) {
                if (!spec.include_subtrees.empty() && !include_set.count(id)) continue;
                if (exclude_set.count(id)) continue;
                if (!spec.required_tags.empty()) {
                    const auto tags = cat.effective_tags(id);
                    bool all = true;
                    for (const std::string& t : spec.required_tags) {
                        if (!tags.count(t)) { all = false; break; }
                    }
                    if (!all) continue;
                }
                kept.push_back(id);
            }
            view.resolved[category] = std::move(kept);
        } else {
            const std::optional<std::set<std::string>>* allowed = nullptr;
            switch (cat_parsed.kind) {
                case Kind::attribute: allowed = &spec.allowed_attribute_subcategories; break;
                case Kind::relation: allowed = &spec.allowed_relation_subcategories; break;
                case Kind::scene_attr: allowed = &spec.allowed_scene_attr_subcategories; break;
                default: throw InternalError("unreachable kind in scope_filter");
            }
            if (*allowed && !(*allowed)->count(cat_parsed.subcategory)) {
                view.resolved[category] = {};
            } else {
                view.resolved[category] = ids;
            }
        }
    }
    return view;
}

// Sizes of the resolved lists: per category, plus totals per kind.
inline std::map<std::string, std::size_t> counts(const CatalogView& view) {
    std::map<std::string, std::size_t> out;
    for (std::string_view kind : {"object", "attribute", "relation", "scene_attr"}) {
        out[std::string(kind)] = 0;
    }
    for (const auto& [category, ids] : view.resolved) {
        const Category parsed = Category::parse(category);
        out[std::string(kind_name(parsed.kind))] += ids.size();
        if (!parsed.subcategory.empty()) out[category] = ids.size();
    }
    return out;
}

}  // namespace sgf
