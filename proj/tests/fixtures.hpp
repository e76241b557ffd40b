// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared in-memory fixtures: a small taxonomy and catalog big enough to
// exercise every subcategory the samplers touch.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sgf/catalog.hpp"
#include "sgf/taxonomy.hpp"

namespace fixtures {

inline sgf::SenseEdge edge(std::string cl, std::string cs, std::string pl, std::string ps,
                           std::vector<std::string> tags = {}) {
    sgf::SenseEdge e;
    e.child_lemma = std::move(cl);
    e.child_sense = std::move(cs);
    e.parent_lemma = std::move(pl);
    e.parent_sense = std::move(ps);
    e.tags = std::move(tags);
    return e;
}

struct World {
    sgf::Taxonomy taxonomy;
    sgf::Catalog catalog;

    sgf::ConceptId object(const std::string& lemma) const {
        return *taxonomy.resolve({sgf::Kind::object, ""}, lemma, "n.01");
    }
    sgf::ConceptId attribute(const std::string& sub, const std::string& lemma) const {
        return *taxonomy.resolve({sgf::Kind::attribute, sub}, lemma, "a.01");
    }
    sgf::ConceptId relation(const std::string& sub, const std::string& lemma) const {
        return *taxonomy.resolve({sgf::Kind::relation, sub}, lemma, "r.01");
    }
    sgf::ConceptId scene(const std::string& sub, const std::string& lemma) const {
        return *taxonomy.resolve({sgf::Kind::scene_attr, sub}, lemma, "s.01");
    }
};

// thing -> {animal -> {cat, dog, owl}, furniture -> {table, lamp, chair},
//           plant -> {oak, rose}}
inline std::vector<sgf::SenseEdge> object_edges() {
    return {
        edge("animal", "n.01", "thing", "n.01"),
        edge("furniture", "n.01", "thing", "n.01"),
        edge("plant", "n.01", "thing", "n.01"),
        edge("cat", "n.01", "animal", "n.01", {"common"}),
        edge("dog", "n.01", "animal", "n.01", {"common"}),
        edge("owl", "n.01", "animal", "n.01"),
        edge("table", "n.01", "furniture", "n.01", {"common"}),
        edge("lamp", "n.01", "furniture", "n.01"),
        edge("chair", "n.01", "furniture", "n.01"),
        edge("oak", "n.01", "plant", "n.01"),
        edge("rose", "n.01", "plant", "n.01"),
    };
}

inline std::vector<sgf::SenseEdge> attribute_edges() {
    std::vector<sgf::SenseEdge> edges;
    auto sub = [&](const std::string& s) { edges.push_back(edge(s, "x.01", "attribute", "root")); };
    auto entry = [&](const std::string& s, const std::string& lemma) {
        edges.push_back(edge(lemma, "a.01", s, "x.01"));
    };
    sub("color");
    entry("color", "red");
    entry("color", "orange");
    entry("color", "turquoise");
    sub("material");
    entry("material", "wooden");
    entry("material", "velvet");
    sub("texture");
    entry("texture", "fluffy");
    sub("state");
    entry("state", "gleaming");
    sub("shape");
    entry("shape", "round");
    sub("size");
    entry("size", "enormous");
    sub("adjective");
    entry("adjective", "gleeful");
    entry("adjective", "mysterious");
    return edges;
}

inline std::vector<sgf::SenseEdge> relation_edges() {
    std::vector<sgf::SenseEdge> edges;
    auto sub = [&](const std::string& s) { edges.push_back(edge(s, "x.01", "relation", "root")); };
    auto entry = [&](const std::string& s, const std::string& lemma) {
        edges.push_back(edge(lemma, "r.01", s, "x.01"));
    };
    sub("spatial");
    entry("spatial", "on top of");
    entry("spatial", "beneath");
    sub("functional");
    entry("functional", "carrying");
    sub("interactional");
    entry("interactional", "chasing");
    entry("interactional", "watching");
    return edges;
}

inline std::vector<sgf::SenseEdge> scene_attr_edges() {
    std::vector<sgf::SenseEdge> edges;
    auto sub = [&](const std::string& s) { edges.push_back(edge(s, "x.01", "scene_attr", "root")); };
    auto entry = [&](const std::string& s, const std::string& lemma) {
        edges.push_back(edge(lemma, "s.01", s, "x.01"));
    };
    sub("painting_style");
    entry("painting_style", "cubism");
    entry("painting_style", "impressionism");
    sub("camera_model");
    entry("camera_model", "X100");
    sub("location");
    entry("location", "the beach");
    sub("weather");
    entry("weather", "foggy");
    sub("lighting");
    entry("lighting", "neon");
    entry("lighting", "candlelight");
    sub("camera_movement");
    entry("camera_movement", "slow pan");
    sub("temporal_span");
    entry("temporal_span", "a full day");
    sub("threed_attribute");
    entry("threed_attribute", "voxel style");
    return edges;
}

// Builds the catalog entries straight from the taxonomy, media-gating the
// video/3D subcategories.
inline std::shared_ptr<World> make_world() {
    auto world = std::make_shared<World>();
    auto objects = sgf::build_tree(object_edges(), "thing", "n.01", sgf::Kind::object);
    auto attrs = sgf::build_tree(attribute_edges(), "attribute", "root", sgf::Kind::attribute);
    auto rels = sgf::build_tree(relation_edges(), "relation", "root", sgf::Kind::relation);
    auto scenes =
        sgf::build_tree(scene_attr_edges(), "scene_attr", "root", sgf::Kind::scene_attr);
    world->taxonomy =
        sgf::merge({objects.taxonomy, attrs.taxonomy, rels.taxonomy, scenes.taxonomy});

    sgf::Catalog& cat = world->catalog;
    cat.taxonomy = &world->taxonomy;
    for (const auto& [id, node] : world->taxonomy.nodes()) {
        if (!node.parent) continue;  // kind roots
        const sgf::Category& c = node.category;
        if (c.kind == sgf::Kind::object) {
            cat.entries["object"].push_back(id);
        } else if (!c.subcategory.empty() && c.subcategory != node.lemma) {
            cat.entries[c.str()].push_back(id);
            if (c.kind == sgf::Kind::scene_attr) {
                if (c.subcategory == "camera_movement" || c.subcategory == "temporal_span") {
                    cat.media[id] = sgf::Media::video;
                } else if (c.subcategory == "threed_attribute") {
                    cat.media[id] = sgf::Media::threed;
                }
            }
        }
    }
    return world;
}

}  // namespace fixtures
