// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "sgf/sampler.hpp"

namespace {

sgf::StructureTemplate make(int n, std::vector<int> attrs,
                            std::vector<std::pair<int, int>> edges) {
    sgf::StructureTemplate t;
    t.n_objects = n;
    t.attr_counts = std::move(attrs);
    t.edges = std::move(edges);
    t.complexity = t.n_objects + t.edge_count() + t.attr_total();
    return t;
}

}  // namespace

TEST_CASE("populate over a single-entry pool is forced", "[sampler]") {
    auto world = fixtures::make_world();
    sgf::ScopeSpec spec;
    spec.include_subtrees = {world->object("cat")};
    const auto view = sgf::scope_filter(world->catalog, spec);

    sgf::SeededRng rng(1, 0);
    const auto g = sgf::populate(make(1, {0}, {}), view, rng);
    REQUIRE(g.objects.size() == 1);
    CHECK(g.objects[0].concept_id == world->object("cat"));
    CHECK(g.objects[0].attributes.empty());
    CHECK(g.relations.empty());
}

TEST_CASE("populate is shape-faithful", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    const auto t = make(2, {0, 0}, {{0, 1}});
    sgf::SeededRng rng(7, 3);
    const auto g = sgf::populate(t, view, rng);
    CHECK(g.objects.size() == 2);
    CHECK(g.relations.size() == 1);
    CHECK(g.objects[0].attributes.empty());
    CHECK(g.objects[1].attributes.empty());
    CHECK(g.complexity() == t.complexity);
    sgf::validate_scene_graph(g, world->taxonomy);
}

TEST_CASE("populate draws objects uniformly", "[sampler]") {
    auto world = fixtures::make_world();
    sgf::ScopeSpec spec;
    spec.include_subtrees = {world->object("cat"), world->object("dog"), world->object("owl"),
                             world->object("lamp")};
    const auto view = sgf::scope_filter(world->catalog, spec);
    REQUIRE(view.objects().size() == 4);

    const auto t = make(1, {0}, {});
    std::map<sgf::ConceptId, int> freq;
    const int runs = 10000;
    for (int i = 0; i < runs; ++i) {
        sgf::SeededRng rng(2024, static_cast<std::uint64_t>(i));
        freq[sgf::populate(t, view, rng).objects[0].concept_id]++;
    }
    // 4 sigma of Binomial(10000, 1/4): sqrt(10000 * .25 * .75) = 43.3.
    const double bound = 4.0 * std::sqrt(10000.0 * 0.25 * 0.75);
    REQUIRE(freq.size() == 4);
    for (const auto& [cid, n] : freq) {
        CHECK(std::abs(n - 2500.0) <= bound);
    }
}

TEST_CASE("attribute draws are without replacement per object", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    const auto t = make(1, {5}, {});
    for (int i = 0; i < 200; ++i) {
        sgf::SeededRng rng(5, static_cast<std::uint64_t>(i));
        const auto g = sgf::populate(t, view, rng);
        std::set<sgf::ConceptId> attrs(g.objects[0].attributes.begin(),
                                       g.objects[0].attributes.end());
        CHECK(attrs.size() == 5);
    }
}

TEST_CASE("populate errors name the missing category", "[sampler]") {
    auto world = fixtures::make_world();
    sgf::ScopeSpec spec;
    spec.allowed_relation_subcategories = std::set<std::string>{};  // empty allow-list
    const auto view = sgf::scope_filter(world->catalog, spec);
    sgf::SeededRng rng(1, 1);
    try {
        sgf::populate(make(2, {0, 0}, {{0, 1}}), view, rng);
        FAIL("expected scope error");
    } catch (const sgf::ValidationError& e) {
        CHECK(std::string(e.what()).find("relation") != std::string::npos);
        CHECK(std::string(e.what()).find("scope too narrow") != std::string::npos);
    }
}

TEST_CASE("populate is deterministic and scope-sound", "[sampler]") {
    auto world = fixtures::make_world();
    sgf::ScopeSpec spec;
    spec.include_subtrees = {world->object("animal")};
    const auto view = sgf::scope_filter(world->catalog, spec);
    const std::set<sgf::ConceptId> objects(view.objects().begin(), view.objects().end());
    const auto attr_pool = view.attribute_pool();
    const std::set<sgf::ConceptId> attrs(attr_pool.begin(), attr_pool.end());

    const auto t = make(3, {2, 1, 0}, {{0, 1}, {1, 2}});
    for (int i = 0; i < 100; ++i) {
        sgf::SeededRng a(42, static_cast<std::uint64_t>(i));
        sgf::SeededRng b(42, static_cast<std::uint64_t>(i));
        const auto ga = sgf::populate(t, view, a);
        const auto gb = sgf::populate(t, view, b);
        CHECK(ga == gb);
        for (const auto& o : ga.objects) {
            CHECK(objects.count(o.concept_id) == 1);
            for (const auto& attr : o.attributes) CHECK(attrs.count(attr) == 1);
        }
    }
}

TEST_CASE("scene attribute count range [0,0] gives an empty set", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::SeededRng rng(3, 3);
    CHECK(sgf::sample_scene_attributes(view, 0, 0, sgf::Target::image, rng).items.empty());
}

TEST_CASE("scene attributes respect media gates and distinctness", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    const std::set<std::string> video_only = {"camera_rig", "camera_movement",
                                              "video_editing_style", "temporal_span",
                                              "threed_attribute"};
    for (int i = 0; i < 300; ++i) {
        sgf::SeededRng rng(17, static_cast<std::uint64_t>(i));
        const auto set = sgf::sample_scene_attributes(view, 2, 2, sgf::Target::image, rng);
        REQUIRE(set.items.size() == 2);
        CHECK(set.items[0].subcategory != set.items[1].subcategory);
        for (const auto& item : set.items) {
            CHECK(video_only.count(item.subcategory) == 0);
        }
    }
}

TEST_CASE("scene attribute items come back in precedence order", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    std::map<std::string, std::size_t> precedence;
    for (std::size_t i = 0; i < sgf::kSceneAttrSubcategories.size(); ++i) {
        precedence[std::string(sgf::kSceneAttrSubcategories[i])] = i;
    }
    for (int i = 0; i < 100; ++i) {
        sgf::SeededRng rng(23, static_cast<std::uint64_t>(i));
        const auto set = sgf::sample_scene_attributes(view, 0, 4, sgf::Target::video, rng);
        for (std::size_t j = 1; j < set.items.size(); ++j) {
            CHECK(precedence.at(set.items[j - 1].subcategory) <
                  precedence.at(set.items[j].subcategory));
        }
    }
}

TEST_CASE("scene attribute range beyond admissible subcategories errors", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::SeededRng rng(4, 4);
    const auto admissible = view.admissible_scene_attr_subcategories(sgf::Target::image);
    CHECK_THROWS_AS(sgf::sample_scene_attributes(view, 0, static_cast<int>(admissible.size()) + 1,
                                                 sgf::Target::image, rng),
                    sgf::ValidationError);
}

TEST_CASE("zero-deficit expansion returns the seed unchanged", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::StructureStore store;
    for (int c = 1; c <= 4; ++c) store.store(c, sgf::enumerate_structures(c));

    sgf::SeededRng rng(11, 0);
    const auto seed = sgf::populate(make(2, {1, 1}, {{0, 1}}), view, rng);
    REQUIRE(seed.complexity() == 5);
    sgf::SeededRng rng2(11, 1);
    const auto grown = sgf::expand_seed_graph(seed, 5, view, store, rng2);
    CHECK(grown == seed);
}

TEST_CASE("deficit-1 expansion adds an attribute or an object, never a bare edge", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::StructureStore store;
    for (int c = 1; c <= 2; ++c) store.store(c, sgf::enumerate_structures(c));

    sgf::SceneGraph seed;
    seed.objects.push_back({0, world->object("cat"), {}});

    bool saw_attribute = false, saw_object = false;
    for (int i = 0; i < 200; ++i) {
        sgf::SeededRng rng(31, static_cast<std::uint64_t>(i));
        const auto grown = sgf::expand_seed_graph(seed, 2, view, store, rng);
        CHECK(grown.complexity() == 2);
        CHECK(grown.relations.empty());  // a lone edge is impossible here
        if (grown.objects.size() == 2) {
            saw_object = true;
            CHECK(grown.objects[0].attributes.empty());
        } else {
            REQUIRE(grown.objects.size() == 1);
            REQUIRE(grown.objects[0].attributes.size() == 1);
            saw_attribute = true;
        }
        CHECK(grown.objects[0].concept_id == world->object("cat"));
    }
    CHECK(saw_attribute);
    CHECK(saw_object);
}

TEST_CASE("expansion keeps the seed as an induced subgraph", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::StructureStore store;
    for (int c = 1; c <= 9; ++c) store.store(c, sgf::enumerate_structures(c));

    int attached = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        sgf::SeededRng seed_rng(1000 + trial, 0);
        const auto& seed_pool = store.all(2 + static_cast<int>(seed_rng.bounded(3)));
        const auto& t = seed_pool[seed_rng.bounded(seed_pool.size())];
        const sgf::SceneGraph seed = sgf::populate(t, view, seed_rng);
        const int target = seed.complexity() + static_cast<int>(seed_rng.bounded(5));

        sgf::SeededRng grow_rng(2000 + trial, 1);
        const sgf::SceneGraph grown = sgf::expand_seed_graph(seed, target, view, store, grow_rng);

        CHECK(grown.complexity() == target);
        sgf::validate_scene_graph(grown, world->taxonomy);

        // Seed objects sit verbatim at indices 0..n-1; attribute lists may
        // have grown but must start with the seed's.
        REQUIRE(grown.objects.size() >= seed.objects.size());
        for (std::size_t i = 0; i < seed.objects.size(); ++i) {
            CHECK(grown.objects[i].concept_id == seed.objects[i].concept_id);
            REQUIRE(grown.objects[i].attributes.size() >= seed.objects[i].attributes.size());
            for (std::size_t j = 0; j < seed.objects[i].attributes.size(); ++j) {
                CHECK(grown.objects[i].attributes[j] == seed.objects[i].attributes[j]);
            }
        }
        // Every seed relation is present; no new edges between seed objects.
        const int n_seed = static_cast<int>(seed.objects.size());
        std::size_t seed_edges_found = 0;
        for (const auto& r : grown.relations) {
            if (r.src < n_seed && r.dst < n_seed) {
                bool in_seed = false;
                for (const auto& s : seed.relations) {
                    if (s.src == r.src && s.dst == r.dst && s.concept_id == r.concept_id) {
                        in_seed = true;
                        break;
                    }
                }
                CHECK(in_seed);
                ++seed_edges_found;
            } else if (r.src >= n_seed || r.dst >= n_seed) {
                if (r.src < n_seed || r.dst < n_seed) ++attached;
            }
        }
        CHECK(seed_edges_found == seed.relations.size());
    }
    CHECK(attached > 0);  // the attach branch does fire across trials
}

TEST_CASE("expansion rejects a seed above the target", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::StructureStore store;
    store.store(1, sgf::enumerate_structures(1));
    sgf::SceneGraph seed;
    seed.objects.push_back({0, world->object("cat"), {world->attribute("color", "red")}});
    sgf::SeededRng rng(1, 1);
    CHECK_THROWS_AS(sgf::expand_seed_graph(seed, 1, view, store, rng), sgf::ValidationError);
}

TEST_CASE("expansion validates the seed graph", "[sampler]") {
    auto world = fixtures::make_world();
    const auto view = sgf::scope_filter(world->catalog, {});
    sgf::StructureStore store;
    store.store(1, sgf::enumerate_structures(1));
    sgf::SceneGraph bad;
    bad.objects.push_back({0, world->attribute("color", "red"), {}});  // attribute as object
    sgf::SeededRng rng(1, 1);
    CHECK_THROWS_AS(sgf::expand_seed_graph(bad, 3, view, store, rng), sgf::ValidationError);
}
