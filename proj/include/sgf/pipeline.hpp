// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sgf/catalog.hpp"
#include "sgf/errors.hpp"
#include "sgf/hash.hpp"
#include "sgf/io.hpp"
#include "sgf/realizer.hpp"
#include "sgf/rng.hpp"
#include "sgf/sampler.hpp"
#include "sgf/structure.hpp"

namespace sgf {

struct GenerationConfig {
    std::uint64_t master_seed = 0;
    std::uint64_t count = 0;
    int complexity_lo = 1;
    int complexity_hi = 1;
    int scene_attr_lo = 0;
    int scene_attr_hi = 0;
    Target target = Target::image;
    ScopeSpec scope;
    QueryConstraints structure_constraints;
    std::string output_path;
    int workers = 1;
};

struct ElementCounts {
    int objects = 0;
    int attributes = 0;
    int relations = 0;
};

struct CaptionRecord {
    std::string caption_id;
    std::uint64_t index = 0;
    std::string text;
    SceneGraph scene_graph;
    SceneAttributeSet scene_attributes;
    int complexity = 0;
    ElementCounts element_counts;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
    std::map<std::string, double> properties;
};

namespace detail {

inline nlohmann::ordered_json scene_graph_to_json(const SceneGraph& g) {
    nlohmann::ordered_json objects = nlohmann::ordered_json::array();
    for (const SceneObject& o : g.objects) {
        nlohmann::ordered_json j;
        j["index"] = o.index;
        j["concept"] = o.concept_id;
        j["attributes"] = o.attributes;
        objects.push_back(std::move(j));
    }
    nlohmann::ordered_json relations = nlohmann::ordered_json::array();
    for (const SceneRelation& r : g.relations) {
        nlohmann::ordered_json j;
        j["src"] = r.src;
        j["dst"] = r.dst;
        j["concept"] = r.concept_id;
        relations.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["objects"] = std::move(objects);
    out["relations"] = std::move(relations);
    return out;
}

inline SceneGraph scene_graph_from_json(const nlohmann::json& j) {
    SceneGraph g;
    for (const auto& o : j.at("objects")) {
        SceneObject obj;
        obj.index = o.at("index").get<int>();
        obj.concept_id = o.at("concept").get<std::string>();
        obj.attributes = o.at("attributes").get<std::vector<ConceptId>>();
        g.objects.push_back(std::move(obj));
    }
    for (const auto& r : j.at("relations")) {
        SceneRelation rel;
        rel.src = r.at("src").get<int>();
        rel.dst = r.at("dst").get<int>();
        rel.concept_id = r.at("concept").get<std::string>();
        g.relations.push_back(std::move(rel));
    }
    return g;
}

inline nlohmann::ordered_json scene_attrs_to_json(const SceneAttributeSet& s) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const SceneAttribute& item : s.items) {
        nlohmann::ordered_json j;
        j["subcategory"] = item.subcategory;
        j["concept"] = item.concept_id;
        out.push_back(std::move(j));
    }
    return out;
}

inline SceneAttributeSet scene_attrs_from_json(const nlohmann::json& j) {
    SceneAttributeSet out;
    for (const auto& item : j) {
        SceneAttribute a;
        a.subcategory = item.at("subcategory").get<std::string>();
        a.concept_id = item.at("concept").get<std::string>();
        out.items.push_back(std::move(a));
    }
    return out;
}

}  // namespace detail

// Stable join key for external score files: a 128-bit digest over the seed,
// index and the canonical serialization of graph plus scene attributes.
inline std::string caption_id_for(std::uint64_t master_seed, std::uint64_t index,
                                  const SceneGraph& g, const SceneAttributeSet& attrs) {
    nlohmann::ordered_json j;
    j["master_seed"] = master_seed;
    j["index"] = index;
    j["scene_graph"] = detail::scene_graph_to_json(g);
    j["scene_attributes"] = detail::scene_attrs_to_json(attrs);
    return murmur3_128(j.dump()).hex();
}

inline nlohmann::ordered_json record_to_json(const CaptionRecord& r) {
    nlohmann::ordered_json j;
    j["caption_id"] = r.caption_id;
    j["index"] = r.index;
    j["text"] = r.text;
    j["complexity"] = r.complexity;
    nlohmann::ordered_json counts;
    counts["objects"] = r.element_counts.objects;
    counts["attributes"] = r.element_counts.attributes;
    counts["relations"] = r.element_counts.relations;
    j["element_counts"] = std::move(counts);
    j["scene_graph"] = detail::scene_graph_to_json(r.scene_graph);
    j["scene_attributes"] = detail::scene_attrs_to_json(r.scene_attributes);
    nlohmann::ordered_json seed;
    seed["master_seed"] = r.master_seed;
    seed["stream_index"] = r.stream_index;
    j["seed"] = std::move(seed);
    j["properties"] = r.properties;
    return j;
}

inline CaptionRecord record_from_json(const nlohmann::json& j) {
    CaptionRecord r;
    r.caption_id = j.at("caption_id").get<std::string>();
    r.index = j.at("index").get<std::uint64_t>();
    r.text = j.at("text").get<std::string>();
    r.complexity = j.at("complexity").get<int>();
    r.element_counts.objects = j.at("element_counts").at("objects").get<int>();
    r.element_counts.attributes = j.at("element_counts").at("attributes").get<int>();
    r.element_counts.relations = j.at("element_counts").at("relations").get<int>();
    r.scene_graph = detail::scene_graph_from_json(j.at("scene_graph"));
    r.scene_attributes = detail::scene_attrs_from_json(j.at("scene_attributes"));
    r.master_seed = j.at("seed").at("master_seed").get<std::uint64_t>();
    r.stream_index = j.at("seed").at("stream_index").get<std::uint64_t>();
    if (j.contains("properties")) {
        r.properties = j.at("properties").get<std::map<std::string, double>>();
    }
    return r;
}

// Builds one record from its stream. The per-caption draw order is pinned:
// complexity, structure pick, population, scene attributes.
inline CaptionRecord generate_record(const GenerationConfig& config, std::uint64_t index,
                                     const std::map<int, std::vector<StructureTemplate>>& pools,
                                     const CatalogView& view, const Taxonomy& tax,
                                     const RealizationTemplates& templates) {
    SeededRng rng(config.master_seed, index);
    const int span = config.complexity_hi - config.complexity_lo + 1;
    const int complexity =
        config.complexity_lo + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span)));
    const std::vector<StructureTemplate>& candidates = pools.at(complexity);
    if (candidates.empty()) {
        throw ValidationError("no structures match the constraints at complexity " +
                              std::to_string(complexity));
    }
    const StructureTemplate& t = candidates[rng.bounded(candidates.size())];

    CaptionRecord r;
    r.index = index;
    r.master_seed = config.master_seed;
    r.stream_index = index;
    r.scene_graph = populate(t, view, rng);
    r.scene_attributes =
        sample_scene_attributes(view, config.scene_attr_lo, config.scene_attr_hi, config.target, rng);
    r.text = realize(r.scene_graph, r.scene_attributes, tax, templates);
    r.complexity = r.scene_graph.complexity();
    r.element_counts.objects = static_cast<int>(r.scene_graph.objects.size());
    r.element_counts.relations = static_cast<int>(r.scene_graph.relations.size());
    r.element_counts.attributes = r.complexity - r.element_counts.objects - r.element_counts.relations;
    r.caption_id = caption_id_for(config.master_seed, index, r.scene_graph, r.scene_attributes);
    if (r.complexity != t.complexity) {
        throw InternalError("populated graph complexity " + std::to_string(r.complexity) +
                            " != template complexity " + std::to_string(t.complexity));
    }
    return r;
}

// Generates records 0..count-1, each from its own seed stream, so the result
// is a pure function of (config, store, catalog) no matter how many workers
// run. progress, when set, is called with (done, total) at completion steps.
inline std::vector<CaptionRecord> generate_dataset(
    const GenerationConfig& config, const StructureStore& store, const Catalog& catalog,
    const RealizationTemplates& templates = RealizationTemplates::defaults(),
    const std::function<void(std::uint64_t, std::uint64_t)>& progress = {}) {
    if (config.complexity_lo < 1 || config.complexity_lo > config.complexity_hi) {
        throw ValidationError("bad complexity range [" + std::to_string(config.complexity_lo) +
                              ", " + std::to_string(config.complexity_hi) + "]");
    }
    std::map<int, std::vector<StructureTemplate>> pools;
    for (int c = config.complexity_lo; c <= config.complexity_hi; ++c) {
        pools[c] = store.query(c, config.structure_constraints);  // throws NotEnumerated
    }
    const CatalogView view = scope_filter(catalog, config.scope);
    const Taxonomy& tax = *catalog.taxonomy;

    std::vector<CaptionRecord> records(config.count);
    const int workers = std::max(1, config.workers);
    std::atomic<std::uint64_t> done{0};
    std::atomic<std::uint64_t> next_report{0};

    auto work = [&](std::uint64_t begin, std::uint64_t end, std::exception_ptr& error) {
        try {
            for (std::uint64_t i = begin; i < end; ++i) {
                try {
                    records[i] = generate_record(config, i, pools, view, tax, templates);
                } catch (const Error& e) {
                    throw ValidationError("record " + std::to_string(i) + ": " + e.what());
                }
                const std::uint64_t d = done.fetch_add(1) + 1;
                if (progress && config.count >= 10) {
                    const std::uint64_t step = config.count / 10;
                    std::uint64_t expected = next_report.load();
                    if (d >= expected + step &&
                        next_report.compare_exchange_strong(expected, d)) {
                        progress(d, config.count);
                    }
                }
            }
        } catch (...) {
            error = std::current_exception();
        }
    };

    if (workers == 1 || config.count < 2) {
        std::exception_ptr error;
        work(0, config.count, error);
        if (error) std::rethrow_exception(error);
    } else {
        const std::uint64_t n = config.count;
        const std::uint64_t w = static_cast<std::uint64_t>(workers);
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(w);
        for (std::uint64_t k = 0; k < w; ++k) {
            const std::uint64_t begin = n * k / w;
            const std::uint64_t end = n * (k + 1) / w;
            threads.emplace_back(work, begin, end, std::ref(errors[k]));
        }
        for (auto& t : threads) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// JSONL dataset files
// ---------------------------------------------------------------------------

inline std::string records_to_jsonl(const std::vector<CaptionRecord>& records) {
    std::string out;
    for (const CaptionRecord& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline void emit_jsonl(const std::vector<CaptionRecord>& records, const std::string& path) {
    write_file_atomic(path, records_to_jsonl(records));
}

inline std::vector<CaptionRecord> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file: '" + path + "'");
    std::vector<CaptionRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// External properties
// ---------------------------------------------------------------------------

struct AttachResult {
    std::size_t merged = 0;
    std::vector<std::string> unknown_ids;
};

// Merges a `caption_id,property,value` CSV into record properties.
// Re-attaching overwrites (last write wins); ids missing from the dataset
// are reported, not fatal.
inline AttachResult attach_properties(std::vector<CaptionRecord>& records,
                                      const std::string& scores_path) {
    std::ifstream in(scores_path, std::ios::binary);
    if (!in) throw ParseError("cannot open scores file: '" + scores_path + "'");
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].caption_id] = i;

    AttachResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "caption_id,property,value") continue;  // optional header
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError(scores_path + ":" + std::to_string(line_no) +
                             ": expected 3 comma-separated fields, got " +
                             std::to_string(fields.size()));
        }
        const double value =
            parse_double(fields[2], scores_path + ":" + std::to_string(line_no));
        auto it = by_id.find(fields[0]);
        if (it == by_id.end()) {
            result.unknown_ids.push_back(fields[0]);
            continue;
        }
        records[it->second].properties[trim(fields[1])] = value;
        ++result.merged;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

struct FilterPredicate {
    std::optional<double> min;
    std::optional<double> max;
    std::optional<std::pair<double, double>> percentile_range;  // inclusive
};

// Nearest-rank percentile over a sorted sample: the p-th percentile is the
// value at rank ceil(p/100 * N), clamped to [1, N].
inline double nearest_rank_percentile(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty()) throw ValidationError("percentile of empty set");
    const double n = static_cast<double>(sorted_values.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    if (rank < 1) rank = 1;
    if (rank > sorted_values.size()) rank = sorted_values.size();
    return sorted_values[rank - 1];
}

inline std::vector<CaptionRecord> filter_records(const std::vector<CaptionRecord>& records,
                                                 const std::string& property,
                                                 const FilterPredicate& predicate) {
    double lo_value = -std::numeric_limits<double>::infinity();
    double hi_value = std::numeric_limits<double>::infinity();
    if (predicate.min) lo_value = *predicate.min;
    if (predicate.max) hi_value = *predicate.max;
    if (predicate.percentile_range) {
        std::vector<double> values;
        for (const CaptionRecord& r : records) {
            auto it = r.properties.find(property);
            if (it == r.properties.end()) {
                throw ValidationError("record '" + r.caption_id + "' lacks property '" + property +
                                      "' required for percentile filtering");
            }
            values.push_back(it->second);
        }
        std::sort(values.begin(), values.end());
        lo_value = std::max(lo_value, nearest_rank_percentile(values, predicate.percentile_range->first));
        hi_value = std::min(hi_value, nearest_rank_percentile(values, predicate.percentile_range->second));
    }

    const bool unbounded = !predicate.min && !predicate.max && !predicate.percentile_range;
    std::vector<CaptionRecord> out;
    for (const CaptionRecord& r : records) {
        if (unbounded) {
            out.push_back(r);
            continue;
        }
        auto it = r.properties.find(property);
        if (it == r.properties.end()) continue;
        if (it->second >= lo_value && it->second <= hi_value) out.push_back(r);
    }
    return out;
}

}  // namespace sgf
