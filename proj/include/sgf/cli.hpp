// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgf/analysis.hpp"
#include "sgf/catalog.hpp"
#include "sgf/errors.hpp"
#include "sgf/io.hpp"
#include "sgf/pipeline.hpp"
#include "sgf/realizer.hpp"
#include "sgf/structure.hpp"
#include "sgf/taxonomy.hpp"

namespace sgf::cli {

// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 broken
// internal invariant.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kInternal = 3;

namespace detail {

inline std::pair<std::string, std::string> parse_lemma_sense(const std::string& text) {
    const std::size_t pos = text.rfind('#');
    if (pos == std::string::npos || pos == 0 || pos + 1 == text.size()) {
        throw ValidationError("expected lemma#sense, got '" + text + "'");
    }
    return {text.substr(0, pos), text.substr(pos + 1)};
}

inline std::pair<int, int> parse_range(const std::string& text) {
    const std::size_t pos = text.find("..");
    if (pos == std::string::npos) {
        const int v = static_cast<int>(parse_u64(text, "range"));
        return {v, v};
    }
    return {static_cast<int>(parse_u64(text.substr(0, pos), "range")),
            static_cast<int>(parse_u64(text.substr(pos + 2), "range"))};
}

inline std::string store_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SGF_STORE_DIR"); env && *env) return env;
    return "sgf_store";
}

inline ScopeSpec scope_from_json(const nlohmann::json& j) {
    ScopeSpec scope;
    if (j.contains("include_subtrees")) {
        scope.include_subtrees = j.at("include_subtrees").get<std::vector<std::string>>();
    }
    if (j.contains("exclude_subtrees")) {
        scope.exclude_subtrees = j.at("exclude_subtrees").get<std::vector<std::string>>();
    }
    if (j.contains("required_tags")) {
        for (const auto& t : j.at("required_tags")) scope.required_tags.insert(t.get<std::string>());
    }
    auto subcats = [&](const char* key) -> std::optional<std::set<std::string>> {
        if (!j.contains(key)) return std::nullopt;
        std::set<std::string> out;
        for (const auto& s : j.at(key)) out.insert(s.get<std::string>());
        return out;
    };
    scope.allowed_attribute_subcategories = subcats("allowed_attribute_subcategories");
    scope.allowed_relation_subcategories = subcats("allowed_relation_subcategories");
    scope.allowed_scene_attr_subcategories = subcats("allowed_scene_attr_subcategories");
    return scope;
}

inline Taxonomy load_taxonomy_arg(const std::string& path) { return load_taxonomy(path); }

struct LoadedWorld {
    Taxonomy taxonomy;
    Catalog catalog;
};

inline LoadedWorld load_world(const std::string& taxonomy_path,
                              const std::vector<std::string>& catalog_paths) {
    LoadedWorld world;
    world.taxonomy = load_taxonomy(taxonomy_path);
    world.catalog = load_catalog(world.taxonomy, catalog_paths);
    world.catalog.taxonomy = &world.taxonomy;
    return world;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

struct TaxonomyBuildArgs {
    std::string objects_path;
    std::string attributes_path;
    std::string relations_path;
    std::string scene_attrs_path;
    std::string object_root = "physical object#n.01";
    std::string out_path;
};

inline int run_taxonomy_build(const TaxonomyBuildArgs& args) {
    std::vector<Taxonomy> parts;
    auto build = [&](const std::string& path, const std::string& root_lemma,
                     const std::string& root_sense, Kind kind) {
        if (path.empty()) return;
        const auto entries = load_sense_edges(path);
        auto result = build_tree(entries, root_lemma, root_sense, kind);
        const BuildReport& r = result.report;
        std::fprintf(stderr,
                     "%s: %zu nodes (%d entries, %d non-primary edges dropped, %d unreachable, "
                     "%zu senses collapsed)\n",
                     std::string(kind_name(kind)).c_str(), r.node_count, r.entries_seen,
                     r.duplicate_parent_edges_dropped, r.unreachable_nodes_dropped,
                     r.collapsed_senses.size());
        parts.push_back(std::move(result.taxonomy));
    };
    const auto [obj_lemma, obj_sense] = detail::parse_lemma_sense(args.object_root);
    build(args.objects_path, obj_lemma, obj_sense, Kind::object);
    build(args.attributes_path, "attribute", "root", Kind::attribute);
    build(args.relations_path, "relation", "root", Kind::relation);
    build(args.scene_attrs_path, "scene_attr", "root", Kind::scene_attr);
    if (parts.empty()) {
        throw ValidationError("no edge files given; nothing to build");
    }
    const Taxonomy merged = merge(parts);
    write_file_atomic(args.out_path, taxonomy_to_json(merged).dump(2) + "\n");
    std::fprintf(stderr, "wrote %zu nodes to %s\n", merged.size(), args.out_path.c_str());
    return kOk;
}

struct TaxonomyValidateArgs {
    std::string taxonomy_path;
    std::vector<std::string> expected;  // category=count
};

inline int run_taxonomy_validate(const TaxonomyValidateArgs& args) {
    const Taxonomy tax = load_taxonomy(args.taxonomy_path);
    const TaxonomyReport report = validate(tax);
    for (const auto& [category, count] : report.category_counts) {
        std::printf("%s: %zu\n", category.c_str(), count);
    }
    std::printf("orphans: %zu\n", report.orphan_count);
    std::printf("violations: %zu\n", report.violations.size());
    for (const auto& v : report.violations) std::printf("  %s\n", v.c_str());

    // Declared-count reconciliation is informational, never fatal.
    for (const std::string& expect : args.expected) {
        const auto eq = expect.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("--expect needs category=count, got '" + expect + "'");
        }
        const std::string category = expect.substr(0, eq);
        const std::size_t declared = parse_u64(expect.substr(eq + 1), "--expect");
        auto it = report.category_counts.find(category);
        const std::size_t actual = it == report.category_counts.end() ? 0 : it->second;
        if (actual == declared) {
            std::printf("count check %s: ok (%zu)\n", category.c_str(), declared);
        } else {
            std::printf("count check %s: declared %zu, actual %zu (non-fatal)\n",
                        category.c_str(), declared, actual);
        }
    }
    return report.ok() ? kOk : kData;
}

struct CatalogValidateArgs {
    std::string taxonomy_path;
    std::vector<std::string> catalog_paths;
};

inline int run_catalog_validate(const CatalogValidateArgs& args) {
    const auto world = detail::load_world(args.taxonomy_path, args.catalog_paths);
    const auto view = scope_filter(world.catalog, {});
    for (const auto& [category, count] : counts(view)) {
        std::printf("%s: %zu\n", category.c_str(), count);
    }
    for (const auto& m : reconcile_declared_counts(world.catalog)) {
        std::printf("count check %s: declared %zu, actual %zu (non-fatal)\n", m.category.c_str(),
                    m.declared, m.actual);
    }
    return kOk;
}

struct EnumerateArgs {
    std::string complexity_range;
    std::string store_dir;
    std::optional<int> max_objects;
    std::optional<int> max_edges;
    std::optional<int> max_attrs_per_object;
    std::uint64_t ceiling = kDefaultStructureCeiling;
};

inline int run_enumerate(const EnumerateArgs& args) {
    const auto [lo, hi] = detail::parse_range(args.complexity_range);
    if (lo < 1 || lo > hi) {
        throw ValidationError("bad complexity range '" + args.complexity_range + "'");
    }
    EnumerationLimits limits;
    limits.max_objects = args.max_objects;
    limits.max_edges = args.max_edges;
    limits.max_attrs_per_object = args.max_attrs_per_object;
    const std::string dir = detail::store_dir(args.store_dir);
    StructureStore store;
    for (int c = lo; c <= hi; ++c) {
        auto templates = enumerate_structures(c, limits, args.ceiling);
        nlohmann::ordered_json prov;
        prov["limits"] = nlohmann::ordered_json::object();
        if (limits.max_objects) prov["limits"]["max_objects"] = *limits.max_objects;
        if (limits.max_edges) prov["limits"]["max_edges"] = *limits.max_edges;
        if (limits.max_attrs_per_object) {
            prov["limits"]["max_attrs_per_object"] = *limits.max_attrs_per_object;
        }
        prov["ceiling"] = args.ceiling;
        const std::size_t count = templates.size();
        store.store(c, std::move(templates), prov);
        store.save_complexity(dir, c);
        std::fprintf(stderr, "complexity %d: %zu structures -> %s\n", c, count,
                     (std::filesystem::path(dir) / StructureStore::file_name(c)).string().c_str());
    }
    return kOk;
}

struct GenerateArgs {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string taxonomy_path;
    std::vector<std::string> catalog_paths;
    std::string store_dir;
    std::string templates_path;
    int workers = 1;
    std::optional<std::uint64_t> count;
    std::string complexity_range;
    std::string scene_attr_range;
    std::string target;
};

inline int run_generate(const GenerateArgs& args) {
    GenerationConfig config;
    if (!args.preset.empty()) {
        if (args.preset == "paper-image") {
            config.complexity_lo = 3;
            config.complexity_hi = 12;
            config.scene_attr_lo = 0;
            config.scene_attr_hi = 5;
            config.count = 10000;
            config.target = Target::image;
        } else if (args.preset == "paper-3d") {
            config.complexity_lo = 1;
            config.complexity_hi = 3;
            config.scene_attr_lo = 0;
            config.scene_attr_hi = 2;
            config.count = 1000;
            config.target = Target::threed;
        } else {
            throw ValidationError("unknown preset '" + args.preset +
                                  "' (expected paper-image or paper-3d)");
        }
    }
    if (!args.config_path.empty()) {
        const std::string content = read_file(args.config_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(args.config_path + ": " + e.what());
        }
        if (j.contains("count")) config.count = j.at("count").get<std::uint64_t>();
        if (j.contains("complexity_range")) {
            config.complexity_lo = j.at("complexity_range").at(0).get<int>();
            config.complexity_hi = j.at("complexity_range").at(1).get<int>();
        }
        if (j.contains("scene_attr_range")) {
            config.scene_attr_lo = j.at("scene_attr_range").at(0).get<int>();
            config.scene_attr_hi = j.at("scene_attr_range").at(1).get<int>();
        }
        if (j.contains("target")) config.target = target_from_name(j.at("target").get<std::string>());
        if (j.contains("scope")) config.scope = detail::scope_from_json(j.at("scope"));
        if (j.contains("structure_constraints")) {
            const auto& sc = j.at("structure_constraints");
            if (sc.contains("n_objects")) config.structure_constraints.n_objects = sc.at("n_objects").get<int>();
            if (sc.contains("min_edges")) config.structure_constraints.min_edges = sc.at("min_edges").get<int>();
            if (sc.contains("max_edges")) config.structure_constraints.max_edges = sc.at("max_edges").get<int>();
        }
        if (j.contains("output_path")) config.output_path = j.at("output_path").get<std::string>();
    }
    if (args.count) config.count = *args.count;
    if (!args.complexity_range.empty()) {
        std::tie(config.complexity_lo, config.complexity_hi) =
            detail::parse_range(args.complexity_range);
    }
    if (!args.scene_attr_range.empty()) {
        std::tie(config.scene_attr_lo, config.scene_attr_hi) =
            detail::parse_range(args.scene_attr_range);
    }
    if (!args.target.empty()) config.target = target_from_name(args.target);
    if (!args.out_path.empty()) config.output_path = args.out_path;
    if (config.output_path.empty()) {
        throw ValidationError("no output path (use --out or config output_path)");
    }
    config.master_seed = *args.seed;  // required flag
    config.workers = args.workers;

    const auto world = detail::load_world(args.taxonomy_path, args.catalog_paths);
    StructureStore store;
    const std::string dir = detail::store_dir(args.store_dir);
    for (int c = config.complexity_lo; c <= config.complexity_hi; ++c) {
        store.load_complexity(dir, c);  // NotEnumeratedError names the missing file
    }
    const RealizationTemplates templates = args.templates_path.empty()
                                               ? RealizationTemplates::defaults()
                                               : RealizationTemplates::from_json_file(args.templates_path);

    const auto records = generate_dataset(
        config, store, world.catalog, templates, [](std::uint64_t done, std::uint64_t total) {
            std::fprintf(stderr, "generated %llu/%llu\n",
                         static_cast<unsigned long long>(done),
                         static_cast<unsigned long long>(total));
        });
    emit_jsonl(records, config.output_path);
    std::fprintf(stderr, "wrote %zu records to %s\n", records.size(), config.output_path.c_str());
    return kOk;
}

struct AttachArgs {
    std::string in_path;
    std::string scores_path;
    std::string out_path;
};

inline int run_attach(const AttachArgs& args) {
    auto records = read_jsonl(args.in_path);
    const AttachResult result = attach_properties(records, args.scores_path);
    for (const auto& id : result.unknown_ids) {
        std::fprintf(stderr, "warning: unknown caption_id '%s'\n", id.c_str());
    }
    emit_jsonl(records, args.out_path);
    std::fprintf(stderr, "merged %zu values (%zu unknown ids)\n", result.merged,
                 result.unknown_ids.size());
    return kOk;
}

struct FilterArgs {
    std::string in_path;
    std::string property;
    std::optional<double> min;
    std::optional<double> max;
    std::string percentile_range;
    std::string out_path;
};

inline int run_filter(const FilterArgs& args) {
    auto records = read_jsonl(args.in_path);
    FilterPredicate pred;
    pred.min = args.min;
    pred.max = args.max;
    if (!args.percentile_range.empty()) {
        const std::size_t pos = args.percentile_range.find("..");
        if (pos == std::string::npos) {
            throw ValidationError("--percentile needs LO..HI, got '" + args.percentile_range + "'");
        }
        pred.percentile_range = {
            parse_double(args.percentile_range.substr(0, pos), "--percentile"),
            parse_double(args.percentile_range.substr(pos + 2), "--percentile")};
    }
    const auto kept = filter_records(records, args.property, pred);
    emit_jsonl(kept, args.out_path);
    std::fprintf(stderr, "kept %zu of %zu records\n", kept.size(), records.size());
    return kOk;
}

struct AnalyzeCommonArgs {
    std::string dataset_path;
    std::string scores_path;
    std::string taxonomy_path;
    std::string metric;
    std::string out_path;
};

inline int run_analyze_rollup(const AnalyzeCommonArgs& common, const std::string& model,
                              const std::vector<std::string>& nodes) {
    const Taxonomy tax = load_taxonomy(common.taxonomy_path);
    const auto records = read_jsonl(common.dataset_path);
    const auto table = ingest_scores(common.scores_path);
    std::vector<std::pair<ConceptId, MeanN>> rows;
    for (const auto& node : nodes) {
        rows.emplace_back(node, rollup(table, records, tax, model, common.metric, node));
    }
    write_file_atomic(common.out_path, rollup_csv(rows));
    return kOk;
}

inline int run_analyze_compare(const AnalyzeCommonArgs& common, const std::string& model_a,
                               const std::string& model_b, const std::vector<std::string>& nodes) {
    const Taxonomy tax = load_taxonomy(common.taxonomy_path);
    const auto records = read_jsonl(common.dataset_path);
    const auto table = ingest_scores(common.scores_path);
    const auto rows = compare_models(table, records, tax, model_a, model_b, common.metric, nodes);
    write_file_atomic(common.out_path, compare_csv(rows));
    return kOk;
}

inline int run_analyze_gaps(const AnalyzeCommonArgs& common, const std::string& model_a,
                            const std::string& model_b, std::size_t k, std::size_t min_support) {
    const Taxonomy tax = load_taxonomy(common.taxonomy_path);
    const auto records = read_jsonl(common.dataset_path);
    const auto table = ingest_scores(common.scores_path);
    const auto result = gap_ranking(table, records, tax, model_a, model_b, common.metric, k,
                                    min_support);
    if (result.shortfall) {
        std::fprintf(stderr, "note: only %zu concepts eligible (requested %zu)\n", result.eligible,
                     k);
    }
    write_file_atomic(common.out_path, gaps_csv(result));
    return kOk;
}

inline int run_analyze_buckets(const AnalyzeCommonArgs& common, const std::string& model,
                               const std::string& property, int n_buckets) {
    const auto records = read_jsonl(common.dataset_path);
    const auto table = ingest_scores(common.scores_path);
    const auto buckets =
        percentile_buckets(records, table, model, common.metric, property, n_buckets);
    write_file_atomic(common.out_path, buckets_csv(buckets));
    return kOk;
}

struct SelectBestArgs {
    std::string candidates_path;  // CSV caption_id,candidate_id,score
    std::string out_path;
};

inline int run_select_best(const SelectBestArgs& args) {
    std::ifstream in(args.candidates_path, std::ios::binary);
    if (!in) throw ParseError("cannot open candidates file: '" + args.candidates_path + "'");
    std::map<std::string, std::vector<Candidate>> groups;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "caption_id,candidate_id,score") continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError(args.candidates_path + ":" + std::to_string(line_no) +
                             ": expected 3 fields");
        }
        groups[fields[0]].push_back(
            {fields[1], parse_double(fields[2], args.candidates_path + ":" + std::to_string(line_no))});
    }
    const auto winners = select_best_per_group(groups);
    std::string csv = "caption_id,candidate_id\n";
    for (const auto& [caption, winner] : winners) csv += caption + "," + winner + "\n";
    write_file_atomic(args.out_path, csv);
    return kOk;
}

struct SelectTopArgs {
    std::string dataset_path;
    std::string property;
    std::string scores_path;
    std::string model;
    std::string metric;
    double fraction = 0.25;
    std::string out_path;
};

inline int run_select_top(const SelectTopArgs& args) {
    const auto records = read_jsonl(args.dataset_path);
    std::vector<ScoredRecord> scored;
    if (!args.property.empty()) {
        for (const auto& r : records) {
            auto it = r.properties.find(args.property);
            if (it == r.properties.end()) {
                throw ValidationError("record '" + r.caption_id + "' lacks property '" +
                                      args.property + "'");
            }
            scored.push_back({r.caption_id, it->second});
        }
    } else if (!args.scores_path.empty()) {
        const auto table = ingest_scores(args.scores_path);
        for (const auto& r : records) {
            const auto v = table.value(r.caption_id, args.model, args.metric);
            if (!v) {
                throw ValidationError("no score for caption '" + r.caption_id + "' under model '" +
                                      args.model + "', metric '" + args.metric + "'");
            }
            scored.push_back({r.caption_id, *v});
        }
    } else {
        throw ValidationError("select top needs --property or --scores/--model/--metric");
    }
    const auto top = select_top_fraction(scored, args.fraction);
    std::string csv = "caption_id,score\n";
    for (const auto& r : top) {
        csv += r.caption_id + "," + std::to_string(r.score) + "\n";
    }
    write_file_atomic(args.out_path, csv);
    std::fprintf(stderr, "selected %zu of %zu records\n", top.size(), scored.size());
    return kOk;
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

inline int run(int argc, char** argv) {
    CLI::App app{"scene-graph caption generation and score analysis"};
    app.require_subcommand(1);

    // taxonomy build | validate
    auto* taxonomy_cmd = app.add_subcommand("taxonomy", "build or validate the concept taxonomy");
    taxonomy_cmd->require_subcommand(1);
    TaxonomyBuildArgs tb;
    auto* tax_build = taxonomy_cmd->add_subcommand("build", "build the taxonomy from sense-edge TSVs");
    tax_build->add_option("--objects", tb.objects_path, "object hypernym edges (TSV)");
    tax_build->add_option("--attributes", tb.attributes_path, "attribute edges (TSV)");
    tax_build->add_option("--relations", tb.relations_path, "relation edges (TSV)");
    tax_build->add_option("--scene-attrs", tb.scene_attrs_path, "scene attribute edges (TSV)");
    tax_build->add_option("--object-root", tb.object_root, "object root as lemma#sense")
        ->capture_default_str();
    tax_build->add_option("--out", tb.out_path, "output taxonomy JSON")->required();

    TaxonomyValidateArgs tv;
    auto* tax_validate = taxonomy_cmd->add_subcommand("validate", "validate a taxonomy JSON");
    tax_validate->add_option("--taxonomy", tv.taxonomy_path, "taxonomy JSON")->required();
    tax_validate->add_option("--expect", tv.expected,
                             "category=count declared totals (repeatable, non-fatal)");

    // catalog validate
    auto* catalog_cmd = app.add_subcommand("catalog", "validate metadata catalogs");
    catalog_cmd->require_subcommand(1);
    CatalogValidateArgs cv;
    auto* cat_validate = catalog_cmd->add_subcommand("validate", "resolve catalogs against a taxonomy");
    cat_validate->add_option("--taxonomy", cv.taxonomy_path, "taxonomy JSON")->required();
    cat_validate->add_option("--catalog", cv.catalog_paths, "catalog JSON file (repeatable)")
        ->required();

    // enumerate
    EnumerateArgs en;
    auto* enumerate_cmd = app.add_subcommand("enumerate", "enumerate structure templates");
    enumerate_cmd->add_option("--complexity", en.complexity_range, "complexity N or LO..HI")
        ->required();
    enumerate_cmd->add_option("--store", en.store_dir, "structure store directory");
    enumerate_cmd->add_option("--max-objects", en.max_objects, "cap on objects per template");
    enumerate_cmd->add_option("--max-edges", en.max_edges, "cap on relation edges per template");
    enumerate_cmd->add_option("--max-attrs-per-object", en.max_attrs_per_object,
                              "cap on attribute slots per object");
    enumerate_cmd->add_option("--ceiling", en.ceiling, "max structures per complexity")
        ->capture_default_str();

    // generate
    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "generate a caption dataset");
    generate_cmd->add_option("--config", gen.config_path, "generation config JSON");
    generate_cmd->add_option("--preset", gen.preset, "paper-image or paper-3d");
    generate_cmd->add_option("--seed", gen.seed, "master seed (required; no wall-clock default)")
        ->required();
    generate_cmd->add_option("--out", gen.out_path, "output JSONL path");
    generate_cmd->add_option("--taxonomy", gen.taxonomy_path, "taxonomy JSON")->required();
    generate_cmd->add_option("--catalog", gen.catalog_paths, "catalog JSON file (repeatable)")
        ->required();
    generate_cmd->add_option("--store", gen.store_dir, "structure store directory");
    generate_cmd->add_option("--templates", gen.templates_path, "realization template JSON");
    generate_cmd->add_option("--workers", gen.workers, "worker threads")->capture_default_str();
    generate_cmd->add_option("--count", gen.count, "records to generate");
    generate_cmd->add_option("--complexity", gen.complexity_range, "complexity LO..HI");
    generate_cmd->add_option("--scene-attrs", gen.scene_attr_range, "scene attribute count LO..HI");
    generate_cmd->add_option("--target", gen.target, "image, video or threed");

    // attach
    AttachArgs at;
    auto* attach_cmd = app.add_subcommand("attach", "merge a property CSV into a dataset");
    attach_cmd->add_option("--in", at.in_path, "input dataset JSONL")->required();
    attach_cmd->add_option("--scores", at.scores_path, "CSV caption_id,property,value")->required();
    attach_cmd->add_option("--out", at.out_path, "output dataset JSONL")->required();

    // filter
    FilterArgs fi;
    auto* filter_cmd = app.add_subcommand("filter", "filter a dataset by a property");
    filter_cmd->add_option("--in", fi.in_path, "input dataset JSONL")->required();
    filter_cmd->add_option("--property", fi.property, "property name")->required();
    filter_cmd->add_option("--min", fi.min, "inclusive lower bound");
    filter_cmd->add_option("--max", fi.max, "inclusive upper bound");
    filter_cmd->add_option("--percentile", fi.percentile_range, "inclusive percentile range LO..HI");
    filter_cmd->add_option("--out", fi.out_path, "output dataset JSONL")->required();

    // analyze rollup | compare | gaps | buckets
    auto* analyze_cmd = app.add_subcommand("analyze", "score analyses over a dataset");
    analyze_cmd->require_subcommand(1);
    AnalyzeCommonArgs ac;
    std::string model, model_a, model_b, property;
    std::vector<std::string> nodes;
    std::size_t k = 100, min_support = 5;
    int n_buckets = 4;

    auto add_common = [&](CLI::App* cmd, bool needs_taxonomy) {
        cmd->add_option("--dataset", ac.dataset_path, "dataset JSONL")->required();
        cmd->add_option("--scores", ac.scores_path, "CSV caption_id,model_id,metric_id,value")
            ->required();
        if (needs_taxonomy) {
            cmd->add_option("--taxonomy", ac.taxonomy_path, "taxonomy JSON")->required();
        }
        cmd->add_option("--metric", ac.metric, "metric id")->required();
        cmd->add_option("--out", ac.out_path, "output CSV")->required();
    };

    auto* rollup_cmd = analyze_cmd->add_subcommand("rollup", "per-node subtree score rollups");
    add_common(rollup_cmd, true);
    rollup_cmd->add_option("--model", model, "model id")->required();
    rollup_cmd->add_option("--node", nodes, "taxonomy node id (repeatable)")->required();

    auto* compare_cmd = analyze_cmd->add_subcommand("compare", "pairwise model comparison");
    add_common(compare_cmd, true);
    compare_cmd->add_option("--model-a", model_a, "first model id")->required();
    compare_cmd->add_option("--model-b", model_b, "second model id")->required();
    compare_cmd->add_option("--node", nodes, "taxonomy node id (repeatable)")->required();

    auto* gaps_cmd = analyze_cmd->add_subcommand("gaps", "largest per-concept gaps between models");
    add_common(gaps_cmd, true);
    gaps_cmd->add_option("--model-a", model_a, "weaker model id")->required();
    gaps_cmd->add_option("--model-b", model_b, "reference model id")->required();
    gaps_cmd->add_option("--k", k, "how many concepts")->capture_default_str();
    gaps_cmd->add_option("--min-support", min_support, "min captions per model")
        ->capture_default_str();

    auto* buckets_cmd = analyze_cmd->add_subcommand("buckets", "scores across property percentiles");
    add_common(buckets_cmd, false);
    buckets_cmd->add_option("--model", model, "model id")->required();
    buckets_cmd->add_option("--property", property, "attached property name")->required();
    buckets_cmd->add_option("--buckets", n_buckets, "bucket count")->capture_default_str();

    // select best | top
    auto* select_cmd = app.add_subcommand("select", "selection strategies over scored outputs");
    select_cmd->require_subcommand(1);
    SelectBestArgs sb;
    auto* best_cmd = select_cmd->add_subcommand("best", "best candidate per caption");
    best_cmd->add_option("--candidates", sb.candidates_path, "CSV caption_id,candidate_id,score")
        ->required();
    best_cmd->add_option("--out", sb.out_path, "output CSV")->required();

    SelectTopArgs st;
    auto* top_cmd = select_cmd->add_subcommand("top", "top fraction of a scored dataset");
    top_cmd->add_option("--dataset", st.dataset_path, "dataset JSONL")->required();
    top_cmd->add_option("--property", st.property, "attached property to rank by");
    top_cmd->add_option("--scores", st.scores_path, "score CSV to rank by");
    top_cmd->add_option("--model", st.model, "model id (with --scores)");
    top_cmd->add_option("--metric", st.metric, "metric id (with --scores)");
    top_cmd->add_option("--fraction", st.fraction, "fraction to keep, in (0, 1]")
        ->capture_default_str();
    top_cmd->add_option("--out", st.out_path, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, std::cerr);
        std::cerr << app.help();
        return kUsage;
    }

    try {
        if (tax_build->parsed()) return run_taxonomy_build(tb);
        if (tax_validate->parsed()) return run_taxonomy_validate(tv);
        if (cat_validate->parsed()) return run_catalog_validate(cv);
        if (enumerate_cmd->parsed()) return run_enumerate(en);
        if (generate_cmd->parsed()) return run_generate(gen);
        if (attach_cmd->parsed()) return run_attach(at);
        if (filter_cmd->parsed()) return run_filter(fi);
        if (rollup_cmd->parsed()) return run_analyze_rollup(ac, model, nodes);
        if (compare_cmd->parsed()) return run_analyze_compare(ac, model_a, model_b, nodes);
        if (gaps_cmd->parsed()) return run_analyze_gaps(ac, model_a, model_b, k, min_support);
        if (buckets_cmd->parsed()) return run_analyze_buckets(ac, model, property, n_buckets);
        if (best_cmd->parsed()) return run_select_best(sb);
        if (top_cmd->parsed()) return run_select_top(st);
        throw InternalError("no subcommand dispatched");
    } catch (const InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
}

}  // namespace sgf::cli
