// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgf/errors.hpp"
#include "sgf/pipeline.hpp"
#include "sgf/strings.hpp"
#include "sgf/taxonomy.hpp"

namespace sgf {

// Externally computed per-caption metric values, keyed by (caption, model,
// metric). Lookups are explicit about missing values; nothing defaults to
// zero. Immutable after ingest.
class ScoreTable {
public:
    using PairKey = std::pair<std::string, std::string>;  // (model, metric)

    void add(const std::string& caption_id, const std::string& model_id,
             const std::string& metric_id, double value, const std::string& context) {
        auto& per_caption = table_[{model_id, metric_id}];
        if (!per_caption.emplace(caption_id, value).second) {
            throw ValidationError(context + ": duplicate score key (" + caption_id + ", " +
                                  model_id + ", " + metric_id + ")");
        }
        ++size_;
    }

    std::optional<double> value(const std::string& caption_id, const std::string& model_id,
                                const std::string& metric_id) const {
        auto it = table_.find({model_id, metric_id});
        if (it == table_.end()) return std::nullopt;
        auto vit = it->second.find(caption_id);
        if (vit == it->second.end()) return std::nullopt;
        return vit->second;
    }

    bool has_pair(const std::string& model_id, const std::string& metric_id) const {
        return table_.count({model_id, metric_id}) != 0;
    }

    std::size_t size() const { return size_; }

    std::vector<PairKey> pairs() const {
        std::vector<PairKey> out;
        for (const auto& [key, _] : table_) out.push_back(key);
        return out;
    }

private:
    std::map<PairKey, std::unordered_map<std::string, double>> table_;
    std::size_t size_ = 0;
};

// CSV `caption_id,model_id,metric_id,value`; values must be finite reals.
inline ScoreTable ingest_scores(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open score file: '" + path + "'");
    ScoreTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "caption_id,model_id,metric_id,value") continue;
        const std::vector<std::string> fields = split(line, ',');
        const std::string context = path + ":" + std::to_string(line_no);
        if (fields.size() != 4) {
            throw ParseError(context + ": expected 4 comma-separated fields, got " +
                             std::to_string(fields.size()));
        }
        const double value = parse_double(fields[3], context);
        table.add(fields[0], fields[1], fields[2], value, context);
    }
    return table;
}

struct MeanN {
    double mean = 0.0;
    std::size_t n = 0;
};

namespace detail {

// Distinct graph concepts (objects, attributes, relations) per record.
inline std::set<ConceptId> graph_concepts(const CaptionRecord& r) {
    std::set<ConceptId> out;
    for (const SceneObject& o : r.scene_graph.objects) {
        out.insert(o.concept_id);
        out.insert(o.attributes.begin(), o.attributes.end());
    }
    for (const SceneRelation& rel : r.scene_graph.relations) out.insert(rel.concept_id);
    return out;
}

}  // namespace detail

// Mean score per concept over the distinct captions containing it; a caption
// counts once no matter how often the concept repeats inside it. Captions
// without a score for (model, metric) are excluded from mean and n alike.
inline std::map<ConceptId, MeanN> concept_scores(const ScoreTable& table,
                                                 const std::vector<CaptionRecord>& records,
                                                 const std::string& model,
                                                 const std::string& metric) {
    std::map<ConceptId, std::pair<double, std::size_t>> sums;
    std::size_t scored = 0;
    for (const CaptionRecord& r : records) {
        const std::optional<double> score = table.value(r.caption_id, model, metric);
        if (!score) continue;
        ++scored;
        for (const ConceptId& c : detail::graph_concepts(r)) {
            auto& [sum, n] = sums[c];
            sum += *score;
            ++n;
        }
    }
    if (scored == 0) {
        throw ValidationError("no scores for model '" + model + "', metric '" + metric + "'");
    }
    std::map<ConceptId, MeanN> out;
    for (const auto& [c, sn] : sums) out[c] = {sn.first / static_cast<double>(sn.second), sn.second};
    return out;
}

// Mean over distinct captions containing any concept of the node's subtree.
inline MeanN rollup(const ScoreTable& table, const std::vector<CaptionRecord>& records,
                    const Taxonomy& tax, const std::string& model, const std::string& metric,
                    const ConceptId& node) {
    const std::vector<ConceptId> ids = subtree(tax, node);
    const std::set<ConceptId> wanted(ids.begin(), ids.end());
    double sum = 0.0;
    std::size_t n = 0;
    for (const CaptionRecord& r : records) {
        const std::optional<double> score = table.value(r.caption_id, model, metric);
        if (!score) continue;
        bool contains = false;
        for (const ConceptId& c : detail::graph_concepts(r)) {
            if (wanted.count(c)) { contains = true; break; }
        }
        if (contains) {
            sum += *score;
            ++n;
        }
    }
    MeanN out;
    out.n = n;
    out.mean = n ? sum / static_cast<double>(n) : 0.0;
    return out;
}

struct CompareEntry {
    ConceptId node;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double delta = 0.0;
    std::size_t n = 0;       // captions covered by both models
    bool no_coverage = false;
};

// Per node, both models averaged over the same caption set: captions scored
// by both models that contain a subtree concept. Nodes without any covered
// caption come back flagged, not dropped.
inline std::vector<CompareEntry> compare_models(const ScoreTable& table,
                                                const std::vector<CaptionRecord>& records,
                                                const Taxonomy& tax, const std::string& model_a,
                                                const std::string& model_b,
                                                const std::string& metric,
                                                const std::vector<ConceptId>& nodes) {
    if (!table.has_pair(model_a, metric)) {
        throw ValidationError("no scores for model '" + model_a + "', metric '" + metric + "'");
    }
    if (!table.has_pair(model_b, metric)) {
        throw ValidationError("no scores for model '" + model_b + "', metric '" + metric + "'");
    }
    std::vector<CompareEntry> out;
    for (const ConceptId& node : nodes) {
        const std::vector<ConceptId> ids = subtree(tax, node);
        const std::set<ConceptId> wanted(ids.begin(), ids.end());
        CompareEntry entry;
        entry.node = node;
        double sum_a = 0.0, sum_b = 0.0;
        std::size_t n = 0;
        for (const CaptionRecord& r : records) {
            const std::optional<double> a = table.value(r.caption_id, model_a, metric);
            const std::optional<double> b = table.value(r.caption_id, model_b, metric);
            if (!a || !b) continue;
            bool contains = false;
            for (const ConceptId& c : detail::graph_concepts(r)) {
                if (wanted.count(c)) { contains = true; break; }
            }
            if (!contains) continue;
            sum_a += *a;
            sum_b += *b;
            ++n;
        }
        entry.n = n;
        if (n == 0) {
            entry.no_coverage = true;
        } else {
            entry.mean_a = sum_a / static_cast<double>(n);
            entry.mean_b = sum_b / static_cast<double>(n);
            entry.delta = entry.mean_a - entry.mean_b;
        }
        out.push_back(std::move(entry));
    }
    return out;
}

struct GapEntry {
    ConceptId concept_id;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double gap = 0.0;  // mean_b - mean_a
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

struct GapResult {
    std::vector<GapEntry> entries;
    std::size_t eligible = 0;
    bool shortfall = false;  // fewer than k concepts were eligible
};

// Concepts where the reference model (b) outscores model a by the most.
// Eligibility needs min_support scored captions per model; ties break on
// concept id ascending.
inline GapResult gap_ranking(const ScoreTable& table, const std::vector<CaptionRecord>& records,
                             const Taxonomy& tax, const std::string& model_a,
                             const std::string& model_b, const std::string& metric, std::size_t k,
                             std::size_t min_support = 5) {
    if (k < 1) throw ValidationError("gap ranking needs k >= 1");
    const std::map<ConceptId, MeanN> scores_a = concept_scores(table, records, model_a, metric);
    const std::map<ConceptId, MeanN> scores_b = concept_scores(table, records, model_b, metric);

    GapResult result;
    for (const auto& [cid, a] : scores_a) {
        tax.node(cid);  // concepts must exist in the taxonomy
        auto bit = scores_b.find(cid);
        if (bit == scores_b.end()) continue;
        if (a.n < min_support || bit->second.n < min_support) continue;
        GapEntry entry;
        entry.concept_id = cid;
        entry.mean_a = a.mean;
        entry.mean_b = bit->second.mean;
        entry.gap = entry.mean_b - entry.mean_a;
        entry.n_a = a.n;
        entry.n_b = bit->second.n;
        result.entries.push_back(std::move(entry));
    }
    result.eligible = result.entries.size();
    std::sort(result.entries.begin(), result.entries.end(),
              [](const GapEntry& x, const GapEntry& y) {
                  if (x.gap != y.gap) return x.gap > y.gap;
                  return x.concept_id < y.concept_id;
              });
    if (result.entries.size() > k) {
        result.entries.resize(k);
    } else if (result.entries.size() < k) {
        result.shortfall = true;
    }
    return result;
}

struct PercentileBucket {
    double pct_lo = 0.0;
    double pct_hi = 0.0;
    double value_lo = 0.0;   // property values covered by this bucket
    double value_hi = 0.0;
    double mean_score = 0.0;
    std::size_t n = 0;
    bool empty = false;
};

// Buckets scored records by nearest-rank percentile thresholds of the
// property: bucket i covers values in (t_{i-1}, t_i] with the first bucket
// taking everything at or below t_1. With constant property values every
// record lands in bucket one and the rest are flagged empty.
inline std::vector<PercentileBucket> percentile_buckets(const std::vector<CaptionRecord>& records,
                                                        const ScoreTable& table,
                                                        const std::string& model,
                                                        const std::string& metric,
                                                        const std::string& property,
                                                        int n_buckets) {
    if (n_buckets < 1) throw ValidationError("need at least one bucket");
    struct Item {
        double value;
        double score;
        const std::string* caption;
    };
    std::vector<Item> items;
    for (const CaptionRecord& r : records) {
        const std::optional<double> score = table.value(r.caption_id, model, metric);
        if (!score) continue;
        auto it = r.properties.find(property);
        if (it == r.properties.end()) {
            throw ValidationError("record '" + r.caption_id + "' lacks property '" + property + "'");
        }
        items.push_back({it->second, *score, &r.caption_id});
    }
    if (items.empty()) {
        throw ValidationError("no scores for model '" + model + "', metric '" + metric + "'");
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.value != b.value) return a.value < b.value;
        return *a.caption < *b.caption;
    });
    std::vector<double> values;
    values.reserve(items.size());
    for (const Item& i : items) values.push_back(i.value);

    std::vector<PercentileBucket> buckets(static_cast<std::size_t>(n_buckets));
    std::vector<double> thresholds;
    for (int i = 1; i <= n_buckets; ++i) {
        thresholds.push_back(
            nearest_rank_percentile(values, 100.0 * static_cast<double>(i) / n_buckets));
    }
    for (int i = 0; i < n_buckets; ++i) {
        auto& b = buckets[static_cast<std::size_t>(i)];
        b.pct_lo = 100.0 * static_cast<double>(i) / n_buckets;
        b.pct_hi = 100.0 * static_cast<double>(i + 1) / n_buckets;
        b.value_hi = thresholds[static_cast<std::size_t>(i)];
        b.value_lo = (i == 0) ? values.front() : thresholds[static_cast<std::size_t>(i - 1)];
    }
    for (const Item& item : items) {
        int target = 0;
        while (target < n_buckets - 1 &&
               item.value > thresholds[static_cast<std::size_t>(target)]) {
            ++target;
        }
        auto& b = buckets[static_cast<std::size_t>(target)];
        b.mean_score += item.score;
        ++b.n;
    }
    for (auto& b : buckets) {
        if (b.n == 0) {
            b.empty = true;
        } else {
            b.mean_score /= static_cast<double>(b.n);
        }
    }
    return buckets;
}

// ---------------------------------------------------------------------------
// Selection strategies
// ---------------------------------------------------------------------------

struct Candidate {
    std::string candidate_id;
    double score = 0.0;
};

// Highest score wins; ties go to the lowest candidate id.
inline std::map<std::string, std::string> select_best_per_group(
    const std::map<std::string, std::vector<Candidate>>& groups) {
    std::map<std::string, std::string> out;
    for (const auto& [caption_id, candidates] : groups) {
        if (candidates.empty()) {
            throw ValidationError("empty candidate group for caption '" + caption_id + "'");
        }
        const Candidate* best = &candidates.front();
        for (const Candidate& c : candidates) {
            if (c.score > best->score ||
                (c.score == best->score && c.candidate_id < best->candidate_id)) {
                best = &c;
            }
        }
        out[caption_id] = best->candidate_id;
    }
    return out;
}

struct ScoredRecord {
    std::string caption_id;
    double score = 0.0;
};

// Keeps the floor(fraction * N) highest-scoring records (at least one), ties
// at the cut broken by caption id ascending; output is sorted by score
// descending.
inline std::vector<ScoredRecord> select_top_fraction(std::vector<ScoredRecord> records,
                                                     double fraction) {
    if (records.empty()) throw ValidationError("select_top_fraction of empty input");
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ValidationError("fraction must be in (0, 1], got " + std::to_string(fraction));
    }
    std::size_t keep = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(records.size())));
    if (keep == 0) keep = 1;
    std::sort(records.begin(), records.end(), [](const ScoredRecord& a, const ScoredRecord& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.caption_id < b.caption_id;
    });
    records.resize(keep);
    return records;
}

// ---------------------------------------------------------------------------
// CSV emission for external plotting
// ---------------------------------------------------------------------------

inline std::string rollup_csv(const std::vector<std::pair<ConceptId, MeanN>>& rows) {
    std::string out = "node,mean,n\n";
    for (const auto& [node, mn] : rows) {
        out += node + "," + std::to_string(mn.mean) + "," + std::to_string(mn.n) + "\n";
    }
    return out;
}

inline std::string compare_csv(const std::vector<CompareEntry>& rows) {
    std::string out = "node,mean_a,mean_b,delta,n,no_coverage\n";
    for (const CompareEntry& e : rows) {
        if (e.no_coverage) {
            out += e.node + ",,,," + std::to_string(e.n) + ",true\n";
        } else {
            out += e.node + "," + std::to_string(e.mean_a) + "," + std::to_string(e.mean_b) + "," +
                   std::to_string(e.delta) + "," + std::to_string(e.n) + ",false\n";
        }
    }
    return out;
}

inline std::string gaps_csv(const GapResult& result) {
    std::string out = "concept,mean_a,mean_b,gap,n_a,n_b\n";
    for (const GapEntry& e : result.entries) {
        out += e.concept_id + "," + std::to_string(e.mean_a) + "," + std::to_string(e.mean_b) + "," +
               std::to_string(e.gap) + "," + std::to_string(e.n_a) + "," + std::to_string(e.n_b) +
               "\n";
    }
    return out;
}

inline std::string buckets_csv(const std::vector<PercentileBucket>& buckets) {
    std::string out = "bucket,pct_lo,pct_hi,value_lo,value_hi,mean_score,n\n";
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        const PercentileBucket& b = buckets[i];
        out += std::to_string(i + 1) + "," + std::to_string(b.pct_lo) + "," +
               std::to_string(b.pct_hi) + "," + std::to_string(b.value_lo) + "," +
               std::to_string(b.value_hi) + ",";
        out += b.empty ? "" : std::to_string(b.mean_score);
        out += "," + std::to_string(b.n) + "\n";
    }
    return out;
}

}  // namespace sgf
