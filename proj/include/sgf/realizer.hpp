// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgf/errors.hpp"
#include "sgf/sampler.hpp"
#include "sgf/strings.hpp"
#include "sgf/taxonomy.hpp"

namespace sgf {

// Per-subcategory phrase templates for the trailing scene-attribute
// sentence. One "{}" placeholder receives the entry lemma.
struct RealizationTemplates {
    std::map<std::string, std::string> formats;

    static RealizationTemplates defaults() {
        RealizationTemplates t;
        t.formats = {
            {"artist", "by {}"},
            {"genre", "in the {} genre"},
            {"painting_style", "in the style of {}"},
            {"painting_technique", "with {} technique"},
            {"camera_model", "shot on {}"},
            {"focal_length", "at {} focal length"},
            {"perspective", "from a {} perspective"},
            {"aperture", "at aperture {}"},
            {"depth_of_field", "with {} depth of field"},
            {"shot_scale", "in a {} shot"},
            {"location", "at {}"},
            {"weather", "in {} weather"},
            {"lighting", "under {} lighting"},
            {"camera_rig", "filmed with a {}"},
            {"camera_movement", "with {} camera movement"},
            {"video_editing_style", "edited in {} style"},
            {"temporal_span", "over {}"},
            {"threed_attribute", "rendered with {}"},
        };
        return t;
    }

    static RealizationTemplates from_json_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open template file: '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        RealizationTemplates t;
        for (const auto& [sub, fmt] : j.items()) {
            const std::string format = fmt.get<std::string>();
            if (format.find("{}") == std::string::npos) {
                throw ValidationError(path + ": template for '" + sub +
                                      "' lacks a {} placeholder");
            }
            t.formats[sub] = format;
        }
        return t;
    }

    std::string apply(const std::string& subcategory, const std::string& lemma) const {
        auto it = formats.find(subcategory);
        if (it == formats.end()) {
            throw ValidationError("no realization template for subcategory '" + subcategory + "'");
        }
        std::string out = it->second;
        out.replace(out.find("{}"), 2, lemma);
        return out;
    }
};

// ASCII vowel heuristic, no exception list; "an hour" comes out "a hour"
// and that is a documented limitation.
inline std::string article(std::string_view phrase) {
    if (phrase.empty()) throw ValidationError("article of empty phrase");
    const char c = phrase.front();
    const char lower = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    switch (lower) {
        case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
        default: return "a";
    }
}

namespace detail {

inline std::string ordinal_word(int k) {
    static const char* words[] = {"first",      "second",   "third",     "fourth",  "fifth",
                                  "sixth",      "seventh",  "eighth",    "ninth",   "tenth",
                                  "eleventh",   "twelfth",  "thirteenth", "fourteenth",
                                  "fifteenth",  "sixteenth", "seventeenth", "eighteenth",
                                  "nineteenth", "twentieth"};
    if (k >= 1 && k <= 20) return words[k - 1];
    // Numeric fallback past "twentieth".
    const int mod100 = k % 100;
    const int mod10 = k % 10;
    std::string suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        if (mod10 == 1) suffix = "st";
        else if (mod10 == 2) suffix = "nd";
        else if (mod10 == 3) suffix = "rd";
    }
    return std::to_string(k) + suffix;
}

}  // namespace detail

// Tracks which objects have been mentioned and assigns ordinals to objects
// whose lemma appears on two or more graph objects ("the first cat").
class MentionState {
public:
    MentionState(const SceneGraph& graph, const Taxonomy& tax) {
        lemmas_.reserve(graph.objects.size());
        std::map<std::string, int> lemma_count;
        for (const SceneObject& o : graph.objects) {
            const std::string& lemma = tax.node(o.concept_id).lemma;
            lemmas_.push_back(lemma);
            ++lemma_count[lemma];
        }
        ordinals_.assign(graph.objects.size(), 0);
        introduced_.assign(graph.objects.size(), false);
        std::map<std::string, int> next_ordinal;
        for (std::size_t i = 0; i < graph.objects.size(); ++i) {
            if (lemma_count[lemmas_[i]] >= 2) ordinals_[i] = ++next_ordinal[lemmas_[i]];
        }
        attributes_.reserve(graph.objects.size());
        for (const SceneObject& o : graph.objects) {
            std::vector<std::string> attrs;
            for (const ConceptId& a : o.attributes) attrs.push_back(tax.node(a).lemma);
            attributes_.push_back(std::move(attrs));
        }
    }

    bool introduced(int index) const { return introduced_[static_cast<std::size_t>(index)]; }

    // Renders the object's noun phrase and marks it introduced. Attributes
    // appear only on the first mention.
    std::string noun_phrase(int index) {
        const std::size_t i = static_cast<std::size_t>(index);
        const std::string& lemma = lemmas_[i];
        const int ordinal = ordinals_[i];
        std::string phrase;
        if (!introduced_[i]) {
            introduced_[i] = true;
            std::string attrs;
            for (const std::string& a : attributes_[i]) {
                attrs += a;
                attrs += ' ';
            }
            if (ordinal > 0) {
                phrase = "the " + detail::ordinal_word(ordinal) + " " + attrs + lemma;
            } else {
                const std::string rest = attrs + lemma;
                phrase = article(rest) + " " + rest;
            }
        } else {
            if (ordinal > 0) {
                phrase = "the " + detail::ordinal_word(ordinal) + " " + lemma;
            } else {
                phrase = "the " + lemma;
            }
        }
        return phrase;
    }

private:
    std::vector<std::string> lemmas_;
    std::vector<std::vector<std::string>> attributes_;
    std::vector<int> ordinals_;
    std::vector<bool> introduced_;
};

namespace detail {

inline std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

// Kahn topological order with smallest-index tie break.
inline std::vector<int> topological_order(const SceneGraph& g) {
    const int n = static_cast<int>(g.objects.size());
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (const SceneRelation& r : g.relations) {
        out[static_cast<std::size_t>(r.src)].push_back(r.dst);
        ++indegree[static_cast<std::size_t>(r.dst)];
    }
    std::set<int> ready;
    for (int i = 0; i < n; ++i) {
        if (indegree[static_cast<std::size_t>(i)] == 0) ready.insert(i);
    }
    std::vector<int> order;
    while (!ready.empty()) {
        const int u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        for (int v : out[static_cast<std::size_t>(u)]) {
            if (--indegree[static_cast<std::size_t>(v)] == 0) ready.insert(v);
        }
    }
    if (static_cast<int>(order.size()) != n) {
        throw InternalError("relation graph has a cycle at realization time");
    }
    return order;
}

}  // namespace detail

// Deterministic caption realization:
//   1. objects are processed in topological order (ties by index);
//   2. each object's outgoing edges emit "<NP(src)> is <phrase> <NP(dst)>."
//      ordered by the destination's topological position;
//   3. objects never mentioned by a relation clause get "There is <NP>." in
//      index order — objects already introduced are skipped;
//   4. scene attributes join into one final sentence from the template table.
inline std::string realize(const SceneGraph& graph, const SceneAttributeSet& scene_attrs,
                           const Taxonomy& tax,
                           const RealizationTemplates& templates = RealizationTemplates::defaults()) {
    const std::vector<int> order = detail::topological_order(graph);
    std::vector<int> position(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        position[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }

    MentionState state(graph, tax);
    std::vector<std::string> sentences;

    for (int u : order) {
        std::vector<const SceneRelation*> outgoing;
        for (const SceneRelation& r : graph.relations) {
            if (r.src == u) outgoing.push_back(&r);
        }
        std::sort(outgoing.begin(), outgoing.end(),
                  [&](const SceneRelation* a, const SceneRelation* b) {
                      return position[static_cast<std::size_t>(a->dst)] <
                             position[static_cast<std::size_t>(b->dst)];
                  });
        for (const SceneRelation* r : outgoing) {
            const std::string src_np = state.noun_phrase(r->src);
            const std::string dst_np = state.noun_phrase(r->dst);
            const std::string& phrase = tax.node(r->concept_id).lemma;
            sentences.push_back(detail::capitalize(src_np + " is " + phrase + " " + dst_np + "."));
        }
    }

    for (const SceneObject& o : graph.objects) {
        if (!state.introduced(o.index)) {
            sentences.push_back("There is " + state.noun_phrase(o.index) + ".");
        }
    }

    if (!scene_attrs.items.empty()) {
        std::vector<std::string> parts;
        for (const SceneAttribute& item : scene_attrs.items) {
            parts.push_back(templates.apply(item.subcategory, tax.node(item.concept_id).lemma));
        }
        sentences.push_back(detail::capitalize(join(parts, ", ") + "."));
    }

    return join(sentences, " ");
}

// ---------------------------------------------------------------------------
// Coverage checking (test support)
// ---------------------------------------------------------------------------

struct CoverageMiss {
    std::string lemma;
    int expected = 0;
    int found = 0;
};

struct CoverageReport {
    std::vector<CoverageMiss> misses;
    bool ok() const { return misses.empty(); }
};

namespace detail {

inline std::vector<std::string> caption_tokens(std::string_view caption) {
    std::vector<std::string> tokens;
    for (const std::string& raw : split(to_lower(caption), ' ')) {
        std::string t = raw;
        while (!t.empty() && (t.back() == '.' || t.back() == ',')) t.pop_back();
        while (!t.empty() && (t.front() == '.' || t.front() == ',')) t.erase(t.begin());
        if (!t.empty()) tokens.push_back(t);
    }
    return tokens;
}

inline int count_token_sequence(const std::vector<std::string>& tokens,
                                const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > tokens.size()) return 0;
    int count = 0;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (tokens[i + j] != needle[j]) { match = false; break; }
        }
        if (match) ++count;
    }
    return count;
}

}  // namespace detail

// Verifies every object lemma, attribute lemma and relation phrase of the
// graph occurs in the caption at least the expected number of times. An
// object is mentioned once per incident relation clause, or once standalone
// when isolated; attributes and relation phrases appear once per slot.
inline CoverageReport surface_coverage(const SceneGraph& graph, std::string_view caption,
                                       const Taxonomy& tax) {
    std::map<std::string, int> expected;
    std::vector<int> mentions(graph.objects.size(), 0);
    for (const SceneRelation& r : graph.relations) {
        ++mentions[static_cast<std::size_t>(r.src)];
        ++mentions[static_cast<std::size_t>(r.dst)];
        expected[to_lower(tax.node(r.concept_id).lemma)] += 1;
    }
    for (const SceneObject& o : graph.objects) {
        const int m = std::max(mentions[static_cast<std::size_t>(o.index)], 1);
        expected[to_lower(tax.node(o.concept_id).lemma)] += m;
        for (const ConceptId& a : o.attributes) {
            expected[to_lower(tax.node(a).lemma)] += 1;
        }
    }

    const std::vector<std::string> tokens = detail::caption_tokens(caption);
    CoverageReport report;
    for (const auto& [lemma, want] : expected) {
        const int got = detail::count_token_sequence(tokens, split(lemma, ' '));
        if (got < want) report.misses.push_back({lemma, want, got});
    }
    return report;
}

}  // namespace sgf
