#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "microact/ingest.hpp" // csv field splitting
#include "microact/types.hpp"
#include "microact/zeroshot.hpp"

namespace microact {

struct VerbEntry {
    std::string verb;
    std::string template_text; // contextual frame, e.g. "open <container>"
    AttributeVector vector;
};

struct VerbCorpus {
    std::vector<VerbEntry> entries;

    void validate(const AttributeSchema& schema) const {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& e : entries) {
            e.vector.validate(schema);
            if (!seen.insert({e.verb, e.template_text}).second)
                throw ValidationError("corpus: duplicate entry '" + e.verb + "' / '" +
                                      e.template_text + "'");
        }
    }
};

struct VerbMatch {
    std::string verb;
    std::string template_text;
    double distance = 0.0;
    int rank = 0; // 1-based
};

enum class DistanceMetric { euclidean, cosine };

inline double attribute_distance(const AttributeVector& a, const AttributeVector& b,
                                 DistanceMetric metric = DistanceMetric::euclidean) {
    double dot = 0.0, na = 0.0, nb = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
        const double x = a.values[j], y = b.values[j];
        dot += x * y;
        na += x * x;
        nb += y * y;
        sq += (x - y) * (x - y);
    }
    if (metric == DistanceMetric::euclidean) return std::sqrt(sq);
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

/// k smallest-distance corpus entries; ties broken lexicographically by verb
/// then template.
inline std::vector<VerbMatch> nearest_verbs(const VerbCorpus& corpus,
                                            const AttributeVector& query, int k,
                                            DistanceMetric metric = DistanceMetric::euclidean) {
    if (corpus.entries.empty()) throw ValidationError("nearest_verbs: empty corpus");
    if (k < 1) throw ValidationError("nearest_verbs: k must be >= 1");

    std::vector<std::pair<double, const VerbEntry*>> scored;
    scored.reserve(corpus.entries.size());
    for (const auto& e : corpus.entries) {
        if (e.vector.values.size() != query.values.size())
            throw ValidationError("nearest_verbs: schema mismatch");
        scored.emplace_back(attribute_distance(query, e.vector, metric), &e);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (a.second->verb != b.second->verb) return a.second->verb < b.second->verb;
        return a.second->template_text < b.second->template_text;
    });

    std::vector<VerbMatch> out;
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({scored[i].second->verb, scored[i].second->template_text, scored[i].first,
                       static_cast<int>(i) + 1});
    return out;
}

/// How often each verb lands in any query's top-k; the hubness diagnostic.
inline std::map<std::string, int> hub_scores(const VerbCorpus& corpus,
                                             const std::vector<AttributeVector>& queries, int k,
                                             DistanceMetric metric = DistanceMetric::euclidean) {
    std::map<std::string, int> counts;
    for (const auto& q : queries)
        for (const auto& m : nearest_verbs(corpus, q, k, metric)) ++counts[m.verb];
    return counts;
}

/// Parse "v1,v2,...,vN" against the schema; errors name the attribute.
inline AttributeVector parse_attribute_string(const AttributeSchema& schema,
                                              const std::string& csv) {
    const auto fields = detail::split_csv_line(csv);
    if (fields.size() != schema.dimension())
        throw ValidationError("attribute string: expected " +
                              std::to_string(schema.dimension()) + " values, got " +
                              std::to_string(fields.size()));
    AttributeVector out;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        try {
            std::size_t pos = 0;
            out.values.push_back(std::stoi(fields[j], &pos));
            if (pos != fields[j].size()) throw std::invalid_argument(fields[j]);
        } catch (const std::exception&) {
            throw ValidationError("attribute '" + schema.attributes[j].name +
                                  "': bad value '" + fields[j] + "'");
        }
    }
    out.validate(schema);
    return out;
}

inline std::string serialize_attribute_vector(const AttributeVector& v) {
    std::ostringstream out;
    for (std::size_t j = 0; j < v.values.size(); ++j) {
        if (j) out << ',';
        out << v.values[j];
    }
    return out.str();
}

/// Natural-language fragment per (attribute, value).
struct PhraseMap {
    std::map<std::pair<std::string, int>, std::string> fragments;

    const std::string& fragment(const std::string& attribute, int value) const {
        const auto it = fragments.find({attribute, value});
        if (it == fragments.end())
            throw ValidationError("phrase map: no fragment for " + attribute + "=" +
                                  std::to_string(value));
        return it->second;
    }

    void validate(const AttributeSchema& schema) const {
        for (const auto& a : schema.attributes)
            for (int v = 0; v < a.levels; ++v)
                if (!fragments.contains({a.name, v}))
                    throw ValidationError("phrase map: missing fragment for " + a.name + "=" +
                                          std::to_string(v));
    }
};

/// Deterministic query text: preamble + macro context + one fragment per
/// attribute value, comma-joined.
inline std::string render_query(const AttributeVector& vector, const AttributeSchema& schema,
                                const std::string& macro_context,
                                const PhraseMap& phrases) {
    vector.validate(schema);
    phrases.validate(schema);
    std::string out = "tell me an activity related verb which is done while " + macro_context +
                      " that";
    for (std::size_t j = 0; j < schema.dimension(); ++j) {
        out += j == 0 ? " " : ", ";
        out += phrases.fragment(schema.attributes[j].name, vector.values[j]);
    }
    out += ".";
    return out;
}

/// Corpus file: schema header line `schema,<name>` then records
/// `verb,template,v1,...,vN`.
inline VerbCorpus load_corpus(const std::filesystem::path& path,
                              const AttributeSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    VerbCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line.rfind("schema,", 0) != 0)
                throw ValidationError(path.string() + ":1: expected 'schema,<name>' header");
            continue;
        }
        const auto f = detail::split_csv_line(line);
        if (f.size() != schema.dimension() + 2)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(schema.dimension() + 2) +
                                  " fields");
        VerbEntry e;
        e.verb = f[0];
        e.template_text = f[1];
        std::string vec = f[2];
        for (std::size_t j = 3; j < f.size(); ++j) vec += "," + f[j];
        e.vector = parse_attribute_string(schema, vec);
        corpus.entries.push_back(std::move(e));
    }
    corpus.validate(schema);
    return corpus;
}

/// Phrase-map file: records `attribute,value,fragment`. Fragments may contain
/// commas; everything after the second field belongs to the fragment.
inline PhraseMap load_phrase_map(const std::filesystem::path& path,
                                 const AttributeSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    PhraseMap pm;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'attribute,value,fragment'");
        const std::string attr = line.substr(0, c1);
        const int value = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
        pm.fragments[{attr, value}] = line.substr(c2 + 1);
    }
    pm.validate(schema);
    return pm;
}

struct PostResult {
    bool ok = false;
    int status = 0;
    std::string body;
    std::string error;
};

/// Send a rendered query to a generic HTTP endpoint. Plumbing only; declared
/// here, defined in http.hpp to keep the socket dependency optional.
PostResult post_query(const std::string& endpoint_url, const std::string& query);

} // namespace microact
