#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "microact/changepoint.hpp"
#include "microact/dimreduce.hpp"
#include "microact/types.hpp"
#include "microact/zeroshot.hpp"

namespace microact {

enum class PipelineMode { consistent, paper_faithful };
enum class Profile { kitchen, lara, custom };

struct PipelineConfig {
    Profile profile = Profile::kitchen;
    double threshold_T_s = 10.0;
    double resample_window_s = 0.010;
    double feature_window_s = 1.0;
    bool keep_partial_window = false;
    ReducerSpec reducer;
    ClassifierSpec classifier;
    CpdConfig cpd;
    int top_k = 5;
    PipelineMode mode = PipelineMode::consistent;
    std::string schema_name = "verb"; // built-in name or a schema file path
    unsigned threads = 1;

    void validate() const {
        if (threshold_T_s <= 0.0) throw ValidationError("config: threshold_T must be positive");
        if (resample_window_s <= 0.0)
            throw ValidationError("config: resample_window must be positive");
        if (feature_window_s <= 0.0)
            throw ValidationError("config: feature_window must be positive");
        if (top_k < 1) throw ValidationError("config: top_k must be >= 1");
        reducer.validate();
        cpd.validate();
    }
};

inline PipelineConfig profile_defaults(Profile p) {
    PipelineConfig c;
    c.profile = p;
    switch (p) {
    case Profile::kitchen:
        c.threshold_T_s = 10.0;
        c.cpd.penalty = 100.0;
        c.classifier.kind = ClassifierKind::random_forest;
        c.classifier.forest = {100, 34, 0};
        c.schema_name = "verb";
        break;
    case Profile::lara:
        c.threshold_T_s = 15.0;
        c.cpd.penalty = 50.0;
        c.classifier.kind = ClassifierKind::svm_rbf;
        c.schema_name = "lara";
        break;
    case Profile::custom:
        break;
    }
    return c;
}

namespace detail {

inline void apply_config_key(PipelineConfig& c, const std::string& key,
                             const std::string& value) {
    auto as_double = [&] {
        try {
            return std::stod(value);
        } catch (const std::exception&) {
            throw ValidationError("config: bad numeric value for '" + key + "': " + value);
        }
    };
    auto as_int = [&] {
        try {
            return std::stoll(value);
        } catch (const std::exception&) {
            throw ValidationError("config: bad integer value for '" + key + "': " + value);
        }
    };

    if (key == "profile") {
        // handled by the loader before other keys
    } else if (key == "threshold_T") {
        c.threshold_T_s = as_double();
    } else if (key == "resample_window") {
        c.resample_window_s = as_double();
    } else if (key == "feature_window") {
        c.feature_window_s = as_double();
    } else if (key == "keep_partial_window") {
        c.keep_partial_window = value == "true" || value == "1";
    } else if (key == "reducer.kind") {
        if (value == "variance_linear")
            c.reducer.kind = ReducerKind::variance_linear;
        else if (value == "neighbor_manifold")
            c.reducer.kind = ReducerKind::neighbor_manifold;
        else
            throw ValidationError("config: unknown reducer.kind '" + value + "'");
    } else if (key == "reducer.d") {
        c.reducer.target_dim = as_int();
    } else if (key == "reducer.n_neighbors") {
        c.reducer.n_neighbors = as_int();
    } else if (key == "reducer.seed") {
        c.reducer.seed = static_cast<std::uint64_t>(as_int());
    } else if (key == "classifier.kind") {
        if (value == "random_forest")
            c.classifier.kind = ClassifierKind::random_forest;
        else if (value == "svm_rbf")
            c.classifier.kind = ClassifierKind::svm_rbf;
        else
            throw ValidationError("config: unknown classifier.kind '" + value + "'");
    } else if (key == "classifier.n_trees") {
        c.classifier.forest.n_trees = static_cast<int>(as_int());
    } else if (key == "classifier.max_depth") {
        c.classifier.forest.max_depth = static_cast<int>(as_int());
    } else if (key == "classifier.seed") {
        c.classifier.forest.seed = static_cast<std::uint64_t>(as_int());
    } else if (key == "classifier.C") {
        c.classifier.svm.C = as_double();
    } else if (key == "classifier.gamma") {
        c.classifier.svm.gamma = as_double();
    } else if (key == "cpd.algorithm") {
        if (value == "pelt")
            c.cpd.algorithm = CpdAlgorithm::pelt;
        else if (value == "kernel")
            c.cpd.algorithm = CpdAlgorithm::kernel;
        else if (value == "rulsif")
            c.cpd.algorithm = CpdAlgorithm::rulsif;
        else
            throw ValidationError("config: unknown cpd.algorithm '" + value + "'");
    } else if (key == "cpd.penalty") {
        c.cpd.penalty = as_double();
    } else if (key == "cpd.alpha") {
        c.cpd.alpha = as_double();
    } else if (key == "cpd.rulsif_window") {
        c.cpd.rulsif_window = as_int();
    } else if (key == "cpd.rulsif_step") {
        c.cpd.rulsif_step = as_int();
    } else if (key == "cpd.min_segment_length") {
        c.cpd.min_segment_length = as_int();
    } else if (key == "top_k") {
        c.top_k = static_cast<int>(as_int());
    } else if (key == "mode") {
        if (value == "consistent")
            c.mode = PipelineMode::consistent;
        else if (value == "paper_faithful")
            c.mode = PipelineMode::paper_faithful;
        else
            throw ValidationError("config: unknown mode '" + value + "'");
    } else if (key == "schema") {
        c.schema_name = value;
    } else if (key == "threads") {
        c.threads = static_cast<unsigned>(as_int());
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

} // namespace detail

inline Profile parse_profile(const std::string& name) {
    if (name == "kitchen") return Profile::kitchen;
    if (name == "lara") return Profile::lara;
    if (name == "custom") return Profile::custom;
    throw ValidationError("config: unknown profile '" + name + "'");
}

/// Flat key=value document. A `profile=` line loads that profile's defaults
/// first; later keys override. `#` starts a comment.
inline PipelineConfig parse_config(const std::map<std::string, std::string>& entries) {
    PipelineConfig c;
    if (const auto it = entries.find("profile"); it != entries.end())
        c = profile_defaults(parse_profile(it->second));
    for (const auto& [key, value] : entries)
        detail::apply_config_key(c, key, value);
    c.validate();
    return c;
}

inline std::map<std::string, std::string> read_config_entries(std::istream& in,
                                                              const std::string& origin) {
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line = line.substr(start);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected key=value");
        entries[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return entries;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_config(read_config_entries(in, path.string()));
}

/// Serialize every key so a config round-trips through parse_config.
inline std::map<std::string, std::string> config_entries(const PipelineConfig& c) {
    std::map<std::string, std::string> out;
    auto num = [](double v) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v;
        return ss.str();
    };
    out["profile"] = c.profile == Profile::kitchen ? "kitchen"
                     : c.profile == Profile::lara  ? "lara"
                                                   : "custom";
    out["threshold_T"] = num(c.threshold_T_s);
    out["resample_window"] = num(c.resample_window_s);
    out["feature_window"] = num(c.feature_window_s);
    out["keep_partial_window"] = c.keep_partial_window ? "true" : "false";
    out["reducer.kind"] = c.reducer.kind == ReducerKind::variance_linear ? "variance_linear"
                                                                         : "neighbor_manifold";
    out["reducer.d"] = std::to_string(c.reducer.target_dim);
    out["reducer.n_neighbors"] = std::to_string(c.reducer.n_neighbors);
    out["reducer.seed"] = std::to_string(c.reducer.seed);
    out["classifier.kind"] =
        c.classifier.kind == ClassifierKind::random_forest ? "random_forest" : "svm_rbf";
    out["classifier.n_trees"] = std::to_string(c.classifier.forest.n_trees);
    out["classifier.max_depth"] = std::to_string(c.classifier.forest.max_depth);
    out["classifier.seed"] = std::to_string(c.classifier.forest.seed);
    out["classifier.C"] = num(c.classifier.svm.C);
    out["classifier.gamma"] = num(c.classifier.svm.gamma);
    out["cpd.algorithm"] = c.cpd.algorithm == CpdAlgorithm::pelt     ? "pelt"
                           : c.cpd.algorithm == CpdAlgorithm::kernel ? "kernel"
                                                                     : "rulsif";
    out["cpd.penalty"] = num(c.cpd.penalty);
    out["cpd.alpha"] = num(c.cpd.alpha);
    out["cpd.rulsif_window"] = std::to_string(c.cpd.rulsif_window);
    out["cpd.rulsif_step"] = std::to_string(c.cpd.rulsif_step);
    out["cpd.min_segment_length"] = std::to_string(c.cpd.min_segment_length);
    out["top_k"] = std::to_string(c.top_k);
    out["mode"] = c.mode == PipelineMode::consistent ? "consistent" : "paper_faithful";
    out["schema"] = c.schema_name;
    out["threads"] = std::to_string(c.threads);
    return out;
}

} // namespace microact
