// microact: batch front end for the micro-activity decomposition pipeline.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
// Diagnostics go to stderr; data goes to files or stdout.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <microact/http.hpp>
#include <microact/microact.hpp>

namespace {

using namespace microact;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::string quote_csv(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string profile;
    std::vector<std::string> overrides;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--profile", opts.profile, "config profile: kitchen, lara or custom");
    cmd->add_option("--set", opts.overrides,
                    "config override key=value (repeatable); see the train help for keys");
    cmd->add_option("--threads", opts.threads, "cap internal parallelism (config key: threads)");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
    std::map<std::string, std::string> entries;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw IoError("cannot open " + opts.config_path);
        entries = read_config_entries(in, opts.config_path);
    }
    if (!opts.profile.empty()) entries["profile"] = opts.profile;
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: --set expects key=value, got '" + kv + "'");
        entries[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto config = parse_config(entries);
    if (opts.threads >= 0) config.threads = static_cast<unsigned>(opts.threads);
    return config;
}

AttributeSchema resolve_schema(const PipelineConfig& config) {
    if (config.schema_name == "verb" || config.schema_name == "lara")
        return builtin_schema(config.schema_name);
    return load_schema(config.schema_name);
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path == "-" || path.empty()) return std::cout;
    file.open(path);
    if (!file) throw IoError("cannot write " + path);
    return file;
}

// ---------------------------------------------------------------- synth ----

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    SynthSpec spec;
    try {
        spec.n_units = doc.value("n_units", spec.n_units);
        spec.rate_hz = doc.value("rate_hz", spec.rate_hz);
        spec.noise_sigma = doc.value("noise_sigma", spec.noise_sigma);
        spec.seed = doc.value("seed", spec.seed);
        spec.atomic_repeats = doc.value("atomic_repeats", spec.atomic_repeats);
        spec.atomic_duration_s = doc.value("atomic_duration_s", spec.atomic_duration_s);
        for (const auto& m : doc.at("library")) {
            SynthMicro micro;
            micro.name = m.at("name").get<std::string>();
            for (const auto& v : m.at("attributes")) micro.attributes.values.push_back(v.get<int>());
            for (const auto& r : m.at("per_unit")) {
                SynthRegime regime;
                regime.mean = r.value("mean", 0.0);
                regime.osc_amplitude = r.value("osc_amplitude", 0.0);
                regime.osc_freq_hz = r.value("osc_freq_hz", 0.0);
                micro.per_unit.push_back(regime);
            }
            spec.library.push_back(std::move(micro));
        }
        for (const auto& s : doc.at("scripts")) {
            SynthScript script;
            script.name = s.at("name").get<std::string>();
            for (const auto& item : s.at("items"))
                script.items.push_back({item.at("micro").get<std::string>(),
                                        item.at("duration_s").get<double>()});
            spec.scripts.push_back(std::move(script));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return spec;
}

void write_synth_dir(const SynthSpec& spec, const SynthResult& synth, const fs::path& dir) {
    fs::create_directories(dir);
    const auto& stream = synth.recording.stream;

    ordered_json meta;
    meta["subject_id"] = synth.recording.subject_id;
    meta["units"] = stream.units;
    meta["native_rate_hz"] = stream.rate_hz;
    std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';

    const auto step_us = static_cast<std::int64_t>(std::llround(1e6 / stream.rate_hz));
    for (std::size_t u = 0; u < stream.units.size(); ++u) {
        std::ofstream csv(dir / (stream.units[u] + ".csv"));
        csv << "timestamp_us,ax,ay,az\n";
        for (Eigen::Index i = 0; i < stream.data.rows(); ++i) {
            csv << i * step_us;
            for (int axis = 0; axis < 3; ++axis)
                csv << ',' << fmt(stream.data(i, static_cast<Eigen::Index>(3 * u) + axis));
            csv << '\n';
        }
    }

    std::ofstream labels(dir / "labels.csv");
    labels << "label,start_s,end_s\n";
    for (const auto& iv : synth.recording.intervals)
        labels << iv.label << ',' << fmt(iv.start_s) << ',' << fmt(iv.end_s) << '\n';

    std::ofstream attrs(dir / "attributes.csv");
    attrs << "label,attributes\n";
    for (const auto& [label, vec] : spec.label_attributes())
        attrs << label << ',' << serialize_attribute_vector(vec) << '\n';

    std::ofstream truth(dir / "truth.csv");
    truth << "interval,seg_start_s,seg_end_s,attributes\n";
    for (const auto& t : synth.truth)
        for (const auto& seg : t.segments)
            truth << t.interval_index << ',' << fmt(seg.start_s) << ',' << fmt(seg.end_s) << ','
                  << quote_csv(serialize_attribute_vector(seg.attributes)) << '\n';
}

// ---------------------------------------------------------------- train ----

std::map<std::string, AttributeVector> load_label_attributes(const fs::path& path,
                                                             const AttributeSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::map<std::string, AttributeVector> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "label,attributes") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'label,v1,...,vN'");
        const std::string label = line.substr(0, comma);
        try {
            out[label] = parse_attribute_string(schema, line.substr(comma + 1));
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError(path.string() + ": no attribute rows");
    return out;
}

// ------------------------------------------------------------ decompose ----

void write_report_csv(const std::vector<MicroActivityReport>& reports, std::ostream& out) {
    out << "subject,macro_label,seg_start_s,seg_end_s,attr_csv,top_verbs\n";
    for (const auto& r : reports)
        for (const auto& seg : r.segments) {
            std::string verbs;
            for (const auto& m : seg.verb_matches) {
                if (!verbs.empty()) verbs += "; ";
                verbs += m.verb + " (" + m.template_text + ")";
            }
            out << r.subject_id << ',' << r.macro_label << ',' << fmt(seg.start_s) << ','
                << fmt(seg.end_s) << ',' << quote_csv(serialize_attribute_vector(seg.attributes))
                << ',' << quote_csv(verbs) << '\n';
        }
}

ordered_json report_json(const std::vector<MicroActivityReport>& reports) {
    ordered_json doc = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json entry;
        entry["subject"] = r.subject_id;
        entry["macro_label"] = r.macro_label;
        entry["interval"] = {{"start_s", r.interval.start_s}, {"end_s", r.interval.end_s}};
        entry["single_segment"] = r.single_segment_flag;
        entry["segments"] = ordered_json::array();
        for (const auto& seg : r.segments) {
            ordered_json s;
            s["start_s"] = seg.start_s;
            s["end_s"] = seg.end_s;
            s["attributes"] = seg.attributes.values;
            s["top_verbs"] = ordered_json::array();
            for (const auto& m : seg.verb_matches)
                s["top_verbs"].push_back({{"rank", m.rank},
                                          {"verb", m.verb},
                                          {"template", m.template_text},
                                          {"distance", m.distance}});
            entry["segments"].push_back(std::move(s));
        }
        doc.push_back(std::move(entry));
    }
    return doc;
}

// The config keys each subcommand consults, surfaced in --help.
const char* kTrainKeys =
    "Config keys: profile, threshold_T, resample_window, feature_window, keep_partial_window, "
    "reducer.kind, reducer.d, reducer.n_neighbors, reducer.seed, classifier.kind, "
    "classifier.n_trees, classifier.max_depth, classifier.seed, classifier.C, classifier.gamma, "
    "mode, schema, threads";
const char* kDecomposeKeys =
    "Config keys (baked into the model; overrides apply on top): cpd.algorithm, cpd.penalty, "
    "cpd.alpha, cpd.rulsif_window, cpd.rulsif_step, cpd.min_segment_length, top_k, mode, threads";
const char* kCpdKeys =
    "Config keys: cpd.algorithm, cpd.penalty, cpd.alpha, cpd.rulsif_window, cpd.rulsif_step, "
    "cpd.min_segment_length, threshold_T, schema";
const char* kEvalF1Keys =
    "Config keys: every train and decompose key (the benchmark is trained and decomposed "
    "in-process)";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"micro-activity decomposition for multi-unit inertial streams"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* resample = app.add_subcommand(
        "resample", "resample a recording directory onto one uniform time base\n"
                    "Config keys: resample_window");
    std::string in_dir, out_path = "-";
    resample->add_option("--in", in_dir, "recording directory")->required();
    resample->add_option("--out", out_path, "output CSV path, - for stdout");
    add_common(resample, common);

    auto* synth = app.add_subcommand(
        "synth", "generate a synthetic labeled recording with ground truth\n"
                 "Config keys: schema");
    std::string synth_spec = "demo", synth_out;
    std::uint64_t synth_seed = 0;
    double synth_noise = 0.1;
    int synth_scripts = 10;
    synth->add_option("--spec", synth_spec, "JSON spec path, or 'demo' for the benchmark");
    synth->add_option("--seed", synth_seed, "generator seed (demo spec)");
    synth->add_option("--noise", synth_noise, "noise sigma (demo spec)");
    synth->add_option("--scripts", synth_scripts, "number of macro scripts (demo spec)");
    synth->add_option("--out", synth_out, "output recording directory")->required();
    add_common(synth, common);

    auto* train = app.add_subcommand(
        "train", std::string("train the pipeline on recording directories\n") + kTrainKeys);
    std::vector<std::string> train_dirs;
    std::string attrs_path, model_out;
    train->add_option("--data", train_dirs, "recording directory (repeatable)")->required();
    train->add_option("--attrs", attrs_path, "label,v1,...,vN attribute file")->required();
    train->add_option("--out", model_out, "model output path")->required();
    add_common(train, common);

    auto* decompose_cmd = app.add_subcommand(
        "decompose", std::string("decompose long intervals of a recording\n") + kDecomposeKeys);
    std::string model_path, dec_dir, dec_out = "-", dec_json, corpus_arg = "demo";
    decompose_cmd->add_option("--model", model_path, "trained model path")->required();
    decompose_cmd->add_option("--data", dec_dir, "recording directory")->required();
    decompose_cmd->add_option("--out", dec_out, "report CSV path, - for stdout");
    decompose_cmd->add_option("--json", dec_json, "also write a JSON report here");
    decompose_cmd->add_option("--corpus", corpus_arg,
                              "verb corpus file, 'demo', or 'none'");
    add_common(decompose_cmd, common);

    auto* eval_cpd = app.add_subcommand(
        "eval-cpd", std::string("boundary metrics on the synthetic benchmark\n") + kCpdKeys);
    std::string algo_arg, cpd_out = "-";
    std::uint64_t cpd_seed = 0;
    double cpd_noise = 0.1;
    int cpd_scripts = 50;
    eval_cpd->add_option("--algo", algo_arg, "pelt, kernel or rulsif (default: config)");
    eval_cpd->add_option("--seed", cpd_seed, "benchmark seed");
    eval_cpd->add_option("--noise", cpd_noise, "benchmark noise sigma");
    eval_cpd->add_option("--scripts", cpd_scripts, "number of benchmark intervals");
    eval_cpd->add_option("--out", cpd_out, "metrics CSV path, - for stdout");
    add_common(eval_cpd, common);

    auto* eval_f1 = app.add_subcommand(
        "eval-f1", std::string("end-to-end attribute F1 on the synthetic benchmark\n") +
                       kEvalF1Keys);
    std::string f1_out = "-";
    std::uint64_t f1_seed = 0;
    double f1_noise = 0.1;
    int f1_scripts = 20;
    eval_f1->add_option("--seed", f1_seed, "benchmark seed");
    eval_f1->add_option("--noise", f1_noise, "benchmark noise sigma");
    eval_f1->add_option("--scripts", f1_scripts, "number of benchmark intervals");
    eval_f1->add_option("--out", f1_out, "metrics CSV path, - for stdout");
    add_common(eval_f1, common);

    auto* query = app.add_subcommand(
        "query", "render an attribute vector as a natural-language query\n"
                 "Config keys: schema");
    std::string attrs_arg, context_arg, phrases_path, post_url;
    query->add_option("--attrs", attrs_arg, "comma-separated attribute values")->required();
    query->add_option("--context", context_arg, "macro-activity context clause");
    query->add_option("--phrases", phrases_path, "phrase-map file (default: built-in)");
    query->add_option("--post", post_url, "POST the query to this URL and print the response");
    add_common(query, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        const auto config = resolve_config(common);

        if (resample->parsed()) {
            const auto rec = load_recording(in_dir, config.resample_window_s);
            std::ofstream file;
            write_synced_csv(rec.stream, open_output(out_path, file));
        } else if (synth->parsed()) {
            SynthSpec spec;
            if (synth_spec == "demo") {
                spec = make_benchmark_spec(resolve_schema(config), synth_scripts, synth_noise,
                                           synth_seed);
            } else {
                spec = load_synth_spec(synth_spec);
            }
            const auto result = synth_generate(spec);
            write_synth_dir(spec, result, synth_out);
            std::cerr << "wrote " << result.recording.intervals.size() << " intervals to "
                      << synth_out << '\n';
        } else if (train->parsed()) {
            const auto schema = resolve_schema(config);
            const auto labels = load_label_attributes(attrs_path, schema);
            std::vector<Recording> recordings;
            for (const auto& dir : train_dirs)
                recordings.push_back(load_recording(dir, config.resample_window_s));
            const auto [model, report] = train_pipeline(recordings, labels, schema, config);
            save_model(model, model_out);
            std::cerr << "trained on " << report.n_training_intervals << " atomic intervals ("
                      << report.rows_per_label.size() << " labels); "
                      << report.n_decompose_intervals << " intervals above T; "
                      << report.constant_attributes.size() << " constant attributes\n";
        } else if (decompose_cmd->parsed()) {
            auto model = load_model(model_path);
            for (const auto& kv : common.overrides) {
                const auto eq = kv.find('=');
                detail::apply_config_key(model.config, kv.substr(0, eq), kv.substr(eq + 1));
            }
            model.config.validate();
            const auto rec = load_recording(dec_dir, model.config.resample_window_s);
            const auto [training, long_intervals] = segregate(rec, model.config.threshold_T_s);

            VerbCorpus corpus;
            const VerbCorpus* corpus_ptr = nullptr;
            if (corpus_arg == "demo" && model.schema.dimension() == verb_schema().dimension()) {
                corpus = demo_verb_corpus();
                corpus_ptr = &corpus;
            } else if (corpus_arg != "demo" && corpus_arg != "none" && !corpus_arg.empty()) {
                corpus = load_corpus(corpus_arg, model.schema);
                corpus_ptr = &corpus;
            }

            std::vector<MicroActivityReport> reports;
            for (const auto& iv : long_intervals)
                reports.push_back(decompose(model, rec, iv, corpus_ptr));

            std::ofstream file;
            write_report_csv(reports, open_output(dec_out, file));
            if (!dec_json.empty()) std::ofstream(dec_json) << report_json(reports).dump(2) << '\n';
            std::cerr << "decomposed " << reports.size() << " intervals\n";
        } else if (eval_cpd->parsed()) {
            auto cfg = config;
            if (!algo_arg.empty()) detail::apply_config_key(cfg, "cpd.algorithm", algo_arg);
            const std::string algo_name = config_entries(cfg).at("cpd.algorithm");

            const auto spec =
                make_benchmark_spec(resolve_schema(cfg), cpd_scripts, cpd_noise, cpd_seed);
            const auto synth_result = synth_generate(spec);
            const Matrix mags = magnitude(synth_result.recording.stream);

            std::ofstream file;
            auto& out = open_output(cpd_out, file);
            out << "subject,interval_id,algorithm,AE,MAE_s\n";
            std::vector<double> maes;
            for (std::size_t i = 0; i < synth_result.recording.intervals.size(); ++i) {
                const auto& iv = synth_result.recording.intervals[i];
                if (iv.end_s - iv.start_s <= cfg.threshold_T_s) continue;
                const auto span =
                    detail::interval_samples(synth_result.recording.stream, iv);
                const auto seg =
                    detail::run_cpd(mags.middleRows(span.start, span.count), cfg);
                const auto& truth = synth_result.truth[i].segmentation;
                const auto ae = annotation_error(truth, seg);
                const auto mae = boundary_mae(truth, seg, spec.rate_hz);
                maes.push_back(mae.seconds);
                out << "synth," << i << ',' << algo_name << ',' << ae << ','
                    << fmt(mae.seconds) << '\n';
            }
            std::cerr << "median MAE: " << fmt(MetricsBundle::median(maes)) << " s over "
                      << maes.size() << " intervals\n";
        } else if (eval_f1->parsed()) {
            const auto schema = resolve_schema(config);
            const auto spec = make_benchmark_spec(schema, f1_scripts, f1_noise, f1_seed);
            const auto synth_result = synth_generate(spec);
            const auto [model, train_report] = train_pipeline(
                {synth_result.recording}, spec.label_attributes(), schema, config);

            std::vector<MicroActivityReport> reports;
            std::vector<TruthInterval> truths;
            for (std::size_t i = 0; i < synth_result.recording.intervals.size(); ++i) {
                const auto& iv = synth_result.recording.intervals[i];
                if (iv.end_s - iv.start_s <= config.threshold_T_s) continue;
                reports.push_back(decompose(model, synth_result.recording, iv));
                truths.push_back(synth_result.truth[i]);
            }
            const auto metrics = evaluate_run(reports, truths, schema, spec.rate_hz);

            std::ofstream file;
            auto& out = open_output(f1_out, file);
            out << "subject,interval_id,AE,MAE_s,micro_f1\n";
            for (std::size_t i = 0; i < metrics.per_interval.size(); ++i) {
                const auto& m = metrics.per_interval[i];
                out << m.subject_id << ',' << i << ',' << m.annotation_error << ','
                    << fmt(m.boundary_mae_s) << ',' << fmt(m.micro_f1) << '\n';
            }
            out << "aggregate,median," << fmt(metrics.median_ae()) << ','
                << fmt(metrics.median_mae()) << ',' << fmt(metrics.median_f1()) << '\n';
            out << "aggregate,overall,,," << fmt(metrics.overall_micro_f1) << '\n';
            std::cerr << "median micro-F1: " << fmt(metrics.median_f1()) << " over "
                      << metrics.per_interval.size() << " intervals\n";
        } else if (query->parsed()) {
            const auto schema = resolve_schema(config);
            const auto vector = parse_attribute_string(schema, attrs_arg);
            const auto phrases = phrases_path.empty()
                                     ? builtin_phrase_map(config.schema_name)
                                     : load_phrase_map(phrases_path, schema);
            const auto text = render_query(vector, schema, context_arg, phrases);
            std::cout << text << '\n';
            if (!post_url.empty()) {
                const auto result = post_query(post_url, text);
                if (!result.ok) {
                    std::cerr << "transport error: " << result.error << '\n';
                    return 2;
                }
                std::cout << result.body << '\n';
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
