#include "gridsentry/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridsentry/classifiers.hpp"
#include "gridsentry/comtrade.hpp"
#include "gridsentry/dataset.hpp"
#include "gridsentry/event_sim.hpp"
#include "gridsentry/metrics.hpp"
#include "gridsentry/reports.hpp"
#include "gridsentry/stream.hpp"

namespace gridsentry {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

std::string out_file(const fs::path& dir, const std::string& name, bool force) {
    fs::path p = dir / name;
    if (!force && fs::exists(p))
        throw IoError(p.string() + " already exists (pass --force to overwrite)");
    return p.string();
}

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number: '" + text + "'");
    }
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        const auto pos = s.find(sep, begin);
        out.push_back(trimmed(s.substr(begin, pos - begin)));
        if (pos == std::string::npos) return out;
        begin = pos + 1;
    }
}

// ---------------------------------------------------------------- generate

struct GenerateSetup {
    GridConfig grid;
    AttackParams attacks;
    EventSchedule schedule;
};

// key = value lines plus repeatable "event = class, start, end" rows; '#'
// starts a comment. The file describes the grid model and the training
// schedule; the streaming benchmark schedule is fixed.
GenerateSetup parse_generate_config(const std::string& path, std::uint64_t seed) {
    GenerateSetup setup;
    setup.grid = benchmark_grid_config(seed);
    setup.schedule = training_benchmark_schedule();

    std::vector<ScheduledEvent> events;
    double duration = -1.0;
    std::istringstream lines(read_file(path));
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trimmed(raw);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key=value");
        const std::string key = trimmed(line.substr(0, eq));
        const std::string value = trimmed(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError(where + ": expected key=value");

        if (key == "event") {
            const auto fields = split_on(value, ',');
            if (fields.size() != 3)
                throw ParseError(where + ": event needs class,start,end");
            ScheduledEvent ev;
            const double cls = parse_number(fields[0], where);
            ev.class_id = static_cast<int>(cls);
            if (static_cast<double>(ev.class_id) != cls)
                throw ParseError(where + ": class id must be an integer");
            ev.start = parse_number(fields[1], where);
            ev.end = parse_number(fields[2], where);
            events.push_back(ev);
        } else if (key == "duration") {
            duration = parse_number(value, where);
        } else if (key == "line_frequency") {
            setup.grid.line_frequency = parse_number(value, where);
        } else if (key == "sample_rate") {
            setup.grid.sample_rate = parse_number(value, where);
        } else if (key == "nominal_voltage") {
            setup.grid.nominal_voltage = parse_number(value, where);
        } else if (key == "nominal_current") {
            setup.grid.nominal_current = parse_number(value, where);
        } else if (key == "noise_sigma") {
            setup.grid.noise_sigma = parse_number(value, where);
        } else if (key == "ct_ratio_factor") {
            setup.attacks.ct_ratio_factor = parse_number(value, where);
        } else if (key == "pt_ratio_factor") {
            setup.attacks.pt_ratio_factor = parse_number(value, where);
        } else if (key == "gps_shift") {
            setup.attacks.gps_shift = parse_number(value, where);
        } else if (key == "energization_current_pu") {
            setup.grid.energization.current_pu = parse_number(value, where);
        } else if (key == "energization_voltage_pu") {
            setup.grid.energization.voltage_pu = parse_number(value, where);
        } else if (key == "energization_tau") {
            setup.grid.energization.tau = parse_number(value, where);
        } else if (key == "energization_frequency") {
            setup.grid.energization.frequency = parse_number(value, where);
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }

    if (!events.empty()) {
        if (duration <= 0.0)
            throw ValidationError(path + ": event lines need a positive duration");
        setup.schedule.events = std::move(events);
        setup.schedule.duration = duration;
    } else if (duration > 0.0) {
        setup.schedule.duration = duration;
    }
    setup.grid.validate();
    setup.schedule.validate();
    setup.attacks.validate(setup.grid.line_frequency);
    return setup;
}

nlohmann::json grid_echo(const GridConfig& g, const AttackParams& a) {
    return {{"line_frequency", g.line_frequency},
            {"sample_rate", g.sample_rate},
            {"nominal_voltage", g.nominal_voltage},
            {"nominal_current", g.nominal_current},
            {"noise_sigma", g.noise_sigma},
            {"ct_ratio_factor", a.ct_ratio_factor},
            {"pt_ratio_factor", a.pt_ratio_factor},
            {"gps_shift", a.gps_shift},
            {"energization_current_pu", g.energization.current_pu},
            {"energization_voltage_pu", g.energization.voltage_pu}};
}

void write_schedule_csv(const std::string& path, const EventSchedule& schedule) {
    std::ostringstream out;
    out << "class_id,start,end\n";
    for (const auto& ev : schedule.events)
        out << ev.class_id << ',' << format_double(ev.start) << ','
            << format_double(ev.end) << '\n';
    write_file(path, out.str());
}

EventSchedule read_schedule_csv(const std::string& path) {
    std::istringstream lines(read_file(path));
    std::string line;
    if (!std::getline(lines, line) || trimmed(line) != "class_id,start,end")
        throw ParseError(path + ": expected header class_id,start,end");
    EventSchedule schedule;
    int line_no = 1;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto fields = split_on(trimmed(line), ',');
        if (fields.size() != 3) throw ParseError(where + ": expected class_id,start,end");
        ScheduledEvent ev;
        ev.class_id = static_cast<int>(parse_number(fields[0], where));
        ev.start = parse_number(fields[1], where);
        ev.end = parse_number(fields[2], where);
        schedule.events.push_back(ev);
        schedule.duration = std::max(schedule.duration, ev.end);
    }
    return schedule;
}

struct GenerateArgs {
    std::string out;
    std::string config;
    std::string format = "ascii";
    std::uint64_t seed = 0;
    bool force = false;
};

int cmd_generate(const GenerateArgs& args) {
    const auto t0 = Clock::now();
    const DatFormat format =
        args.format == "binary" ? DatFormat::binary16 : DatFormat::ascii;
    const fs::path dir = prepare_out_dir(args.out);

    BenchmarkPair pair;
    nlohmann::json config_echo;
    if (args.config.empty()) {
        pair = make_benchmark_pair(args.seed);
        config_echo = grid_echo(benchmark_grid_config(args.seed), AttackParams{});
        config_echo["source"] = "benchmark";
    } else {
        GenerateSetup setup = parse_generate_config(args.config, args.seed);
        pair.training = synthesize(setup.grid, setup.schedule, setup.attacks);
        // Custom configs keep the capture chain the config describes; the
        // drifted acquisition chain is a property of the stock benchmark.
        GridConfig stream_grid = setup.grid;
        stream_grid.seed = args.seed + 1;
        pair.streaming =
            synthesize(stream_grid, streaming_benchmark_schedule(), setup.attacks);
        config_echo = grid_echo(setup.grid, setup.attacks);
        config_echo["source"] = fs::path(args.config).filename().string();
    }

    RunManifest manifest;
    manifest.set("command", "generate");
    manifest.set("seed", args.seed);
    manifest.set("format", args.format);
    manifest.set("config", config_echo);

    const auto emit = [&](const char* prefix, const GeneratedRecord& gen) {
        const std::string base(prefix);
        const std::string cfg_path = out_file(dir, base + ".cfg", args.force);
        const std::string dat_path = out_file(dir, base + ".dat", args.force);
        write_record_files(gen.record, format, cfg_path, dat_path);
        const std::string labels_path = out_file(dir, base + "_labels.csv", args.force);
        write_label_csv(labels_path, gen.labels);
        const std::string sched_path = out_file(dir, base + "_schedule.csv", args.force);
        write_schedule_csv(sched_path, gen.schedule);
        manifest.record_file(base + "_cfg", cfg_path);
        manifest.record_file(base + "_dat", dat_path);
        manifest.record_file(base + "_labels", labels_path);
        manifest.record_file(base + "_schedule", sched_path);
        std::cout << prefix << ": " << gen.record.sampling.total_samples << " samples, "
                  << gen.schedule.events.size() << " events\n";
    };
    emit("train", pair.training);
    emit("stream", pair.streaming);

    manifest.set_timing("generate_seconds", seconds_since(t0));
    write_file(out_file(dir, "manifest.json", args.force), manifest.render());
    std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string out;
    std::string models;
    std::uint64_t seed = 0;
    bool tune = false;
    bool force = false;
};

std::vector<ModelSpec> select_specs(const std::string& models_csv, std::uint64_t seed) {
    std::vector<ModelSpec> all = default_model_specs(seed);
    if (models_csv.empty()) return all;
    std::vector<ModelSpec> picked;
    for (const auto& name : split_on(models_csv, ',')) {
        if (name.empty()) continue;
        bool found = false;
        for (const auto& spec : all) {
            if (spec.kind != name) continue;
            picked.push_back(spec);
            found = true;
            break;
        }
        if (!found) {
            std::string known;
            for (const auto& kind : model_kinds()) known += kind + " ";
            throw ValidationError("unknown model '" + name + "' (known: " + known + ")");
        }
    }
    if (picked.empty()) throw ValidationError("no models selected");
    return picked;
}

int cmd_train(const TrainArgs& args) {
    const auto t0 = Clock::now();
    const std::vector<ModelSpec> specs = select_specs(args.models, args.seed);
    const fs::path data(args.data);
    const fs::path dir = prepare_out_dir(args.out);

    WaveformRecord record =
        read_record_files((data / "train.cfg").string(), (data / "train.dat").string());
    std::vector<int> labels = read_label_csv((data / "train_labels.csv").string());
    LabeledDataset ds = clean(record, labels);
    SplitDataset split = stratified_split(ds, 0.2, args.seed);
    Scaler scaler = Scaler::fit(split.train.features);
    const Matrix x_train = scaler.transform(split.train.features);
    const Matrix x_test = scaler.transform(split.test.features);
    const int k = ds.encoder.num_classes();
    for (std::size_t c : scaler.constant_columns)
        std::cerr << "note: feature '" << ds.feature_names[c] << "' is constant\n";

    std::cout << "training on " << split.train.size() << " samples, testing on "
              << split.test.size() << " (" << k << " classes)\n";

    RunManifest manifest;
    manifest.set("command", "train");
    manifest.set("seed", args.seed);
    manifest.set("tuned", args.tune);
    manifest.set("train_rows", split.train.size());
    manifest.set("test_rows", split.test.size());
    manifest.set("classes", ds.encoder.classes());

    std::vector<std::string> warnings;
    std::vector<OfflineReportRow> rows;
    nlohmann::json params_echo = nlohmann::json::object();
    nlohmann::json model_names = nlohmann::json::array();
    for (ModelSpec spec : specs) {
        if (args.tune) {
            const auto grid = default_tuning_grid(spec.kind);
            if (!grid.empty()) {
                GridSearchResult gs = grid_search(spec, grid, x_train, split.train.labels,
                                                  k, 3, args.seed, &warnings);
                spec = gs.best;
            }
        }
        const auto fit_start = Clock::now();
        auto model = fit_model(spec, x_train, split.train.labels, k, &warnings);
        const double fit_seconds = seconds_since(fit_start);
        const OfflineMetrics metrics =
            evaluate_offline(*model, x_test, split.test.labels, k);

        const std::string artifact_path =
            out_file(dir, "model_" + spec.kind + ".json", args.force);
        write_json_file(artifact_path,
                        save_model(*model, spec, ds.encoder, scaler, ds.feature_names));
        manifest.record_file("model_" + spec.kind, artifact_path);
        manifest.set_timing("fit_seconds_" + spec.kind, fit_seconds);
        params_echo[spec.kind] = spec.params;
        model_names.push_back(spec.kind);
        rows.push_back({spec.kind, metrics});
        std::cout << spec.kind << ": accuracy " << format_double(metrics.accuracy)
                  << ", f1 " << format_double(metrics.f1) << " ("
                  << format_double(fit_seconds) << "s)\n";
    }
    manifest.set("models", model_names);
    manifest.set("params", params_echo);

    const std::string report_path = out_file(dir, "offline_report.csv", args.force);
    write_file(report_path, render_offline_report_csv(rows));
    manifest.record_file("offline_report", report_path);
    manifest.set_timing("total_seconds", seconds_since(t0));
    write_file(out_file(dir, "manifest.json", args.force), manifest.render());

    for (const auto& w : warnings) std::cerr << "note: " << w << "\n";
    std::cout << "wrote " << report_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ stream

struct StreamArgs {
    std::string artifact;
    std::string data;
    std::string out;
    double tau = 0.6;
    std::size_t n_cyc = 80;
    bool force = false;
};

int cmd_stream(const StreamArgs& args) {
    const auto t0 = Clock::now();
    const fs::path data(args.data);
    const fs::path dir = prepare_out_dir(args.out);

    LoadedModel loaded = load_model(nlohmann::json::parse(read_file(args.artifact)));
    const std::string kind = loaded.spec.kind;

    WaveformRecord record =
        read_record_files((data / "stream.cfg").string(), (data / "stream.dat").string());
    if (record.channels.size() != loaded.feature_names.size())
        throw ValidationError("stream record has " + std::to_string(record.channels.size()) +
                              " channels, the model expects " +
                              std::to_string(loaded.feature_names.size()));
    for (std::size_t c = 0; c < record.channels.size(); ++c)
        if (record.channels[c].name != loaded.feature_names[c])
            throw ValidationError("channel " + std::to_string(c + 1) + " is '" +
                                  record.channels[c].name + "', the model expects '" +
                                  loaded.feature_names[c] + "'");
    for (std::size_t r = 0; r < record.data.rows(); ++r)
        for (std::size_t c = 0; c < record.data.cols(); ++c)
            if (!std::isfinite(record.data(r, c)))
                throw ValidationError("non-finite sample at row " + std::to_string(r) +
                                      "; streaming needs every sample");

    StreamConfig config;
    config.n_cyc = args.n_cyc;
    config.tau = args.tau;
    config.validate();

    const Matrix x = loaded.scaler.transform(record.data);
    DecisionTrace trace = run_stream(*loaded.model, x, config);

    const std::string trace_path = out_file(dir, "trace_" + kind + ".csv", args.force);
    write_file(trace_path,
               render_trace_csv(trace.decisions, loaded.encoder,
                                record.sampling.sample_rate,
                                record.sampling.start_timestamp));

    RunManifest manifest;
    manifest.set("command", "stream");
    manifest.set("model", kind);
    manifest.set("tau", config.tau);
    manifest.set("n_cyc", config.n_cyc);
    manifest.record_file("trace", trace_path);

    std::cout << kind << ": " << trace.classified << "/" << trace.total
              << " classified, mean inference+update "
              << format_double(trace.latency.mean_us) << " us\n";

    const fs::path labels_path = data / "stream_labels.csv";
    if (fs::exists(labels_path)) {
        const std::vector<int> raw = read_label_csv(labels_path.string());
        if (raw.size() != record.data.rows())
            throw ValidationError("stream labels: " + std::to_string(raw.size()) +
                                  " rows for " + std::to_string(record.data.rows()) +
                                  " samples");
        std::vector<int> truth(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) truth[i] = loaded.encoder.encode(raw[i]);
        const int normal = loaded.encoder.encode(0);

        StreamReport report;
        report.model = kind;
        report.config = config;
        report.latency = trace.latency;
        report.all = score_stream(trace.decisions, truth, normal);
        report.steady = score_stream_window(trace.decisions, truth, trace.first_live,
                                            trace.last_live, normal);
        const fs::path schedule_path = data / "stream_schedule.csv";
        if (fs::exists(schedule_path)) {
            const EventSchedule schedule = read_schedule_csv(schedule_path.string());
            const double margin = static_cast<double>(config.n_cyc / 2) /
                                  record.sampling.sample_rate;
            report.events = per_event_scores(trace.decisions, schedule, loaded.encoder,
                                             record.sampling.sample_rate,
                                             record.sampling.start_timestamp, margin,
                                             margin);
        }
        const std::string metrics_path =
            out_file(dir, "stream_metrics_" + kind + ".json", args.force);
        write_json_file(metrics_path, stream_report_json(report));
        std::cout << "coverage " << format_double(report.all.coverage()) << ", accuracy "
                  << format_double(report.all.overall_accuracy()) << " overall / "
                  << format_double(report.all.anomaly_accuracy()) << " on anomalies\n";
    } else {
        std::cerr << "note: no stream_labels.csv next to the record; wrote the trace only\n";
    }

    manifest.set_timing("stream_seconds", seconds_since(t0));
    manifest.set_timing("mean_latency_us", trace.latency.mean_us);
    write_file(out_file(dir, "manifest_" + kind + ".json", args.force), manifest.render());
    return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
    std::string models_dir;
    std::string stream_dir;
    std::string out;
    bool force = false;
};

int cmd_report(const ReportArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);

    // model -> offline accuracy, from the training report
    const std::string report_path = (fs::path(args.models_dir) / "offline_report.csv").string();
    std::istringstream lines(read_file(report_path));
    std::string line;
    if (!std::getline(lines, line) ||
        trimmed(line).rfind("model,accuracy,", 0) != 0)
        throw ParseError(report_path + ": not an offline report");
    std::map<std::string, double> offline;
    while (std::getline(lines, line)) {
        if (trimmed(line).empty()) continue;
        const auto fields = split_on(trimmed(line), ',');
        if (fields.size() < 2) throw ParseError(report_path + ": malformed row '" + line + "'");
        offline[fields[0]] = parse_number(fields[1], report_path);
    }
    if (offline.empty()) throw ValidationError(report_path + ": no model rows");

    if (!fs::is_directory(args.stream_dir))
        throw IoError(args.stream_dir + " is not a directory");
    std::vector<GapReportRow> rows;
    for (const auto& entry : fs::directory_iterator(args.stream_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("stream_metrics_", 0) != 0 || entry.path().extension() != ".json")
            continue;
        const auto j = nlohmann::json::parse(read_file(entry.path().string()));
        const std::string model = j.at("model").get<std::string>();
        const auto it = offline.find(model);
        if (it == offline.end()) {
            std::cerr << "note: " << model << " has no offline row; skipped\n";
            continue;
        }
        StreamMetrics all;
        all.total = j.at("all").at("total").get<std::size_t>();
        all.classified = j.at("all").at("classified").get<std::size_t>();
        GapReportRow row;
        row.model = model;
        row.offline_accuracy = it->second;
        row.coverage = j.at("all").at("coverage").get<double>();
        row.steady_coverage = j.at("steady").at("coverage").get<double>();
        row.flagged = high_accuracy_low_coverage(it->second, all);
        rows.push_back(row);
    }
    if (rows.empty())
        throw ValidationError(args.stream_dir + ": no stream_metrics_*.json to report on");
    std::sort(rows.begin(), rows.end(),
              [](const GapReportRow& a, const GapReportRow& b) { return a.model < b.model; });

    write_file(out_file(dir, "gap_report.csv", args.force), render_gap_report_csv(rows));
    write_json_file(out_file(dir, "gap_report.json", args.force), gap_report_json(rows));
    for (const auto& r : rows)
        if (r.flagged)
            std::cout << r.model << ": strong offline ("
                      << format_double(r.offline_accuracy) << ") but only "
                      << format_double(r.coverage) << " coverage live\n";
    std::cout << "wrote " << (dir / "gap_report.csv").string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"gridsentry: streaming waveform anomaly classification"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand(
        "generate", "synthesize the train/stream record pair with labels");
    generate->add_option("--out", gen.out, "output directory")->required();
    generate->add_option("--seed", gen.seed, "master seed");
    generate->add_option("--config", gen.config,
                         "key=value grid/schedule description (default: benchmark)");
    generate->add_option("--format", gen.format, "dat payload encoding")
        ->check(CLI::IsMember({"ascii", "binary"}));
    generate->add_flag("--force", gen.force, "overwrite existing outputs");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "fit classifiers on a generated record");
    train->add_option("data", tr.data, "directory holding train.cfg/.dat/_labels.csv")
        ->required();
    train->add_option("--out", tr.out, "output directory")->required();
    train->add_option("--seed", tr.seed, "split/model seed");
    train->add_option("--models", tr.models, "comma-separated model kinds (default: all)");
    train->add_flag("--tune", tr.tune, "cross-validated grid search before the final fit");
    train->add_flag("--force", tr.force, "overwrite existing outputs");

    StreamArgs st;
    auto* stream = app.add_subcommand("stream", "replay a record through one artifact");
    stream->add_option("artifact", st.artifact, "model artifact JSON")->required();
    stream->add_option("data", st.data, "directory holding stream.cfg/.dat")->required();
    stream->add_option("--out", st.out, "output directory")->required();
    stream->add_option("--tau", st.tau, "confidence threshold");
    stream->add_option("--n-cyc", st.n_cyc, "smoothing window, samples");
    stream->add_flag("--force", st.force, "overwrite existing outputs");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "offline-vs-stream coverage gap table");
    report->add_option("models", rep.models_dir, "train output directory")->required();
    report->add_option("streams", rep.stream_dir, "stream output directory")->required();
    report->add_option("--out", rep.out, "output directory")->required();
    report->add_flag("--force", rep.force, "overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (train->parsed()) return cmd_train(tr);
        if (stream->parsed()) return cmd_stream(st);
        if (report->parsed()) return cmd_report(rep);
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace gridsentry
