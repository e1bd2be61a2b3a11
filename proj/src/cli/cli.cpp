#include "caseseg/cli.hpp"

#include "caseseg/detector.hpp"
#include "caseseg/eval.hpp"
#include "caseseg/ingest.hpp"
#include "caseseg/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace caseseg::cli {

namespace {

struct CsvOptions {
    std::string timestamp_col = "timestamp";
    std::string value_col = "value";
    std::string timestamp_format = "iso8601";
    std::string delimiter = ",";
    bool decimal_comma = false;

    CsvSpec spec() const {
        CsvSpec s;
        s.timestamp_column = timestamp_col;
        s.value_column = value_col;
        s.timestamp_format = parse_timestamp_format(timestamp_format);
        if (delimiter == "tab" || delimiter == "\\t") {
            s.delimiter = '\t';
        } else if (delimiter.size() == 1) {
            s.delimiter = delimiter[0];
        } else {
            throw ParameterError("delimiter must be a single character or 'tab'");
        }
        s.decimal_comma = decimal_comma;
        if (s.decimal_comma && s.delimiter == ',') {
            throw ParameterError("--locale-decimal-comma needs a delimiter other than ','");
        }
        return s;
    }
};

struct Options {
    std::vector<std::string> inputs;
    std::string output_dir = ".";
    std::string config;
    unsigned jobs = 1;
    CsvOptions csv;

    // detect
    double y_th = 10.3;
    std::size_t lwz_th = 100;
    std::size_t look_ahead = 30;
    double decrease_margin = 0.0;
    bool emit_partial_tail = false;
    std::string closure = "trough";
    bool increments = false;
    std::size_t snap_radius = 0;
    bool plot = false;

    // clean
    double cap = 300.0;

    // eval
    std::string labels;

    // synth
    std::size_t cycles = 5;
    std::size_t period = 3000;
    double peak = 250.0;
    std::size_t dwell = 200;
    double noise_sigma = 2.0;
    std::uint64_t seed = 42;
    std::size_t outliers = 0;
    double spike = 700.0;
    std::string name = "synthetic";

    DetectorParams detector_params() const {
        DetectorParams p;
        p.y_th = y_th;
        p.lwz_th = lwz_th;
        p.look_ahead = look_ahead;
        p.decrease_margin = decrease_margin;
        p.emit_partial_tail = emit_partial_tail;
        p.closure = parse_closure(closure);
        p.input_mode = increments ? InputMode::increments : InputMode::raw;
        p.snap_radius = snap_radius;
        p.validate();
        return p;
    }
};

void add_common(CLI::App* sub, Options& o, bool multi_input) {
    if (multi_input) {
        sub->add_option("--input,-i", o.inputs, "Input CSV file(s)")->required();
    } else {
        sub->add_option("--input,-i", o.inputs, "Input file")->required()->expected(1);
    }
    sub->add_option("--output-dir,-o", o.output_dir, "Directory for output files")
        ->capture_default_str();
    sub->add_option("--config", o.config,
                    "Flat JSON object of flag names to values (env CASESEG_CONFIG)");
}

void add_csv(CLI::App* sub, Options& o) {
    sub->add_option("--timestamp-col", o.csv.timestamp_col, "Timestamp column name or index")
        ->capture_default_str();
    sub->add_option("--value-col", o.csv.value_col, "Value column name or index")
        ->capture_default_str();
    sub->add_option("--timestamp-format", o.csv.timestamp_format, "table | iso8601 | epoch")
        ->capture_default_str();
    sub->add_option("--delimiter", o.csv.delimiter, "Field delimiter (one character or 'tab')")
        ->capture_default_str();
    sub->add_flag("--locale-decimal-comma", o.csv.decimal_comma, "Values use ',' as decimal mark");
    sub->add_option("--jobs,-j", o.jobs, "Process inputs concurrently")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

struct Failure {
    int code = exit_ok;
    std::string message;
};

// Calls fn and converts library exceptions into exit codes.
template <typename Fn>
Failure guarded(Fn&& fn) {
    try {
        fn();
        return {};
    } catch (const ParameterError& e) {
        return {exit_parameter_error, e.what()};
    } catch (const Error& e) {
        return {exit_input_error, e.what()};
    } catch (const fs::filesystem_error& e) {
        return {exit_input_error, e.what()};
    }
}

using OutputFiles = std::vector<std::pair<fs::path, std::string>>;

void write_files(const OutputFiles& files) {
    for (const auto& [path, body] : files) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << body;
        if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
}

std::vector<std::string> unique_stems(const std::vector<std::string>& inputs) {
    std::vector<std::string> stems;
    std::set<std::string> seen;
    for (const auto& in : inputs) {
        auto stem = fs::path(in).stem().string();
        if (!seen.insert(stem).second) {
            throw ParameterError("two inputs share the output name '" + stem + "'");
        }
        stems.push_back(std::move(stem));
    }
    return stems;
}

// Processes every input independently; writes nothing unless all succeed.
template <typename Job>
int run_per_input(const Options& o, std::ostream& out, std::ostream& err, Job job) {
    std::vector<std::string> stems;
    if (auto f = guarded([&] { stems = unique_stems(o.inputs); }); f.code) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    std::vector<OutputFiles> files(o.inputs.size());
    std::vector<std::string> messages(o.inputs.size());
    std::vector<Failure> failures(o.inputs.size());
    parallel_for(o.inputs.size(), o.jobs, [&](std::size_t i) {
        failures[i] = guarded([&] { job(o.inputs[i], stems[i], files[i], messages[i]); });
    });
    int code = exit_ok;
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (failures[i].code) {
            err << "error: " << o.inputs[i] << ": " << failures[i].message << '\n';
            code = std::max(code, failures[i].code);
        }
    }
    if (code) return code;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (auto f = guarded([&] { write_files(files[i]); }); f.code) {
            err << "error: " << f.message << '\n';
            return f.code;
        }
        if (o.inputs.size() > 1 && !messages[i].empty()) out << o.inputs[i] << ": ";
        out << messages[i];
    }
    return exit_ok;
}

nlohmann::ordered_json detect_params_json(const Options& o) {
    return {{"y-th", o.y_th},
            {"lwz-th", o.lwz_th},
            {"look-ahead", o.look_ahead},
            {"decrease-margin", o.decrease_margin},
            {"emit-partial-tail", o.emit_partial_tail},
            {"closure", o.closure},
            {"increments", o.increments},
            {"snap-radius", o.snap_radius},
            {"timestamp-col", o.csv.timestamp_col},
            {"value-col", o.csv.value_col},
            {"timestamp-format", o.csv.timestamp_format},
            {"delimiter", o.csv.delimiter},
            {"locale-decimal-comma", o.csv.decimal_comma}};
}

int cmd_detect(const Options& o, std::ostream& out, std::ostream& err) {
    DetectorParams params;
    CsvSpec spec;
    if (auto f = guarded([&] {
            params = o.detector_params();
            spec = o.csv.spec();
        });
        f.code) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    const fs::path dir(o.output_dir);
    return run_per_input(o, out, err, [&](const std::string& input, const std::string& stem,
                                          OutputFiles& files, std::string& message) {
        const auto started = std::chrono::steady_clock::now();
        const TimeSeries series = parse_csv_file(input, spec);
        const auto patterns = detect_patterns(series, params);
        const auto assignment = assign_case_ids(series, patterns);

        std::ostringstream patterns_csv;
        write_patterns_csv(patterns_csv, series, patterns);
        std::ostringstream events_csv;
        write_event_log_csv(events_csv, series, assignment);

        nlohmann::ordered_json summary;
        summary["input"] = input;
        summary["L"] = series.size();
        summary["pattern_count"] = patterns.size();
        summary["assigned_samples"] = assignment.assigned_count();
        if (!series.empty()) {
            summary["first_timestamp"] = format_timestamp(series.timestamps.front(), TimestampFormat::iso8601);
            summary["last_timestamp"] = format_timestamp(series.timestamps.back(), TimestampFormat::iso8601);
        }
        summary["params"] = detect_params_json(o);
        summary["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        files.emplace_back(dir / (stem + ".patterns.csv"), patterns_csv.str());
        files.emplace_back(dir / (stem + ".events.csv"), events_csv.str());
        files.emplace_back(dir / (stem + ".summary.json"), summary.dump(2) + "\n");
        if (o.plot) files.emplace_back(dir / (stem + ".plot.svg"), series_plot_svg(series, patterns));
        message = "patterns: " + std::to_string(patterns.size()) + "\n";
    });
}

int cmd_clean(const Options& o, std::ostream& out, std::ostream& err) {
    CsvSpec spec;
    if (auto f = guarded([&] {
            spec = o.csv.spec();
            if (!std::isfinite(o.cap)) throw ParameterError("--cap must be finite");
        });
        f.code) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    const fs::path dir(o.output_dir);
    return run_per_input(o, out, err, [&](const std::string& input, const std::string& stem,
                                          OutputFiles& files, std::string& message) {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw IoError("cannot open '" + input + "'");
        const CsvTable table = read_table(in, spec.delimiter);
        const TimeSeries series = parse_csv(table, spec, stem);
        const CleanResult cleaned = clean_outliers(series, o.cap);

        // Retained rows are copied verbatim, all columns included.
        std::string body = table.header_line + "\n";
        for (std::size_t idx : cleaned.kept) body += table.lines[idx] + "\n";
        files.emplace_back(dir / (stem + ".cleaned.csv"), std::move(body));
        message = "removed_count: " + std::to_string(cleaned.removed_count) + "\n";
    });
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    EvalReport report;
    auto f = guarded([&] {
        std::ifstream in(o.inputs.at(0), std::ios::binary);
        if (!in) throw IoError("cannot open '" + o.inputs.at(0) + "'");
        const auto patterns = read_patterns_csv(in);
        const auto labels = read_labels_file(o.labels);
        std::size_t length = 0;
        for (const auto& p : patterns) length = std::max(length, p.end + 1);
        for (const auto& l : labels) length = std::max(length, l.end + 1);
        report = evaluate(labels, patterns, length);

        const fs::path dir(o.output_dir);
        fs::create_directories(dir);
        write_files({{dir / "report.json", report_json(report)}});
        heatmap_export(report.overlap, dir / "heatmap");
    });
    if (f.code) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    out << "Precision: " << format_percent(report.metrics.precision) << '\n'
        << "Recall: " << format_percent(report.metrics.recall) << '\n'
        << "F1: " << format_percent(report.metrics.f1) << '\n';
    if (report.metrics.degenerate) out << "Degenerate: yes (a ratio had a zero denominator)\n";
    return exit_ok;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
    SyntheticSeries synth;
    CsvSpec spec;
    auto f = guarded([&] {
        spec = o.csv.spec();
        SynthParams p;
        p.n_cycles = o.cycles;
        p.period = o.period;
        p.peak = o.peak;
        p.dwell = o.dwell;
        p.noise_sigma = o.noise_sigma;
        p.seed = o.seed;
        synth = generate_cyclic_series(p);
        if (o.outliers > 0) {
            if (!(o.spike > o.peak + 10.0 * o.noise_sigma)) {
                throw ParameterError("--spike must clearly exceed --peak");
            }
            synth.series = inject_outliers(synth.series, o.outliers, o.spike, o.seed + 1);
        }
    });
    if (!f.code) {
        f = guarded([&] {
            const fs::path dir(o.output_dir);
            std::ostringstream series_csv;
            write_series_csv(series_csv, synth.series, spec);
            std::ostringstream labels_csv;
            write_labels_csv(labels_csv, synth.labels);
            write_files({{dir / (o.name + ".csv"), series_csv.str()},
                         {dir / (o.name + ".labels.csv"), labels_csv.str()}});
        });
    }
    if (f.code) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    out << "samples: " << synth.series.size() << "\ncycles: " << synth.labels.size() << '\n';
    return exit_ok;
}

std::set<std::string> long_names(const CLI::App* sub) {
    std::set<std::string> names;
    for (const auto* opt : sub->get_options()) {
        for (const auto& n : opt->get_lnames()) names.insert(n);
    }
    return names;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Case-id detection in cyclic sensor time series", "caseseg"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic cyclic series");
    synth->add_option("--output-dir,-o", o.output_dir, "Directory for output files")->capture_default_str();
    synth->add_option("--config", o.config, "Flat JSON config (env CASESEG_CONFIG)");
    synth->add_option("--cycles", o.cycles, "Number of cycles")->capture_default_str();
    synth->add_option("--period", o.period, "Samples per cycle")->capture_default_str();
    synth->add_option("--peak", o.peak, "Cycle height")->capture_default_str();
    synth->add_option("--dwell", o.dwell, "Samples held at the top and at the bottom")->capture_default_str();
    synth->add_option("--noise-sigma", o.noise_sigma, "Gaussian noise sigma")->capture_default_str();
    synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    synth->add_option("--outliers", o.outliers, "Number of spike samples to inject")->capture_default_str();
    synth->add_option("--spike", o.spike, "Spike value")->capture_default_str();
    synth->add_option("--name", o.name, "Output file stem")->capture_default_str();
    synth->add_option("--timestamp-format", o.csv.timestamp_format, "table | iso8601 | epoch")
        ->capture_default_str();

    auto* clean = app.add_subcommand("clean", "Drop samples whose value exceeds --cap");
    add_common(clean, o, true);
    add_csv(clean, o);
    clean->add_option("--cap", o.cap, "Largest value kept")->required();

    auto* detect = app.add_subcommand("detect", "Detect cycles and write patterns and an event log");
    add_common(detect, o, true);
    add_csv(detect, o);
    detect->add_option("--y-th", o.y_th, "Minimum short-term mean of a pattern")->capture_default_str();
    detect->add_option("--lwz-th", o.lwz_th, "Minimum pattern length (exclusive)")->capture_default_str();
    detect->add_option("--look-ahead", o.look_ahead, "Samples checked for the decrease")->capture_default_str();
    detect->add_option("--decrease-margin", o.decrease_margin, "Required drop of the look-ahead mean")
        ->capture_default_str();
    detect->add_flag("--emit-partial-tail", o.emit_partial_tail, "Emit an unfinished final candidate");
    detect->add_option("--closure", o.closure, "trough | literal")->capture_default_str();
    detect->add_flag("--increments", o.increments, "Detect on one-sample increments");
    detect->add_option("--snap-radius", o.snap_radius, "Snap starts to a local minimum (0 = off)")
        ->capture_default_str();
    detect->add_flag("--plot", o.plot, "Also write a series/pattern SVG");

    auto* eval = app.add_subcommand("eval", "Compare a patterns CSV with a labels CSV");
    add_common(eval, o, false);
    eval->add_option("--labels", o.labels, "Ground-truth labels CSV (id,start,end,kind)")->required();

    std::vector<std::string> expanded = args;
    if (args.size() >= 2) {
        std::set<std::string> own;
        std::set<std::string> others;
        for (const auto* sub : app.get_subcommands({})) {
            auto names = long_names(sub);
            (sub->get_name() == args[1] ? own : others).insert(names.begin(), names.end());
        }
        std::vector<std::string> foreign;
        std::set_difference(others.begin(), others.end(), own.begin(), own.end(),
                            std::back_inserter(foreign));
        const auto f = guarded([&] { expanded = expand_config(args, std::getenv("CASESEG_CONFIG"), foreign); });
        if (f.code) {
            err << "error: " << f.message << '\n';
            return f.code;
        }
    }

    std::vector<char*> argv;
    for (auto& a : expanded) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_parameter_error;
    }

    if (synth->parsed()) return cmd_synth(o, out, err);
    if (clean->parsed()) return cmd_clean(o, out, err);
    if (detect->parsed()) return cmd_detect(o, out, err);
    return cmd_eval(o, out, err);
}

int main(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace caseseg::cli
