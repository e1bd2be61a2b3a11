#include "caseseg/core.hpp"
#include "caseseg/detector.hpp"
#include "caseseg/eval.hpp"
#include "caseseg/ingest.hpp"
#include "caseseg/synth.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace caseseg;

namespace {

TimeSeries make_series(std::vector<double> values, std::optional<std::vector<Timestamp>> timestamps,
                       std::string name) {
    TimeSeries s;
    s.name = std::move(name);
    s.values = std::move(values);
    if (timestamps) {
        s.timestamps = std::move(*timestamps);
    } else {
        s.timestamps.resize(s.values.size());
        for (std::size_t i = 0; i < s.timestamps.size(); ++i) s.timestamps[i] = static_cast<Timestamp>(i);
    }
    s.validate();
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Case-id detection in cyclic sensor time series";

    // Translators run newest first, so subclasses are registered after their bases.
    static py::exception<Error> error(m, "Error");
    static py::exception<InputError> input_error(m, "InputError", error.ptr());
    static py::exception<ParameterError> parameter_error(m, "ParameterError", error.ptr());
    static py::exception<ContractError> contract_error(m, "ContractError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InputError& e) {
            PyErr_SetString(input_error.ptr(), e.what());
        } catch (const ParameterError& e) {
            PyErr_SetString(parameter_error.ptr(), e.what());
        } catch (const ContractError& e) {
            PyErr_SetString(contract_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init(&make_series), py::arg("values"), py::arg("timestamps") = std::nullopt,
             py::arg("name") = "")
        .def_readwrite("name", &TimeSeries::name)
        .def_readwrite("timestamps", &TimeSeries::timestamps)
        .def_readwrite("values", &TimeSeries::values)
        .def("__len__", &TimeSeries::size)
        .def(py::self == py::self)
        .def("__repr__", [](const TimeSeries& s) {
            return "TimeSeries(name='" + s.name + "', L=" + std::to_string(s.size()) + ")";
        });

    py::class_<DetectorParams>(m, "DetectorParams")
        .def(py::init([](double y_th, std::size_t lwz_th, std::size_t look_ahead, double decrease_margin,
                         bool emit_partial_tail, const std::string& closure, bool increments,
                         std::size_t snap_radius) {
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
             }),
             py::arg("y_th") = 10.3, py::arg("lwz_th") = 100, py::arg("look_ahead") = 30,
             py::arg("decrease_margin") = 0.0, py::arg("emit_partial_tail") = false,
             py::arg("closure") = "trough", py::arg("increments") = false, py::arg("snap_radius") = 0)
        .def_readwrite("y_th", &DetectorParams::y_th)
        .def_readwrite("lwz_th", &DetectorParams::lwz_th)
        .def_readwrite("look_ahead", &DetectorParams::look_ahead)
        .def_readwrite("decrease_margin", &DetectorParams::decrease_margin)
        .def_readwrite("emit_partial_tail", &DetectorParams::emit_partial_tail)
        .def_readwrite("snap_radius", &DetectorParams::snap_radius)
        .def_property(
            "closure", [](const DetectorParams& p) { return std::string(to_string(p.closure)); },
            [](DetectorParams& p, const std::string& s) { p.closure = parse_closure(s); })
        .def_property(
            "increments", [](const DetectorParams& p) { return p.input_mode == InputMode::increments; },
            [](DetectorParams& p, bool on) { p.input_mode = on ? InputMode::increments : InputMode::raw; });

    py::class_<Pattern>(m, "Pattern")
        .def(py::init<std::size_t, std::size_t, std::size_t, double, bool>(), py::arg("id"), py::arg("start"),
             py::arg("end"), py::arg("mean_at_detection") = 0.0, py::arg("partial") = false)
        .def_readwrite("id", &Pattern::id)
        .def_readwrite("start", &Pattern::start)
        .def_readwrite("end", &Pattern::end)
        .def_readwrite("mean_at_detection", &Pattern::mean_at_detection)
        .def_readwrite("partial", &Pattern::partial)
        .def("__len__", &Pattern::length)
        .def(py::self == py::self)
        .def("__repr__", [](const Pattern& p) {
            return "Pattern(id=" + std::to_string(p.id) + ", start=" + std::to_string(p.start) +
                   ", end=" + std::to_string(p.end) + ")";
        });

    py::class_<LabelSegment>(m, "LabelSegment")
        .def(py::init([](std::size_t id, std::size_t start, std::size_t end, const std::string& kind) {
                 return LabelSegment{id, start, end, parse_label_kind(kind)};
             }),
             py::arg("id"), py::arg("start"), py::arg("end"), py::arg("kind") = "cycle")
        .def_readwrite("id", &LabelSegment::id)
        .def_readwrite("start", &LabelSegment::start)
        .def_readwrite("end", &LabelSegment::end)
        .def_property_readonly("kind", [](const LabelSegment& l) { return std::string(to_string(l.kind)); })
        .def(py::self == py::self);

    m.def("detect_patterns", &detect_patterns, py::arg("series"), py::arg("params") = DetectorParams{},
          py::call_guard<py::gil_scoped_release>());
    m.def("detect_patterns_reference", &detect_patterns_reference, py::arg("series"),
          py::arg("params") = DetectorParams{});

    m.def(
        "assign_case_ids",
        [](const TimeSeries& s, const std::vector<Pattern>& patterns) { return assign_case_ids(s, patterns).case_ids; },
        py::arg("series"), py::arg("patterns"), "Per-sample case id, None outside every pattern.");

    m.def(
        "clean_outliers",
        [](const TimeSeries& s, double cap) {
            auto r = clean_outliers(s, cap);
            return py::make_tuple(std::move(r.series), r.removed_count);
        },
        py::arg("series"), py::arg("cap"), "Returns (cleaned series, removed_count).");

    m.def(
        "parse_csv",
        [](const std::filesystem::path& path, const std::string& timestamp_column, const std::string& value_column,
           const std::string& timestamp_format, const std::string& delimiter, bool decimal_comma) {
            if (delimiter.size() != 1) throw ParameterError("delimiter must be one character");
            CsvSpec spec;
            spec.timestamp_column = timestamp_column;
            spec.value_column = value_column;
            spec.timestamp_format = parse_timestamp_format(timestamp_format);
            spec.delimiter = delimiter[0];
            spec.decimal_comma = decimal_comma;
            return parse_csv_file(path, spec);
        },
        py::arg("path"), py::arg("timestamp_column") = "timestamp", py::arg("value_column") = "value",
        py::arg("timestamp_format") = "iso8601", py::arg("delimiter") = ",", py::arg("decimal_comma") = false);

    m.def(
        "generate_cyclic_series",
        [](std::size_t n_cycles, std::size_t period, double peak, std::size_t dwell, double noise_sigma,
           std::uint64_t seed) {
            SynthParams p;
            p.n_cycles = n_cycles;
            p.period = period;
            p.peak = peak;
            p.dwell = dwell;
            p.noise_sigma = noise_sigma;
            p.seed = seed;
            auto s = generate_cyclic_series(p);
            return py::make_tuple(std::move(s.series), std::move(s.labels));
        },
        py::arg("n_cycles") = 5, py::arg("period") = 3000, py::arg("peak") = 250.0, py::arg("dwell") = 200,
        py::arg("noise_sigma") = 0.0, py::arg("seed") = 42, "Returns (series, labels).");

    m.def("inject_outliers", &inject_outliers, py::arg("series"), py::arg("count"), py::arg("spike_value"),
          py::arg("seed"));

    const auto metrics_dict = [](const ConfusionCounts& c, const Metrics& mt) {
        py::dict d;
        d["tp"] = c.tp;
        d["fp"] = c.fp;
        d["fn"] = c.fn;
        d["precision"] = mt.precision;
        d["recall"] = mt.recall;
        d["f1"] = mt.f1;
        d["degenerate"] = mt.degenerate;
        return d;
    };

    m.def(
        "metrics",
        [metrics_dict](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
            const ConfusionCounts c{tp, fp, fn};
            return metrics_dict(c, metrics(c));
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"));

    m.def(
        "evaluate",
        [metrics_dict](const std::vector<LabelSegment>& truth, const std::vector<Pattern>& pred, std::size_t length) {
            const auto r = evaluate(truth, pred, length);
            py::dict d = metrics_dict(r.counts, r.metrics);
            py::list matching;
            for (const auto& x : r.matching) matching.append(py::make_tuple(x.truth_id, x.pred_id));
            d["matching"] = matching;
            std::vector<std::vector<std::uint64_t>> overlap(r.overlap.rows());
            for (std::size_t i = 0; i < r.overlap.rows(); ++i)
                for (std::size_t j = 0; j < r.overlap.cols(); ++j) overlap[i].push_back(r.overlap.at(i, j));
            d["overlap"] = overlap;
            d["missed_truth_samples"] = r.missed_truth_samples;
            d["recall_including_missed"] = r.recall_including_missed;
            return d;
        },
        py::arg("truth"), py::arg("pred"), py::arg("length"));
}
