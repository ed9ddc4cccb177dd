#include "fxcog/dataset.hpp"
#include "fxcog/error.hpp"
#include "fxcog/eval.hpp"
#include "fxcog/indicators.hpp"
#include "fxcog/levels.hpp"
#include "fxcog/net.hpp"
#include "fxcog/pipeline.hpp"
#include "fxcog/sim.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fxcog;

namespace {

py::object level_dict(const std::optional<LevelEntry>& e) {
    if (!e) return py::none();
    py::dict d;
    d["S2"] = e->support2;
    d["S1"] = e->support1;
    d["R1"] = e->resistance1;
    d["R2"] = e->resistance2;
    return d;
}

Direction parse_direction(const std::string& s) {
    if (s == "long") return Direction::long_;
    if (s == "short") return Direction::short_;
    throw ConfigError("direction must be 'long' or 'short', got '" + s + "'");
}

std::vector<std::string> date_strings(const PriceSeries& s) {
    std::vector<std::string> out;
    for (const auto& c : s.candles()) out.push_back(c.date.to_string());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of the fxcog pipeline";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<CoverageError>(m, "CoverageError", base);
    py::register_exception<PreconditionError>(m, "PreconditionError", base);
    py::register_exception<ShapeError>(m, "ShapeError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base);
    py::register_exception<DegenerateSignalError>(m, "DegenerateSignalError", base);
    py::register_exception<TrainingDivergedError>(m, "TrainingDivergedError", base);

    py::class_<PriceSeries>(m, "PriceSeries")
        .def_static(
            "from_ohlc",
            [](const std::vector<std::string>& dates, const std::vector<double>& open, const std::vector<double>& high,
               const std::vector<double>& low, const std::vector<double>& close) {
                const std::size_t n = dates.size();
                if (open.size() != n || high.size() != n || low.size() != n || close.size() != n)
                    throw ShapeError("OHLC columns must have the same length as dates");
                std::vector<Candle> candles;
                for (std::size_t i = 0; i < n; ++i) candles.push_back({Date::parse(dates[i]), open[i], high[i], low[i], close[i]});
                return PriceSeries(std::move(candles));
            },
            py::arg("dates"), py::arg("open"), py::arg("high"), py::arg("low"), py::arg("close"))
        .def_static("load", &load_price_series, py::arg("path"))
        .def_static("parse", [](const std::string& text) { return parse_price_series(text); }, py::arg("text"))
        .def("save", [](const PriceSeries& s, const std::string& path) { save_price_series(s, path); }, py::arg("path"))
        .def("to_csv", &format_price_series)
        .def("__len__", &PriceSeries::size)
        .def_property_readonly("dates", &date_strings)
        .def_property_readonly("open", &PriceSeries::opens)
        .def_property_readonly("high", &PriceSeries::highs)
        .def_property_readonly("low", &PriceSeries::lows)
        .def_property_readonly("close", &PriceSeries::closes);

    m.def(
        "synthetic_prices",
        [](std::uint64_t seed, std::size_t days, const std::string& regime) {
            return generate_synthetic(seed, days, parse_regime(regime));
        },
        py::arg("seed"), py::arg("days"), py::arg("regime") = "random_walk",
        "Seeded weekday OHLC series (random_walk, trending or mean_reverting).");

    m.def(
        "indicators",
        [](const PriceSeries& s) {
            py::dict out;
            for (auto& c : indicators::compute_all(s)) out[py::str(c.name)] = c.values;
            return out;
        },
        py::arg("prices"), "Every indicator column with default parameters; None during warm-up.");

    m.def(
        "grouper", [](std::vector<double> xs, double delta) { return levels::grouper(xs, delta); }, py::arg("values"),
        py::arg("delta"), "Split ascending values into runs whose consecutive gaps are below delta.");
    m.def(
        "support_resistance",
        [](const PriceSeries& s, std::size_t day, double alpha) {
            GrouperConfig cfg;
            cfg.alpha = alpha;
            return level_dict(levels::support_resistance(s, day, cfg));
        },
        py::arg("prices"), py::arg("day"), py::arg("alpha") = 0.04);
    m.def(
        "fibonacci_levels", [](const PriceSeries& s, std::size_t day) { return level_dict(levels::fibonacci_levels(s, day)); },
        py::arg("prices"), py::arg("day"));

    m.def(
        "directional_index",
        [](const std::vector<double>& closes, std::size_t n, std::size_t h) { return directional_index(closes, n, h); },
        py::arg("closes"), py::arg("n"), py::arg("h") = 10);
    m.def(
        "labels",
        [](const PriceSeries& s, std::size_t h) {
            py::list out;
            for (const auto& d : label(s, h)) out.append(py::make_tuple(d.date.to_string(), d.directional_index, d.target));
            return out;
        },
        py::arg("prices"), py::arg("h") = 10, "(date, directional_index, target) for all but the last h days.");

    m.def(
        "auc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc(s, y); }, py::arg("scores"),
        py::arg("labels"));
    m.def(
        "confusion",
        [](const std::vector<double>& s, const std::vector<int>& y, double threshold) {
            const auto c = confusion(s, y, threshold);
            py::dict d;
            d["tp"] = c.tp;
            d["fp"] = c.fp;
            d["tn"] = c.tn;
            d["fn"] = c.fn;
            return d;
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def(
        "lift_curve",
        [](const std::vector<double>& s, const std::vector<int>& y, int deciles) { return lift_curve(s, y, deciles); },
        py::arg("scores"), py::arg("labels"), py::arg("deciles") = 10);

    m.def(
        "gradient_check",
        [](int input_dim, int hidden, int layers, std::uint64_t seed, std::size_t steps, int label) {
            const auto net = LstmNetwork::initialized(input_dim, hidden, layers, seed);
            Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
            std::vector<double> x(steps * static_cast<std::size_t>(input_dim));
            for (auto& v : x) v = rng.uniform(-1, 1);
            return gradient_check(net, x, steps, label).max_relative_error;
        },
        py::arg("input_dim"), py::arg("hidden"), py::arg("layers"), py::arg("seed"), py::arg("steps") = 6,
        py::arg("label") = 1, "Max relative error of the analytic gradient on a random sequence.");

    m.def(
        "gross_return",
        [](const std::string& direction, double entry, double exit) {
            return gross_return(parse_direction(direction), entry, exit);
        },
        py::arg("direction"), py::arg("entry"), py::arg("exit"));
    m.def(
        "win_rate",
        [](const std::vector<double>& returns) {
            std::vector<Trade> trades(returns.size());
            for (std::size_t i = 0; i < returns.size(); ++i) trades[i].net_return = returns[i];
            return summarize(trades).long_side.win_rate;
        },
        py::arg("returns"), "Percent of strictly positive returns; None for an empty list.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = pipeline::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the fx command line in-process; returns (exit_code, stdout, stderr).");
}
