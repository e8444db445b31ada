#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "quantcredit/config.hpp"
#include "quantcredit/errors.hpp"
#include "quantcredit/model.hpp"
#include "quantcredit/pipeline.hpp"
#include "quantcredit/quantization.hpp"
#include "quantcredit/spreads.hpp"
#include "quantcredit/survival.hpp"

namespace py = pybind11;
namespace qc = quantcredit;

namespace {

qc::FirmValueModel gbm_or_cev(const std::string& model, double mu, double sigma, double gamma, double beta) {
    if (model == "gbm") return qc::FirmValueModel::gbm(mu, sigma);
    if (model == "cev") return qc::FirmValueModel::cev(mu, gamma, beta);
    throw qc::ValidationError({"model: expected 'gbm' or 'cev', got '" + model + "'"});
}

py::dict curve_dict(const qc::SpreadCurve& c) {
    std::vector<double> t, p, se, sp;
    for (const auto& e : c.entries) {
        t.push_back(e.maturity);
        p.push_back(e.survival);
        se.push_back(e.std_error);
        sp.push_back(e.spread);
    }
    py::dict d;
    d["s"] = c.s;
    d["maturity"] = t;
    d["survival"] = p;
    d["stderr"] = se;
    d["spread"] = sp;
    return d;
}

py::dict filter_dict(const qc::FilterDistribution& f) {
    py::dict d;
    d["step"] = f.step;
    d["points"] = f.points;
    d["weights"] = f.weights;
    d["log_evidence"] = f.log_evidence;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Credit spreads under partial information via quantized filtering";
    m.attr("__version__") = QUANTCREDIT_VERSION;

    static py::exception<qc::ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const qc::ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const qc::DomainError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const qc::DimensionMismatch& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("survival_gbm_closed", &qc::survival_gbm_closed, py::arg("x"), py::arg("barrier"), py::arg("mu"),
          py::arg("sigma"), py::arg("dt"));
    m.def("correlation_bs", &qc::correlation_bs, py::arg("t"), py::arg("sigma"), py::arg("delta"));
    m.def("spread", &qc::spread, py::arg("survival"), py::arg("s"), py::arg("t"));
    m.def(
        "bridge_survival_factor",
        [](double x, double y, double barrier, double local_vol, double dt) {
            return qc::bridge_survival_factor({x, y, barrier, local_vol, dt});
        },
        py::arg("x"), py::arg("y"), py::arg("barrier"), py::arg("local_vol"), py::arg("dt"));

    py::class_<qc::SurvivalEstimate>(m, "SurvivalEstimate")
        .def_readonly("value", &qc::SurvivalEstimate::value)
        .def_readonly("std_error", &qc::SurvivalEstimate::std_error)
        .def_readonly("trials", &qc::SurvivalEstimate::trials)
        .def_readonly("euler_steps", &qc::SurvivalEstimate::euler_steps)
        .def("__repr__", [](const qc::SurvivalEstimate& e) {
            return "SurvivalEstimate(value=" + std::to_string(e.value) + ", std_error=" + std::to_string(e.std_error) +
                   ")";
        });

    auto survival = [](bool naive) {
        return [naive](double v, double s, double t, double barrier, std::size_t steps, std::size_t trials,
                       std::uint64_t seed, const std::string& model, double mu, double sigma, double gamma,
                       double beta, unsigned workers) {
            const auto fv = gbm_or_cev(model, mu, sigma, gamma, beta);
            py::gil_scoped_release release;
            return naive ? qc::survival_naive_mc(fv, v, s, t, barrier, steps, trials, seed, workers)
                         : qc::survival_full_mc(fv, v, s, t, barrier, steps, trials, seed, workers);
        };
    };
    const auto survival_args = std::make_tuple(
        py::arg("v"), py::arg("s"), py::arg("t"), py::arg("barrier"), py::arg("steps"), py::arg("trials"),
        py::arg("seed"), py::arg("model") = "gbm", py::arg("mu") = 0.03, py::arg("sigma") = 0.05,
        py::arg("gamma") = 0.0, py::arg("beta") = 0.0, py::arg("workers") = 0u);
    std::apply([&](auto... a) { m.def("survival_full_mc", survival(false), a..., "Bridge Monte Carlo survival"); },
               survival_args);
    std::apply([&](auto... a) { m.def("survival_naive_mc", survival(true), a..., "Knot-only monitoring"); },
               survival_args);

    m.def(
        "lloyd",
        [](std::vector<double> samples, std::size_t size, std::size_t iters) {
            const qc::SampleSet set(std::move(samples));
            auto g = qc::quantile_grid(set, size);
            std::vector<double> history{g.distortion};
            for (std::size_t i = 0; i < iters; ++i) {
                g = qc::lloyd_pass(set, g);
                history.push_back(g.distortion);
            }
            py::dict d;
            d["points"] = g.points;
            d["weights"] = g.weights;
            d["distortion"] = history;
            return d;
        },
        py::arg("samples"), py::arg("size"), py::arg("iters") = 50,
        "Lloyd passes from the quantile grid; distortion lists every pass (RMS).");

    py::class_<qc::ScenarioConfig>(m, "ScenarioConfig")
        .def_property_readonly("hash", &qc::ScenarioConfig::hash)
        .def_property_readonly("quantization_hash", &qc::ScenarioConfig::quantization_hash)
        .def_property_readonly("canonical", &qc::ScenarioConfig::canonical)
        .def_readwrite("seed", &qc::ScenarioConfig::seed)
        .def_readwrite("output_dir", &qc::ScenarioConfig::output_dir)
        .def_property(
            "mc_trials", [](const qc::ScenarioConfig& c) { return c.numerics.mc_trials; },
            [](qc::ScenarioConfig& c, std::size_t v) { c.numerics.mc_trials = v; })
        .def_property(
            "workers", [](const qc::ScenarioConfig& c) { return c.numerics.workers; },
            [](qc::ScenarioConfig& c, unsigned v) { c.numerics.workers = v; })
        .def_property_readonly("maturities", [](const qc::ScenarioConfig& c) { return c.scenario.maturities; })
        .def_property_readonly("time_grid", [](const qc::ScenarioConfig& c) { return c.time_grid().instants(); });

    m.def("parse_config", &qc::parse_config, py::arg("text"));
    m.def("load_config", &qc::load_config, py::arg("path"));

    m.def(
        "run_pipeline",
        [](const qc::ScenarioConfig& cfg, const std::filesystem::path& out, std::uint64_t obs_index,
           std::optional<std::filesystem::path> obs_file) {
            const auto source = obs_file ? qc::ObservationSource::from_file(*obs_file)
                                         : qc::ObservationSource::simulated(obs_index);
            qc::PipelineResult r;
            {
                py::gil_scoped_release release;
                r = qc::run_pipeline(cfg, source, out);
            }
            py::dict d;
            d["times"] = r.observations.times;
            d["prices"] = r.observations.prices.values;
            d["hidden"] = r.observations.hidden;
            d["filter"] = filter_dict(r.filter);
            d["curve"] = curve_dict(r.curve);
            std::vector<std::string> files;
            for (const auto& p : r.artifacts) files.push_back(p.string());
            d["artifacts"] = files;
            return d;
        },
        py::arg("config"), py::arg("out"), py::arg("obs_index") = 0, py::arg("obs_file") = py::none(),
        "Full run; writes every artifact into `out` and returns the results.");

    m.def(
        "run_convergence",
        [](const qc::ScenarioConfig& cfg, const std::string& sweep, double maturity) {
            const auto parsed = qc::Sweep::parse(sweep);
            std::vector<qc::ConvergenceRow> rows;
            {
                py::gil_scoped_release release;
                rows = qc::run_convergence(cfg, parsed, maturity);
            }
            py::list out;
            for (const auto& row : rows) {
                py::dict d;
                d["sweep"] = row.sweep;
                d["value"] = row.value;
                d["estimate"] = row.estimate;
                d["stderr"] = row.std_error;
                d["reference"] = row.reference;
                d["abs_error"] = row.abs_error;
                out.append(d);
            }
            return out;
        },
        py::arg("config"), py::arg("sweep"), py::arg("maturity") = 0.0);
}
