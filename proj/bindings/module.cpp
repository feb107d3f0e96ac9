// Python bindings for the in-memory HDC pipeline: text normalization, the
// software reference encoder, dataset helpers, and the device-backed
// Pipeline with its energy/latency reports.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "rthdc/config.hpp"
#include "rthdc/corpus.hpp"
#include "rthdc/engine.hpp"
#include "rthdc/errors.hpp"
#include "rthdc/hdc.hpp"
#include "rthdc/model_io.hpp"
#include "rthdc/selftest.hpp"

namespace py = pybind11;
using namespace rthdc;

namespace {

py::bytes hv_bytes(const BitVec& hv) {
    const auto raw = hv.to_bytes();
    return py::bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
}

BitVec hv_from_bytes(const py::bytes& b, std::uint32_t dim) {
    const std::string raw = b;
    if (raw.size() != (std::size_t(dim) + 7) / 8)
        throw PreconditionError("hypervector byte length does not match the dimension");
    return BitVec::from_bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size(),
                              dim);
}

RunConfig config_from_json_str(const std::string& config_json) {
    if (config_json.empty()) return RunConfig{};
    return RunConfig::from_json(nlohmann::json::parse(config_json));
}

py::dict report_dict(const Report& r) {
    py::dict d;
    d["encoder_nj"] = r.encoder_nj;
    d["simcheck_nj"] = r.simcheck_nj;
    d["io_nj"] = r.io_nj;
    d["total_nj"] = r.total_nj;
    d["dynamic_nj"] = r.dynamic_nj;
    d["background_nj"] = r.background_nj;
    d["cycles"] = r.cycles;
    d["runtime_ns"] = r.runtime_ns;
    d["json"] = r.to_json().dump();
    return d;
}

} // namespace

PYBIND11_MODULE(_rthdc, m) {
    m.doc() = "racetrack compute-in-memory HDC language recognizer";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

    m.def("normalize", [](const std::string& text) { return corpus::normalize(text); },
          py::arg("text"), "Map UTF-8 text onto the 27-symbol alphabet.");
    m.def("render",
          [](const std::vector<hdc::Symbol>& symbols) { return corpus::render(symbols); },
          py::arg("symbols"), "Render symbols back to text (separator as space).");

    m.def(
        "encode",
        [](const std::string& text, std::uint64_t seed, std::uint32_t dim, std::uint32_t n) {
            const auto im = hdc::ItemMemory::generate(seed, dim);
            return hv_bytes(hdc::encode(corpus::normalize(text), im, n));
        },
        py::arg("text"), py::arg("seed") = 1, py::arg("dim") = 8192, py::arg("ngram") = 4,
        "Reference (software) text encoding; returns the hypervector as bytes.");

    m.def(
        "hamming",
        [](const py::bytes& a, const py::bytes& b, std::uint32_t dim) {
            return hamming(hv_from_bytes(a, dim), hv_from_bytes(b, dim));
        },
        py::arg("a"), py::arg("b"), py::arg("dim") = 8192);

    py::class_<corpus::Dataset>(m, "Dataset")
        .def_property_readonly("labels",
                               [](const corpus::Dataset& ds) {
                                   std::vector<std::string> out;
                                   for (const auto& l : ds.languages) out.push_back(l.label);
                                   return out;
                               })
        .def("train_text",
             [](const corpus::Dataset& ds, const std::string& label) {
                 const auto* lang = ds.find(label);
                 if (!lang) throw ConfigError("unknown label: " + label);
                 return corpus::render(lang->train);
             })
        .def("sentences", [](const corpus::Dataset& ds, const std::string& label) {
            const auto* lang = ds.find(label);
            if (!lang) throw ConfigError("unknown label: " + label);
            std::vector<std::string> out;
            for (const auto& s : lang->sentences) out.push_back(corpus::render(s));
            return out;
        });

    m.def("load_dataset",
          [](const std::filesystem::path& dir) {
              return corpus::load_dataset(dir / "train", dir / "test");
          },
          py::arg("dir"), "Load a dataset directory holding train/ and test/.");
    m.def("synth_corpus", &corpus::synth_corpus, py::arg("seed"), py::arg("languages"),
          py::arg("train_len"), py::arg("sentences"), py::arg("sentence_len"));
    m.def("write_dataset", &corpus::write_dataset, py::arg("dataset"), py::arg("dir"));

    py::class_<engine::Pipeline>(m, "Pipeline")
        .def(py::init([](const std::string& config_json) {
                 return std::make_unique<engine::Pipeline>(config_from_json_str(config_json));
             }),
             py::arg("config_json") = std::string(),
             "Build a pipeline from a JSON run configuration (defaults when empty).")
        .def_property_readonly("config_json",
                               [](const engine::Pipeline& p) { return p.config().to_json().dump(); })
        .def_property_readonly("labels",
                               [](const engine::Pipeline& p) {
                                   std::vector<std::string> out;
                                   for (const auto& e : p.am().entries) out.push_back(e.label);
                                   return out;
                               })
        .def("train",
             [](engine::Pipeline& p, const corpus::Dataset& ds) {
                 const auto out = p.train(ds);
                 py::dict d;
                 d["classes"] = out.am.size();
                 d["report"] = report_dict(out.report);
                 return d;
             },
             py::arg("dataset"))
        .def("classify",
             [](engine::Pipeline& p, const std::string& text) {
                 const auto res = p.classify(corpus::normalize(text));
                 py::dict d;
                 d["label"] = res.label;
                 py::dict dist;
                 for (const auto& [label, dd] : res.distances) dist[label.c_str()] = dd;
                 d["distances"] = dist;
                 d["ngrams"] = res.ngrams;
                 d["report"] = report_dict(res.report);
                 return d;
             },
             py::arg("text"))
        .def("encode",
             [](engine::Pipeline& p, const std::string& text) {
                 PhaseCosts pc;
                 return hv_bytes(p.encode_text(corpus::normalize(text), pc));
             },
             py::arg("text"),
             "Device-encode one text (training must have initialized the layout).")
        .def("save", [](const engine::Pipeline& p, const std::filesystem::path& model) {
            model_io::write_container(model, p.to_container());
            std::filesystem::path side = model;
            side += ".layout.json";
            model_io::write_json(side, p.layout_sidecar());
        });

    m.def(
        "load_pipeline",
        [](const std::filesystem::path& model) {
            std::filesystem::path side = model;
            side += ".layout.json";
            const auto sidecar = model_io::read_json(side);
            if (!sidecar.contains("config"))
                throw ConfigError("layout sidecar is missing its config block");
            auto pipe = std::make_unique<engine::Pipeline>(
                RunConfig::from_json(sidecar.at("config")));
            pipe->load_model(model_io::read_container(model), sidecar);
            return pipe;
        },
        py::arg("model"), "Load a trained model container plus its layout sidecar.");

    m.def(
        "selftest",
        [](bool quick) {
            std::ostringstream os;
            const int failures = run_selftest(quick, os);
            return py::make_tuple(failures, os.str());
        },
        py::arg("quick") = true);
}
