// rthdc: racetrack compute-in-memory simulator running a hyperdimensional
// language-recognition pipeline, with per-operation energy/latency accounting.
//
// Exit codes: 0 success, 2 configuration or argument error, 3 invalid input
// data, 4 violated internal contract.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rthdc/config.hpp"
#include "rthdc/corpus.hpp"
#include "rthdc/engine.hpp"
#include "rthdc/errors.hpp"
#include "rthdc/model_io.hpp"
#include "rthdc/selftest.hpp"
#include "rthdc/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace rthdc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::uint32_t dim = 0;
    std::uint32_t ngram = 0;
    std::uint32_t pgs = 0;
    std::string mode;
    std::string out;
    bool json = false;
    bool quick = false;

    bool seed_set = false, dim_set = false, ngram_set = false, pgs_set = false;
    bool mode_set = false, config_set = false;
};

void add_common(CLI::App& cmd, CommonOpts& o) {
    cmd.add_option("--config", o.config_path, "JSON run configuration")
        ->each([&](const std::string&) { o.config_set = true; });
    cmd.add_option("--seed", o.seed, "item-memory seed")
        ->each([&](const std::string&) { o.seed_set = true; });
    cmd.add_option("--dim", o.dim, "hypervector dimensionality")
        ->each([&](const std::string&) { o.dim_set = true; });
    cmd.add_option("--ngram", o.ngram, "n-gram size")
        ->each([&](const std::string&) { o.ngram_set = true; });
    cmd.add_option("--pgs", o.pgs, "processing-group count")
        ->each([&](const std::string&) { o.pgs_set = true; });
    cmd.add_option("--mode", o.mode, "bundling mode: exact-sum or preset")
        ->each([&](const std::string&) { o.mode_set = true; });
    cmd.add_flag("--json", o.json, "machine-readable output");
    cmd.add_option("--out", o.out, "output path");
    cmd.add_flag("--quick", o.quick, "shortened run");
}

void apply_overrides(RunConfig& cfg, const CommonOpts& o) {
    if (o.seed_set) cfg.seed = o.seed;
    if (o.dim_set) cfg.dim = o.dim;
    if (o.ngram_set) cfg.ngram = o.ngram;
    if (o.pgs_set) cfg.num_pgs = o.pgs;
    if (o.mode_set && !parse_bundling_mode(o.mode, cfg.mode))
        throw ConfigError("unknown bundling mode: " + o.mode +
                          " (expected exact-sum or preset)");
}

RunConfig build_config(const CommonOpts& o) {
    RunConfig cfg = o.config_set ? RunConfig::load(o.config_path) : RunConfig{};
    apply_overrides(cfg, o);
    cfg.validate();
    return cfg;
}

corpus::Dataset load_dataset_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ConfigError("dataset directory not found: " + dir.string());
    return corpus::load_dataset(dir / "train", dir / "test", &std::cerr);
}

void emit_json(const ordered_json& j, const std::string& out_path) {
    if (!out_path.empty()) {
        model_io::write_json(out_path, j);
    } else {
        std::cout << j.dump(2) << "\n";
    }
}

void print_report(std::ostream& os, const Report& r, const std::string& head) {
    os << head << "\n"
       << "  encoder   " << r.encoder_nj << " nJ\n"
       << "  simcheck  " << r.simcheck_nj << " nJ\n"
       << "  io        " << r.io_nj << " nJ\n"
       << "  total     " << r.total_nj << " nJ (dynamic " << r.dynamic_nj
       << ", background " << r.background_nj << ")\n"
       << "  elapsed   " << r.cycles << " cycles (" << r.runtime_ns << " ns)\n";
}

fs::path sidecar_path(const fs::path& model) {
    fs::path p = model;
    p += ".layout.json";
    return p;
}

// ---------------------------------------------------------------------------

int cmd_train(const CommonOpts& o, const std::string& dataset) {
    const RunConfig cfg = build_config(o);
    const auto ds = load_dataset_dir(dataset);
    engine::Pipeline pipe(cfg);
    const auto trained = pipe.train(ds);

    const fs::path model_path = o.out.empty() ? fs::path("model.rhdm") : fs::path(o.out);
    model_io::write_container(model_path, pipe.to_container());
    model_io::write_json(sidecar_path(model_path), pipe.layout_sidecar());
    fs::path report_path = model_path;
    report_path += ".report.json";

    ordered_json jr;
    jr["model"] = model_path.string();
    jr["layout"] = sidecar_path(model_path).string();
    jr["config_hash"] = cfg.hash();
    ordered_json langs;
    for (const auto& pl : trained.languages) {
        ordered_json l;
        l["symbols"] = pl.symbols;
        l["ngrams"] = pl.ngrams;
        l["report"] = pl.report.to_json();
        langs[pl.label] = std::move(l);
    }
    jr["languages"] = langs;
    jr["stats"] = trained.stats.to_json();
    jr["report"] = trained.report.to_json();
    model_io::write_json(report_path, jr);

    if (o.json) {
        std::cout << jr.dump(2) << "\n";
    } else {
        std::cout << "trained " << trained.languages.size() << " classes -> "
                  << model_path.string() << "\n";
        print_report(std::cout, trained.report, "training totals");
    }
    return 0;
}

// Resolves the configuration for model-bound commands: the layout sidecar is
// authoritative; only --pgs and --mode may override it.
RunConfig model_config(const CommonOpts& o, const nlohmann::json& sidecar) {
    if (o.config_set || o.seed_set || o.dim_set || o.ngram_set)
        throw ConfigError("--config/--seed/--dim/--ngram conflict with --model; "
                          "the model's layout sidecar fixes them");
    if (!sidecar.contains("config"))
        throw ConfigError("layout sidecar is missing its config block");
    RunConfig cfg = RunConfig::from_json(sidecar.at("config"));
    if (o.pgs_set) cfg.num_pgs = o.pgs;
    if (o.mode_set && !parse_bundling_mode(o.mode, cfg.mode))
        throw ConfigError("unknown bundling mode: " + o.mode);
    cfg.validate();
    return cfg;
}

std::string read_text_input(const std::string& file, const std::string& inline_text) {
    if (!inline_text.empty()) return inline_text;
    if (!file.empty() && file != "-") {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw ConfigError("cannot read input file: " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
}

int cmd_classify(const CommonOpts& o, const std::string& model, const std::string& file,
                 const std::string& inline_text) {
    const auto sidecar = model_io::read_json(sidecar_path(model));
    const RunConfig cfg = model_config(o, sidecar);
    engine::Pipeline pipe(cfg);
    pipe.load_model(model_io::read_container(fs::path(model)), sidecar);

    const std::string raw = read_text_input(file, inline_text);
    const auto symbols = corpus::normalize(raw);
    const auto res = pipe.classify(symbols);

    if (o.json) {
        ordered_json j;
        j["label"] = res.label;
        ordered_json d;
        for (const auto& [label, dist] : res.distances) d[label] = dist;
        j["distances"] = d;
        j["symbols"] = symbols.size();
        j["ngrams"] = res.ngrams;
        j["config_hash"] = cfg.hash();
        j["report"] = res.report.to_json();
        j["stats"] = res.stats.to_json();
        emit_json(j, o.out);
        if (!o.out.empty()) std::cout << res.label << "\n";
    } else {
        std::cout << res.label << "\n";
    }
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& model, const std::string& dataset) {
    const auto sidecar = model_io::read_json(sidecar_path(model));
    const RunConfig cfg = model_config(o, sidecar);
    engine::Pipeline pipe(cfg);
    pipe.load_model(model_io::read_container(fs::path(model)), sidecar);

    const auto ds = load_dataset_dir(dataset);
    const std::size_t cap = o.quick ? 10 : SIZE_MAX;

    ordered_json per_lang;
    std::size_t total = 0, correct = 0;
    double enc_nj = 0, sim_nj = 0, total_nj = 0;
    std::uint64_t cycles = 0;
    for (const auto& lang : ds.languages) {
        std::size_t n = 0, right = 0;
        for (const auto& s : lang.sentences) {
            if (n >= cap) break;
            if (s.size() < cfg.ngram) continue; // too short to encode
            const auto res = pipe.classify(s);
            ++n;
            if (res.label == lang.label) ++right;
            enc_nj += res.report.encoder_nj;
            sim_nj += res.report.simcheck_nj;
            total_nj += res.report.total_nj;
            cycles += res.report.cycles;
        }
        total += n;
        correct += right;
        ordered_json l;
        l["sentences"] = n;
        l["correct"] = right;
        l["accuracy"] = n ? double(right) / double(n) : 0.0;
        per_lang[lang.label] = std::move(l);
        if (!o.json)
            std::cout << lang.label << "  " << right << "/" << n << "\n";
    }
    if (total == 0) throw PreconditionError("dataset has no usable test sentences");

    const double accuracy = double(correct) / double(total);
    ordered_json j;
    j["accuracy"] = accuracy;
    j["sentences"] = total;
    j["correct"] = correct;
    j["languages"] = per_lang;
    j["mean_query_encoder_nj"] = enc_nj / double(total);
    j["mean_query_simcheck_nj"] = sim_nj / double(total);
    j["mean_query_total_nj"] = total_nj / double(total);
    j["mean_query_cycles"] = double(cycles) / double(total);
    j["config_hash"] = cfg.hash();
    if (o.json) {
        emit_json(j, o.out);
    } else {
        std::cout << "accuracy " << correct << "/" << total << " = " << accuracy << "\n"
                  << "mean per query: encoder " << enc_nj / double(total)
                  << " nJ, simcheck " << sim_nj / double(total) << " nJ, "
                  << double(cycles) / double(total) << " cycles\n";
        if (!o.out.empty()) model_io::write_json(o.out, j);
    }
    return 0;
}

int cmd_trace(const CommonOpts& o, const std::string& file) {
    const RunConfig cfg = build_config(o);
    TraceResult res;
    if (file == "-") {
        res = run_trace(std::cin, cfg.geometry);
    } else {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read trace file: " + file);
        res = run_trace(in, cfg.geometry);
    }
    if (o.json) {
        ordered_json j;
        j["results"] = res.lines;
        j["ledger"] = res.ledger.to_json();
        j["dynamic_nj"] = dynamic_energy_nj(res.ledger, cfg.energy);
        emit_json(j, o.out);
    } else {
        for (const auto& line : res.lines) std::cout << line << "\n";
        std::cout << "dynamic " << dynamic_energy_nj(res.ledger, cfg.energy)
                  << " nJ over " << res.ledger.cycles << " busy cycles\n";
    }
    return 0;
}

int cmd_synth(const CommonOpts& o, std::uint32_t languages, std::uint32_t train_len,
              std::uint32_t sentences, std::uint32_t sentence_len) {
    if (o.out.empty()) throw ConfigError("synth needs --out DIR");
    const RunConfig cfg = build_config(o);
    const auto ds = corpus::synth_corpus(cfg.seed, languages, train_len, sentences, sentence_len);
    corpus::write_dataset(ds, o.out);
    std::cout << "wrote " << ds.languages.size() << " languages to " << o.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"racetrack compute-in-memory HDC language recognizer"};
    app.require_subcommand(1);

    CommonOpts opts;

    std::string dataset, model, file, inline_text;
    std::uint32_t languages = 5, train_len = 2000, sentences = 20, sentence_len = 150;

    CLI::App* train = app.add_subcommand("train", "train class vectors from a dataset");
    add_common(*train, opts);
    train->add_option("dataset", dataset, "dataset dir with train/ and test/")->required();

    CLI::App* classify = app.add_subcommand("classify", "classify one text");
    add_common(*classify, opts);
    classify->add_option("--model", model, "trained model container")->required();
    classify->add_option("file", file, "input text file ('-' for stdin)");
    classify->add_option("--text", inline_text, "inline input text");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
    add_common(*eval, opts);
    eval->add_option("--model", model, "trained model container")->required();
    eval->add_option("dataset", dataset, "dataset dir with train/ and test/")->required();

    CLI::App* selftest = app.add_subcommand("selftest", "run built-in consistency checks");
    add_common(*selftest, opts);

    CLI::App* trace = app.add_subcommand("trace", "run a micro-op trace file");
    add_common(*trace, opts);
    trace->add_option("file", file, "trace file ('-' for stdin)")->required();

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(*synth, opts);
    synth->add_option("--languages", languages, "language count");
    synth->add_option("--train-len", train_len, "training symbols per language");
    synth->add_option("--sentences", sentences, "test sentences per language");
    synth->add_option("--sentence-len", sentence_len, "symbols per test sentence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(opts, dataset);
        if (classify->parsed()) return cmd_classify(opts, model, file, inline_text);
        if (eval->parsed()) return cmd_eval(opts, model, dataset);
        if (selftest->parsed()) return run_selftest(opts.quick, std::cout) == 0 ? 0 : 4;
        if (trace->parsed()) return cmd_trace(opts, file);
        if (synth->parsed()) return cmd_synth(opts, languages, train_len, sentences, sentence_len);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
