#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qas/bench.hpp"
#include "qas/io.hpp"
#include "qas/qas.hpp"

namespace qas::cli {

/// Bad flag values or a malformed config file: reported as usage errors
/// (exit 1), unlike failures during execution (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const int value = std::stoi(text, &pos);
        if (pos != text.size())
            throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw UsageError("bad " + what + ": '" + text + "'");
    }
}

inline double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        if (pos != text.size())
            throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw UsageError("bad " + what + ": '" + text + "'");
    }
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, sep))
        parts.push_back(item);
    return parts;
}

/// Size lists: comma-separated values and/or `a..b` ranges (inclusive,
/// step 2), e.g. "8..14" or "8,9,12..16".
inline std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> sizes;
    for (const std::string& part : split(text, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            sizes.push_back(parse_int(part, "size"));
            continue;
        }
        const int lo = parse_int(part.substr(0, dots), "size range start");
        const int hi = parse_int(part.substr(dots + 2), "size range end");
        if (hi < lo)
            throw UsageError("empty size range '" + part + "'");
        for (int n = lo; n <= hi; n += 2)
            sizes.push_back(n);
    }
    if (sizes.empty())
        throw UsageError("no sizes given");
    return sizes;
}

inline std::optional<int> parse_distance(const std::string& text) {
    if (text == "none")
        return std::nullopt;
    return parse_int(text, "distance");
}

inline std::vector<std::optional<int>> parse_distances(const std::string& text) {
    std::vector<std::optional<int>> distances;
    for (const std::string& part : split(text, ','))
        distances.push_back(parse_distance(part));
    if (distances.empty())
        throw UsageError("no distances given");
    return distances;
}

inline std::vector<double> parse_taus(const std::string& text) {
    std::vector<double> taus;
    for (const std::string& part : split(text, ','))
        taus.push_back(parse_number(part, "tau"));
    if (taus.empty())
        throw UsageError("no tau values given");
    return taus;
}

inline RunMode parse_mode(const std::string& text) {
    if (text == "exact")
        return RunMode::exact;
    if (text == "shots")
        return RunMode::shots;
    throw UsageError("mode must be 'exact' or 'shots', got '" + text + "'");
}

inline BiasSource parse_bias_source(const std::string& text) {
    if (text == "best-so-far")
        return BiasSource::best_so_far;
    if (text == "best-of-round")
        return BiasSource::best_of_round;
    if (text == "last-sample")
        return BiasSource::last_sample;
    throw UsageError("bias source must be best-so-far, best-of-round, or last-sample");
}

inline DriverSign parse_driver_sign(const std::string& text) {
    if (text == "negative")
        return DriverSign::negative;
    if (text == "positive")
        return DriverSign::positive;
    throw UsageError("driver sign must be 'negative' or 'positive'");
}

inline BiasMode parse_bias_mode(const std::string& text) {
    if (text == "with-problem")
        return BiasMode::with_problem;
    if (text == "with-driver")
        return BiasMode::with_driver;
    throw UsageError("bias mode must be 'with-problem' or 'with-driver'");
}

/// Schedule selector: "linear", "dw2000q", or a CSV file path.
inline Schedule parse_schedule(const std::string& text, double a_max, double b_max) {
    if (text == "linear")
        return Schedule::linear(a_max, b_max, 1.0);
    if (text == "dw2000q" || text == "dw2000q-like")
        return Schedule::dw2000q_like(1.0);
    try {
        return Schedule::from_csv(text, 1.0);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

/// Apply a JSON config file on top of the defaults. Field names match the
/// manifest's config block.
inline void apply_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    try {
        if (doc.contains("sizes"))
            config.sizes = doc["sizes"].get<std::vector<int>>();
        if (doc.contains("instances_per_size"))
            config.instances_per_size = doc["instances_per_size"].get<int>();
        if (doc.contains("anneals"))
            config.anneals = doc["anneals"].get<int>();
        if (doc.contains("taus_us"))
            config.taus_us = doc["taus_us"].get<std::vector<double>>();
        if (doc.contains("distances")) {
            config.distances.clear();
            for (const auto& entry : doc["distances"])
                if (entry.is_string())
                    config.distances.push_back(parse_distance(entry.get<std::string>()));
                else
                    config.distances.push_back(entry.get<int>());
        }
        if (doc.contains("bias_strength"))
            config.bias_strength = doc["bias_strength"].get<double>();
        if (doc.contains("master_seed"))
            config.master_seed = doc["master_seed"].get<std::uint64_t>();
        if (doc.contains("mode"))
            config.mode = parse_mode(doc["mode"].get<std::string>());
        if (doc.contains("schedule")) {
            const auto& sched = doc["schedule"];
            const std::string kind = sched.value("kind", "dw2000q-like");
            if (kind == "linear") {
                config.schedule = Schedule::linear(sched.value("a_max", 6.0),
                                                   sched.value("b_max", 12.0), 1.0);
            } else if (kind == "dw2000q-like") {
                config.schedule = Schedule::dw2000q_like(1.0);
            } else if (kind == "csv") {
                config.schedule = Schedule::from_csv(sched.at("path").get<std::string>(), 1.0);
            } else if (kind == "tabulated") {
                std::vector<ScheduleRow> rows;
                for (const auto& row : sched.at("table"))
                    rows.push_back({row.at(0).get<double>(), row.at(1).get<double>(),
                                    row.at(2).get<double>()});
                config.schedule = Schedule::tabulated(rows, 1.0, sched.value("id", "tabulated"));
            } else {
                throw UsageError("unknown schedule kind '" + kind + "'");
            }
        }
        if (doc.contains("engine")) {
            const auto& engine = doc["engine"];
            if (engine.contains("dt_us"))
                config.evolve.dt_us = engine["dt_us"].get<double>();
            if (engine.contains("max_phase_per_step"))
                config.evolve.max_phase_per_step = engine["max_phase_per_step"].get<double>();
            if (engine.contains("driver_sign"))
                config.evolve.driver_sign =
                    parse_driver_sign(engine["driver_sign"].get<std::string>());
            if (engine.contains("bias_mode"))
                config.evolve.bias_mode =
                    parse_bias_mode(engine["bias_mode"].get<std::string>());
        }
        if (doc.contains("joint_rescale"))
            config.joint_rescale = doc["joint_rescale"].get<bool>();
        if (doc.contains("iterative_source"))
            config.iterative_source =
                parse_bias_source(doc["iterative_source"].get<std::string>());
        if (doc.contains("max_restarts"))
            config.max_restarts = doc["max_restarts"].get<int>();
        if (doc.contains("threads"))
            config.threads = doc["threads"].get<int>();
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError("config file " + path + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
}

inline std::string format_spins(const SpinConfiguration& config) {
    std::string text;
    text.reserve(config.size());
    for (int spin : config.to_ints())
        text.push_back(spin > 0 ? '+' : '-');
    return text;
}

/// Shared flag bundle for subcommands that run the annealing engine.
struct EngineFlags {
    std::string schedule = "dw2000q";
    double a_max = 6.0;
    double b_max = 12.0;
    double dt_us = 0.0;
    double max_phase = 0.05;
    std::string driver_sign = "negative";
    std::string bias_mode = "with-problem";
    bool joint_rescale = false;

    void attach(CLI::App* app) {
        app->add_option("--schedule", schedule,
                        "Schedule: linear, dw2000q, or a CSV file path");
        app->add_option("--a-max", a_max, "Driver envelope at s=0 for --schedule linear");
        app->add_option("--b-max", b_max, "Problem envelope at s=1 for --schedule linear");
        app->add_option("--dt", dt_us, "Fixed integrator step in microseconds (0 = auto)");
        app->add_option("--max-phase", max_phase,
                        "Phase-per-step bound driving the automatic step count");
        app->add_option("--driver-sign", driver_sign,
                        "Driver term sign: negative (default) or positive");
        app->add_option("--bias-mode", bias_mode,
                        "Bias envelope: with-problem (default) or with-driver");
        app->add_flag("--joint-rescale", joint_rescale,
                      "Rescale problem and bias fields together into hardware ranges");
    }

    void apply(CLI::App* app, ExperimentConfig& config) const {
        if (app->count("--schedule"))
            config.schedule = parse_schedule(schedule, a_max, b_max);
        else if (app->count("--a-max") || app->count("--b-max"))
            config.schedule = Schedule::linear(a_max, b_max, 1.0);
        if (app->count("--dt"))
            config.evolve.dt_us = dt_us;
        if (app->count("--max-phase"))
            config.evolve.max_phase_per_step = max_phase;
        if (app->count("--driver-sign"))
            config.evolve.driver_sign = parse_driver_sign(driver_sign);
        if (app->count("--bias-mode"))
            config.evolve.bias_mode = parse_bias_mode(bias_mode);
        if (app->count("--joint-rescale"))
            config.joint_rescale = joint_rescale;
    }
};

inline int run_generate(int n, int count, std::uint64_t seed, const std::string& out_dir,
                        int max_restarts) {
    std::filesystem::create_directories(out_dir);
    for (int alpha = 1; alpha <= count; ++alpha) {
        ProblemInstance instance =
            generate_instance(n, instance_seed(seed, n, alpha), {max_restarts});
        instance.set_label("(N,alpha)=(" + std::to_string(n) + "," +
                           std::to_string(alpha) + ")");
        save_instance(instance,
                      std::filesystem::path(out_dir) / instance_file_name(n, alpha));
    }
    std::cerr << "generated " << count << " instance" << (count == 1 ? "" : "s")
              << " at n=" << n << " in " << out_dir << "\n";
    return 0;
}

inline int run_encode(const std::string& in_path, const std::string& out_path,
                      bool keep_raw) {
    const ProblemInstance instance = load_instance(in_path);
    IsingModel model = encode_ising(instance);
    if (!keep_raw)
        model = rescale(model).model;
    if (out_path.empty()) {
        save_ising_model(model, std::cout);
    } else {
        save_ising_model(model, std::filesystem::path(out_path));
    }
    return 0;
}

inline int run_validate(const std::vector<std::string>& paths) {
    std::vector<std::filesystem::path> files;
    for (const std::string& path : paths) {
        if (std::filesystem::is_directory(path)) {
            for (const auto& entry : std::filesystem::directory_iterator(path))
                if (entry.path().extension() == ".json")
                    files.push_back(entry.path());
        } else {
            files.emplace_back(path);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no instance files found\n";
        return 2;
    }
    bool all_ok = true;
    for (const auto& file : files) {
        try {
            const ProblemInstance instance = load_instance(file);
            const auto solutions = enumerate_solutions(instance);
            if (solutions.size() != 1)
                throw ValidationError("expected exactly one solution, found " +
                                      std::to_string(solutions.size()));
            if (instance.solution() && *instance.solution() != solutions.front())
                throw ValidationError("stored solution is not the unique optimum");
            std::cout << file.string() << ": ok\n";
        } catch (const std::exception& e) {
            std::cout << file.string() << ": FAIL (" << e.what() << ")\n";
            all_ok = false;
        }
    }
    return all_ok ? 0 : 2;
}

inline int cli_main_impl(int argc, const char* const* argv) {
    CLI::App app{"Biased quantum annealing sampler for exact-cover instances"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // generate
    auto* generate = app.add_subcommand("generate", "Generate unique-solution instances");
    int gen_n = 8;
    int gen_count = 1;
    std::uint64_t gen_seed = 0;
    std::string gen_out_dir = ".";
    int gen_restarts = 10000;
    generate->add_option("--n", gen_n, "Number of spins")->required();
    generate->add_option("--count", gen_count, "Number of instances");
    generate->add_option("--seed", gen_seed, "Master seed");
    generate->add_option("--out-dir", gen_out_dir, "Output directory");
    generate->add_option("--max-restarts", gen_restarts, "Generation restart budget");

    // encode
    auto* encode = app.add_subcommand("encode", "Encode an instance as an Ising model");
    std::string enc_in;
    std::string enc_out;
    bool enc_raw = false;
    encode->add_option("instance", enc_in, "Instance JSON file")->required();
    encode->add_option("--out", enc_out, "Output file (default: stdout)");
    encode->add_flag("--raw", enc_raw, "Skip rescaling into hardware coupling ranges");

    // anneal
    auto* anneal = app.add_subcommand("anneal", "Run one instance through one anneal cell");
    std::string ann_instance;
    std::string ann_d = "none";
    double ann_tau = 1.0;
    double ann_b = 1.0;
    int ann_anneals = 30;
    std::string ann_mode = "exact";
    std::uint64_t ann_seed = 0;
    std::string ann_out;
    EngineFlags ann_engine;
    anneal->add_option("instance", ann_instance, "Instance JSON file")->required();
    anneal->add_option("--d", ann_d, "Bias distance from the solution, or 'none'");
    anneal->add_option("--tau", ann_tau, "Annealing time in microseconds");
    anneal->add_option("--b", ann_b, "Bias field strength");
    anneal->add_option("--anneals", ann_anneals, "Shots per cell (shot mode)");
    anneal->add_option("--mode", ann_mode, "exact or shots");
    anneal->add_option("--seed", ann_seed, "Seed for bias placement and shots");
    anneal->add_option("--out", ann_out, "Results CSV file (default: stdout)");
    ann_engine.attach(anneal);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a full (size, instance, d, tau) sweep");
    std::string sw_sizes = "8";
    int sw_count = 100;
    int sw_anneals = 30;
    std::string sw_taus = "1";
    std::string sw_distances = "none,0,1,2,3";
    double sw_b = 1.0;
    std::string sw_mode = "shots";
    std::uint64_t sw_seed = 0;
    int sw_threads = 0;
    int sw_restarts = 10000;
    std::string sw_config;
    std::string sw_out;
    std::string sw_out_dir;
    bool sw_quiet = false;
    EngineFlags sw_engine;
    sweep->add_option("--sizes", sw_sizes, "Sizes: comma list and/or a..b ranges (step 2)");
    sweep->add_option("--count", sw_count, "Instances per size");
    sweep->add_option("--anneals", sw_anneals, "Shots per cell");
    sweep->add_option("--tau", sw_taus, "Annealing times in microseconds (comma list)");
    sweep->add_option("--distances", sw_distances,
                      "Bias distances (comma list, 'none' for unbiased)");
    sweep->add_option("--b", sw_b, "Bias field strength");
    sweep->add_option("--mode", sw_mode, "exact or shots");
    sweep->add_option("--seed", sw_seed, "Master seed");
    sweep->add_option("--threads", sw_threads,
                      "Worker threads (0: QAS_THREADS env, then hardware count)");
    sweep->add_option("--max-restarts", sw_restarts, "Generation restart budget");
    sweep->add_option("--config", sw_config, "JSON config file (flags override it)");
    sweep->add_option("--out", sw_out, "Results CSV path (siblings written alongside)");
    sweep->add_option("--out-dir", sw_out_dir, "Output directory");
    sweep->add_flag("--quiet", sw_quiet, "Suppress progress output");
    sw_engine.attach(sweep);

    // iterate
    auto* iterate = app.add_subcommand("iterate", "Iterative bias refinement on one instance");
    std::string it_instance;
    int it_rounds = 5;
    double it_tau = 1.0;
    double it_b = 1.0;
    int it_anneals = 30;
    std::uint64_t it_seed = 0;
    std::string it_source = "best-so-far";
    std::string it_out;
    EngineFlags it_engine;
    iterate->add_option("instance", it_instance, "Instance JSON file")->required();
    iterate->add_option("--rounds", it_rounds, "Maximum number of rounds");
    iterate->add_option("--tau", it_tau, "Annealing time in microseconds");
    iterate->add_option("--b", it_b, "Bias field strength");
    iterate->add_option("--anneals", it_anneals, "Shots per round");
    iterate->add_option("--seed", it_seed, "Master seed");
    iterate->add_option("--source", it_source,
                        "Bias source: best-so-far, best-of-round, or last-sample");
    iterate->add_option("--out", it_out, "Trace CSV file (default: stdout)");
    it_engine.attach(iterate);

    // validate
    auto* validate = app.add_subcommand("validate", "Check instance files for unique solutions");
    std::vector<std::string> val_paths;
    validate->add_option("paths", val_paths, "Instance files or directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*generate)
            return run_generate(gen_n, gen_count, gen_seed, gen_out_dir, gen_restarts);

        if (*encode)
            return run_encode(enc_in, enc_out, enc_raw);

        if (*anneal) {
            ExperimentConfig config;
            config.sizes = {3}; // unused by single-instance runs; the file fixes n
            config.anneals = ann_anneals;
            config.taus_us = {ann_tau};
            config.distances = {parse_distance(ann_d)};
            config.bias_strength = ann_b;
            config.mode = parse_mode(ann_mode);
            config.master_seed = ann_seed;
            ann_engine.apply(anneal, config);

            const ProblemInstance instance = load_instance(ann_instance);
            if (!instance.solution())
                throw ValidationError("instance file has no stored solution");
            const IsingModel raw = encode_ising(instance);
            const IsingModel scaled = rescale(raw).model;
            const std::vector<double> costs = detail::cost_table(instance);
            ResultRecord record = detail::run_cell(
                {instance, raw, scaled, costs, config, ann_seed},
                config.distances.front(), ann_tau);
            ResultTable table;
            table.config = config;
            table.records.push_back(std::move(record));
            if (ann_out.empty()) {
                write_results_csv(std::cout, table);
            } else {
                std::ofstream out(ann_out);
                if (!out)
                    throw Error("cannot write " + ann_out);
                write_results_csv(out, table);
            }
            return 0;
        }

        if (*sweep) {
            ExperimentConfig config;
            if (sweep->count("--config"))
                apply_config_file(config, sw_config);
            if (sweep->count("--sizes"))
                config.sizes = parse_sizes(sw_sizes);
            else if (config.sizes.empty())
                config.sizes = parse_sizes(sw_sizes);
            if (sweep->count("--count"))
                config.instances_per_size = sw_count;
            if (sweep->count("--anneals"))
                config.anneals = sw_anneals;
            if (sweep->count("--tau"))
                config.taus_us = parse_taus(sw_taus);
            if (sweep->count("--distances"))
                config.distances = parse_distances(sw_distances);
            if (sweep->count("--b"))
                config.bias_strength = sw_b;
            if (sweep->count("--mode"))
                config.mode = parse_mode(sw_mode);
            if (sweep->count("--seed"))
                config.master_seed = sw_seed;
            if (sweep->count("--threads"))
                config.threads = sw_threads;
            if (sweep->count("--max-restarts"))
                config.max_restarts = sw_restarts;
            sw_engine.apply(sweep, config);
            config.validate();

            ProgressCallback progress;
            if (!sw_quiet) {
                progress = [](std::size_t done, std::size_t total) {
                    const std::size_t step = std::max<std::size_t>(1, total / 20);
                    if (done % step == 0 || done == total)
                        std::cerr << "progress: " << done << "/" << total
                                  << " instances\n";
                };
            }
            const ResultTable table = run_experiment(config, progress);

            std::filesystem::path dir;
            std::string results_name = "results.csv";
            if (!sw_out.empty()) {
                const std::filesystem::path out_path(sw_out);
                dir = out_path.parent_path();
                if (dir.empty())
                    dir = ".";
                results_name = out_path.filename().string();
            } else if (!sw_out_dir.empty()) {
                dir = sw_out_dir;
            } else {
                dir = std::filesystem::path("out") / run_id(config);
            }
            write_run_files(table, dir, results_name);
            std::cout << dir.string() << "\n";
            return 0;
        }

        if (*iterate) {
            ExperimentConfig config;
            config.sizes = {3}; // unused by single-instance runs; the file fixes n
            config.anneals = it_anneals;
            config.taus_us = {it_tau};
            config.bias_strength = it_b;
            config.mode = RunMode::shots;
            config.master_seed = it_seed;
            config.iterative_source = parse_bias_source(it_source);
            it_engine.apply(iterate, config);

            const ProblemInstance instance = load_instance(it_instance);
            const IterativeTrace trace = iterative_annealing(instance, config, it_rounds);

            std::ostream* out = &std::cout;
            std::ofstream file;
            if (!it_out.empty()) {
                file.open(it_out);
                if (!file)
                    throw Error("cannot write " + it_out);
                out = &file;
            }
            *out << "round,bias_from,best_sample,best_cost_round,best_cost_so_far,success\n";
            for (const IterationRound& round : trace.rounds)
                *out << round.round << ','
                     << (round.bias_sample ? format_spins(*round.bias_sample) : "") << ','
                     << format_spins(round.best_sample) << ',' << round.best_cost_round
                     << ',' << round.best_cost_so_far << ',' << (round.success ? 1 : 0)
                     << '\n';
            return 0;
        }

        if (*validate)
            return run_validate(val_paths);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace qas::cli

namespace qas {

inline int cli_main(int argc, const char* const* argv) {
    return cli::cli_main_impl(argc, argv);
}

} // namespace qas
