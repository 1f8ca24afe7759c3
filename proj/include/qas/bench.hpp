#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qas/bias.hpp"
#include "qas/engine.hpp"
#include "qas/errors.hpp"
#include "qas/exact_cover.hpp"
#include "qas/ising.hpp"
#include "qas/results.hpp"
#include "qas/rng.hpp"
#include "qas/schedule.hpp"
#include "qas/version.hpp"

namespace qas {

/// Which sampled configuration seeds the next round's bias in the iterative
/// scheme.
enum class BiasSource { best_so_far, best_of_round, last_sample };

inline std::string to_string(BiasSource source) {
    switch (source) {
    case BiasSource::best_so_far: return "best-so-far";
    case BiasSource::best_of_round: return "best-of-round";
    default: return "last-sample";
    }
}

/// Full description of an ensemble experiment. Everything downstream is a
/// pure function of this value; in particular the master seed pins every
/// instance, bias, and shot stream.
struct ExperimentConfig {
    std::vector<int> sizes;
    int instances_per_size = 100;
    int anneals = 30;
    std::vector<double> taus_us = {1.0, 15.0};
    std::vector<std::optional<int>> distances = {std::nullopt, 0, 1, 2, 3};
    double bias_strength = 1.0;
    Schedule schedule = Schedule::dw2000q_like(1.0); // tau replaced per cell
    std::uint64_t master_seed = 0;
    RunMode mode = RunMode::shots;
    EvolveOptions evolve;
    bool joint_rescale = false; // scale H_P + H_bias together (hardware path)
    BiasSource iterative_source = BiasSource::best_so_far;
    int max_restarts = 10000;
    int threads = 0; // 0: QAS_THREADS env var, then hardware concurrency

    void validate() const {
        if (sizes.empty())
            throw ParameterError("config needs at least one size");
        int min_size = std::numeric_limits<int>::max();
        for (int n : sizes) {
            if (n < 3 || n > kMaxEngineQubits)
                throw ParameterError("size " + std::to_string(n) +
                                     " outside engine range [3, " +
                                     std::to_string(kMaxEngineQubits) + "]");
            min_size = std::min(min_size, n);
        }
        if (instances_per_size < 1)
            throw ParameterError("instances per size must be >= 1");
        if (anneals < 1)
            throw ParameterError("anneals must be >= 1");
        if (taus_us.empty())
            throw ParameterError("config needs at least one tau");
        for (double tau : taus_us)
            if (!(tau >= 0.0) || !std::isfinite(tau))
                throw ParameterError("tau must be finite and non-negative");
        if (distances.empty())
            throw ParameterError("config needs at least one distance entry");
        for (const auto& d : distances)
            if (d) {
                if (*d < 0 || *d >= min_size)
                    throw ParameterError("distance " + std::to_string(*d) +
                                         " must satisfy 0 <= d < min(sizes)");
                if (!(bias_strength > 0.0))
                    throw ParameterError("biased cells need a positive bias strength");
            }
        if (max_restarts < 1)
            throw ParameterError("max restarts must be >= 1");
    }
};

struct ResultTable {
    ExperimentConfig config;
    std::vector<ResultRecord> records;
    std::vector<CellAggregate> aggregates;
};

namespace detail {

inline int resolve_thread_count(int requested, std::size_t tasks) {
    int count = requested;
    if (count <= 0)
        if (const char* env = std::getenv("QAS_THREADS"))
            count = std::atoi(env);
    if (count <= 0)
        count = static_cast<int>(std::thread::hardware_concurrency());
    if (count < 1)
        count = 1;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(count),
                                                  std::max<std::size_t>(tasks, 1)));
}

/// Clause costs of every configuration, from the unscaled encoding.
inline std::vector<double> cost_table(const ProblemInstance& instance) {
    const IsingModel raw = encode_ising(instance);
    DiagonalProblem diag = build_diagonal(raw);
    for (double& e : diag.energies)
        e += diag.offset;
    return std::move(diag.energies);
}

struct CellInputs {
    const ProblemInstance& instance;
    const IsingModel& raw_model;
    const IsingModel& scaled_model;
    const std::vector<double>& costs;
    const ExperimentConfig& config;
    std::uint64_t inst_seed = 0;
};

/// Run one (d, tau) cell for a prepared instance.
inline ResultRecord run_cell(const CellInputs& in, std::optional<int> d, double tau_us) {
    const ExperimentConfig& config = in.config;
    const std::uint64_t d_code =
        d ? static_cast<std::uint64_t>(*d) : kUnbiasedCode;
    ResultRecord record;
    record.n = in.instance.n();
    record.d = d;
    record.tau_us = tau_us;
    record.b = d ? config.bias_strength : 0.0;
    record.mode = config.mode;
    record.anneals = config.anneals;
    record.seed = derive_seed(derive_seed(in.inst_seed, d_code), tau_bits(tau_us));
    record.schedule_id = config.schedule.id();

    const SpinConfiguration& target = *in.instance.solution();
    BiasField bias = BiasField::null(in.instance.n());
    const IsingModel* model = &in.scaled_model;
    IsingModel joint_model(in.instance.n());
    if (d) {
        const std::uint64_t bias_seed =
            cell_seed(in.inst_seed, d_code, tau_us, SeedPurpose::bias);
        if (config.joint_rescale) {
            bias = make_bias(target, *d, config.bias_strength, bias_seed);
            auto joint = rescale_with_bias(in.raw_model, bias);
            joint_model = std::move(joint.model);
            bias = std::move(joint.bias);
            model = &joint_model;
        } else {
            bias = make_bias(target, *d, config.bias_strength, bias_seed);
        }
    }

    const DiagonalProblem diag = build_diagonal(*model, bias.is_null() ? nullptr : &bias);
    const StateVector state =
        evolve(diag, config.schedule.with_tau(tau_us), config.evolve);

    const int m = in.instance.num_clauses();
    if (config.mode == RunMode::exact) {
        record.p = success_probability(state, target);
        double mean_cost = 0.0;
        for (std::size_t k = 0; k < state.amplitudes.size(); ++k)
            mean_cost += std::norm(state.amplitudes[k]) * in.costs[k];
        record.mean_cost = mean_cost;
    } else {
        const std::uint64_t shot_seed =
            cell_seed(in.inst_seed, d_code, tau_us, SeedPurpose::shots);
        const auto shots = sample_shots(state, config.anneals, shot_seed);
        const std::uint64_t target_bits = target.to_bits();
        int successes = 0;
        double cost_sum = 0.0;
        for (const SpinConfiguration& shot : shots) {
            const std::uint64_t bits = shot.to_bits();
            if (bits == target_bits)
                ++successes;
            cost_sum += in.costs[bits];
        }
        record.success_count = successes;
        record.p = static_cast<double>(successes) / static_cast<double>(config.anneals);
        record.mean_cost = cost_sum / static_cast<double>(config.anneals);
    }
    record.cost_per_clause = m > 0 ? record.mean_cost / static_cast<double>(m) : 0.0;
    return record;
}

} // namespace detail

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Run the full ensemble: for every (N, alpha) generate an instance, then
/// evaluate every (d, tau) cell, either with exact success probabilities or
/// with shot sampling. Instances are independent tasks in a work pool; the
/// record order is fixed by the config, not by scheduling. Cell failures are
/// recorded with an error tag and the run continues.
inline ResultTable run_experiment(const ExperimentConfig& config,
                                  const ProgressCallback& progress = {}) {
    config.validate();

    struct Task {
        int n = 0;
        int alpha = 0;
    };
    std::vector<Task> tasks;
    for (int n : config.sizes)
        for (int alpha = 1; alpha <= config.instances_per_size; ++alpha)
            tasks.push_back({n, alpha});

    const std::size_t cells_per_task = config.distances.size() * config.taus_us.size();
    ResultTable table;
    table.config = config;
    table.records.resize(tasks.size() * cells_per_task);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size())
                return;
            const Task task = tasks[t];
            ResultRecord* out = table.records.data() + t * cells_per_task;
            const std::uint64_t inst_seed =
                instance_seed(config.master_seed, task.n, task.alpha);
            std::optional<std::string> task_error;
            std::optional<ProblemInstance> instance;
            IsingModel raw(task.n), scaled(task.n);
            std::vector<double> costs;
            try {
                instance = generate_instance(task.n, inst_seed, {config.max_restarts});
                instance->set_label("(N,alpha)=(" + std::to_string(task.n) + "," +
                                    std::to_string(task.alpha) + ")");
                raw = encode_ising(*instance);
                scaled = rescale(raw).model;
                costs = detail::cost_table(*instance);
            } catch (const std::exception& e) {
                task_error = e.what();
            }
            std::size_t slot = 0;
            for (const auto& d : config.distances) {
                for (double tau : config.taus_us) {
                    ResultRecord& record = out[slot++];
                    if (task_error) {
                        record.n = task.n;
                        record.alpha = task.alpha;
                        record.d = d;
                        record.tau_us = tau;
                        record.mode = config.mode;
                        record.anneals = config.anneals;
                        record.schedule_id = config.schedule.id();
                        record.error = task_error;
                        continue;
                    }
                    try {
                        record = detail::run_cell(
                            {*instance, raw, scaled, costs, config, inst_seed}, d, tau);
                    } catch (const std::exception& e) {
                        record.error = e.what();
                        record.d = d;
                        record.tau_us = tau;
                        record.mode = config.mode;
                        record.anneals = config.anneals;
                        record.schedule_id = config.schedule.id();
                    }
                    record.alpha = task.alpha;
                    record.n = task.n;
                }
            }
            const std::size_t finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, tasks.size());
            }
        }
    };

    const int threads = detail::resolve_thread_count(config.threads, tasks.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (std::thread& th : pool)
            th.join();
    }

    table.aggregates = aggregate(table.records);
    return table;
}

/// One round of the iterative bias scheme.
struct IterationRound {
    int round = 0;
    std::optional<SpinConfiguration> bias_sample; // absent in round 0
    SpinConfiguration best_sample;                // lowest-cost shot this round
    long long best_cost_round = 0;
    long long best_cost_so_far = 0;
    bool success = false;
};

struct IterativeTrace {
    std::vector<IterationRound> rounds;
    bool solved = false;
};

/// Iterative annealing: round 0 samples unbiased; each later round biases
/// toward a previously sampled configuration (the best seen so far by
/// default) and re-runs. Stops as soon as a sample reaches cost zero.
inline IterativeTrace iterative_annealing(const ProblemInstance& instance,
                                          const ExperimentConfig& config,
                                          int max_rounds) {
    if (config.mode != RunMode::shots)
        throw ModeError("iterative annealing needs shot mode");
    if (max_rounds < 1)
        throw ParameterError("max rounds must be >= 1");
    if (!(config.bias_strength > 0.0))
        throw ParameterError("iterative annealing needs a positive bias strength");
    const double tau = config.taus_us.front();
    const IsingModel raw = encode_ising(instance);
    const IsingModel scaled = rescale(raw).model;
    const std::vector<double> costs = detail::cost_table(instance);

    IterativeTrace trace;
    long long best_cost = std::numeric_limits<long long>::max();
    std::uint64_t best_bits = 0;
    SpinConfiguration best_sample;
    SpinConfiguration last_sample;

    for (int round = 0; round < max_rounds; ++round) {
        IterationRound row;
        row.round = round;
        BiasField bias = BiasField::null(instance.n());
        const IsingModel* model = &scaled;
        IsingModel joint_model(instance.n());
        if (round > 0) {
            SpinConfiguration source;
            switch (config.iterative_source) {
            case BiasSource::best_so_far: source = best_sample; break;
            case BiasSource::best_of_round: source = trace.rounds.back().best_sample; break;
            case BiasSource::last_sample: source = last_sample; break;
            }
            row.bias_sample = source;
            bias = bias_from_sample(source, config.bias_strength);
            if (config.joint_rescale) {
                BiasField raw_bias = bias_from_sample(source, config.bias_strength);
                auto joint = rescale_with_bias(raw, raw_bias);
                joint_model = std::move(joint.model);
                bias = std::move(joint.bias);
                model = &joint_model;
            }
        }
        const DiagonalProblem diag =
            build_diagonal(*model, bias.is_null() ? nullptr : &bias);
        const StateVector state =
            evolve(diag, config.schedule.with_tau(tau), config.evolve);
        const std::uint64_t shot_seed =
            cell_seed(config.master_seed, static_cast<std::uint64_t>(round), tau,
                      SeedPurpose::shots);
        const auto shots = sample_shots(state, config.anneals, shot_seed);

        long long round_best = std::numeric_limits<long long>::max();
        std::uint64_t round_bits = 0;
        for (const SpinConfiguration& shot : shots) {
            const std::uint64_t bits = shot.to_bits();
            const long long cost = static_cast<long long>(costs[bits]);
            if (cost < round_best || (cost == round_best && bits < round_bits)) {
                round_best = cost;
                round_bits = bits;
            }
        }
        last_sample = shots.back();
        row.best_sample = SpinConfiguration::from_bits(round_bits, instance.n());
        row.best_cost_round = round_best;
        if (round_best < best_cost || (round_best == best_cost && round_bits < best_bits)) {
            best_cost = round_best;
            best_bits = round_bits;
            best_sample = row.best_sample;
        }
        row.best_cost_so_far = best_cost;
        row.success = round_best == 0;
        trace.rounds.push_back(std::move(row));
        if (trace.rounds.back().success) {
            trace.solved = true;
            break;
        }
    }
    return trace;
}

// --- CSV and manifest output ------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), result.ptr);
}

inline std::string format_distance(const std::optional<int>& d) {
    return d ? std::to_string(*d) : "none";
}

} // namespace detail

inline void write_results_csv(std::ostream& out, const ResultTable& table) {
    out << "n,alpha,d,tau_us,b,mode,anneals,success_count,p,mean_cost,cost_per_clause,seed\n";
    for (const ResultRecord& r : table.records) {
        out << r.n << ',' << r.alpha << ',' << detail::format_distance(r.d) << ','
            << detail::format_double(r.tau_us) << ',' << detail::format_double(r.b)
            << ',' << to_string(r.mode) << ',' << r.anneals << ',';
        if (r.error) {
            out << ",,,," << r.seed << '\n';
            continue;
        }
        if (r.success_count)
            out << *r.success_count;
        out << ',' << detail::format_double(r.p) << ','
            << detail::format_double(r.mean_cost) << ','
            << detail::format_double(r.cost_per_clause) << ',' << r.seed << '\n';
    }
}

inline void write_aggregate_csv(std::ostream& out, const ResultTable& table) {
    out << "n,d,tau_us,p_mean,p_sem,cost_mean,cost_sem,solved_count\n";
    for (const CellAggregate& cell : table.aggregates) {
        out << cell.n << ',' << detail::format_distance(cell.d) << ','
            << detail::format_double(cell.tau_us) << ','
            << detail::format_double(cell.p_mean) << ',';
        if (cell.p_sem)
            out << detail::format_double(*cell.p_sem);
        out << ',' << detail::format_double(cell.cost_mean) << ',';
        if (cell.cost_sem)
            out << detail::format_double(*cell.cost_sem);
        out << ',';
        if (cell.solved_count)
            out << *cell.solved_count;
        out << '\n';
    }
}

inline void write_scatter_csv(std::ostream& out, const ResultTable& table) {
    out << "n,d,tau_us,alpha,p_unbiased,p_biased\n";
    for (const auto& d : table.config.distances) {
        if (!d)
            continue;
        for (double tau : table.config.taus_us) {
            const ScatterResult scatter = per_instance_scatter(table.records, *d, tau);
            for (const ScatterPoint& point : scatter.points)
                out << point.n << ',' << *d << ',' << detail::format_double(tau) << ','
                    << point.alpha << ',' << detail::format_double(point.p_unbiased)
                    << ',' << detail::format_double(point.p_biased) << '\n';
        }
    }
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& config) {
    nlohmann::ordered_json doc;
    doc["sizes"] = config.sizes;
    doc["instances_per_size"] = config.instances_per_size;
    doc["anneals"] = config.anneals;
    doc["taus_us"] = config.taus_us;
    auto distances = nlohmann::ordered_json::array();
    for (const auto& d : config.distances)
        if (d)
            distances.push_back(*d);
        else
            distances.push_back("none");
    doc["distances"] = std::move(distances);
    doc["bias_strength"] = config.bias_strength;
    doc["master_seed"] = config.master_seed;
    doc["mode"] = to_string(config.mode);
    doc["schedule"] = {{"id", config.schedule.id()},
                       {"kind", config.schedule.kind() == ScheduleKind::linear
                                    ? "linear"
                                    : "tabulated"}};
    if (config.schedule.kind() == ScheduleKind::tabulated) {
        auto rows = nlohmann::ordered_json::array();
        for (const ScheduleRow& row : config.schedule.table())
            rows.push_back({row.s, row.A, row.B});
        doc["schedule"]["table"] = std::move(rows);
    } else {
        const auto [a0, b0] = config.schedule.evaluate(0.0);
        const auto [a1, b1] = config.schedule.evaluate(1.0);
        (void)b0;
        (void)a1;
        doc["schedule"]["a_max"] = a0;
        doc["schedule"]["b_max"] = b1;
    }
    doc["engine"] = {
        {"dt_us", config.evolve.dt_us},
        {"max_phase_per_step", config.evolve.max_phase_per_step},
        {"driver_sign",
         config.evolve.driver_sign == DriverSign::negative ? "negative" : "positive"},
        {"bias_mode", config.evolve.bias_mode == BiasMode::with_problem
                          ? "with-problem"
                          : "with-driver"},
    };
    doc["joint_rescale"] = config.joint_rescale;
    doc["iterative_source"] = to_string(config.iterative_source);
    doc["max_restarts"] = config.max_restarts;
    return doc;
}

/// Deterministic run identifier: hash of the reproducibility-relevant config.
inline std::string run_id(const ExperimentConfig& config) {
    const std::string canonical = config_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    h = splitmix64(h);
    std::array<char, 17> buf{};
    static constexpr char digits[] = "0123456789abcdef";
    for (int i = 0; i < 16; ++i)
        buf[static_cast<std::size_t>(i)] = digits[(h >> (60 - 4 * i)) & 0xf];
    return std::string(buf.data(), 16);
}

inline void write_manifest_json(std::ostream& out, const ResultTable& table) {
    nlohmann::ordered_json doc;
    doc["run_id"] = run_id(table.config);
    doc["version"] = kVersion;
    doc["config"] = config_json(table.config);
    doc["threads"] = table.config.threads;
    int failed = 0;
    auto failed_cells = nlohmann::ordered_json::array();
    for (const ResultRecord& r : table.records)
        if (r.error) {
            ++failed;
            failed_cells.push_back({{"n", r.n},
                                    {"alpha", r.alpha},
                                    {"d", detail::format_distance(r.d)},
                                    {"tau_us", r.tau_us},
                                    {"error", *r.error}});
        }
    doc["cells"] = table.records.size();
    doc["failed_cells"] = failed;
    if (failed > 0)
        doc["failures"] = std::move(failed_cells);
    out << doc.dump(2) << '\n';
}

/// Write results.csv, aggregate.csv, scatter.csv, and manifest.json into dir.
inline void write_run_files(const ResultTable& table, const std::filesystem::path& dir,
                            const std::string& results_name = "results.csv") {
    std::filesystem::create_directories(dir);
    const auto open = [&](const std::string& name) {
        std::ofstream out(dir / name);
        if (!out)
            throw Error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open(results_name);
        write_results_csv(out, table);
    }
    {
        auto out = open("aggregate.csv");
        write_aggregate_csv(out, table);
    }
    {
        auto out = open("scatter.csv");
        write_scatter_csv(out, table);
    }
    {
        auto out = open("manifest.json");
        write_manifest_json(out, table);
    }
}

} // namespace qas
