// Acceptance gate: one self-contained check per release criterion, run all or
// one by number. Prints exactly one PASS/FAIL line per criterion and exits
// nonzero if any selected check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <qas/qas.hpp>

#include "reference_integrator.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

// Fixed seed for the trend-criterion ensembles; everything downstream derives
// from it, so every run of this binary sees the same instances, biases, and
// shot streams.
constexpr std::uint64_t kEnsembleSeed = 1;

// ---------------------------------------------------------------------------
// 1. Encoding equivalence: spin-model energies reproduce clause costs exactly.
Outcome criterion_1() {
    const auto start = Clock::now();
    qas::Rng picker(20260822);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4 + static_cast<int>(picker.below(9)); // 4..12
        const qas::ProblemInstance instance = qas::generate_instance(n, picker.next());
        const qas::IsingModel model = qas::encode_ising(instance);
        for (std::uint64_t bits = 0; bits < (1ull << n); ++bits) {
            const auto config = qas::SpinConfiguration::from_bits(bits, n);
            const double energy = qas::ising_energy(model, config);
            const double cost = static_cast<double>(qas::total_cost(instance, config));
            if (energy != cost)
                return {false, "instance " + std::to_string(trial) + " (n=" +
                                   std::to_string(n) + ") config " + std::to_string(bits) +
                                   ": energy " + fmt(energy) + " != cost " + fmt(cost)};
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 10.0)
        return {false, "all energies equal but runtime " + fmt(elapsed) + "s >= 10s"};
    return {true, "50 instances, every configuration energy equals its clause cost exactly (" +
                      fmt(elapsed, 3) + "s)"};
}

// ---------------------------------------------------------------------------
// 2. Generation: every generated instance has exactly one optimal assignment.
Outcome criterion_2() {
    const auto start = Clock::now();
    for (int n : {8, 10, 12}) {
        for (int alpha = 1; alpha <= 100; ++alpha) {
            const qas::ProblemInstance instance =
                qas::generate_instance(n, qas::instance_seed(2, n, alpha));
            const auto solutions = qas::enumerate_solutions(instance);
            if (solutions.size() != 1)
                return {false, "n=" + std::to_string(n) + " alpha=" + std::to_string(alpha) +
                                   " has " + std::to_string(solutions.size()) + " solutions"};
            if (*instance.solution() != solutions.front())
                return {false, "n=" + std::to_string(n) + " alpha=" + std::to_string(alpha) +
                                   " stored solution is not the enumerated optimum"};
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 60.0)
        return {false, "all unique but runtime " + fmt(elapsed) + "s >= 60s"};
    return {true, "300 instances (n=8,10,12), each with exactly one solution (" +
                      fmt(elapsed, 3) + "s)"};
}

// ---------------------------------------------------------------------------
// 3. Norm conservation at n=12 with the automatic step rule, both schedules.
Outcome criterion_3() {
    const qas::ProblemInstance instance =
        qas::generate_instance(12, qas::instance_seed(kEnsembleSeed, 12, 1));
    const qas::IsingModel scaled = qas::rescale(qas::encode_ising(instance)).model;
    const qas::DiagonalProblem diag = qas::build_diagonal(scaled);
    double worst = 0.0;
    for (const qas::Schedule& schedule :
         {qas::Schedule::dw2000q_like(0.01), qas::Schedule::linear(6.0, 12.0, 0.01)}) {
        const qas::StateVector state = qas::evolve(diag, schedule, {});
        worst = std::max(worst, std::abs(state.norm_squared() - 1.0));
    }
    if (worst >= 1e-8)
        return {false, "max |norm^2 - 1| = " + fmt(worst, 3) + " >= 1e-8"};
    return {true, "n=12, tau=0.01us, both schedule families: max |norm^2 - 1| = " +
                      fmt(worst, 3)};
}

// ---------------------------------------------------------------------------
// 4. Quench limit: zero anneal time leaves the uniform superposition.
Outcome criterion_4() {
    const int n = 10;
    const qas::ProblemInstance instance =
        qas::generate_instance(n, qas::instance_seed(kEnsembleSeed, n, 1));
    const qas::DiagonalProblem diag =
        qas::build_diagonal(qas::rescale(qas::encode_ising(instance)).model);
    double worst = 0.0;
    for (const qas::Schedule& schedule :
         {qas::Schedule::dw2000q_like(0.0), qas::Schedule::linear(6.0, 12.0, 0.0)}) {
        const qas::StateVector state = qas::evolve(diag, schedule, {});
        const double p = qas::success_probability(state, *instance.solution());
        worst = std::max(worst, std::abs(p - std::pow(2.0, -n)));
    }
    if (worst >= 1e-9)
        return {false, "max |p - 2^-10| = " + fmt(worst, 3) + " >= 1e-9"};
    return {true, "tau=0 yields p = 2^-10 within " + fmt(worst, 3)};
}

// ---------------------------------------------------------------------------
// 5. One-spin cross-check against a dense RK4 integrator + step-halving order.
Outcome criterion_5() {
    qas::IsingModel model(1);
    model.fields = {1.0};
    const qas::DiagonalProblem diag = qas::build_diagonal(model);
    const auto target = qas::SpinConfiguration::from_bits(0, 1);

    std::string summary;
    for (double tau : {5e-4, 1e-3, 2e-3}) {
        const qas::Schedule schedule = qas::Schedule::linear(6.0, 12.0, tau);
        const long long auto_steps = qas::detail::evolve_step_count(tau, schedule, {});
        const int ref_steps =
            static_cast<int>(std::max<long long>(20000, 64 * auto_steps));
        const double p_ref = qas::testing::rk4_success_probability(
            model, nullptr, schedule, ref_steps, 0);

        const double p_auto =
            qas::success_probability(qas::evolve(diag, schedule, {}), target);
        const double err_full = std::abs(p_auto - p_ref);
        if (err_full >= 1e-6)
            return {false, "tau=" + fmt(tau) + ": |p - p_ref| = " + fmt(err_full, 3) +
                               " >= 1e-6"};

        qas::EvolveOptions halved;
        halved.dt_us = tau / (2.0 * static_cast<double>(auto_steps));
        const double err_half = std::abs(
            qas::success_probability(qas::evolve(diag, schedule, halved), target) - p_ref);
        if (err_half <= 0.0)
            return {false, "tau=" + fmt(tau) + ": halved-step error vanished; cannot "
                               "measure the convergence order"};
        const double ratio = err_full / err_half;
        if (ratio < 3.0 || ratio > 5.0)
            return {false, "tau=" + fmt(tau) + ": halving ratio " + fmt(ratio, 3) +
                               " outside [3, 5]"};
        if (!summary.empty())
            summary += ", ";
        summary += "tau=" + fmt(tau) + " err=" + fmt(err_full, 2) + " ratio=" + fmt(ratio, 3);
    }
    return {true, "one-spin probabilities match the dense reference (" + summary + ")"};
}

// ---------------------------------------------------------------------------
// 6. Adiabatic limit: a doubling search finds tau with p > 0.99 at n=6.
Outcome criterion_6() {
    const auto start = Clock::now();
    double longest = 0.0;
    for (int alpha = 1; alpha <= 10; ++alpha) {
        const qas::ProblemInstance instance =
            qas::generate_instance(6, qas::instance_seed(kEnsembleSeed, 6, alpha));
        const qas::DiagonalProblem diag =
            qas::build_diagonal(qas::rescale(qas::encode_ising(instance)).model);
        bool found = false;
        double tau = 0.01;
        for (int step = 0; step < 10; ++step, tau *= 2.0) {
            const qas::StateVector state =
                qas::evolve(diag, qas::Schedule::dw2000q_like(tau), {});
            if (qas::success_probability(state, *instance.solution()) > 0.99) {
                found = true;
                break;
            }
        }
        if (!found)
            return {false, "instance " + std::to_string(alpha) +
                               ": p <= 0.99 up to tau=" + fmt(tau / 2.0) + "us"};
        longest = std::max(longest, tau);
    }
    return {true, "10 instances at n=6 all reach p > 0.99; slowest needs tau=" +
                      fmt(longest) + "us (" + fmt(seconds_since(start), 3) + "s)"};
}

// ---------------------------------------------------------------------------
// Shared ensemble for the two trend criteria: 20 instances at n=10, exact
// mode, bias strength 1. tau_short is picked by a doubling ladder as the
// first anneal time whose mean unbiased success probability lands in
// [0.05, 0.5]; tau_long = 15 * tau_short.
struct TrendData {
    std::string error;
    double tau_short = 0.0;
    double tau_long = 0.0;
    qas::ResultTable table;
    double elapsed_s = 0.0;

    const qas::CellAggregate* cell(std::optional<int> d, double tau) const {
        for (const qas::CellAggregate& c : table.aggregates)
            if (c.d == d && c.tau_us == tau)
                return &c;
        return nullptr;
    }
};

qas::ExperimentConfig trend_config() {
    qas::ExperimentConfig config;
    config.sizes = {10};
    config.instances_per_size = 20;
    config.mode = qas::RunMode::exact;
    config.master_seed = kEnsembleSeed;
    config.bias_strength = 1.0;
    return config;
}

const TrendData& trend_data() {
    static const TrendData data = [] {
        TrendData d;
        const auto start = Clock::now();
        for (double tau : {0.0005, 0.001, 0.002, 0.004, 0.008}) {
            qas::ExperimentConfig config = trend_config();
            config.distances = {std::nullopt};
            config.taus_us = {tau};
            const qas::ResultTable probe = qas::run_experiment(config);
            if (probe.aggregates.size() != 1) {
                d.error = "unbiased ladder run produced no aggregate";
                return d;
            }
            const double mean = probe.aggregates.front().p_mean;
            if (mean >= 0.05 && mean <= 0.5) {
                d.tau_short = tau;
                break;
            }
            if (mean > 0.5)
                break; // already past the window; no shorter tau qualifies
        }
        if (d.tau_short == 0.0) {
            d.error = "no ladder tau gives mean unbiased p in [0.05, 0.5]";
            return d;
        }
        d.tau_long = 15.0 * d.tau_short;
        qas::ExperimentConfig config = trend_config();
        config.distances = {std::nullopt, 0, 1, 2, 3};
        config.taus_us = {d.tau_short, d.tau_long};
        d.table = qas::run_experiment(config);
        for (const qas::ResultRecord& r : d.table.records)
            if (r.error) {
                d.error = "ensemble cell failed: " + *r.error;
                return d;
            }
        d.elapsed_s = seconds_since(start);
        return d;
    }();
    return data;
}

// ---------------------------------------------------------------------------
// 7. Bias enhancement trend at fixed short anneal time.
Outcome criterion_7() {
    const TrendData& data = trend_data();
    if (!data.error.empty())
        return {false, data.error};

    const qas::CellAggregate* unbiased = data.cell(std::nullopt, data.tau_short);
    std::vector<const qas::CellAggregate*> by_d;
    for (int d = 0; d <= 3; ++d)
        by_d.push_back(data.cell(d, data.tau_short));
    if (!unbiased || by_d[0] == nullptr || by_d[1] == nullptr || by_d[2] == nullptr ||
        by_d[3] == nullptr)
        return {false, "missing aggregate cells at tau_short"};

    std::string trend = "unb " + fmt(unbiased->p_mean, 3);
    for (const auto* cell : by_d)
        trend += " > d" + std::to_string(*cell->d) + " " + fmt(cell->p_mean, 3);

    if (!(by_d[0]->p_mean > unbiased->p_mean))
        return {false, "mean p with a fully aligned bias (" + fmt(by_d[0]->p_mean, 3) +
                           ") does not exceed unbiased (" + fmt(unbiased->p_mean, 3) + ")"};

    int inversions = 0;
    for (int i = 0; i + 1 < 4; ++i) {
        const double lo = by_d[static_cast<std::size_t>(i)]->p_mean;
        const double hi = by_d[static_cast<std::size_t>(i) + 1]->p_mean;
        if (hi <= lo)
            continue;
        ++inversions;
        const double sem_a = by_d[static_cast<std::size_t>(i)]->p_sem.value_or(0.0);
        const double sem_b = by_d[static_cast<std::size_t>(i) + 1]->p_sem.value_or(0.0);
        const double combined = std::sqrt(sem_a * sem_a + sem_b * sem_b);
        if (hi - lo > combined)
            return {false, "inversion d=" + std::to_string(i) + "->" +
                               std::to_string(i + 1) + " of " + fmt(hi - lo, 3) +
                               " exceeds the combined SEM " + fmt(combined, 3)};
    }
    if (inversions > 1)
        return {false, std::to_string(inversions) + " adjacent-pair inversions (max 1): " +
                           trend};
    if (data.elapsed_s >= 600.0)
        return {false, "trend holds but ensemble runtime " + fmt(data.elapsed_s) +
                           "s >= 600s"};
    return {true, "tau_short=" + fmt(data.tau_short) + "us: " + trend + ", " +
                      std::to_string(inversions) + " inversion(s) (" +
                      fmt(data.elapsed_s, 3) + "s ensemble)"};
}

// ---------------------------------------------------------------------------
// 8. Longer anneal raises the mean success probability in every condition.
Outcome criterion_8() {
    const TrendData& data = trend_data();
    if (!data.error.empty())
        return {false, data.error};

    std::string detail = "tau " + fmt(data.tau_short) + "->" + fmt(data.tau_long) + "us:";
    const std::vector<std::optional<int>> conditions = {std::nullopt, 0, 1, 2, 3};
    for (const auto& d : conditions) {
        const qas::CellAggregate* at_short = data.cell(d, data.tau_short);
        const qas::CellAggregate* at_long = data.cell(d, data.tau_long);
        if (!at_short || !at_long)
            return {false, "missing aggregate cells for the tau comparison"};
        const std::string label = d ? "d" + std::to_string(*d) : "unb";
        detail += " " + label + " " + fmt(at_short->p_mean, 3) + "->" +
                  fmt(at_long->p_mean, 3);
        if (!(at_long->p_mean > at_short->p_mean))
            return {false, label + " mean p fell from " + fmt(at_short->p_mean, 3) +
                               " to " + fmt(at_long->p_mean, 3) + " at the longer tau (" +
                               detail + ")"};
    }
    return {true, detail};
}

// ---------------------------------------------------------------------------
// 9. Misleading-fraction arithmetic on exact values.
Outcome criterion_9() {
    const double a = qas::error_ratio(1, 8);
    const double b = qas::error_ratio(3, 26);
    if (a != 1.0 / 7.0)
        return {false, "error_ratio(1, 8) = " + fmt(a, 17) + " != 1/7"};
    if (b != 3.0 / 23.0)
        return {false, "error_ratio(3, 26) = " + fmt(b, 17) + " != 3/23"};
    return {true, "error_ratio(1,8) = 1/7 and error_ratio(3,26) = 3/23 exactly"};
}

// ---------------------------------------------------------------------------
// 10. Shot sampling is an unbiased, grid-valued estimate of the exact p.
Outcome criterion_10() {
    const qas::ProblemInstance instance =
        qas::generate_instance(8, qas::instance_seed(kEnsembleSeed, 8, 1));
    const qas::DiagonalProblem diag =
        qas::build_diagonal(qas::rescale(qas::encode_ising(instance)).model);
    const qas::StateVector state = qas::evolve(diag, qas::Schedule::dw2000q_like(0.002), {});
    const double p_exact = qas::success_probability(state, *instance.solution());

    const int reseeds = 1000;
    const int shots = 30;
    double sum = 0.0;
    for (int k = 0; k < reseeds; ++k) {
        const auto samples = qas::sample_shots(
            state, shots, qas::derive_seed(kEnsembleSeed, 1000 + static_cast<std::uint64_t>(k)));
        int hits = 0;
        for (const qas::SpinConfiguration& s : samples)
            hits += s == *instance.solution() ? 1 : 0;
        const double p_hat = static_cast<double>(hits) / shots;
        const double grid = p_hat * shots;
        if (std::abs(grid - std::round(grid)) > 1e-9)
            return {false, "reseed " + std::to_string(k) + ": p = " + fmt(p_hat, 12) +
                               " is off the 1/30 grid"};
        sum += p_hat;
    }
    const double mean = sum / reseeds;
    const double sigma = std::sqrt(p_exact * (1.0 - p_exact) / shots / reseeds);
    const double dev = std::abs(mean - p_exact);
    if (dev >= 5.0 * sigma)
        return {false, "mean shot p " + fmt(mean, 5) + " deviates from exact " +
                           fmt(p_exact, 5) + " by " + fmt(dev / sigma, 2) + " sigma"};
    return {true, "1000 reseeds x 30 shots: mean " + fmt(mean, 5) + " vs exact " +
                      fmt(p_exact, 5) + " (" + fmt(dev / sigma, 2) +
                      " sigma), every estimate on the 1/30 grid"};
}

// ---------------------------------------------------------------------------
// 11. Iterative refinement never loses ground and solves at least as many
//     instances as plain sampling.
Outcome criterion_11() {
    const int rounds = 5;
    int solved_round0 = 0;
    int solved_after = 0;
    for (int alpha = 1; alpha <= 20; ++alpha) {
        const qas::ProblemInstance instance =
            qas::generate_instance(10, qas::instance_seed(kEnsembleSeed, 10, alpha));
        qas::ExperimentConfig config = trend_config();
        config.mode = qas::RunMode::shots;
        config.anneals = 30;
        config.taus_us = {0.0005};
        config.master_seed = qas::instance_seed(kEnsembleSeed, 10, alpha);
        const qas::IterativeTrace trace = qas::iterative_annealing(instance, config, rounds);

        if (trace.rounds.empty())
            return {false, "instance " + std::to_string(alpha) + ": empty trace"};
        for (std::size_t i = 1; i < trace.rounds.size(); ++i)
            if (trace.rounds[i].best_cost_so_far > trace.rounds[i - 1].best_cost_so_far)
                return {false, "instance " + std::to_string(alpha) +
                                   ": best-cost-so-far rose in round " +
                                   std::to_string(i)};
        solved_round0 += trace.rounds.front().best_cost_round == 0 ? 1 : 0;
        solved_after += trace.solved ? 1 : 0;
    }
    if (solved_after < solved_round0)
        return {false, "solved " + std::to_string(solved_after) + "/20 after " +
                           std::to_string(rounds) + " rounds < " +
                           std::to_string(solved_round0) + "/20 at round 0"};
    return {true, "20 instances at n=10: solved " + std::to_string(solved_round0) +
                      "/20 at round 0 -> " + std::to_string(solved_after) + "/20 after " +
                      std::to_string(rounds) + " rounds; every trace non-increasing"};
}

// ---------------------------------------------------------------------------
// 12. Repeating a sweep reproduces every output file byte for byte.
Outcome criterion_12() {
    namespace fs = std::filesystem;
    qas::ExperimentConfig config;
    config.sizes = {6};
    config.instances_per_size = 3;
    config.anneals = 30;
    config.taus_us = {0.0002};
    config.distances = {std::nullopt, 0, 2};
    config.mode = qas::RunMode::shots;
    config.master_seed = 7;
    config.threads = 2;

    const fs::path base = fs::temp_directory_path() / "qas-acceptance-repro";
    fs::remove_all(base);
    const auto slurp = [](const fs::path& file) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    qas::write_run_files(qas::run_experiment(config), base / "a");
    qas::write_run_files(qas::run_experiment(config), base / "b");
    for (const char* name : {"results.csv", "aggregate.csv", "scatter.csv", "manifest.json"})
        if (slurp(base / "a" / name) != slurp(base / "b" / name)) {
            fs::remove_all(base);
            return {false, std::string(name) + " differs between identical runs"};
        }

    config.threads = 1;
    qas::write_run_files(qas::run_experiment(config), base / "serial");
    const bool serial_equal =
        slurp(base / "serial" / "results.csv") == slurp(base / "a" / "results.csv");
    fs::remove_all(base);
    if (!serial_equal)
        return {false, "results.csv depends on the worker thread count"};
    return {true, "repeated sweep: results, aggregate, scatter, and manifest all "
                  "byte-identical; stable across thread counts"};
}

using CriterionFn = Outcome (*)();
constexpr CriterionFn kCriteria[] = {
    criterion_1, criterion_2, criterion_3,  criterion_4,  criterion_5,  criterion_6,
    criterion_7, criterion_8, criterion_9,  criterion_10, criterion_11, criterion_12,
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        char* end = nullptr;
        const long k = std::strtol(argv[i], &end, 10);
        if (end == argv[i] || *end != '\0' || k < 1 || k > 12) {
            std::fprintf(stderr, "usage: %s [criterion-number...]\n", argv[0]);
            return 2;
        }
        selected.push_back(static_cast<int>(k));
    }
    if (selected.empty())
        for (int k = 1; k <= 12; ++k)
            selected.push_back(k);

    bool all_pass = true;
    for (int k : selected) {
        Outcome outcome;
        try {
            outcome = kCriteria[k - 1]();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unexpected exception: ") + e.what()};
        }
        std::printf("criterion %d: %s - %s\n", k, outcome.pass ? "PASS" : "FAIL",
                    outcome.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
