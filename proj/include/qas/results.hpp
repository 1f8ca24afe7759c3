#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qas/errors.hpp"

namespace qas {

enum class RunMode { exact, shots };

inline std::string to_string(RunMode mode) {
    return mode == RunMode::exact ? "exact" : "shots";
}

/// Outcome of one (instance, bias, tau) cell.
struct ResultRecord {
    int n = 0;
    int alpha = 0;
    std::optional<int> d;                 // absent = unbiased
    double tau_us = 0.0;
    double b = 0.0;                       // bias strength knob
    RunMode mode = RunMode::exact;
    int anneals = 0;
    std::optional<int> success_count;     // shot mode only
    double p = 0.0;                       // success probability
    double mean_cost = 0.0;               // clause-cost units
    double cost_per_clause = 0.0;
    std::uint64_t seed = 0;               // cell seed (bias/shot streams derive from it)
    std::string schedule_id;
    std::optional<std::string> error;     // set when the cell failed
};

/// Per-(N, d, tau) ensemble aggregate.
struct CellAggregate {
    int n = 0;
    std::optional<int> d;
    double tau_us = 0.0;
    int count = 0;                        // instances aggregated
    double p_mean = 0.0;
    std::optional<double> p_sem;          // absent for a single instance
    double cost_mean = 0.0;
    std::optional<double> cost_sem;
    std::optional<int> solved_count;      // shot mode only
};

/// Mean and standard error of the mean (sample stddev / sqrt(m)); the SEM is
/// absent for m = 1.
inline std::pair<double, std::optional<double>> mean_and_sem(const std::vector<double>& values) {
    if (values.empty())
        throw ParameterError("cannot aggregate an empty cell");
    const std::size_t m = values.size();
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(m);
    if (m == 1)
        return {mean, std::nullopt};
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(m - 1));
    return {mean, stddev / std::sqrt(static_cast<double>(m))};
}

using CellKey = std::tuple<int, std::optional<int>, double>; // (n, d, tau)

/// Group records by (N, d, tau) and aggregate each cell. Failed records are
/// skipped; a cell with only failed records is dropped entirely.
inline std::vector<CellAggregate> aggregate(const std::vector<ResultRecord>& records) {
    std::map<CellKey, std::vector<const ResultRecord*>> cells;
    for (const ResultRecord& r : records) {
        if (r.error)
            continue;
        cells[{r.n, r.d, r.tau_us}].push_back(&r);
    }
    std::vector<CellAggregate> out;
    out.reserve(cells.size());
    for (const auto& [key, rows] : cells) {
        CellAggregate cell;
        cell.n = std::get<0>(key);
        cell.d = std::get<1>(key);
        cell.tau_us = std::get<2>(key);
        cell.count = static_cast<int>(rows.size());
        std::vector<double> ps, costs;
        ps.reserve(rows.size());
        costs.reserve(rows.size());
        bool all_shots = true;
        int solved = 0;
        for (const ResultRecord* r : rows) {
            ps.push_back(r->p);
            costs.push_back(r->mean_cost);
            if (r->mode == RunMode::shots && r->success_count)
                solved += *r->success_count >= 1 ? 1 : 0;
            else
                all_shots = false;
        }
        std::tie(cell.p_mean, cell.p_sem) = mean_and_sem(ps);
        std::tie(cell.cost_mean, cell.cost_sem) = mean_and_sem(costs);
        if (all_shots)
            cell.solved_count = solved;
        out.push_back(std::move(cell));
    }
    return out;
}

/// Biased over unbiased mean success probability, with first-order error
/// propagation from the two SEMs. An unbiased mean of zero has no finite
/// ratio and is reported as a distinct marker.
struct EnhancementFactor {
    bool infinite = false;
    double factor = 0.0;                  // meaningless when infinite
    std::optional<double> uncertainty;    // absent if either SEM is absent
};

inline EnhancementFactor enhancement_factor(const CellAggregate& biased,
                                            const CellAggregate& unbiased) {
    EnhancementFactor result;
    if (unbiased.p_mean == 0.0) {
        result.infinite = true;
        return result;
    }
    const double u = unbiased.p_mean;
    const double bm = biased.p_mean;
    result.factor = bm / u;
    if (biased.p_sem && unbiased.p_sem) {
        const double db = *biased.p_sem / u;
        const double du = bm * *unbiased.p_sem / (u * u);
        result.uncertainty = std::sqrt(db * db + du * du);
    }
    return result;
}

/// Number of instances with at least one successful anneal. Defined for
/// shot-sampled records only.
inline int solved_instance_count(const std::vector<ResultRecord>& records) {
    int solved = 0;
    for (const ResultRecord& r : records) {
        if (r.error)
            continue;
        if (r.mode != RunMode::shots || !r.success_count)
            throw ModeError("solved-instance counts need shot-sampled records");
        if (*r.success_count >= 1)
            ++solved;
    }
    return solved;
}

/// Paired per-instance success probabilities for one (d, tau) against the
/// unbiased cell at the same tau.
struct ScatterPoint {
    int n = 0;
    int alpha = 0;
    double p_unbiased = 0.0;
    double p_biased = 0.0;
};

struct ScatterResult {
    std::vector<ScatterPoint> points;
    int improved_count = 0;               // p_biased > p_unbiased
    int missing_pairs = 0;                // instances skipped with a warning
};

inline ScatterResult per_instance_scatter(const std::vector<ResultRecord>& records,
                                          int d, double tau_us) {
    std::map<std::pair<int, int>, const ResultRecord*> unbiased, biased;
    for (const ResultRecord& r : records) {
        if (r.error || r.tau_us != tau_us)
            continue;
        if (!r.d)
            unbiased[{r.n, r.alpha}] = &r;
        else if (*r.d == d)
            biased[{r.n, r.alpha}] = &r;
    }
    ScatterResult result;
    for (const auto& [key, u] : unbiased) {
        auto it = biased.find(key);
        if (it == biased.end()) {
            ++result.missing_pairs;
            continue;
        }
        ScatterPoint point;
        point.n = key.first;
        point.alpha = key.second;
        point.p_unbiased = u->p;
        point.p_biased = it->second->p;
        if (point.p_biased > point.p_unbiased)
            ++result.improved_count;
        result.points.push_back(point);
    }
    for (const auto& [key, b] : biased)
        if (!unbiased.contains(key))
            ++result.missing_pairs;
    return result;
}

} // namespace qas
