#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qas/bias.hpp"
#include "qas/errors.hpp"
#include "qas/exact_cover.hpp"
#include "qas/spin.hpp"

namespace qas {

/// Two-body longitudinal Ising model: sum_{i<j} J_ij s_i s_j + sum_i h_i s_i
/// plus a constant offset. The offset keeps reported energies equal to the
/// clause costs; it never enters the dynamics.
struct IsingModel {
    int n = 0;
    std::map<std::pair<int, int>, double> couplings; // keys satisfy i < j
    std::vector<double> fields;                      // h_i, length n
    double offset = 0.0;
    double scale = 1.0; // cumulative factor applied by rescale

    explicit IsingModel(int n_) : n(n_), fields(static_cast<std::size_t>(n_), 0.0) {}

    double& coupling(int i, int j) {
        if (i > j)
            std::swap(i, j);
        if (i < 0 || i == j || j >= n)
            throw ValidationError("coupling indices must satisfy 0 <= i < j < n");
        return couplings[{i, j}];
    }

    bool all_zero() const {
        for (const auto& [key, J] : couplings)
            if (J != 0.0)
                return false;
        for (double h : fields)
            if (h != 0.0)
                return false;
        return true;
    }
};

/// Expand the clause cost function into Ising form. Per clause {a, b, c}:
/// J_ab, J_ac, J_bc += 2; h_a, h_b, h_c -= 2; offset += 4.
inline IsingModel encode_ising(const ProblemInstance& instance) {
    IsingModel model(instance.n());
    for (const Clause& c : instance.clauses()) {
        model.coupling(c[0], c[1]) += 2.0;
        model.coupling(c[0], c[2]) += 2.0;
        model.coupling(c[1], c[2]) += 2.0;
        for (int idx : c.members())
            model.fields[static_cast<std::size_t>(idx)] -= 2.0;
        model.offset += 4.0;
    }
    return model;
}

/// Energy of a configuration: sum J_ij s_i s_j + sum h_i s_i + offset.
inline double ising_energy(const IsingModel& model, const SpinConfiguration& config) {
    if (config.size() != model.n)
        throw DimensionError("configuration length " + std::to_string(config.size()) +
                             " does not match model n=" + std::to_string(model.n));
    double energy = model.offset;
    for (const auto& [key, J] : model.couplings)
        energy += J * config.spin(key.first) * config.spin(key.second);
    for (int i = 0; i < model.n; ++i)
        energy += model.fields[static_cast<std::size_t>(i)] * config.spin(i);
    return energy;
}

/// Hardware-style parameter boxes: J_ij in [-2, 1], h_i in [-2, 2].
inline constexpr double kCouplingMax = 1.0;
inline constexpr double kCouplingMin = -2.0;
inline constexpr double kFieldBound = 2.0;

namespace detail {

/// Largest k > 0 with k*J in [-2, 1] for all J and k*h in [-2, 2] for all h.
inline double box_scale_factor(const std::map<std::pair<int, int>, double>& couplings,
                               const std::vector<double>& fields) {
    double k = std::numeric_limits<double>::infinity();
    for (const auto& [key, J] : couplings) {
        if (J > 0.0)
            k = std::min(k, kCouplingMax / J);
        else if (J < 0.0)
            k = std::min(k, kCouplingMin / J);
    }
    for (double h : fields)
        if (h != 0.0)
            k = std::min(k, kFieldBound / std::abs(h));
    return k;
}

} // namespace detail

struct RescaleResult {
    IsingModel model;
    double factor = 1.0;
};

/// Scale the model by the largest positive factor keeping every parameter
/// inside the hardware boxes (and saturating at least one of them). Uniform
/// positive scaling, so the energy ordering of configurations is unchanged.
inline RescaleResult rescale(const IsingModel& model) {
    if (model.all_zero())
        throw DegenerateModelError("cannot rescale an all-zero model");
    const double k = detail::box_scale_factor(model.couplings, model.fields);
    IsingModel scaled(model.n);
    for (const auto& [key, J] : model.couplings)
        scaled.couplings[key] = J * k;
    for (int i = 0; i < model.n; ++i)
        scaled.fields[static_cast<std::size_t>(i)] = model.fields[static_cast<std::size_t>(i)] * k;
    scaled.offset = model.offset * k;
    scaled.scale = model.scale * k;
    return {std::move(scaled), k};
}

struct JointRescaleResult {
    IsingModel model;
    BiasField bias;
    double factor = 1.0;
};

/// Hardware-path variant: the bias contributes to the longitudinal terms, so
/// the box constraint applies to h_i - mu_i and the same factor scales both
/// the model and the bias.
inline JointRescaleResult rescale_with_bias(const IsingModel& model, const BiasField& bias) {
    if (bias.size() != model.n)
        throw DimensionError("bias length does not match model n");
    std::vector<double> effective(static_cast<std::size_t>(model.n));
    for (int i = 0; i < model.n; ++i)
        effective[static_cast<std::size_t>(i)] =
            model.fields[static_cast<std::size_t>(i)] - bias.mu(i);
    bool degenerate = model.all_zero() && bias.is_null();
    if (degenerate)
        throw DegenerateModelError("cannot rescale an all-zero model");
    const double k = detail::box_scale_factor(model.couplings, effective);
    IsingModel scaled(model.n);
    for (const auto& [key, J] : model.couplings)
        scaled.couplings[key] = J * k;
    for (int i = 0; i < model.n; ++i)
        scaled.fields[static_cast<std::size_t>(i)] = model.fields[static_cast<std::size_t>(i)] * k;
    scaled.offset = model.offset * k;
    scaled.scale = model.scale * k;
    std::vector<double> mu(static_cast<std::size_t>(model.n));
    for (int i = 0; i < model.n; ++i)
        mu[static_cast<std::size_t>(i)] = bias.mu(i) * k;
    return {std::move(scaled), BiasField(std::move(mu)), k};
}

} // namespace qas
