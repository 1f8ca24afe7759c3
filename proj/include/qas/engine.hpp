#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qas/bias.hpp"
#include "qas/errors.hpp"
#include "qas/ising.hpp"
#include "qas/rng.hpp"
#include "qas/schedule.hpp"
#include "qas/spin.hpp"

namespace qas {

/// 2^26 amplitudes at double precision is about 1 GiB.
inline constexpr int kMaxEngineQubits = 26;

/// Phase accumulated per microsecond by an energy of 1 h*GHz: 2*pi*1000 rad.
inline constexpr double kRadPerGigahertzMicrosecond = 2000.0 * std::numbers::pi;

/// Diagonal of B(t)'s operand over the 2^n computational basis states,
/// indexed by bit-packed configuration. `energies` holds the problem plus
/// bias terms; `bias_energies` keeps the bias part separately (empty without
/// bias) so the driver-attached bias variant can reweight it. The constant
/// offset is excluded from the dynamics (global phase) but kept for reports.
struct DiagonalProblem {
    int n = 0;
    double offset = 0.0;
    std::vector<double> energies;
    std::vector<double> bias_energies;
};

/// Build the diagonal in one Gray-code sweep: consecutive visited
/// configurations differ by one spin flip, so each entry is an O(degree)
/// update of its predecessor.
inline DiagonalProblem build_diagonal(const IsingModel& model,
                                      const BiasField* bias = nullptr) {
    const int n = model.n;
    if (n > kMaxEngineQubits)
        throw CapacityError("engine capped at n=" + std::to_string(kMaxEngineQubits) +
                            ", got " + std::to_string(n));
    if (bias && bias->size() != n)
        throw DimensionError("bias length " + std::to_string(bias->size()) +
                             " does not match model n=" + std::to_string(n));
    const bool with_bias = bias && !bias->is_null();

    std::vector<std::vector<std::pair<int, double>>> adjacency(
        static_cast<std::size_t>(n));
    for (const auto& [key, J] : model.couplings) {
        adjacency[static_cast<std::size_t>(key.first)].emplace_back(key.second, J);
        adjacency[static_cast<std::size_t>(key.second)].emplace_back(key.first, J);
    }

    DiagonalProblem diag;
    diag.n = n;
    diag.offset = model.offset;
    const std::size_t dim = std::size_t(1) << n;
    diag.energies.resize(dim);
    if (with_bias)
        diag.bias_energies.resize(dim);

    // Start at configuration 0, all spins -1.
    std::vector<double> spin(static_cast<std::size_t>(n), -1.0);
    double problem = 0.0;
    for (const auto& [key, J] : model.couplings)
        problem += J; // s_i s_j = +1 for equal spins
    double bias_part = 0.0;
    for (int i = 0; i < n; ++i) {
        problem -= model.fields[static_cast<std::size_t>(i)];
        if (with_bias)
            bias_part += bias->mu(i);
    }
    diag.energies[0] = problem + bias_part;
    if (with_bias)
        diag.bias_energies[0] = bias_part;

    for (std::size_t m = 1; m < dim; ++m) {
        const int flip = std::countr_zero(m);
        const std::size_t fi = static_cast<std::size_t>(flip);
        const double old = spin[fi];
        double neighbor_sum = model.fields[fi];
        for (const auto& [j, J] : adjacency[fi])
            neighbor_sum += J * spin[static_cast<std::size_t>(j)];
        problem -= 2.0 * old * neighbor_sum;
        if (with_bias) {
            const double delta = 2.0 * old * bias->mu(flip);
            bias_part += delta;
        }
        spin[fi] = -old;
        const std::size_t gray = m ^ (m >> 1);
        diag.energies[gray] = problem + bias_part;
        if (with_bias)
            diag.bias_energies[gray] = bias_part;
    }
    return diag;
}

/// State of the simulated annealer: 2^n complex amplitudes indexed by
/// bit-packed configuration.
struct StateVector {
    int n = 0;
    std::vector<std::complex<double>> amplitudes;

    double norm_squared() const {
        double total = 0.0;
        for (const std::complex<double>& a : amplitudes)
            total += std::norm(a);
        return total;
    }
};

/// Sign convention for the transverse driver. Hardware annealers apply the
/// negative transverse field, whose ground state is the all-positive uniform
/// superposition; `positive` evolves with +A(t) sum sigma_x from the
/// matching alternating-sign superposition instead.
enum class DriverSign { negative, positive };

/// Where the bias term rides: on the problem envelope B(t) (hardware path)
/// or on the driver envelope A(t), decaying away with the fluctuations.
enum class BiasMode { with_problem, with_driver };

struct EvolveOptions {
    double dt_us = 0.0;              // 0 selects the phase-bound rule below
    double max_phase_per_step = 0.05; // rad of max(A, B) per step
    DriverSign driver_sign = DriverSign::negative;
    BiasMode bias_mode = BiasMode::with_problem;
};

namespace detail {

inline StateVector initial_state(int n, DriverSign sign) {
    StateVector state;
    state.n = n;
    const std::size_t dim = std::size_t(1) << n;
    const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
    state.amplitudes.assign(dim, {amp, 0.0});
    if (sign == DriverSign::positive)
        for (std::size_t k = 0; k < dim; ++k)
            if (std::popcount(k) & 1)
                state.amplitudes[k] = -state.amplitudes[k];
    return state;
}

inline long long evolve_step_count(double tau_us, const Schedule& schedule,
                                   const EvolveOptions& options) {
    double dt = options.dt_us;
    if (dt < 0.0 || !std::isfinite(dt))
        throw ParameterError("dt must be finite and non-negative");
    if (dt == 0.0) {
        if (!(options.max_phase_per_step > 0.0))
            throw ParameterError("max phase per step must be positive");
        const double peak = schedule.max_energy() * kRadPerGigahertzMicrosecond;
        dt = peak > 0.0 ? options.max_phase_per_step / peak : tau_us;
    }
    const long long raw = static_cast<long long>(std::ceil(tau_us / dt - 1e-12));
    if (options.dt_us > 0.0 && raw < 10)
        throw ParameterError("dt must divide tau into at least 10 steps");
    const long long steps = std::max<long long>(10, raw);
    if (steps > (1ll << 33))
        throw ParameterError("step count overflow; increase dt or shorten tau");
    return steps;
}

} // namespace detail

/// Evolve the state vector from the driver ground state under
/// H(t) = -/+ A(t) sum_i sigma_i^x + B(t) * diag, using second-order Strang
/// splitting with exact sub-propagators: half-step diagonal phase, full
/// transverse step (independent single-qubit rotations), half-step diagonal
/// phase. A and B are frozen at each step midpoint. Deterministic.
inline StateVector evolve(const DiagonalProblem& diag, const Schedule& schedule,
                          const EvolveOptions& options = {}) {
    const int n = diag.n;
    const std::size_t dim = std::size_t(1) << n;
    if (diag.energies.size() != dim)
        throw DimensionError("diagonal entry count does not match 2^n");
    const double tau = schedule.tau_us();
    StateVector state = detail::initial_state(n, options.driver_sign);
    if (tau == 0.0)
        return state;

    const long long steps = detail::evolve_step_count(tau, schedule, options);
    const double dt = tau / static_cast<double>(steps);
    const double xsign = options.driver_sign == DriverSign::negative ? +1.0 : -1.0;
    const bool split_bias = options.bias_mode == BiasMode::with_driver &&
                            !diag.bias_energies.empty();
    std::complex<double>* amp = state.amplitudes.data();
    const double* energy = diag.energies.data();
    const double* bias = diag.bias_energies.empty() ? nullptr : diag.bias_energies.data();

    for (long long m = 0; m < steps; ++m) {
        const double s_mid =
            (static_cast<double>(m) + 0.5) / static_cast<double>(steps);
        const auto [a_val, b_val] = schedule.evaluate(s_mid);
        const double half = 0.5 * kRadPerGigahertzMicrosecond * dt;
        const double coef_e = half * b_val;
        const double coef_bias = split_bias ? half * (a_val - b_val) : 0.0;

        auto apply_phase = [&] {
            if (split_bias) {
                for (std::size_t k = 0; k < dim; ++k) {
                    const double arg = coef_e * energy[k] + coef_bias * bias[k];
                    amp[k] *= std::complex<double>(std::cos(arg), -std::sin(arg));
                }
            } else {
                for (std::size_t k = 0; k < dim; ++k) {
                    const double arg = coef_e * energy[k];
                    amp[k] *= std::complex<double>(std::cos(arg), -std::sin(arg));
                }
            }
        };

        apply_phase();

        // exp(+/- i theta sigma_x) on every qubit
        const double theta = kRadPerGigahertzMicrosecond * a_val * dt;
        const double c = std::cos(theta);
        const std::complex<double> is(0.0, xsign * std::sin(theta));
        for (int q = 0; q < n; ++q) {
            const std::size_t stride = std::size_t(1) << q;
            for (std::size_t base = 0; base < dim; base += 2 * stride) {
                for (std::size_t off = 0; off < stride; ++off) {
                    const std::size_t i0 = base + off;
                    const std::size_t i1 = i0 + stride;
                    const std::complex<double> a0 = amp[i0];
                    const std::complex<double> a1 = amp[i1];
                    amp[i0] = c * a0 + is * a1;
                    amp[i1] = is * a0 + c * a1;
                }
            }
        }

        apply_phase();
    }

    const double norm2 = state.norm_squared();
    if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > 1e-6)
        throw NumericalError("state norm broke during evolution: |psi|^2 = " +
                             std::to_string(norm2));
    return state;
}

/// Probability that a projective measurement returns the target configuration.
inline double success_probability(const StateVector& state,
                                  const SpinConfiguration& target) {
    if (target.size() != state.n)
        throw DimensionError("target length " + std::to_string(target.size()) +
                             " does not match state n=" + std::to_string(state.n));
    return std::norm(state.amplitudes[target.to_bits()]);
}

/// Draw n_shots independent projective measurements from |amplitude|^2.
/// Deterministic given the seed.
inline std::vector<SpinConfiguration> sample_shots(const StateVector& state,
                                                   int n_shots, std::uint64_t seed) {
    if (n_shots < 1)
        throw ParameterError("need at least one shot");
    const std::size_t dim = state.amplitudes.size();
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (dim + kBlock - 1) / kBlock;
    std::vector<double> block_prefix(blocks + 1, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        double sum = 0.0;
        const std::size_t end = std::min(dim, (b + 1) * kBlock);
        for (std::size_t k = b * kBlock; k < end; ++k)
            sum += std::norm(state.amplitudes[k]);
        block_prefix[b + 1] = block_prefix[b] + sum;
    }
    const double total = block_prefix[blocks];

    Rng rng(seed);
    std::vector<SpinConfiguration> shots;
    shots.reserve(static_cast<std::size_t>(n_shots));
    for (int shot = 0; shot < n_shots; ++shot) {
        const double u = rng.canonical() * total;
        std::size_t b = static_cast<std::size_t>(
            std::upper_bound(block_prefix.begin() + 1, block_prefix.end(), u) -
            (block_prefix.begin() + 1));
        if (b >= blocks)
            b = blocks - 1;
        double cum = block_prefix[b];
        std::size_t index = std::min(dim, (b + 1) * kBlock) - 1;
        for (std::size_t k = b * kBlock; k < (b + 1) * kBlock && k < dim; ++k) {
            cum += std::norm(state.amplitudes[k]);
            if (u < cum) {
                index = k;
                break;
            }
        }
        shots.push_back(SpinConfiguration::from_bits(index, state.n));
    }
    return shots;
}

} // namespace qas
