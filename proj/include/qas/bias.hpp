#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qas/errors.hpp"
#include "qas/rng.hpp"
#include "qas/spin.hpp"

namespace qas {

/// Longitudinal bias field mu_i entering H as -sum_i mu_i sigma_i^z.
///
/// The sign pattern encodes a configuration, |mu_i| is the bias strength;
/// all magnitudes are equal, and strength 0 encodes "no bias".
class BiasField {
public:
    BiasField() = default;

    explicit BiasField(std::vector<double> mu) : mu_(std::move(mu)) {
        if (mu_.empty())
            throw ValidationError("bias field must not be empty");
        strength_ = std::abs(mu_[0]);
        for (double m : mu_)
            if (std::abs(m) != strength_)
                throw ValidationError("bias magnitudes must be homogeneous");
        if (strength_ == 0.0)
            mu_.assign(mu_.size(), 0.0);
    }

    static BiasField null(int n) {
        BiasField b;
        b.mu_.assign(static_cast<std::size_t>(n), 0.0);
        return b;
    }

    int size() const { return static_cast<int>(mu_.size()); }
    double strength() const { return strength_; }
    bool is_null() const { return strength_ == 0.0; }
    double mu(int i) const { return mu_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return mu_; }

private:
    std::vector<double> mu_;
    double strength_ = 0.0;
};

/// Bias field at Hamming distance exactly d from a reference configuration:
/// mu_i = strength * reference_i, then the sign of d sites chosen uniformly
/// without replacement is flipped. Deterministic in (reference, d, strength,
/// seed).
inline BiasField make_bias(const SpinConfiguration& reference, int d,
                           double strength, std::uint64_t seed) {
    const int n = reference.size();
    if (d < 0 || d > n)
        throw ParameterError("bias distance must satisfy 0 <= d <= n, got " +
                             std::to_string(d));
    if (!(strength > 0.0))
        throw ParameterError("bias strength must be positive");
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        mu[static_cast<std::size_t>(i)] = strength * reference.spin(i);
    Rng rng(seed);
    std::vector<int> sites(static_cast<std::size_t>(n));
    std::iota(sites.begin(), sites.end(), 0);
    for (int i = 0; i < d; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
        mu[static_cast<std::size_t>(sites[static_cast<std::size_t>(i)])] *= -1.0;
    }
    return BiasField(std::move(mu));
}

/// Number of sites where the bias sign pattern disagrees with the reference.
/// A null bias has no sign pattern; its distance is 0 by convention (check
/// BiasField::is_null to tell the cases apart).
inline int hamming_distance(const BiasField& bias, const SpinConfiguration& reference) {
    if (bias.size() != reference.size())
        throw DimensionError("bias length " + std::to_string(bias.size()) +
                             " does not match configuration length " +
                             std::to_string(reference.size()));
    if (bias.is_null())
        return 0;
    int d = 0;
    for (int i = 0; i < bias.size(); ++i)
        if ((bias.mu(i) > 0.0 ? +1 : -1) != reference.spin(i))
            ++d;
    return d;
}

/// Error ratio r = d / (N - d): misleading over helpful bias terms.
inline double error_ratio(int d, int n) {
    if (d < 0 || d >= n)
        throw ParameterError("error ratio needs 0 <= d < n, got d=" +
                             std::to_string(d) + ", n=" + std::to_string(n));
    return static_cast<double>(d) / static_cast<double>(n - d);
}

/// Bias field pointing at a sampled configuration: mu_i = strength * sample_i.
/// A zero strength yields the null bias (plain unbiased sampling).
inline BiasField bias_from_sample(const SpinConfiguration& sample, double strength) {
    if (strength < 0.0)
        throw ParameterError("bias strength must be non-negative");
    if (strength == 0.0)
        return BiasField::null(sample.size());
    std::vector<double> mu(static_cast<std::size_t>(sample.size()));
    for (int i = 0; i < sample.size(); ++i)
        mu[static_cast<std::size_t>(i)] = strength * sample.spin(i);
    return BiasField(std::move(mu));
}

} // namespace qas
