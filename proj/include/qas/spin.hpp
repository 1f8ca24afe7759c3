#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qas/errors.hpp"

namespace qas {

/// Spin value at bit position i of a packed configuration: bit set means +1.
constexpr int bit_spin(std::uint64_t bits, int i) {
    return ((bits >> i) & 1ull) ? +1 : -1;
}

/// An ordered sequence of N Ising spins, each +1 or -1.
///
/// The dense canonical form is an N-bit integer where bit i = 1 encodes
/// spin i = +1; both representations round-trip losslessly.
class SpinConfiguration {
public:
    SpinConfiguration() = default;

    explicit SpinConfiguration(const std::vector<int>& spins) {
        spins_.reserve(spins.size());
        for (int s : spins) {
            if (s != 1 && s != -1)
                throw ValidationError("spin value must be +1 or -1, got " +
                                      std::to_string(s));
            spins_.push_back(static_cast<std::int8_t>(s));
        }
    }

    static SpinConfiguration from_bits(std::uint64_t bits, int n) {
        if (n < 1 || n > 62)
            throw ParameterError("spin count out of range: " + std::to_string(n));
        SpinConfiguration c;
        c.spins_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            c.spins_[static_cast<std::size_t>(i)] =
                static_cast<std::int8_t>(bit_spin(bits, i));
        return c;
    }

    std::uint64_t to_bits() const {
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < spins_.size(); ++i)
            if (spins_[i] > 0)
                bits |= 1ull << i;
        return bits;
    }

    int size() const { return static_cast<int>(spins_.size()); }

    int spin(int i) const { return spins_[static_cast<std::size_t>(i)]; }

    const std::vector<std::int8_t>& spins() const { return spins_; }

    std::vector<int> to_ints() const {
        return std::vector<int>(spins_.begin(), spins_.end());
    }

    friend bool operator==(const SpinConfiguration& a, const SpinConfiguration& b) {
        return a.spins_ == b.spins_;
    }

private:
    std::vector<std::int8_t> spins_;
};

} // namespace qas
