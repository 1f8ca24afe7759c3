#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qas/errors.hpp"
#include "qas/rng.hpp"
#include "qas/spin.hpp"

namespace qas {

/// Hard cap on brute-force enumeration.
inline constexpr int kMaxEnumerationQubits = 30;

/// Three distinct spin indices, stored sorted ascending.
class Clause {
public:
    Clause(int a, int b, int c) : members_{a, b, c} {
        std::sort(members_.begin(), members_.end());
        if (members_[0] < 0 || members_[0] == members_[1] ||
            members_[1] == members_[2])
            throw ValidationError("clause needs three distinct non-negative indices");
    }

    int operator[](int idx) const { return members_[static_cast<std::size_t>(idx)]; }

    const std::array<int, 3>& members() const { return members_; }

    /// Bit mask with the three member bits set.
    std::uint64_t mask() const {
        return (1ull << members_[0]) | (1ull << members_[1]) | (1ull << members_[2]);
    }

    friend bool operator==(const Clause& a, const Clause& b) {
        return a.members_ == b.members_;
    }
    friend auto operator<=>(const Clause& a, const Clause& b) {
        return a.members_ <=> b.members_;
    }

private:
    std::array<int, 3> members_;
};

/// Clause cost by number of +1 members: 2 up / 1 down fulfills the clause.
/// (sum - 1)^2 with sum = 2*up - 3 gives 16, 4, 0, 4 for up = 0..3.
inline constexpr std::array<int, 4> kClauseCostByUpCount = {16, 4, 0, 4};

/// Cost of one clause on a bit-packed configuration.
inline int packed_clause_cost(const Clause& clause, std::uint64_t bits) {
    return kClauseCostByUpCount[static_cast<std::size_t>(
        std::popcount(bits & clause.mask()))];
}

/// An exact-cover instance: N spins, M clauses, and (once known) the unique
/// satisfying configuration. Clauses are kept in canonical form: each triple
/// sorted ascending, the list sorted lexicographically, no duplicates.
class ProblemInstance {
public:
    ProblemInstance(int n, std::vector<Clause> clauses,
                    std::optional<SpinConfiguration> solution = std::nullopt,
                    std::optional<std::string> label = std::nullopt)
        : n_(n), clauses_(std::move(clauses)), solution_(std::move(solution)),
          label_(std::move(label)) {
        if (n_ < 3)
            throw ValidationError("instance needs at least 3 spins, got " +
                                  std::to_string(n_));
        for (const Clause& c : clauses_)
            if (c[2] >= n_)
                throw ValidationError("clause index " + std::to_string(c[2]) +
                                      " out of range for n=" + std::to_string(n_));
        std::sort(clauses_.begin(), clauses_.end());
        if (std::adjacent_find(clauses_.begin(), clauses_.end()) != clauses_.end())
            throw ValidationError("duplicate clause");
        if (solution_) {
            if (solution_->size() != n_)
                throw ValidationError("solution length does not match n");
            for (const Clause& c : clauses_)
                if (packed_clause_cost(c, solution_->to_bits()) != 0)
                    throw ValidationError("stored solution does not fulfill every clause");
        }
    }

    int n() const { return n_; }
    const std::vector<Clause>& clauses() const { return clauses_; }
    int num_clauses() const { return static_cast<int>(clauses_.size()); }
    const std::optional<SpinConfiguration>& solution() const { return solution_; }
    const std::optional<std::string>& label() const { return label_; }

    void set_solution(SpinConfiguration s) {
        if (s.size() != n_)
            throw ValidationError("solution length does not match n");
        for (const Clause& c : clauses_)
            if (packed_clause_cost(c, s.to_bits()) != 0)
                throw ValidationError("stored solution does not fulfill every clause");
        solution_ = std::move(s);
    }
    void set_label(std::string l) { label_ = std::move(l); }

    friend bool operator==(const ProblemInstance& a, const ProblemInstance& b) {
        return a.n_ == b.n_ && a.clauses_ == b.clauses_ &&
               ((!a.solution_ && !b.solution_) ||
                (a.solution_ && b.solution_ && *a.solution_ == *b.solution_));
    }

private:
    int n_;
    std::vector<Clause> clauses_;
    std::optional<SpinConfiguration> solution_;
    std::optional<std::string> label_;
};

/// Cost of a single clause: (s_a + s_b + s_c - 1)^2, one of {0, 4, 16}.
inline int clause_cost(const Clause& clause, const SpinConfiguration& config) {
    if (clause[2] >= config.size())
        throw ValidationError("clause index " + std::to_string(clause[2]) +
                              " out of range for configuration of length " +
                              std::to_string(config.size()));
    const int sum = config.spin(clause[0]) + config.spin(clause[1]) +
                    config.spin(clause[2]);
    return (sum - 1) * (sum - 1);
}

/// Total cost: sum of clause costs. Zero iff every clause is fulfilled.
inline long long total_cost(const ProblemInstance& instance,
                            const SpinConfiguration& config) {
    if (config.size() != instance.n())
        throw DimensionError("configuration length " + std::to_string(config.size()) +
                             " does not match n=" + std::to_string(instance.n()));
    long long total = 0;
    const std::uint64_t bits = config.to_bits();
    for (const Clause& c : instance.clauses())
        total += packed_clause_cost(c, bits);
    return total;
}

/// Brute-force oracle: every zero-cost configuration, in ascending bit-packed
/// order. Guarded at n <= 30.
inline std::vector<SpinConfiguration> enumerate_solutions(const ProblemInstance& instance) {
    const int n = instance.n();
    if (n > kMaxEnumerationQubits)
        throw CapacityError("enumeration capped at n=" +
                            std::to_string(kMaxEnumerationQubits) + ", got " +
                            std::to_string(n));
    std::vector<SpinConfiguration> found;
    const std::uint64_t dim = 1ull << n;
    for (std::uint64_t k = 0; k < dim; ++k) {
        bool ok = true;
        for (const Clause& c : instance.clauses())
            if (packed_clause_cost(c, k) != 0) {
                ok = false;
                break;
            }
        if (ok)
            found.push_back(SpinConfiguration::from_bits(k, n));
    }
    return found;
}

struct GenerateOptions {
    int max_restarts = 10000;
};

namespace detail {

/// Survivor set over all 2^n configurations, stored as a bitset.
class SurvivorSet {
public:
    explicit SurvivorSet(int n)
        : n_(n), words_((std::size_t(1) << n) / 64 + 1, 0) {}

    /// Reset to the configurations satisfying a single clause.
    void reset_to_clause(const Clause& clause) {
        std::fill(words_.begin(), words_.end(), 0);
        count_ = 0;
        const std::uint64_t dim = 1ull << n_;
        const std::uint64_t mask = clause.mask();
        for (std::uint64_t k = 0; k < dim; ++k)
            if (std::popcount(k & mask) == 2) {
                words_[k >> 6] |= 1ull << (k & 63);
                ++count_;
            }
    }

    /// Drop survivors violating the clause.
    void filter(const Clause& clause) {
        const std::uint64_t mask = clause.mask();
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                const int bit = std::countr_zero(word);
                word &= word - 1;
                const std::uint64_t k = (std::uint64_t(w) << 6) | std::uint64_t(bit);
                if (std::popcount(k & mask) != 2) {
                    words_[w] &= ~(1ull << bit);
                    --count_;
                }
            }
        }
    }

    std::uint64_t count() const { return count_; }

    std::uint64_t first() const {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w])
                return (std::uint64_t(w) << 6) |
                       std::uint64_t(std::countr_zero(words_[w]));
        throw Error("empty survivor set");
    }

private:
    int n_;
    std::uint64_t count_ = 0;
    std::vector<std::uint64_t> words_;
};

inline Clause draw_clause(Rng& rng, int n) {
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int b = a, c = a;
    while (b == a)
        b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    while (c == a || c == b)
        c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    return Clause(a, b, c);
}

} // namespace detail

/// Generate a random instance with exactly one satisfying configuration.
///
/// Clauses are added one at a time, drawn uniformly from the unused triples.
/// If the solution count drops to zero the construction restarts from an
/// empty clause list; it stops as soon as the count is exactly one. The
/// result is a pure function of (n, seed).
inline ProblemInstance generate_instance(int n, std::uint64_t seed,
                                         const GenerateOptions& options = {}) {
    if (n < 3 || n > kMaxEnumerationQubits)
        throw ParameterError("generate_instance needs 3 <= n <= " +
                             std::to_string(kMaxEnumerationQubits));
    Rng rng(seed);
    const std::uint64_t total_triples =
        std::uint64_t(n) * std::uint64_t(n - 1) * std::uint64_t(n - 2) / 6;
    detail::SurvivorSet survivors(n);
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        std::vector<Clause> clauses;
        std::set<Clause> used;
        while (used.size() < total_triples) {
            Clause clause = detail::draw_clause(rng, n);
            while (used.contains(clause))
                clause = detail::draw_clause(rng, n);
            used.insert(clause);
            clauses.push_back(clause);
            if (clauses.size() == 1)
                survivors.reset_to_clause(clause);
            else
                survivors.filter(clause);
            if (survivors.count() == 0)
                break;
            if (survivors.count() == 1) {
                SpinConfiguration solution =
                    SpinConfiguration::from_bits(survivors.first(), n);
                return ProblemInstance(n, std::move(clauses), std::move(solution));
            }
        }
    }
    throw GenerationError("no unique-solution instance for n=" + std::to_string(n) +
                          " within " + std::to_string(options.max_restarts) +
                          " restarts");
}

} // namespace qas
