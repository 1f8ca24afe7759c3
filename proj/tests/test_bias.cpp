#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <qas/bias.hpp>
#include <qas/exact_cover.hpp>
#include <qas/ising.hpp>
#include <qas/rng.hpp>

using namespace qas;

TEST_CASE("bias construction hits the requested distance", "[bias]") {
    const SpinConfiguration ref({+1, -1, +1, +1, -1, +1, -1, +1});

    SECTION("distance zero copies the reference") {
        const BiasField bias = make_bias(ref, 0, 0.7, 1);
        for (int i = 0; i < ref.size(); ++i)
            CHECK(bias.mu(i) == 0.7 * ref.spin(i));
        CHECK(hamming_distance(bias, ref) == 0);
    }

    SECTION("distance n inverts every site") {
        const BiasField bias = make_bias(ref, ref.size(), 1.0, 1);
        for (int i = 0; i < ref.size(); ++i)
            CHECK(bias.mu(i) == -ref.spin(i));
        CHECK(hamming_distance(bias, ref) == ref.size());
    }

    SECTION("every distance is achieved exactly, for any seed") {
        for (int d = 0; d <= ref.size(); ++d)
            for (std::uint64_t seed = 0; seed < 20; ++seed)
                CHECK(hamming_distance(make_bias(ref, d, 1.0, seed), ref) == d);
    }

    SECTION("determinism and seed separation") {
        const SpinConfiguration big = SpinConfiguration::from_bits(0x2af53c1, 26);
        const BiasField a = make_bias(big, 3, 1.0, 99);
        const BiasField b = make_bias(big, 3, 1.0, 99);
        CHECK(a.values() == b.values());
        CHECK(hamming_distance(a, big) == 3);

        bool any_differ = false;
        for (std::uint64_t seed = 0; seed < 10 && !any_differ; ++seed)
            any_differ = make_bias(big, 3, 1.0, seed).values() != a.values();
        CHECK(any_differ);
    }

    SECTION("parameter validation") {
        CHECK_THROWS_AS(make_bias(ref, -1, 1.0, 0), ParameterError);
        CHECK_THROWS_AS(make_bias(ref, ref.size() + 1, 1.0, 0), ParameterError);
        CHECK_THROWS_AS(make_bias(ref, 2, 0.0, 0), ParameterError);
        CHECK_THROWS_AS(make_bias(ref, 2, -1.0, 0), ParameterError);
    }
}

TEST_CASE("hamming distance counts sign disagreements", "[bias]") {
    const double b = 0.5;
    const SpinConfiguration s({+1, -1, -1, +1});
    CHECK(hamming_distance(BiasField({+b, +b, -b, +b}), s) == 1);
    CHECK(hamming_distance(BiasField({+b, -b, -b, +b}), s) == 0);

    const SpinConfiguration five({+1, +1, -1, +1, -1});
    std::vector<double> inverted;
    for (int i = 0; i < five.size(); ++i)
        inverted.push_back(-b * five.spin(i));
    CHECK(hamming_distance(BiasField(inverted), five) == 5);

    CHECK(hamming_distance(BiasField::null(4), s) == 0);
    CHECK(BiasField::null(4).is_null());
    CHECK_THROWS_AS(hamming_distance(BiasField({b, b, b}), s), DimensionError);
    CHECK_THROWS_AS(BiasField({0.5, -0.3}), ValidationError);
}

TEST_CASE("error ratio", "[bias]") {
    CHECK(error_ratio(1, 8) == 1.0 / 7.0);
    CHECK(error_ratio(3, 26) == 3.0 / 23.0);
    CHECK(error_ratio(0, 12) == 0.0);
    CHECK_THROWS_AS(error_ratio(8, 8), ParameterError);
    CHECK_THROWS_AS(error_ratio(-1, 8), ParameterError);
}

TEST_CASE("bias from a sampled configuration", "[bias]") {
    const ProblemInstance inst = generate_instance(8, 3);
    const SpinConfiguration& target = *inst.solution();

    CHECK(hamming_distance(bias_from_sample(target, 1.0), target) == 0);

    std::vector<int> wrong = target.to_ints();
    wrong[1] *= -1;
    wrong[4] *= -1;
    CHECK(hamming_distance(bias_from_sample(SpinConfiguration(wrong), 1.0), target) == 2);

    CHECK(bias_from_sample(target, 0.0).is_null());
    CHECK_THROWS_AS(bias_from_sample(target, -0.5), ParameterError);
}

TEST_CASE("flip sites are uniformly distributed", "[bias][statistics]") {
    const int n = 8, d = 3, trials = 20000;
    const SpinConfiguration ref = SpinConfiguration::from_bits(0b10110101, n);
    std::vector<int> flips(n, 0);
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        const BiasField bias = make_bias(ref, d, 1.0, derive_seed(4242, seed));
        for (int i = 0; i < n; ++i)
            if ((bias.mu(i) > 0 ? +1 : -1) != ref.spin(i))
                ++flips[i];
    }
    const double expected = static_cast<double>(d) / n;
    const double sigma = std::sqrt(expected * (1.0 - expected) / trials);
    for (int i = 0; i < n; ++i) {
        const double freq = static_cast<double>(flips[i]) / trials;
        CHECK(std::abs(freq - expected) < 5.0 * sigma);
    }
}

TEST_CASE("aligned bias keeps the solution as diagonal ground state", "[bias]") {
    for (std::uint64_t seed = 1; seed < 5; ++seed) {
        const ProblemInstance inst = generate_instance(8, seed);
        const IsingModel scaled = rescale(encode_ising(inst)).model;
        const BiasField bias = make_bias(*inst.solution(), 0, 1.0, seed);

        std::uint64_t argmin = 0;
        double best = 1e300;
        for (std::uint64_t bits = 0; bits < (1ull << inst.n()); ++bits) {
            const auto config = SpinConfiguration::from_bits(bits, inst.n());
            double e = ising_energy(scaled, config);
            for (int i = 0; i < inst.n(); ++i)
                e -= bias.mu(i) * config.spin(i);
            if (e < best) {
                best = e;
                argmin = bits;
            }
        }
        CHECK(argmin == inst.solution()->to_bits());
    }
}
