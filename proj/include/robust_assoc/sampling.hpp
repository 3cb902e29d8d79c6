#ifndef ROBUST_ASSOC_SAMPLING_HPP
#define ROBUST_ASSOC_SAMPLING_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>

#include "population.hpp"
#include "tables.hpp"

namespace robust_assoc {

using RandomEngine = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for replicate `index` of stream `stream`; independent of how replicates are scheduled.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

inline RandomEngine replicate_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return RandomEngine(derive_seed(seed, stream, index));
}

/// Multinomial draw by sequential conditional binomials.
inline GenotypeRow sample_multinomial(const std::array<double, 3>& probs, int count, RandomEngine& rng) {
    GenotypeRow row{0.0, 0.0, 0.0};
    int remaining = count;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < 3 && remaining > 0; ++i) {
        const double p = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 1.0;
        int k = 0;
        if (p >= 1.0) {
            k = remaining;
        } else if (p > 0.0) {
            k = std::binomial_distribution<int>(remaining, p)(rng);
        }
        row[i] = k;
        remaining -= k;
        mass -= probs[i];
    }
    row[2] = remaining;
    return row;
}

/// Independent multinomial case (r) and control (s) rows. No continuity correction.
inline GenotypeTable sample_table(const CaseControlProbs& probs, int r, int s, RandomEngine& rng) {
    const auto cases = sample_multinomial(probs.cases, r, rng);
    const auto controls = sample_multinomial(probs.controls, s, rng);
    return GenotypeTable(cases, controls);
}

/// Two stratum tables, each under its own prevalence, summed cellwise.
inline GenotypeTable sample_mixture(const MixturePopulation& mix, const PenetranceModel& f, RandomEngine& rng) {
    const auto probs_a = case_control_probs(f, hwe_genotype_freqs(mix.p_a));
    const auto probs_b = case_control_probs(f, hwe_genotype_freqs(mix.p_b));
    const auto ra = sample_multinomial(probs_a.cases, mix.cases_a, rng);
    const auto sa = sample_multinomial(probs_a.controls, mix.controls_a, rng);
    const auto rb = sample_multinomial(probs_b.cases, mix.cases_b, rng);
    const auto sb = sample_multinomial(probs_b.controls, mix.controls_b, rng);
    GenotypeRow cases{};
    GenotypeRow controls{};
    for (std::size_t i = 0; i < 3; ++i) {
        cases[i] = ra[i] + rb[i];
        controls[i] = sa[i] + sb[i];
    }
    return GenotypeTable(cases, controls);
}

} // namespace robust_assoc

#endif
