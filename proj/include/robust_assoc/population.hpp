#ifndef ROBUST_ASSOC_POPULATION_HPP
#define ROBUST_ASSOC_POPULATION_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "error.hpp"
#include "tables.hpp"

namespace robust_assoc {

enum class GeneticModel { Recessive, Additive, Dominant, Custom };

inline std::string_view to_string(GeneticModel kind) {
    switch (kind) {
    case GeneticModel::Recessive: return "rec";
    case GeneticModel::Additive: return "add";
    case GeneticModel::Dominant: return "dom";
    case GeneticModel::Custom: return "custom";
    }
    return "custom";
}

/// Disease probabilities given NN, NM, MM.
struct PenetranceModel {
    double f0 = 0.01;
    double f1 = 0.01;
    double f2 = 0.01;
    GeneticModel kind = GeneticModel::Custom;

    bool is_null() const noexcept { return f0 == f1 && f1 == f2; }
    std::array<double, 3> values() const noexcept { return {f0, f1, f2}; }
};

inline PenetranceModel null_penetrance(double f = 0.01) {
    return {f, f, f, GeneticModel::Custom};
}

inline PenetranceModel penetrances_for_model(GeneticModel kind, double f0, double f2) {
    if (!(f0 > 0.0 && f0 < 1.0 && f2 > 0.0 && f2 < 1.0)) {
        throw Error(ErrorKind::FrequencyOutOfRange, "penetrances must lie in (0,1)");
    }
    if (f2 < f0) {
        throw Error(ErrorKind::OrderViolation, "f2 must be at least f0");
    }
    switch (kind) {
    case GeneticModel::Recessive: return {f0, f0, f2, kind};
    case GeneticModel::Additive: return {f0, 0.5 * (f0 + f2), f2, kind};
    case GeneticModel::Dominant: return {f0, f2, f2, kind};
    case GeneticModel::Custom: break;
    }
    throw Error(ErrorKind::InvalidArgument, "custom penetrances need an explicit f1");
}

inline PenetranceModel custom_penetrances(double f0, double f1, double f2) {
    for (double f : {f0, f1, f2}) {
        if (!(f > 0.0 && f < 1.0)) {
            throw Error(ErrorKind::FrequencyOutOfRange, "penetrances must lie in (0,1)");
        }
    }
    if (f1 < f0 || f2 < f1) {
        throw Error(ErrorKind::OrderViolation, "penetrances must satisfy f0 <= f1 <= f2");
    }
    return {f0, f1, f2, GeneticModel::Custom};
}

struct GenotypeFreqs {
    double g0 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;

    std::array<double, 3> values() const noexcept { return {g0, g1, g2}; }
};

/// HWE genotype frequencies (q^2, 2pq, p^2) for M-allele frequency p.
inline GenotypeFreqs hwe_genotype_freqs(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorKind::FrequencyOutOfRange, "allele frequency must lie in (0,1)");
    }
    const double q = 1.0 - p;
    return {q * q, 2.0 * p * q, p * p};
}

inline double prevalence(const PenetranceModel& f, const GenotypeFreqs& g) noexcept {
    return f.f0 * g.g0 + f.f1 * g.g1 + f.f2 * g.g2;
}

/// Genotype probabilities among cases (p) and controls (q).
struct CaseControlProbs {
    std::array<double, 3> cases{};
    std::array<double, 3> controls{};
    double prevalence = 0.0;
};

inline CaseControlProbs case_control_probs(const PenetranceModel& f, const GenotypeFreqs& g) {
    const double d = prevalence(f, g);
    if (!(d > 0.0 && d < 1.0)) {
        throw Error(ErrorKind::DegeneratePrevalence, "prevalence must lie in (0,1)");
    }
    const auto fv = f.values();
    const auto gv = g.values();
    CaseControlProbs out;
    out.prevalence = d;
    for (std::size_t i = 0; i < 3; ++i) {
        out.cases[i] = fv[i] * gv[i] / d;
        out.controls[i] = (1.0 - fv[i]) * gv[i] / (1.0 - d);
    }
    return out;
}

struct HwePopulation {
    double p = 0.5;
    friend bool operator==(const HwePopulation&, const HwePopulation&) = default;
};

/// Two strata with their own allele frequencies and fixed per-stratum sample sizes.
struct MixturePopulation {
    double p_a = 0.1;
    double p_b = 0.4;
    int cases_a = 0;
    int cases_b = 0;
    int controls_a = 0;
    int controls_b = 0;

    int case_total() const noexcept { return cases_a + cases_b; }
    int control_total() const noexcept { return controls_a + controls_b; }

    /// Stratum-size weighted M-allele frequency of the pooled controls.
    double pooled_frequency() const noexcept {
        return (controls_a * p_a + controls_b * p_b) / static_cast<double>(control_total());
    }
    friend bool operator==(const MixturePopulation&, const MixturePopulation&) = default;
};

using PopulationSpec = std::variant<HwePopulation, MixturePopulation>;

inline void validate(const PopulationSpec& spec) {
    auto check_freq = [](double p) {
        if (!(p > 0.0 && p < 1.0)) {
            throw Error(ErrorKind::FrequencyOutOfRange, "allele frequency must lie in (0,1)");
        }
    };
    if (const auto* hwe = std::get_if<HwePopulation>(&spec)) {
        check_freq(hwe->p);
        return;
    }
    const auto& mix = std::get<MixturePopulation>(spec);
    check_freq(mix.p_a);
    check_freq(mix.p_b);
    if (mix.cases_a <= 0 || mix.cases_b <= 0 || mix.controls_a <= 0 || mix.controls_b <= 0) {
        throw Error(ErrorKind::InvalidScenario, "mixture stratum sizes must be positive");
    }
}

} // namespace robust_assoc

#endif
