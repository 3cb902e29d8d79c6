#ifndef ROBUST_ASSOC_MONTECARLO_HPP
#define ROBUST_ASSOC_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "population.hpp"
#include "robust.hpp"
#include "sampling.hpp"
#include "statistics.hpp"
#include "tables.hpp"
#include "trend.hpp"

namespace robust_assoc {

/// One simulated study design: population, penetrances, sample sizes and testing conventions.
struct Scenario {
    std::string id = "scenario";
    PopulationSpec population = HwePopulation{0.5};
    PenetranceModel penetrance = null_penetrance();
    bool null_hypothesis = true;
    int cases = 250;
    int controls = 250;
    bool correction = true;
    Sidedness sidedness = Sidedness::TwoSided;
    /// When set, f2 is bisected so the model's optimal trend test reaches this power.
    std::optional<double> calibration_target;

    const MixturePopulation* mixture() const { return std::get_if<MixturePopulation>(&population); }

    void validate() const {
        robust_assoc::validate(population);
        if (cases <= 0 || controls <= 0) {
            throw Error(ErrorKind::InvalidScenario, id + ": sample sizes must be positive");
        }
        if (const auto* mix = mixture()) {
            if (mix->case_total() != cases || mix->control_total() != controls) {
                throw Error(ErrorKind::InvalidScenario, id + ": stratum sizes must sum to r and s");
            }
        }
        const auto f = penetrance.values();
        for (double v : f) {
            if (!(v > 0.0 && v < 1.0)) {
                throw Error(ErrorKind::FrequencyOutOfRange, id + ": penetrances must lie in (0,1)");
            }
        }
        if (null_hypothesis && !penetrance.is_null()) {
            throw Error(ErrorKind::InvalidScenario, id + ": null scenario needs f0 = f1 = f2");
        }
        if (!null_hypothesis && !(f[0] <= f[1] && f[1] <= f[2])) {
            throw Error(ErrorKind::OrderViolation, id + ": penetrances must satisfy f0 <= f1 <= f2");
        }
        if (calibration_target && !(*calibration_target > 0.0 && *calibration_target < 1.0)) {
            throw Error(ErrorKind::InvalidScenario, id + ": calibration target must lie in (0,1)");
        }
    }

    /// Same design with the penetrances collapsed to f0.
    Scenario null_version() const {
        Scenario out = *this;
        out.penetrance = null_penetrance(penetrance.f0);
        out.null_hypothesis = true;
        out.calibration_target.reset();
        return out;
    }

    /// Everything that determines the null distribution of the statistics.
    std::string null_fingerprint() const {
        char buf[256];
        if (const auto* mix = mixture()) {
            std::snprintf(buf, sizeof buf, "mixture(pA=%.17g,pB=%.17g,R1=%d,R2=%d,S1=%d,S2=%d)", mix->p_a, mix->p_b,
                          mix->cases_a, mix->cases_b, mix->controls_a, mix->controls_b);
        } else {
            std::snprintf(buf, sizeof buf, "hwe(p=%.17g)", std::get<HwePopulation>(population).p);
        }
        return std::string(buf) + ";r=" + std::to_string(cases) + ";s=" + std::to_string(controls) +
               ";correction=" + (correction ? "on" : "off") + ";sided=" + std::string(to_string(sidedness));
    }
};

/// Precomputed genotype probabilities for repeated draws from one scenario.
class ScenarioSampler {
public:
    explicit ScenarioSampler(const Scenario& scenario) : scenario_(scenario) {
        scenario_.validate();
        if (const auto* mix = scenario_.mixture()) {
            strata_ = {case_control_probs(scenario_.penetrance, hwe_genotype_freqs(mix->p_a)),
                       case_control_probs(scenario_.penetrance, hwe_genotype_freqs(mix->p_b))};
        } else {
            strata_ = {case_control_probs(scenario_.penetrance,
                                          hwe_genotype_freqs(std::get<HwePopulation>(scenario_.population).p))};
        }
    }

    GenotypeTable draw(RandomEngine& rng) const {
        GenotypeTable table = [&] {
            if (const auto* mix = scenario_.mixture()) {
                const auto ra = sample_multinomial(strata_[0].cases, mix->cases_a, rng);
                const auto sa = sample_multinomial(strata_[0].controls, mix->controls_a, rng);
                const auto rb = sample_multinomial(strata_[1].cases, mix->cases_b, rng);
                const auto sb = sample_multinomial(strata_[1].controls, mix->controls_b, rng);
                return GenotypeTable(GenotypeRow{ra[0] + rb[0], ra[1] + rb[1], ra[2] + rb[2]},
                                     GenotypeRow{sa[0] + sb[0], sa[1] + sb[1], sa[2] + sb[2]});
            }
            return sample_table(strata_[0], scenario_.cases, scenario_.controls, rng);
        }();
        return scenario_.correction ? apply_continuity_correction(table) : table;
    }

    const Scenario& scenario() const noexcept { return scenario_; }

private:
    Scenario scenario_;
    std::vector<CaseControlProbs> strata_;
};

struct SimulationOptions {
    /// 0 selects the hardware concurrency.
    unsigned workers = 0;
    std::vector<double> grid = default_grid();
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs body(index) for index in [0, count) over contiguous blocks, one block
 * per worker. Results must be written to per-index slots so the output never
 * depends on scheduling.
 */
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> failures(workers);
    const std::size_t block = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(count, (w + 1) * block);
                for (std::size_t i = w * block; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

/// Decision values, one column per battery entry, one row per replicate. NaN marks a failed evaluation.
struct SimulatedValues {
    StatisticBattery battery;
    std::size_t replicates = 0;
    std::vector<double> values;

    double at(std::size_t replicate, std::size_t stat) const { return values[replicate * battery.size() + stat]; }

    std::vector<double> column(std::size_t stat) const {
        std::vector<double> out(replicates);
        for (std::size_t b = 0; b < replicates; ++b) {
            out[b] = at(b, stat);
        }
        return out;
    }
};

inline SimulatedValues simulate_decision_values(const Scenario& scenario, const StatisticBattery& battery,
                                                std::size_t replicates, std::uint64_t seed,
                                                const SimulationOptions& options = {}) {
    const ScenarioSampler sampler(scenario);
    EvaluationOptions eval;
    eval.sidedness = scenario.sidedness;
    eval.grid = options.grid;
    SimulatedValues out{battery, replicates, std::vector<double>(replicates * battery.size())};
    parallel_for(replicates, options.workers, [&](std::size_t b) {
        auto rng = replicate_engine(seed, 0, b);
        const auto table = sampler.draw(rng);
        evaluate_decision_values(table, battery, eval,
                                 std::span<double>(out.values).subspan(b * battery.size(), battery.size()));
    });
    return out;
}

/**
 * Upper-alpha empirical quantile: with the sorted finite sample v(1..B) the
 * threshold is v(ceil((1-alpha) B)). Callers reject when the decision value is
 * strictly greater.
 */
inline double empirical_critical_value(std::span<const double> sample, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    }
    std::vector<double> sorted;
    sorted.reserve(sample.size());
    for (double v : sample) {
        if (!std::isnan(v)) sorted.push_back(v);
    }
    if (sorted.empty()) {
        throw Error(ErrorKind::DegenerateTable, "no valid null values to form a critical value");
    }
    const auto count = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * count - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

struct CriticalValueSet {
    StatisticBattery battery;
    std::vector<double> thresholds;
    /// Null replicates on which each statistic could be evaluated.
    std::vector<std::size_t> valid;
    double alpha = 0.05;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::string null_fingerprint;

    double threshold(StatisticId id) const {
        const auto i = battery.index_of(id);
        if (!i) {
            throw Error(ErrorKind::UnknownStatistic,
                        "no critical value for '" + std::string(to_string(id)) + "'");
        }
        return thresholds[*i];
    }
};

inline CriticalValueSet critical_values_from_sample(const SimulatedValues& null_values, double alpha,
                                                    std::uint64_t seed, std::string fingerprint) {
    CriticalValueSet out;
    out.battery = null_values.battery;
    out.alpha = alpha;
    out.replicates = null_values.replicates;
    out.seed = seed;
    out.null_fingerprint = std::move(fingerprint);
    for (std::size_t k = 0; k < null_values.battery.size(); ++k) {
        const auto column = null_values.column(k);
        out.valid.push_back(static_cast<std::size_t>(
            std::count_if(column.begin(), column.end(), [](double v) { return !std::isnan(v); })));
        out.thresholds.push_back(out.valid.back() > 0 ? empirical_critical_value(column, alpha)
                                                      : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

/// Empirical alpha-level thresholds from a null simulation of the scenario.
inline CriticalValueSet estimate_critical_values(const Scenario& null_scenario, const StatisticBattery& battery,
                                                 std::size_t replicates = 200000, double alpha = 0.05,
                                                 std::uint64_t seed = 1, const SimulationOptions& options = {}) {
    if (replicates < 1000) {
        throw Error(ErrorKind::InvalidArgument, "critical values need at least 1000 null replicates");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    }
    if (!null_scenario.null_hypothesis) {
        throw Error(ErrorKind::InvalidScenario, "critical values require a null scenario");
    }
    const auto sample = simulate_decision_values(null_scenario, battery, replicates, seed, options);
    return critical_values_from_sample(sample, alpha, seed, null_scenario.null_fingerprint());
}

struct PowerRow {
    std::string scenario_id;
    StatisticBattery battery;
    std::vector<double> rates;
    std::vector<double> standard_errors;
    /// Replicates on which the statistic failed (counted as non-rejections).
    std::vector<std::size_t> errors;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;

    double rate(StatisticId id) const { return rates.at(index(id)); }
    double standard_error(StatisticId id) const { return standard_errors.at(index(id)); }

private:
    std::size_t index(StatisticId id) const {
        const auto i = battery.index_of(id);
        if (!i) {
            throw Error(ErrorKind::UnknownStatistic, "statistic not in power row");
        }
        return *i;
    }
};

inline double monte_carlo_se(double rate, std::size_t replicates) {
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(replicates));
}

/// Rejection frequency of each statistic at the supplied null thresholds.
inline PowerRow estimate_power(const Scenario& scenario, const StatisticBattery& battery,
                               const CriticalValueSet& criticals, std::size_t replicates = 10000,
                               std::uint64_t seed = 2, const SimulationOptions& options = {}) {
    if (scenario.null_fingerprint() != criticals.null_fingerprint) {
        throw Error(ErrorKind::MismatchedScenario, "critical values were built for '" + criticals.null_fingerprint +
                                                       "', not '" + scenario.null_fingerprint() + "'");
    }
    if (replicates == 0) {
        throw Error(ErrorKind::InvalidArgument, "power needs at least one replicate");
    }
    std::vector<double> thresholds;
    for (auto id : battery.ids()) {
        thresholds.push_back(criticals.threshold(id));
    }
    const auto sample = simulate_decision_values(scenario, battery, replicates, seed, options);
    PowerRow row{scenario.id, battery, {}, {}, {}, replicates, seed};
    for (std::size_t k = 0; k < battery.size(); ++k) {
        std::size_t rejections = 0;
        std::size_t errors = 0;
        for (std::size_t b = 0; b < replicates; ++b) {
            const double v = sample.at(b, k);
            if (std::isnan(v)) {
                ++errors;
            } else if (v > thresholds[k]) {
                ++rejections;
            }
        }
        const double rate = static_cast<double>(rejections) / static_cast<double>(replicates);
        row.rates.push_back(rate);
        row.standard_errors.push_back(monte_carlo_se(rate, replicates));
        row.errors.push_back(errors);
    }
    return row;
}

inline StatisticId optimal_statistic(GeneticModel kind) {
    switch (kind) {
    case GeneticModel::Recessive: return StatisticId::Z0;
    case GeneticModel::Additive: return StatisticId::ZHalf;
    case GeneticModel::Dominant: return StatisticId::Z1;
    case GeneticModel::Custom: break;
    }
    throw Error(ErrorKind::InvalidArgument, "custom models have no optimal trend test");
}

struct CalibrationResult {
    PenetranceModel penetrance;
    double power = 0.0;
    int iterations = 0;
};

/**
 * Bisection on f2 (f0 fixed, f1 tied to f0/f2 by the model) until the
 * optimal trend test reaches `target` power within `tolerance`. Every step
 * reuses the same replicate streams, so the power curve is deterministic.
 */
inline CalibrationResult calibrate_penetrance(const Scenario& scenario, double target,
                                              const CriticalValueSet& criticals, std::size_t replicates,
                                              std::uint64_t seed, const SimulationOptions& options = {},
                                              double tolerance = 0.005, double f2_max = 0.99) {
    const auto kind = scenario.penetrance.kind;
    const auto stat = optimal_statistic(kind);
    const StatisticBattery single({stat});
    const double f0 = scenario.penetrance.f0;

    auto power_at = [&](double f2) {
        Scenario trial = scenario;
        trial.penetrance = penetrances_for_model(kind, f0, f2);
        trial.null_hypothesis = false;
        trial.calibration_target.reset();
        return estimate_power(trial, single, criticals, replicates, seed, options).rates[0];
    };

    double lo = f0;
    double hi = f2_max;
    double hi_power = power_at(hi);
    if (hi_power < target - tolerance) {
        throw Error(ErrorKind::CalibrationFailed, scenario.id + ": target power unreachable with f2 <= " +
                                                      std::to_string(f2_max));
    }
    CalibrationResult best{penetrances_for_model(kind, f0, hi), hi_power, 0};
    for (int it = 1; it <= 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double pw = power_at(mid);
        if (std::abs(pw - target) < std::abs(best.power - target)) {
            best = {penetrances_for_model(kind, f0, mid), pw, it};
        }
        if (std::abs(pw - target) <= tolerance) {
            return best;
        }
        (pw < target ? lo : hi) = mid;
    }
    if (std::abs(best.power - target) > tolerance) {
        throw Error(ErrorKind::CalibrationFailed, scenario.id + ": bisection did not reach the target power");
    }
    return best;
}

struct MeanCorrelations {
    CorrelationTriple mean;
    std::size_t replicates = 0;
    std::size_t errors = 0;
};

/// Average over replicates of the correlation triple estimated from n_i / n.
inline MeanCorrelations mean_correlation_matrix(const Scenario& scenario, std::size_t replicates = 10000,
                                                std::uint64_t seed = 3, const SimulationOptions& options = {}) {
    const ScenarioSampler sampler(scenario);
    std::vector<CorrelationTriple> triples(replicates);
    std::vector<char> ok(replicates, 0);
    parallel_for(replicates, options.workers, [&](std::size_t b) {
        auto rng = replicate_engine(seed, 0, b);
        const auto table = sampler.draw(rng);
        try {
            triples[b] = estimate_correlations(table.pooled_proportions());
            ok[b] = 1;
        } catch (const Error&) {
        }
    });
    MeanCorrelations out{{0.0, 0.0, 0.0}, replicates, 0};
    std::size_t valid = 0;
    for (std::size_t b = 0; b < replicates; ++b) {
        if (!ok[b]) {
            ++out.errors;
            continue;
        }
        ++valid;
        out.mean.rho_0_half += triples[b].rho_0_half;
        out.mean.rho_0_1 += triples[b].rho_0_1;
        out.mean.rho_half_1 += triples[b].rho_half_1;
    }
    if (valid == 0) {
        throw Error(ErrorKind::DegenerateProportions, scenario.id + ": correlations failed on every replicate");
    }
    out.mean.rho_0_half /= static_cast<double>(valid);
    out.mean.rho_0_1 /= static_cast<double>(valid);
    out.mean.rho_half_1 /= static_cast<double>(valid);
    return out;
}

/// Bin index for p: the number of boundaries <= p (bins are closed on the left).
inline std::size_t pvalue_bin(double p, std::span<const double> boundaries) {
    return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), p) - boundaries.begin());
}

/// (1 + #{null >= observed}) / (1 + B) against a sorted finite null sample.
inline double empirical_pvalue(std::span<const double> sorted_null, double observed) {
    if (std::isnan(observed)) {
        return 1.0;
    }
    const auto at_least = sorted_null.end() - std::lower_bound(sorted_null.begin(), sorted_null.end(), observed);
    return (1.0 + static_cast<double>(at_least)) / (1.0 + static_cast<double>(sorted_null.size()));
}

struct PValueCrossTab {
    StatisticId first = StatisticId::Max3;
    StatisticId second = StatisticId::Chi2TwoDf;
    std::vector<double> boundaries;
    /// counts[i][j]: first statistic in bin i, second in bin j.
    std::vector<std::vector<std::size_t>> counts;
    std::size_t null_replicates = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;

    std::size_t total() const {
        std::size_t sum = 0;
        for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
        return sum;
    }
    /// Replicates where the first statistic lands in a smaller p-value bin than the second.
    std::size_t upper_triangle() const {
        std::size_t sum = 0;
        for (std::size_t i = 0; i < counts.size(); ++i)
            for (std::size_t j = i + 1; j < counts.size(); ++j) sum += counts[i][j];
        return sum;
    }
    std::size_t lower_triangle() const {
        std::size_t sum = 0;
        for (std::size_t i = 0; i < counts.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) sum += counts[i][j];
        return sum;
    }
};

inline std::vector<double> default_pvalue_bins() { return {0.01, 0.05, 0.10}; }

/**
 * Matched p-value comparison. Both statistics are referred to one shared null
 * sample drawn from the scenario's null version, then each alternative
 * replicate is cross-classified by the two p-value bins.
 */
inline PValueCrossTab pvalue_crosstab(const Scenario& scenario, StatisticId first, StatisticId second,
                                      std::size_t null_replicates = 200000, std::size_t replicates = 5000,
                                      std::vector<double> boundaries = default_pvalue_bins(), std::uint64_t seed = 4,
                                      const SimulationOptions& options = {}) {
    if (boundaries.empty()) {
        throw Error(ErrorKind::InvalidArgument, "need at least one p-value bin boundary");
    }
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (!(boundaries[i] > 0.0 && boundaries[i] < 1.0) || (i > 0 && !(boundaries[i] > boundaries[i - 1]))) {
            throw Error(ErrorKind::InvalidArgument, "bin boundaries must be strictly increasing within (0,1)");
        }
    }
    if (null_replicates == 0) {
        throw Error(ErrorKind::InvalidArgument, "need a nonempty null sample");
    }
    const StatisticBattery battery = first == second ? StatisticBattery({first}) : StatisticBattery({first, second});
    const std::size_t second_col = first == second ? 0 : 1;

    const auto null_sample =
        simulate_decision_values(scenario.null_version(), battery, null_replicates, derive_seed(seed, 1, 0), options);
    std::vector<std::vector<double>> sorted_null(battery.size());
    for (std::size_t k = 0; k < battery.size(); ++k) {
        for (double v : null_sample.column(k)) {
            if (!std::isnan(v)) sorted_null[k].push_back(v);
        }
        std::sort(sorted_null[k].begin(), sorted_null[k].end());
    }
    const auto alt_sample = simulate_decision_values(scenario, battery, replicates, derive_seed(seed, 2, 0), options);

    PValueCrossTab out{first, second, boundaries,
                       std::vector<std::vector<std::size_t>>(boundaries.size() + 1,
                                                             std::vector<std::size_t>(boundaries.size() + 1, 0)),
                       null_replicates, replicates, seed};
    for (std::size_t b = 0; b < replicates; ++b) {
        const double pa = empirical_pvalue(sorted_null[0], alt_sample.at(b, 0));
        const double pb = empirical_pvalue(sorted_null[second_col], alt_sample.at(b, second_col));
        ++out.counts[pvalue_bin(pa, out.boundaries)][pvalue_bin(pb, out.boundaries)];
    }
    return out;
}

namespace detail {

inline bool at_least(double permuted, double observed) {
    return permuted >= observed - 1e-9 * std::max(1.0, std::abs(observed));
}

inline double observed_decision(const GenotypeTable& t, StatisticId id, const EvaluationOptions& eval,
                                bool correction) {
    try {
        return decision_value(correction ? apply_continuity_correction(t) : t, id, eval);
    } catch (const Error& e) {
        throw Error(ErrorKind::DegenerateTable, std::string("observed statistic undefined: ") + e.what());
    }
}

inline double permuted_decision(const GenotypeTable& t, StatisticId id, const EvaluationOptions& eval,
                                bool correction) {
    try {
        return decision_value(correction ? apply_continuity_correction(t) : t, id, eval);
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace detail

struct PermutationOptions {
    EvaluationOptions evaluation;
    /// Add 1/2 to every cell of the observed and permuted tables before evaluating.
    bool correction = false;
};

/**
 * Monte Carlo permutation p-value (1 + #{permuted >= observed}) / (1 + B).
 * Case/control labels are permuted with the genotype column totals fixed, so
 * the case row is a multivariate hypergeometric draw. Permuted tables on which
 * the statistic is undefined never count as exceedances.
 */
inline double permutation_pvalue(const GenotypeTable& t, StatisticId id, std::size_t permutations,
                                 std::uint64_t seed, const PermutationOptions& options = {}) {
    require_integral(t);
    const double observed = detail::observed_decision(t, id, options.evaluation, options.correction);
    const auto r = static_cast<std::size_t>(t.case_total());
    std::vector<std::uint8_t> pool;
    for (std::size_t g = 0; g < kGenotypes; ++g) {
        pool.insert(pool.end(), static_cast<std::size_t>(t.genotype_total(g)), static_cast<std::uint8_t>(g));
    }
    const std::array<double, 3> totals{t.genotype_total(0), t.genotype_total(1), t.genotype_total(2)};
    std::size_t exceed = 0;
    for (std::size_t b = 0; b < permutations; ++b) {
        auto rng = replicate_engine(seed, 7, b);
        auto labels = pool;
        GenotypeRow cases{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < r; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, labels.size() - 1);
            std::swap(labels[i], labels[pick(rng)]);
            cases[labels[i]] += 1.0;
        }
        const GenotypeRow controls{totals[0] - cases[0], totals[1] - cases[1], totals[2] - cases[2]};
        const double v = detail::permuted_decision(GenotypeTable(cases, controls), id, options.evaluation,
                                                   options.correction);
        if (!std::isnan(v) && detail::at_least(v, observed)) {
            ++exceed;
        }
    }
    return (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(permutations));
}

/// Exact permutation p-value as a fraction of equally likely label assignments.
struct ExactPValue {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 1;
    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

inline std::uint64_t binomial_coefficient(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t out = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        out = out * (n - k + i) / i;
    }
    return out;
}

/// Enumerates every case row compatible with the margins, weighted by its number of labelings.
inline ExactPValue exact_permutation_pvalue(const GenotypeTable& t, StatisticId id,
                                            const PermutationOptions& options = {}) {
    require_integral(t);
    if (t.total() > 60) {
        throw Error(ErrorKind::InvalidArgument, "exact enumeration is limited to n <= 60");
    }
    const double observed = detail::observed_decision(t, id, options.evaluation, options.correction);
    const auto n0 = static_cast<std::uint64_t>(t.genotype_total(0));
    const auto n1 = static_cast<std::uint64_t>(t.genotype_total(1));
    const auto n2 = static_cast<std::uint64_t>(t.genotype_total(2));
    const auto r = static_cast<std::uint64_t>(t.case_total());
    ExactPValue out{0, binomial_coefficient(n0 + n1 + n2, r)};
    for (std::uint64_t a0 = 0; a0 <= std::min(n0, r); ++a0) {
        for (std::uint64_t a1 = 0; a1 <= std::min(n1, r - a0); ++a1) {
            const std::uint64_t a2 = r - a0 - a1;
            if (a2 > n2) continue;
            const GenotypeTable perm(GenotypeRow{double(a0), double(a1), double(a2)},
                                     GenotypeRow{double(n0 - a0), double(n1 - a1), double(n2 - a2)});
            const double v = detail::permuted_decision(perm, id, options.evaluation, options.correction);
            if (!std::isnan(v) && detail::at_least(v, observed)) {
                out.numerator += binomial_coefficient(n0, a0) * binomial_coefficient(n1, a1) *
                                 binomial_coefficient(n2, a2);
            }
        }
    }
    return out;
}

/// B draws of the maximum of jointly normal statistics with correlation matrix `rho`.
inline std::vector<double> simulate_normal_maxima(const CorrelationMatrix& rho, std::size_t replicates,
                                                  Sidedness sidedness, std::uint64_t seed,
                                                  const SimulationOptions& options = {}) {
    rho.validate();
    const auto k = static_cast<Eigen::Index>(rho.size());
    if (k == 0) {
        throw Error(ErrorKind::InvalidArgument, "empty correlation matrix");
    }
    Eigen::MatrixXd m(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = rho(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw Error(ErrorKind::NotPSD, "correlation matrix is not positive semidefinite");
    }
    const Eigen::MatrixXd root =
        solver.eigenvectors() * solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    // Bounded storage keeps the per-draw vectors off the heap for typical family sizes.
    using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 32, 1>;
    if (k > 32) {
        throw Error(ErrorKind::InvalidArgument, "at most 32 correlated statistics are supported");
    }
    // Fixed blocks of draws share one stream; block boundaries do not depend on the worker count.
    constexpr std::size_t kBlock = 1024;
    std::vector<double> maxima(replicates);
    const std::size_t blocks = (replicates + kBlock - 1) / kBlock;
    parallel_for(blocks, options.workers, [&](std::size_t blk) {
        auto rng = replicate_engine(seed, 11, blk);
        std::normal_distribution<double> normal;
        Vector z(k);
        const std::size_t end = std::min(replicates, (blk + 1) * kBlock);
        for (std::size_t b = blk * kBlock; b < end; ++b) {
            for (Eigen::Index i = 0; i < k; ++i) z(i) = normal(rng);
            const Vector x = root * z;
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < k; ++i) best = std::max(best, detail::fold(x(i), sidedness));
            maxima[b] = best;
        }
    });
    return maxima;
}

/**
 * Critical value of the maximum of correlated normal statistics. This is the
 * approximation mode; default MAX critical values come from null-table simulation.
 */
inline double normal_approx_critical_max(const CorrelationMatrix& rho, double alpha, std::size_t replicates,
                                         Sidedness sidedness, std::uint64_t seed,
                                         const SimulationOptions& options = {}) {
    return empirical_critical_value(simulate_normal_maxima(rho, replicates, sidedness, seed, options), alpha);
}

/// Normal-approximation p-value of an observed maximum, (1 + #{draws >= observed}) / (1 + B).
inline double normal_approx_max_pvalue(const CorrelationMatrix& rho, double observed, std::size_t replicates,
                                       Sidedness sidedness, std::uint64_t seed, const SimulationOptions& options = {}) {
    auto maxima = simulate_normal_maxima(rho, replicates, sidedness, seed, options);
    std::sort(maxima.begin(), maxima.end());
    return empirical_pvalue(maxima, observed);
}

} // namespace robust_assoc

#endif
