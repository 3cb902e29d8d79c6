#include <gtest/gtest.h>

#include <random>

#include <robust_assoc/montecarlo.hpp>

#include "support.hpp"

using namespace robust_assoc;

namespace {

Scenario hwe_scenario(double p, int r, int s, std::optional<PenetranceModel> f = std::nullopt) {
    Scenario sc;
    sc.id = "test";
    sc.population = HwePopulation{p};
    sc.cases = r;
    sc.controls = s;
    if (f) {
        sc.penetrance = *f;
        sc.null_hypothesis = false;
    }
    return sc;
}

SimulationOptions workers(unsigned n) {
    SimulationOptions o;
    o.workers = n;
    return o;
}

} // namespace

TEST(Scenario, ValidationErrors) {
    auto sc = hwe_scenario(0.3, 100, 100);
    EXPECT_NO_THROW(sc.validate());
    sc.population = HwePopulation{1.2};
    EXPECT_THROW(sc.validate(), Error);
    sc = hwe_scenario(0.3, 0, 100);
    EXPECT_THROW(sc.validate(), Error);
    sc = hwe_scenario(0.3, 100, 100);
    sc.penetrance = custom_penetrances(0.01, 0.02, 0.03);
    EXPECT_THROW(sc.validate(), Error);  // null flag with unequal penetrances
    sc = hwe_scenario(0.3, 100, 100);
    sc.population = MixturePopulation{0.1, 0.4, 50, 50, 60, 50};
    EXPECT_THROW(sc.validate(), Error);  // strata do not sum to s
}

TEST(Scenario, NullVersionSharesFingerprint) {
    const auto alt = hwe_scenario(0.3, 120, 80, penetrances_for_model(GeneticModel::Dominant, 0.01, 0.03));
    const auto null = alt.null_version();
    EXPECT_TRUE(null.null_hypothesis);
    EXPECT_TRUE(null.penetrance.is_null());
    EXPECT_EQ(null.null_fingerprint(), alt.null_fingerprint());
    auto other = alt;
    other.correction = false;
    EXPECT_NE(other.null_fingerprint(), alt.null_fingerprint());
}

TEST(Sampler, AppliesCorrection) {
    auto sc = hwe_scenario(0.3, 100, 100);
    auto rng = replicate_engine(1, 0, 0);
    const auto t = ScenarioSampler(sc).draw(rng);
    EXPECT_EQ(t.total(), 203.0);
    sc.correction = false;
    auto rng2 = replicate_engine(1, 0, 0);
    EXPECT_EQ(ScenarioSampler(sc).draw(rng2).total(), 200.0);
}

TEST(CriticalValue, RankConvention) {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = 100 - i;  // values 1..100
    // ceil(0.95 * 100) = 95th order statistic.
    EXPECT_EQ(empirical_critical_value(v, 0.05), 95.0);
    EXPECT_EQ(empirical_critical_value(v, 0.5), 50.0);
    EXPECT_EQ(empirical_critical_value(v, 0.001), 100.0);
    v.push_back(std::nan(""));
    EXPECT_EQ(empirical_critical_value(v, 0.05), 95.0);
    EXPECT_THROW(empirical_critical_value(v, 0.0), Error);
}

TEST(CriticalValue, NormalQuantileOracle) {
    std::vector<double> sample(200000);
    std::normal_distribution<double> n;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto rng = replicate_engine(5, 0, i);
        sample[i] = std::abs(n(rng));
    }
    EXPECT_NEAR(empirical_critical_value(sample, 0.05), support::normal_upper_quantile(0.025), 0.02);
    EXPECT_NEAR(support::normal_upper_quantile(0.025), 1.959964, 1e-6);
}

TEST(CriticalValue, TrendStatisticUnderNull) {
    const auto sc = hwe_scenario(0.5, 250, 250);
    const auto cv = estimate_critical_values(sc, StatisticBattery({StatisticId::ZHalf, StatisticId::Z1}), 40000, 0.05,
                                             3, workers(1));
    EXPECT_NEAR(cv.threshold(StatisticId::ZHalf), 1.96, 0.05);
    EXPECT_NEAR(cv.threshold(StatisticId::Z1), 1.96, 0.05);
    EXPECT_EQ(cv.valid[0], 40000u);
}

TEST(CriticalValue, MonotoneInAlphaAndMedian) {
    const auto sc = hwe_scenario(0.3, 200, 200);
    const StatisticBattery b({StatisticId::Z0, StatisticId::Max3, StatisticId::Chi2TwoDf});
    const auto values = simulate_decision_values(sc, b, 20000, 7, workers(1));
    for (std::size_t k = 0; k < b.size(); ++k) {
        const auto col = values.column(k);
        double previous = INFINITY;
        for (double a : {0.01, 0.05, 0.1, 0.25, 0.5}) {
            const double c = empirical_critical_value(col, a);
            EXPECT_LE(c, previous);
            previous = c;
        }
    }
    SimulatedValues signed_z = simulate_decision_values([&] {
        auto s = sc;
        s.sidedness = Sidedness::OneSided;
        return s;
    }(), StatisticBattery({StatisticId::ZHalf}), 20000, 9, workers(1));
    EXPECT_NEAR(empirical_critical_value(signed_z.column(0), 0.5), 0.0, 0.03);
}

TEST(CriticalValue, Preconditions) {
    const auto sc = hwe_scenario(0.3, 50, 50);
    EXPECT_THROW(estimate_critical_values(sc, StatisticBattery({StatisticId::Z0}), 999), Error);
    const auto alt = hwe_scenario(0.3, 50, 50, penetrances_for_model(GeneticModel::Additive, 0.01, 0.03));
    EXPECT_THROW(estimate_critical_values(alt, StatisticBattery({StatisticId::Z0}), 1000), Error);
}

TEST(Power, NullScenarioRejectsAtLevel) {
    const auto sc = hwe_scenario(0.3, 250, 250);
    const auto battery = StatisticBattery::paper_comparison();
    const auto cv = estimate_critical_values(sc, battery, 40000, 0.05, 11, workers(1));
    const auto row = estimate_power(sc, battery, cv, 10000, 12, workers(1));
    for (std::size_t k = 0; k < battery.size(); ++k) {
        EXPECT_NEAR(row.rates[k], 0.05, 3 * row.standard_errors[k] + 0.003) << to_string(battery[k]);
        EXPECT_NEAR(row.standard_errors[k], monte_carlo_se(row.rates[k], 10000), 1e-15);
    }
}

TEST(Power, MismatchedScenario) {
    const auto sc = hwe_scenario(0.3, 250, 250);
    const StatisticBattery b({StatisticId::Z0});
    const auto cv = estimate_critical_values(sc, b, 1000, 0.05, 1, workers(1));
    try {
        estimate_power(hwe_scenario(0.3, 250, 200), b, cv, 100, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MismatchedScenario);
    }
}

TEST(Power, NondecreasingInF2) {
    const auto null = hwe_scenario(0.3, 200, 200);
    const StatisticBattery b({StatisticId::ZHalf, StatisticId::Max3});
    const auto cv = estimate_critical_values(null, b, 20000, 0.05, 13, workers(1));
    std::vector<double> rates;
    for (double f2 : {0.015, 0.02, 0.03}) {
        const auto alt = hwe_scenario(0.3, 200, 200, penetrances_for_model(GeneticModel::Additive, 0.01, f2));
        rates.push_back(estimate_power(alt, b, cv, 4000, 14, workers(1)).rates[0]);
    }
    EXPECT_LT(rates[0], rates[1]);
    EXPECT_LT(rates[1], rates[2]);
}

TEST(Power, CalibrationReachesTarget) {
    auto alt = hwe_scenario(0.3, 250, 250, penetrances_for_model(GeneticModel::Recessive, 0.01, 0.01));
    alt.calibration_target = 0.8;
    const auto cv = estimate_critical_values(alt.null_version(), StatisticBattery({StatisticId::Z0}), 20000, 0.05, 15,
                                             workers(1));
    const auto cal = calibrate_penetrance(alt, 0.8, cv, 2000, 16, workers(1));
    EXPECT_NEAR(cal.power, 0.8, 0.005);
    EXPECT_EQ(cal.penetrance.kind, GeneticModel::Recessive);
    EXPECT_DOUBLE_EQ(cal.penetrance.f1, 0.01);
    alt.penetrance = cal.penetrance;
    EXPECT_DOUBLE_EQ(estimate_power(alt, StatisticBattery({StatisticId::Z0}), cv, 2000, 16, workers(1)).rates[0],
                     cal.power);
}

TEST(Power, CalibrationFailsWhenUnreachable) {
    auto alt = hwe_scenario(0.05, 10, 10, penetrances_for_model(GeneticModel::Recessive, 0.01, 0.01));
    const auto cv = estimate_critical_values(alt.null_version(), StatisticBattery({StatisticId::Z0}), 2000, 0.05, 15,
                                             workers(1));
    try {
        calibrate_penetrance(alt, 0.999, cv, 500, 16, workers(1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CalibrationFailed);
    }
}

TEST(Determinism, IndependentOfWorkerCount) {
    const auto sc = hwe_scenario(0.2, 150, 300, penetrances_for_model(GeneticModel::Dominant, 0.01, 0.02));
    const auto battery = StatisticBattery::full();
    const auto one = simulate_decision_values(sc, battery, 3001, 42, workers(1));
    for (unsigned w : {2u, 4u}) {
        const auto many = simulate_decision_values(sc, battery, 3001, 42, workers(w));
        ASSERT_EQ(one.values.size(), many.values.size());
        for (std::size_t i = 0; i < one.values.size(); ++i) {
            if (std::isnan(one.values[i])) {
                EXPECT_TRUE(std::isnan(many.values[i]));
            } else {
                EXPECT_EQ(one.values[i], many.values[i]);
            }
        }
        const auto m1 = mean_correlation_matrix(sc, 2001, 5, workers(1));
        const auto mw = mean_correlation_matrix(sc, 2001, 5, workers(w));
        EXPECT_EQ(m1.mean.rho_0_1, mw.mean.rho_0_1);
        EXPECT_EQ(m1.mean.rho_half_1, mw.mean.rho_half_1);
        const auto c1 = pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Chi2TwoDf, 5000, 1000, default_pvalue_bins(),
                                        8, workers(1));
        const auto cw = pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Chi2TwoDf, 5000, 1000, default_pvalue_bins(),
                                        8, workers(w));
        EXPECT_EQ(c1.counts, cw.counts);
        const auto rho = CorrelationMatrix::equicorrelated(3, 0.4);
        EXPECT_EQ(simulate_normal_maxima(rho, 5000, Sidedness::TwoSided, 3, workers(1)),
                  simulate_normal_maxima(rho, 5000, Sidedness::TwoSided, 3, workers(w)));
    }
}

TEST(MeanCorrelations, BalancedNull) {
    const auto m = mean_correlation_matrix(hwe_scenario(0.5, 250, 250), 5000, 3, workers(1));
    EXPECT_NEAR(m.mean.rho_0_half, 0.82, 0.02);
    EXPECT_NEAR(m.mean.rho_0_1, 0.33, 0.02);
    EXPECT_NEAR(m.mean.rho_half_1, 0.82, 0.02);
    EXPECT_EQ(m.errors, 0u);
}

TEST(MeanCorrelations, DegenerateSamplerReportsErrors) {
    // Without correction and with a very rare allele, the MM column is almost always empty.
    auto sc = hwe_scenario(0.001, 20, 20);
    sc.correction = false;
    try {
        const auto m = mean_correlation_matrix(sc, 500, 3, workers(1));
        EXPECT_GT(m.errors, 490u);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateProportions);
    }
}

TEST(MeanCorrelations, MertCorrelationWithExtremes) {
    // Under the null, corr(Z_MERT, Z_0) approaches sqrt((1 + rho_01) / 2).
    auto sc = hwe_scenario(0.3, 500, 500);
    sc.sidedness = Sidedness::OneSided;
    const StatisticBattery b({StatisticId::Z0, StatisticId::Z1, StatisticId::Mert});
    const auto v = simulate_decision_values(sc, b, 20000, 21, workers(1));
    auto corr = [&](std::size_t a, std::size_t c) {
        double ma = 0, mc = 0;
        for (std::size_t i = 0; i < v.replicates; ++i) {
            ma += v.at(i, a);
            mc += v.at(i, c);
        }
        ma /= v.replicates;
        mc /= v.replicates;
        double sac = 0, saa = 0, scc = 0;
        for (std::size_t i = 0; i < v.replicates; ++i) {
            sac += (v.at(i, a) - ma) * (v.at(i, c) - mc);
            saa += (v.at(i, a) - ma) * (v.at(i, a) - ma);
            scc += (v.at(i, c) - mc) * (v.at(i, c) - mc);
        }
        return sac / std::sqrt(saa * scc);
    };
    const double rho01 = estimate_correlations({0.49, 0.42, 0.09}).rho_0_1;
    const double expected = std::sqrt((1 + rho01) / 2);
    EXPECT_NEAR(corr(0, 2), expected, 0.02);
    EXPECT_NEAR(corr(1, 2), expected, 0.02);
}

TEST(CrossTab, SameStatisticIsDiagonal) {
    const auto sc = hwe_scenario(0.3, 200, 200, penetrances_for_model(GeneticModel::Additive, 0.01, 0.02));
    const auto tab = pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Max3, 5000, 800, default_pvalue_bins(), 1,
                                     workers(1));
    EXPECT_EQ(tab.total(), 800u);
    EXPECT_EQ(tab.upper_triangle(), 0u);
    EXPECT_EQ(tab.lower_triangle(), 0u);
}

TEST(CrossTab, NullMarginsAreUniform) {
    const auto sc = hwe_scenario(0.3, 250, 250);
    const auto tab = pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Chi2TwoDf, 40000, 10000, default_pvalue_bins(),
                                     2, workers(1));
    EXPECT_EQ(tab.total(), 10000u);
    double row = 0, col = 0;
    for (std::size_t j = 0; j < 4; ++j) {
        row += tab.counts[0][j];
        col += tab.counts[j][0];
    }
    const double se = std::sqrt(0.01 * 0.99 / 10000);
    EXPECT_NEAR(row / 10000, 0.01, 3 * se + 0.001);
    EXPECT_NEAR(col / 10000, 0.01, 3 * se + 0.001);
}

TEST(CrossTab, MarginMatchesPower) {
    const auto sc = hwe_scenario(0.3, 250, 250, penetrances_for_model(GeneticModel::Additive, 0.01, 0.018));
    const StatisticBattery b({StatisticId::Max3, StatisticId::Chi2TwoDf});
    const auto tab = pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Chi2TwoDf, 40000, 4000, default_pvalue_bins(),
                                     6, workers(1));
    const auto cv = estimate_critical_values(sc.null_version(), b, 40000, 0.05, derive_seed(6, 1, 0), workers(1));
    const auto row = estimate_power(sc, b, cv, 4000, derive_seed(6, 2, 0), workers(1));
    double first = 0, second = 0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            first += tab.counts[i][j];
            second += tab.counts[j][i];
        }
    // Same null and alternative streams: p < .05 agrees with exceeding the critical value up to ties.
    EXPECT_NEAR(first / 4000, row.rates[0], 0.01);
    EXPECT_NEAR(second / 4000, row.rates[1], 0.01);
}

TEST(CrossTab, BinsAreClosedOnTheLeft) {
    const std::vector<double> b{0.01, 0.05, 0.10};
    EXPECT_EQ(pvalue_bin(0.0099, b), 0u);
    EXPECT_EQ(pvalue_bin(0.01, b), 1u);
    EXPECT_EQ(pvalue_bin(0.05, b), 2u);
    EXPECT_EQ(pvalue_bin(0.10, b), 3u);
    EXPECT_EQ(pvalue_bin(1.0, b), 3u);
    const auto sc = hwe_scenario(0.3, 50, 50);
    EXPECT_THROW(pvalue_crosstab(sc, StatisticId::Max3, StatisticId::Z0, 100, 10, {0.05, 0.01}), Error);
}

TEST(NormalApproximation, SingleCoordinate) {
    const CorrelationMatrix one(1);
    EXPECT_NEAR(normal_approx_critical_max(one, 0.05, 200000, Sidedness::OneSided, 1), 1.645, 0.02);
    EXPECT_NEAR(normal_approx_critical_max(one, 0.05, 200000, Sidedness::TwoSided, 1), 1.96, 0.02);
}

TEST(NormalApproximation, PerfectCorrelationCollapses) {
    const CorrelationMatrix ones{{1, 1}, {1, 1}};
    // Both are the upper 5% point of one standard normal; SE of the estimate is about .01.
    EXPECT_NEAR(normal_approx_critical_max(ones, 0.05, 50000, Sidedness::OneSided, 2), 1.6449, 0.04);
    EXPECT_NEAR(normal_approx_critical_max(CorrelationMatrix(1), 0.05, 50000, Sidedness::OneSided, 2), 1.6449, 0.04);
}

TEST(NormalApproximation, NonincreasingInCorrelation) {
    double previous = INFINITY;
    for (double r : {-0.5, 0.0, 0.3, 0.6, 0.9}) {
        const double c = normal_approx_critical_max(CorrelationMatrix::equicorrelated(2, r), 0.05, 100000,
                                                    Sidedness::OneSided, 3);
        EXPECT_LT(c, previous + 0.005) << r;
        previous = c;
    }
}

TEST(NormalApproximation, NotPsd) {
    CorrelationMatrix m(3);
    m(0, 1) = m(1, 0) = 0.9;
    m(0, 2) = m(2, 0) = 0.9;
    m(1, 2) = m(2, 1) = -0.9;
    try {
        normal_approx_critical_max(m, 0.05, 1000, Sidedness::OneSided, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPSD);
    }
}

TEST(NormalApproximation, QuantileErrorShrinksLikeRootB) {
    // SE of the empirical upper 5% quantile is sqrt(a(1-a)/B) / phi(z).
    const double z = support::normal_upper_quantile(0.05);
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
    for (std::size_t b : {1000u, 10000u, 100000u}) {
        const double se = std::sqrt(0.05 * 0.95 / b) / phi;
        double worst = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const double c = normal_approx_critical_max(CorrelationMatrix(1), 0.05, b, Sidedness::OneSided, seed);
            worst = std::max(worst, std::abs(c - z));
        }
        EXPECT_LT(worst, 4 * se) << b;
    }
}

TEST(NormalApproximation, PValueOfObservedMaximum) {
    const CorrelationMatrix one(1);
    EXPECT_NEAR(normal_approx_max_pvalue(one, 1.96, 100000, Sidedness::TwoSided, 4), 0.05, 0.003);
    EXPECT_NEAR(normal_approx_max_pvalue(one, 1.645, 100000, Sidedness::OneSided, 4), 0.05, 0.003);
}
