#ifndef ROBUST_ASSOC_TEST_SUPPORT_HPP
#define ROBUST_ASSOC_TEST_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

#include <robust_assoc/statistics.hpp>
#include <robust_assoc/tables.hpp>

namespace support {

using robust_assoc::GenotypeTable;

/// Random integer table with every row nonempty.
inline GenotypeTable random_table(std::mt19937_64& rng, int max_cell = 60, int min_cell = 0) {
    std::uniform_int_distribution<int> cell(min_cell, max_cell);
    for (;;) {
        std::array<double, 6> c{};
        for (auto& v : c) v = cell(rng);
        if (c[0] + c[1] + c[2] > 0 && c[3] + c[4] + c[5] > 0) {
            return GenotypeTable(c[0], c[1], c[2], c[3], c[4], c[5]);
        }
    }
}

/// Uniform point in the open 2-simplex, bounded away from the faces by `eps`.
inline std::array<double, 3> random_interior_point(std::mt19937_64& rng, double eps = 1e-4) {
    std::exponential_distribution<double> e(1.0);
    for (;;) {
        const double a = e(rng), b = e(rng), c = e(rng);
        const double s = a + b + c;
        std::array<double, 3> p{a / s, b / s, c / s};
        if (p[0] > eps && p[1] > eps && p[2] > eps) return p;
    }
}

/**
 * Trend statistic from the subject-level data: expand the table into one
 * (score, case indicator) pair per subject and return sqrt(n) times their
 * Pearson correlation.
 */
inline double subject_level_trend(const GenotypeTable& t, const std::array<double, 3>& x) {
    std::vector<double> score;
    std::vector<double> status;
    for (std::size_t g = 0; g < 3; ++g) {
        for (int k = 0; k < static_cast<int>(t.cases()[g]); ++k) {
            score.push_back(x[g]);
            status.push_back(1.0);
        }
        for (int k = 0; k < static_cast<int>(t.controls()[g]); ++k) {
            score.push_back(x[g]);
            status.push_back(0.0);
        }
    }
    const double n = static_cast<double>(score.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < score.size(); ++i) {
        mx += score[i];
        my += status[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < score.size(); ++i) {
        sxy += (score[i] - mx) * (status[i] - my);
        sxx += (score[i] - mx) * (score[i] - mx);
        syy += (status[i] - my) * (status[i] - my);
    }
    return std::sqrt(n) * sxy / std::sqrt(sxx * syy);
}

/// Pearson chi-square of an arbitrary two-way table of counts.
inline double pearson(const std::vector<std::vector<double>>& obs) {
    const std::size_t rows = obs.size(), cols = obs[0].size();
    std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
    double n = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            rs[i] += obs[i][j];
            cs[j] += obs[i][j];
            n += obs[i][j];
        }
    double x = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double e = rs[i] * cs[j] / n;
            x += (obs[i][j] - e) * (obs[i][j] - e) / e;
        }
    return x;
}

/// Standard normal upper quantile by bisection on the tail probability.
inline double normal_upper_quantile(double tail) {
    double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(mid / std::sqrt(2.0)) > tail ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Correlation of two genotype scores for one subject drawn with probabilities p.
// Z_x is sqrt(n) times a sample correlation, so the null correlation of Z_x and
// Z_y equals this score correlation.
inline double score_correlation(const std::array<double, 3>& p, const std::array<double, 3>& x,
                                const std::array<double, 3>& y) {
    double ex = 0, ey = 0;
    for (int i = 0; i < 3; ++i) {
        ex += p[i] * x[i];
        ey += p[i] * y[i];
    }
    double cxy = 0, vx = 0, vy = 0;
    for (int i = 0; i < 3; ++i) {
        cxy += p[i] * (x[i] - ex) * (y[i] - ey);
        vx += p[i] * (x[i] - ex) * (x[i] - ex);
        vy += p[i] * (y[i] - ey) * (y[i] - ey);
    }
    return cxy / std::sqrt(vx * vy);
}

struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 0;
};

/// Permutation p-value by visiting every assignment of the case labels to the n subjects.
inline Fraction enumerate_labelings(const GenotypeTable& t, robust_assoc::StatisticId id,
                                    const robust_assoc::EvaluationOptions& opts = {}) {
    using robust_assoc::GenotypeRow;
    std::vector<int> genotype;
    for (int g = 0; g < 3; ++g)
        for (int k = 0; k < static_cast<int>(t.genotype_total(g)); ++k) genotype.push_back(g);
    const int n = static_cast<int>(genotype.size());
    const int r = static_cast<int>(t.case_total());
    const double observed = robust_assoc::decision_value(t, id, opts);
    Fraction out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != r) continue;
        ++out.den;
        GenotypeRow cases{0, 0, 0}, controls{0, 0, 0};
        for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? cases : controls)[genotype[i]] += 1;
        try {
            const double v = robust_assoc::decision_value(GenotypeTable(cases, controls), id, opts);
            if (v >= observed - 1e-9 * std::max(1.0, std::abs(observed))) ++out.num;
        } catch (const robust_assoc::Error&) {
        }
    }
    return out;
}

} // namespace support

#endif
