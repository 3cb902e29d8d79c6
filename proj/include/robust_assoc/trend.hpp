#ifndef ROBUST_ASSOC_TREND_HPP
#define ROBUST_ASSOC_TREND_HPP

#include <array>
#include <cmath>

#include "error.hpp"
#include "population.hpp"
#include "tables.hpp"

namespace robust_assoc {

/// Middle-genotype score x of the score vector (0, x, 1).
class TrendScore {
public:
    explicit TrendScore(double x) : x_(x) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "trend score must lie in [0,1]");
        }
    }
    double value() const noexcept { return x_; }
    std::array<double, 3> scores() const noexcept { return {0.0, x_, 1.0}; }

private:
    double x_;
};

struct TrendStatistic {
    double value = 0.0;
    double score = 0.0;
};

/**
 * Cochran-Armitage trend statistic for an arbitrary score vector.
 *
 *   Z = sqrt(n) * sum x_i (s r_i - r s_i) / sqrt(r s [n sum x_i^2 n_i - (sum x_i n_i)^2])
 *
 * The sign is positive when cases carry more weight at high scores.
 * Throws ZeroVariance when every observation sits on one score value.
 */
inline double trend_statistic_scores(const GenotypeTable& t, const std::array<double, 3>& x) {
    const auto& rc = t.cases();
    const auto& sc = t.controls();
    const double r = t.case_total();
    const double s = t.control_total();
    const double n = r + s;

    double numerator = 0.0;
    double sum_x = 0.0;
    double sum_xx = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double ni = rc[i] + sc[i];
        numerator += x[i] * (s * rc[i] - r * sc[i]);
        sum_x += x[i] * ni;
        sum_xx += x[i] * x[i] * ni;
    }
    const double spread = n * sum_xx - sum_x * sum_x;
    if (!(spread > 1e-12 * n * sum_xx)) {
        throw Error(ErrorKind::ZeroVariance, "trend score variance vanishes for this table");
    }
    return std::sqrt(n) * numerator / std::sqrt(r * s * spread);
}

inline TrendStatistic trend_statistic(const GenotypeTable& t, TrendScore score) {
    return {trend_statistic_scores(t, score.scores()), score.value()};
}

inline double trend_statistic(const GenotypeTable& t, double x) {
    return trend_statistic_scores(t, TrendScore(x).scores());
}

/// Recessive -> 0, additive -> 1/2, dominant -> 1.
inline TrendScore optimal_score(GeneticModel kind) {
    switch (kind) {
    case GeneticModel::Recessive: return TrendScore(0.0);
    case GeneticModel::Additive: return TrendScore(0.5);
    case GeneticModel::Dominant: return TrendScore(1.0);
    case GeneticModel::Custom: break;
    }
    throw Error(ErrorKind::InvalidArgument, "no optimal score for a custom model");
}

} // namespace robust_assoc

#endif
