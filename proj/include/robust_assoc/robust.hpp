#ifndef ROBUST_ASSOC_ROBUST_HPP
#define ROBUST_ASSOC_ROBUST_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "tables.hpp"
#include "trend.hpp"

namespace robust_assoc {

enum class Sidedness { OneSided, TwoSided };

inline std::string_view to_string(Sidedness s) {
    return s == Sidedness::OneSided ? "one" : "two";
}

/// Null correlations among Z_0, Z_1/2 and Z_1.
struct CorrelationTriple {
    double rho_0_half = 1.0;
    double rho_0_1 = 1.0;
    double rho_half_1 = 1.0;
};

/**
 * Closed-form correlations of the recessive, additive and dominant trend
 * statistics as functions of the genotype proportions (p0, p1, p2). In practice
 * the proportions are the pooled n_i / n.
 *
 * These are the published forms. They index the homozygotes in the opposite
 * order to the (0, x, 1) scores used here, so rho_0_half is the exact null
 * correlation of Z_HALF and Z1 and rho_half_1 that of Z0 and Z_HALF; rho_0_1
 * is unaffected. Use trend_correlation() for exact values under this library's
 * convention.
 */
inline CorrelationTriple estimate_correlations(const std::array<double, 3>& props) {
    const double p0 = props[0];
    const double p1 = props[1];
    const double p2 = props[2];
    if (!(p0 >= 0.0 && p1 >= 0.0 && p2 >= 0.0) || std::abs(p0 + p1 + p2 - 1.0) > 1e-9) {
        throw Error(ErrorKind::DegenerateProportions, "genotype proportions must form a probability vector");
    }
    if (!(p0 > 0.0 && p0 < 1.0 && p2 > 0.0 && p2 < 1.0)) {
        throw Error(ErrorKind::DegenerateProportions, "homozygote proportions must lie strictly inside (0,1)");
    }
    const double sd0 = std::sqrt(p0 * (1.0 - p0));
    const double sd1 = std::sqrt(p2 * (1.0 - p2));
    const double sd_half = std::sqrt((p1 + 2.0 * p2) * p0 + (p1 + 2.0 * p0) * p2);
    return {p0 * (p1 + 2.0 * p2) / (sd0 * sd_half), p0 * p2 / (sd0 * sd1), p2 * (p1 + 2.0 * p0) / (sd1 * sd_half)};
}

/**
 * Null correlation of Z_x and Z_y for arbitrary score vectors, from the
 * covariance of the scores under genotype proportions `props`.
 */
inline double trend_correlation(const std::array<double, 3>& props, const std::array<double, 3>& x,
                                const std::array<double, 3>& y) {
    double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        mx += x[i] * props[i];
        my += y[i] * props[i];
        sxx += x[i] * x[i] * props[i];
        syy += y[i] * y[i] * props[i];
        sxy += x[i] * y[i] * props[i];
    }
    const double vx = sxx - mx * mx;
    const double vy = syy - my * my;
    if (!(vx > 0.0 && vy > 0.0)) {
        throw Error(ErrorKind::DegenerateProportions, "score variance vanishes at these proportions");
    }
    return (sxy - mx * my) / std::sqrt(vx * vy);
}

/// Square correlation matrix with unit diagonal.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;

    explicit CorrelationMatrix(std::size_t size) : size_(size), values_(size * size, 0.0) {
        for (std::size_t i = 0; i < size; ++i) {
            (*this)(i, i) = 1.0;
        }
    }

    CorrelationMatrix(std::initializer_list<std::initializer_list<double>> rows) : CorrelationMatrix(rows.size()) {
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != size_) {
                throw Error(ErrorKind::InvalidArgument, "correlation matrix must be square");
            }
            std::size_t j = 0;
            for (double v : row) {
                (*this)(i, j++) = v;
            }
            ++i;
        }
        validate();
    }

    static CorrelationMatrix from_triple(const CorrelationTriple& c) {
        return {{1.0, c.rho_0_half, c.rho_0_1}, {c.rho_0_half, 1.0, c.rho_half_1}, {c.rho_0_1, c.rho_half_1, 1.0}};
    }

    static CorrelationMatrix equicorrelated(std::size_t size, double rho) {
        CorrelationMatrix m(size);
        for (std::size_t i = 0; i < size; ++i) {
            for (std::size_t j = 0; j < size; ++j) {
                if (i != j) {
                    m(i, j) = rho;
                }
            }
        }
        m.validate();
        return m;
    }

    std::size_t size() const noexcept { return size_; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * size_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }

    /// Symmetric, unit diagonal, entries in [-1, 1].
    void validate() const {
        for (std::size_t i = 0; i < size_; ++i) {
            if (std::abs((*this)(i, i) - 1.0) > 1e-12) {
                throw Error(ErrorKind::InvalidArgument, "correlation matrix needs a unit diagonal");
            }
            for (std::size_t j = 0; j < size_; ++j) {
                const double v = (*this)(i, j);
                if (!(v >= -1.0 && v <= 1.0) || std::abs(v - (*this)(j, i)) > 1e-12) {
                    throw Error(ErrorKind::InvalidArgument, "correlation matrix must be symmetric with entries in [-1,1]");
                }
            }
        }
    }

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

/// MERT of an extreme pair: (zs + zt) / sqrt(2 (1 + rho_st)).
inline double mert_pair(double zs, double zt, double rho_st) {
    if (!(rho_st > -1.0 && rho_st <= 1.0)) {
        throw Error(ErrorKind::CorrelationOutOfRange, "pair correlation must lie in (-1,1]");
    }
    return (zs + zt) / std::sqrt(2.0 * (1.0 + rho_st));
}

/// Asymptotic relative efficiency of the extreme-pair MERT against either member.
inline double mert_are(double rho_st) {
    if (!(rho_st > -1.0 && rho_st <= 1.0)) {
        throw Error(ErrorKind::CorrelationOutOfRange, "pair correlation must lie in (-1,1]");
    }
    return 0.5 * (1.0 + rho_st);
}

/// rho_si + rho_it >= 1 + rho_st for every member i. Does not check extremeness.
inline bool extreme_pair_condition_holds(const CorrelationMatrix& rho, std::size_t s, std::size_t t,
                                         double tolerance = 1e-12) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (i == s || i == t) {
            continue;
        }
        if (rho(s, i) + rho(i, t) < 1.0 + rho(s, t) - tolerance) {
            return false;
        }
    }
    return true;
}

/// Certificate that the extreme-pair MERT is the MERT for the whole family.
/// Throws NotExtremePair when (s, t) is not a minimum off-diagonal entry.
inline bool check_extreme_pair_condition(const CorrelationMatrix& rho, std::size_t s, std::size_t t) {
    rho.validate();
    if (s >= rho.size() || t >= rho.size() || s == t) {
        throw Error(ErrorKind::InvalidArgument, "extreme pair indices must be distinct members");
    }
    for (std::size_t i = 0; i < rho.size(); ++i) {
        for (std::size_t j = i + 1; j < rho.size(); ++j) {
            if (rho(i, j) < rho(s, t) - 1e-12) {
                throw Error(ErrorKind::NotExtremePair, "a smaller off-diagonal correlation exists");
            }
        }
    }
    return extreme_pair_condition_holds(rho, s, t);
}

struct MaximinChoice {
    std::size_t index = 0;
    double min_are = 1.0;
};

/// Family member maximizing the minimum ARE rho_ij^2; ties go to the lowest index.
inline MaximinChoice maximin_member(const CorrelationMatrix& rho) {
    rho.validate();
    MaximinChoice best{0, -1.0};
    for (std::size_t j = 0; j < rho.size(); ++j) {
        double worst = 1.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            worst = std::min(worst, rho(i, j) * rho(i, j));
        }
        if (worst > best.min_are + 1e-12) {
            best = {j, worst};
        }
    }
    return best;
}

enum class RobustAdvice { Mert, Max, MaxEither };

struct Recommendation {
    RobustAdvice advice = RobustAdvice::Max;
    std::string note;
};

/// Choice between MERT and MAX from the extreme-pair correlation.
inline Recommendation recommend_robust_test(double rho_st) {
    if (!(rho_st >= -1.0 && rho_st <= 1.0)) {
        throw Error(ErrorKind::CorrelationOutOfRange, "correlation must lie in [-1,1]");
    }
    if (rho_st >= 0.75) {
        return {RobustAdvice::Mert, "minimum correlation >= 0.75: MERT and MAX have similar power"};
    }
    if (rho_st < 0.50) {
        return {RobustAdvice::Max, "minimum correlation < 0.50: MAX is noticeably more powerful"};
    }
    return {RobustAdvice::MaxEither, "minimum correlation in [0.50, 0.75): MAX preferred, MERT may be comparable"};
}

inline std::string_view to_string(RobustAdvice a) {
    switch (a) {
    case RobustAdvice::Mert: return "MERT";
    case RobustAdvice::Max: return "MAX";
    case RobustAdvice::MaxEither: return "MAX";
    }
    return "MAX";
}

enum class RobustKind { Mert, MertRecAdd, Max2, Max2RecAdd, Max3, MaxGrid };

struct RobustStatistic {
    double value = 0.0;
    std::vector<double> components;
    RobustKind kind = RobustKind::Mert;
    Sidedness sidedness = Sidedness::TwoSided;
    double rho = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double fold(double z, Sidedness sided) { return sided == Sidedness::TwoSided ? std::abs(z) : z; }

inline RobustStatistic max_of(std::vector<double> components, RobustKind kind, Sidedness sided) {
    double best = -std::numeric_limits<double>::infinity();
    for (double z : components) {
        best = std::max(best, fold(z, sided));
    }
    return {best, std::move(components), kind, sided};
}

} // namespace detail

/// (Z_0 + Z_1) / sqrt(2 (1 + rho_01)) with rho_01 estimated from n_i / n.
inline RobustStatistic mert_statistic(const GenotypeTable& t) {
    const double z0 = trend_statistic(t, 0.0);
    const double z1 = trend_statistic(t, 1.0);
    const double rho = estimate_correlations(t.pooled_proportions()).rho_0_1;
    return {mert_pair(z0, z1, rho), {z0, z1}, RobustKind::Mert, Sidedness::OneSided, rho};
}

/// Extreme-pair MERT when the dominant model is excluded: Z_0 and Z_1/2.
inline RobustStatistic mert_rec_add(const GenotypeTable& t) {
    const double z0 = trend_statistic(t, 0.0);
    const double zh = trend_statistic(t, 0.5);
    const double rho = estimate_correlations(t.pooled_proportions()).rho_0_half;
    return {mert_pair(z0, zh, rho), {z0, zh}, RobustKind::MertRecAdd, Sidedness::OneSided, rho};
}

inline RobustStatistic max2(const GenotypeTable& t, Sidedness sided = Sidedness::TwoSided) {
    return detail::max_of({trend_statistic(t, 0.0), trend_statistic(t, 1.0)}, RobustKind::Max2, sided);
}

/// max of Z_0 and Z_1/2 (recessive-additive family).
inline RobustStatistic max2_rec_add(const GenotypeTable& t, Sidedness sided = Sidedness::TwoSided) {
    return detail::max_of({trend_statistic(t, 0.0), trend_statistic(t, 0.5)}, RobustKind::Max2RecAdd, sided);
}

/// Which statistic sits between the extreme pair in MAX3.
enum class Max3Middle { Additive, Mert };

inline RobustStatistic max3(const GenotypeTable& t, Sidedness sided = Sidedness::TwoSided,
                            Max3Middle middle = Max3Middle::Additive) {
    const double z0 = trend_statistic(t, 0.0);
    const double z1 = trend_statistic(t, 1.0);
    const double zu = middle == Max3Middle::Additive ? trend_statistic(t, 0.5)
                                                     : mert_pair(z0, z1, estimate_correlations(t.pooled_proportions()).rho_0_1);
    return detail::max_of({z0, zu, z1}, RobustKind::Max3, sided);
}

inline std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) {
        grid.push_back(i / 10.0);
    }
    return grid;
}

/// Maximum of the trend statistics over a finite grid of scores.
inline RobustStatistic max_grid(const GenotypeTable& t, std::span<const double> grid,
                                Sidedness sided = Sidedness::TwoSided) {
    if (grid.empty()) {
        throw Error(ErrorKind::InvalidArgument, "score grid must be nonempty");
    }
    std::vector<double> components;
    components.reserve(grid.size());
    for (double x : grid) {
        components.push_back(trend_statistic(t, x));
    }
    return detail::max_of(std::move(components), RobustKind::MaxGrid, sided);
}

} // namespace robust_assoc

#endif
