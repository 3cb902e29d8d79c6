#ifndef ROBUST_ASSOC_STATISTICS_HPP
#define ROBUST_ASSOC_STATISTICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "classical.hpp"
#include "error.hpp"
#include "robust.hpp"
#include "tables.hpp"
#include "trend.hpp"

namespace robust_assoc {

enum class StatisticId {
    Z0,
    ZHalf,
    Z1,
    Mert,
    MertRecAdd,
    Max2,
    Max2RecAdd,
    Max3,
    Max3Mert,
    MaxGrid,
    Chi2TwoDf,
    Allele,
    Hwd,
    Product,
    TMax
};

inline constexpr std::array<StatisticId, 15> kAllStatistics{
    StatisticId::Z0,        StatisticId::ZHalf,      StatisticId::Z1,     StatisticId::Mert,
    StatisticId::MertRecAdd, StatisticId::Max2,      StatisticId::Max2RecAdd, StatisticId::Max3,
    StatisticId::Max3Mert,  StatisticId::MaxGrid,    StatisticId::Chi2TwoDf, StatisticId::Allele,
    StatisticId::Hwd,       StatisticId::Product,    StatisticId::TMax};

inline std::string_view to_string(StatisticId id) {
    switch (id) {
    case StatisticId::Z0: return "Z0";
    case StatisticId::ZHalf: return "Z_HALF";
    case StatisticId::Z1: return "Z1";
    case StatisticId::Mert: return "MERT";
    case StatisticId::MertRecAdd: return "MERT_REC_ADD";
    case StatisticId::Max2: return "MAX2";
    case StatisticId::Max2RecAdd: return "MAX2_REC_ADD";
    case StatisticId::Max3: return "MAX3";
    case StatisticId::Max3Mert: return "MAX3_MERT";
    case StatisticId::MaxGrid: return "MAXGRID";
    case StatisticId::Chi2TwoDf: return "CHI2_2DF";
    case StatisticId::Allele: return "AA";
    case StatisticId::Hwd: return "HWD";
    case StatisticId::Product: return "T_P";
    case StatisticId::TMax: return "T_MAX";
    }
    return "?";
}

inline StatisticId parse_statistic(std::string_view name) {
    for (auto id : kAllStatistics) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw Error(ErrorKind::UnknownStatistic, "unknown statistic '" + std::string(name) + "'");
}

/// Statistics that are asymptotically standard normal and signed.
inline bool is_normal_type(StatisticId id) {
    return id == StatisticId::Z0 || id == StatisticId::ZHalf || id == StatisticId::Z1 || id == StatisticId::Mert ||
           id == StatisticId::MertRecAdd;
}

inline bool is_max_type(StatisticId id) {
    return id == StatisticId::Max2 || id == StatisticId::Max2RecAdd || id == StatisticId::Max3 ||
           id == StatisticId::Max3Mert || id == StatisticId::MaxGrid;
}

/// Ordered, duplicate-free list of statistics evaluated jointly on one table.
class StatisticBattery {
public:
    StatisticBattery() = default;

    explicit StatisticBattery(std::vector<StatisticId> ids) : ids_(std::move(ids)) {
        if (ids_.empty()) {
            throw Error(ErrorKind::InvalidArgument, "statistic battery must be nonempty");
        }
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            for (std::size_t j = i + 1; j < ids_.size(); ++j) {
                if (ids_[i] == ids_[j]) {
                    throw Error(ErrorKind::InvalidArgument,
                                "duplicate statistic '" + std::string(robust_assoc::to_string(ids_[i])) + "' in battery");
                }
            }
        }
    }

    /// Comma-separated identifiers; "all" selects every statistic.
    static StatisticBattery parse(std::string_view list) {
        if (list == "all") {
            return full();
        }
        std::vector<StatisticId> ids;
        std::size_t start = 0;
        while (start <= list.size()) {
            const auto comma = list.find(',', start);
            const auto end = comma == std::string_view::npos ? list.size() : comma;
            auto token = list.substr(start, end - start);
            while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
            while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
            if (!token.empty()) {
                ids.push_back(parse_statistic(token));
            }
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        return StatisticBattery(std::move(ids));
    }

    static StatisticBattery full() { return StatisticBattery({kAllStatistics.begin(), kAllStatistics.end()}); }

    /// The nine statistics compared in the HWE and mixture power studies.
    static StatisticBattery paper_comparison() {
        return StatisticBattery({StatisticId::Z0, StatisticId::ZHalf, StatisticId::Z1, StatisticId::Mert,
                                 StatisticId::Max2, StatisticId::Max3, StatisticId::TMax, StatisticId::Product,
                                 StatisticId::Chi2TwoDf});
    }

    std::span<const StatisticId> ids() const noexcept { return ids_; }
    std::size_t size() const noexcept { return ids_.size(); }
    StatisticId operator[](std::size_t i) const { return ids_[i]; }

    std::optional<std::size_t> index_of(StatisticId id) const {
        const auto it = std::find(ids_.begin(), ids_.end(), id);
        if (it == ids_.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - ids_.begin());
    }

    std::string to_string() const {
        std::string out;
        for (auto id : ids_) {
            if (!out.empty()) out += ',';
            out += robust_assoc::to_string(id);
        }
        return out;
    }

    friend bool operator==(const StatisticBattery&, const StatisticBattery&) = default;

private:
    std::vector<StatisticId> ids_;
};

struct EvaluationOptions {
    Sidedness sidedness = Sidedness::TwoSided;
    std::vector<double> grid = default_grid();
};

/**
 * Evaluates statistics on one table, sharing the trend statistics and the
 * correlation estimates between the composite tests.
 *
 * value() returns the signed statistic for normal-type tests and the
 * (sidedness-aware) maximum for MAX tests; decision_value() additionally folds
 * normal-type statistics to |Z| for two-sided testing.
 */
class TableEvaluator {
public:
    TableEvaluator(const GenotypeTable& table, const EvaluationOptions& options) : table_(table), options_(options) {}

    double value(StatisticId id) {
        const auto sided = options_.sidedness;
        switch (id) {
        case StatisticId::Z0: return z(0);
        case StatisticId::ZHalf: return z(1);
        case StatisticId::Z1: return z(2);
        case StatisticId::Mert: return mert_pair(z(0), z(2), correlations().rho_0_1);
        case StatisticId::MertRecAdd: return mert_pair(z(0), z(1), correlations().rho_0_half);
        case StatisticId::Max2: return std::max(detail::fold(z(0), sided), detail::fold(z(2), sided));
        case StatisticId::Max2RecAdd: return std::max(detail::fold(z(0), sided), detail::fold(z(1), sided));
        case StatisticId::Max3:
            return std::max({detail::fold(z(0), sided), detail::fold(z(1), sided), detail::fold(z(2), sided)});
        case StatisticId::Max3Mert:
            return std::max({detail::fold(z(0), sided), detail::fold(value(StatisticId::Mert), sided),
                             detail::fold(z(2), sided)});
        case StatisticId::MaxGrid: return max_grid(table_, options_.grid, sided).value;
        case StatisticId::Chi2TwoDf: return chisq_2df(table_);
        case StatisticId::Allele: return aa();
        case StatisticId::Hwd: return hwd();
        case StatisticId::Product: return aa() * hwd();
        case StatisticId::TMax: return std::max(aa(), hwd());
        }
        throw Error(ErrorKind::UnknownStatistic, "unhandled statistic");
    }

    double decision_value(StatisticId id) {
        const double v = value(id);
        return is_normal_type(id) ? detail::fold(v, options_.sidedness) : v;
    }

    CorrelationTriple correlations() {
        if (!rho_) {
            rho_ = estimate_correlations(table_.pooled_proportions());
        }
        return *rho_;
    }

private:
    double z(std::size_t k) {
        static constexpr std::array<double, 3> kScores{0.0, 0.5, 1.0};
        if (!z_[k]) {
            z_[k] = trend_statistic(table_, kScores[k]);
        }
        return *z_[k];
    }
    double aa() {
        if (!aa_) aa_ = chisq_allele(table_);
        return *aa_;
    }
    double hwd() {
        if (!hwd_) hwd_ = chisq_hwd(table_);
        return *hwd_;
    }

    const GenotypeTable& table_;
    const EvaluationOptions& options_;
    std::array<std::optional<double>, 3> z_;
    std::optional<CorrelationTriple> rho_;
    std::optional<double> aa_;
    std::optional<double> hwd_;
};

/// Writes one decision value per battery entry; NaN marks a statistic that failed on this table.
inline void evaluate_decision_values(const GenotypeTable& table, const StatisticBattery& battery,
                                     const EvaluationOptions& options, std::span<double> out) {
    TableEvaluator eval(table, options);
    for (std::size_t i = 0; i < battery.size(); ++i) {
        try {
            out[i] = eval.decision_value(battery[i]);
        } catch (const Error&) {
            out[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

/// Single decision value; propagates the statistic's error.
inline double decision_value(const GenotypeTable& table, StatisticId id, const EvaluationOptions& options = {}) {
    TableEvaluator eval(table, options);
    return eval.decision_value(id);
}

} // namespace robust_assoc

#endif
