#ifndef ROBUST_ASSOC_TABLES_HPP
#define ROBUST_ASSOC_TABLES_HPP

#include <array>
#include <cmath>
#include <string>

#include "error.hpp"

namespace robust_assoc {

/// Genotype columns in the order NN, NM, MM (M is the putative risk allele).
inline constexpr std::size_t kGenotypes = 3;

using GenotypeRow = std::array<double, kGenotypes>;

/**
 * 2x3 case/control genotype counts.
 *
 * Cells are real-valued so that continuity-corrected tables flow through every
 * statistic unchanged. Margins are always recomputed from the cells.
 */
class GenotypeTable {
public:
    /// Validating constructor; throws NegativeCell or EmptyRow.
    GenotypeTable(const GenotypeRow& cases, const GenotypeRow& controls)
        : cases_(cases), controls_(controls) {
        for (std::size_t i = 0; i < kGenotypes; ++i) {
            if (!(cases_[i] >= 0.0) || !(controls_[i] >= 0.0)) {
                throw Error(ErrorKind::NegativeCell, "genotype counts must be nonnegative and finite");
            }
            if (!std::isfinite(cases_[i]) || !std::isfinite(controls_[i])) {
                throw Error(ErrorKind::NegativeCell, "genotype counts must be nonnegative and finite");
            }
        }
        if (case_total() <= 0.0) {
            throw Error(ErrorKind::EmptyRow, "case row is empty");
        }
        if (control_total() <= 0.0) {
            throw Error(ErrorKind::EmptyRow, "control row is empty");
        }
    }

    GenotypeTable(double r0, double r1, double r2, double s0, double s1, double s2)
        : GenotypeTable(GenotypeRow{r0, r1, r2}, GenotypeRow{s0, s1, s2}) {}

    const GenotypeRow& cases() const noexcept { return cases_; }
    const GenotypeRow& controls() const noexcept { return controls_; }

    double case_total() const noexcept { return cases_[0] + cases_[1] + cases_[2]; }
    double control_total() const noexcept { return controls_[0] + controls_[1] + controls_[2]; }
    double genotype_total(std::size_t i) const noexcept { return cases_[i] + controls_[i]; }
    double total() const noexcept { return case_total() + control_total(); }

    /// Pooled genotype proportions n_i / n.
    GenotypeRow pooled_proportions() const noexcept {
        const double n = total();
        return {genotype_total(0) / n, genotype_total(1) / n, genotype_total(2) / n};
    }

    GenotypeTable swapped() const { return GenotypeTable(controls_, cases_); }

    bool is_integral() const noexcept {
        for (std::size_t i = 0; i < kGenotypes; ++i) {
            if (cases_[i] != std::floor(cases_[i]) || controls_[i] != std::floor(controls_[i])) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const GenotypeTable&, const GenotypeTable&) = default;

private:
    GenotypeRow cases_;
    GenotypeRow controls_;
};

/// Raw ingested data must be integer-valued.
inline const GenotypeTable& require_integral(const GenotypeTable& t) {
    if (!t.is_integral()) {
        throw Error(ErrorKind::NonIntegerCell, "raw genotype counts must be integers");
    }
    return t;
}

/// 2x2 allele collapse of a genotype table.
struct AlleleTable {
    double case_n = 0.0;
    double case_m = 0.0;
    double control_n = 0.0;
    double control_m = 0.0;

    double case_total() const noexcept { return case_n + case_m; }
    double control_total() const noexcept { return control_n + control_m; }
    double n_total() const noexcept { return case_n + control_n; }
    double m_total() const noexcept { return case_m + control_m; }
    double total() const noexcept { return case_total() + control_total(); }
};

inline AlleleTable to_allele_table(const GenotypeTable& t) noexcept {
    const auto& r = t.cases();
    const auto& s = t.controls();
    return {2.0 * r[0] + r[1], r[1] + 2.0 * r[2], 2.0 * s[0] + s[1], s[1] + 2.0 * s[2]};
}

/// Adds `delta` to every cell. The simulations use delta = 1/2 unconditionally.
inline GenotypeTable apply_continuity_correction(const GenotypeTable& t, double delta = 0.5) {
    if (!(delta >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "continuity correction must be nonnegative");
    }
    const auto& r = t.cases();
    const auto& s = t.controls();
    return GenotypeTable(GenotypeRow{r[0] + delta, r[1] + delta, r[2] + delta},
                         GenotypeRow{s[0] + delta, s[1] + delta, s[2] + delta});
}

inline std::string to_string(const GenotypeTable& t) {
    std::string out;
    for (double v : t.cases()) {
        out += std::to_string(v) + " ";
    }
    out += "| ";
    for (double v : t.controls()) {
        out += std::to_string(v) + " ";
    }
    out.pop_back();
    return out;
}

} // namespace robust_assoc

#endif
