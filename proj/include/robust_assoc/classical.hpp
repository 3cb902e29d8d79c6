#ifndef ROBUST_ASSOC_CLASSICAL_HPP
#define ROBUST_ASSOC_CLASSICAL_HPP

#include <algorithm>
#include <array>
#include <cmath>

#include "error.hpp"
#include "tables.hpp"

namespace robust_assoc {

enum class CompositeKind { Chi2TwoDf, Allele, Hwd, Product, Max };

struct CompositeStatistic {
    double value = 0.0;
    double chi_allele = 0.0;
    double chi_hwd = 0.0;
    CompositeKind kind = CompositeKind::Product;
};

/// Pearson chi-square on the 2x3 table (2 df).
inline double chisq_2df(const GenotypeTable& t) {
    const double r = t.case_total();
    const double s = t.control_total();
    const double n = r + s;
    double stat = 0.0;
    for (std::size_t i = 0; i < kGenotypes; ++i) {
        const double ni = t.genotype_total(i);
        if (ni <= 0.0) {
            throw Error(ErrorKind::ZeroMargin, "a genotype column is empty");
        }
        const double expected_case = r * ni / n;
        const double expected_control = s * ni / n;
        const double dc = t.cases()[i] - expected_case;
        const double ds = t.controls()[i] - expected_control;
        stat += dc * dc / expected_case + ds * ds / expected_control;
    }
    return stat;
}

/**
 * Allele-association chi-square on the 2x2 allele table:
 *   2n [(2r0+r1)(s1+2s2) - (2s0+s1)(r1+2r2)]^2 / [4 r s (2n0+n1)(n1+2n2)]
 * Only valid as a standalone test when HWE holds in cases and controls.
 */
inline double chisq_allele(const GenotypeTable& t) {
    const auto a = to_allele_table(t);
    const double r = t.case_total();
    const double s = t.control_total();
    const double n_alleles = a.n_total();
    const double m_alleles = a.m_total();
    if (n_alleles <= 0.0 || m_alleles <= 0.0) {
        throw Error(ErrorKind::ZeroMargin, "an allele column is empty");
    }
    const double det = a.case_n * a.control_m - a.control_n * a.case_m;
    return 2.0 * (r + s) * det * det / (4.0 * r * s * n_alleles * m_alleles);
}

/// Hardy-Weinberg departure chi-square for one row (cases in practice).
inline double chisq_hwd(const GenotypeRow& row) {
    const double r = row[0] + row[1] + row[2];
    if (!(r > 0.0)) {
        throw Error(ErrorKind::EmptyRow, "HWD test needs a nonempty row");
    }
    const double p = (row[1] + 2.0 * row[2]) / (2.0 * r);
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorKind::MonomorphicSample, "allele frequency estimate is 0 or 1");
    }
    const double q = 1.0 - p;
    const std::array<double, 3> expected{r * q * q, 2.0 * r * p * q, r * p * p};
    double stat = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = row[i] - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

inline double chisq_hwd(const GenotypeTable& t) { return chisq_hwd(t.cases()); }

/// Product of the allele-association and case-HWD chi-squares.
inline CompositeStatistic product_test(const GenotypeTable& t) {
    const double aa = chisq_allele(t);
    const double hwd = chisq_hwd(t);
    return {aa * hwd, aa, hwd, CompositeKind::Product};
}

inline CompositeStatistic tmax(const GenotypeTable& t) {
    const double aa = chisq_allele(t);
    const double hwd = chisq_hwd(t);
    return {std::max(aa, hwd), aa, hwd, CompositeKind::Max};
}

} // namespace robust_assoc

#endif
