#ifndef ROBUST_ASSOC_CLI_HPP
#define ROBUST_ASSOC_CLI_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "classical.hpp"
#include "error.hpp"
#include "montecarlo.hpp"
#include "robust.hpp"
#include "scenario_io.hpp"
#include "statistics.hpp"

#ifndef ROBUST_ASSOC_VERSION
#define ROBUST_ASSOC_VERSION "0.0.0"
#endif

namespace robust_assoc::cli {

using json = nlohmann::ordered_json;

enum class Format { Csv, Json };

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 2;
inline constexpr int kStatisticFailed = 3;

struct CommandOptions {
    /// Full invocation, echoed into the provenance header.
    std::string invocation;
    std::string scenarios;
    std::string input = "-";
    std::string battery = "all";
    double alpha = 0.05;
    std::size_t b_null = 200000;
    std::size_t b_power = 10000;
    std::size_t b_reps = 5000;
    std::size_t b_perm = 0;
    std::optional<std::uint64_t> seed;
    Format format = Format::Csv;
    std::optional<bool> correction;
    std::optional<Sidedness> sidedness;
    std::vector<double> grid = default_grid();
    std::string stat_a = "MAX3";
    std::string stat_b = "CHI2_2DF";
    std::vector<double> bins = default_pvalue_bins();
    unsigned workers = 0;
};

namespace detail {

inline std::string num(double v, int precision = 6) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline json jnum(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t require_seed(const CommandOptions& opts) {
    if (!opts.seed) {
        throw Error(ErrorKind::InvalidArgument, "simulation commands require --seed");
    }
    return *opts.seed;
}

inline std::string grid_text(const std::vector<double>& grid) {
    std::string out;
    for (double x : grid) {
        if (!out.empty()) out += ',';
        out += num(x, 4);
    }
    return out;
}

inline std::string bin_label(std::size_t i, const std::vector<double>& b) {
    if (i == 0) return "<" + num(b[0], 4);
    if (i == b.size()) return ">=" + num(b.back(), 4);
    return "[" + num(b[i - 1], 4) + "," + num(b[i], 4) + ")";
}

/// Provenance shared by every simulation command.
struct Provenance {
    std::string command;
    std::string invocation;
    std::string scenario_file;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> settings;

    void write_csv(std::ostream& out) const {
        out << "# robust_assoc " << ROBUST_ASSOC_VERSION << " " << command << "\n";
        out << "# invocation: " << invocation << "\n";
        out << "# scenarios: " << scenario_file << " hash=" << hex(scenario_hash) << "\n";
        out << "# seed=" << seed;
        for (const auto& [k, v] : settings) out << " " << k << "=" << v;
        out << "\n";
    }

    json to_json() const {
        json j;
        j["tool"] = "robust_assoc";
        j["version"] = ROBUST_ASSOC_VERSION;
        j["command"] = command;
        j["invocation"] = invocation;
        j["scenarios"] = scenario_file;
        j["scenario_hash"] = hex(scenario_hash);
        j["seed"] = seed;
        for (const auto& [k, v] : settings) j[k] = v;
        return j;
    }
};

inline std::vector<Scenario> load_with_overrides(const CommandOptions& opts) {
    if (opts.scenarios.empty()) {
        throw Error(ErrorKind::InvalidArgument, "--scenarios is required");
    }
    auto scenarios = load_scenarios(opts.scenarios);
    for (auto& sc : scenarios) {
        if (opts.correction) sc.correction = *opts.correction;
        if (opts.sidedness) sc.sidedness = *opts.sidedness;
        sc.validate();
    }
    return scenarios;
}

inline StatisticBattery with_optimal_tests(const StatisticBattery& battery) {
    std::vector<StatisticId> ids(battery.ids().begin(), battery.ids().end());
    for (auto id : {StatisticId::Z0, StatisticId::ZHalf, StatisticId::Z1}) {
        if (!battery.index_of(id)) ids.push_back(id);
    }
    return StatisticBattery(std::move(ids));
}

/// Null critical values per design, computed once and shared by scenarios with the same null.
class CriticalCache {
public:
    CriticalCache(const CommandOptions& opts, StatisticBattery battery, std::uint64_t seed)
        : opts_(opts), battery_(std::move(battery)), seed_(seed) {}

    const CriticalValueSet& get(const Scenario& sc) {
        const auto key = sc.null_fingerprint();
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            SimulationOptions sim{opts_.workers, opts_.grid};
            it = cache_
                     .emplace(key, estimate_critical_values(sc.null_version(), battery_, opts_.b_null, opts_.alpha,
                                                            derive_seed(seed_, 1, fnv1a(key)), sim))
                     .first;
        }
        return it->second;
    }

private:
    const CommandOptions& opts_;
    StatisticBattery battery_;
    std::uint64_t seed_;
    std::map<std::string, CriticalValueSet> cache_;
};

inline std::uint64_t scenario_seed(std::uint64_t seed, std::uint64_t stream, const Scenario& sc) {
    return derive_seed(seed, stream, fnv1a(describe(sc)));
}

/// Replaces a calibration request by the calibrated penetrances.
inline std::optional<CalibrationResult> resolve_calibration(Scenario& sc, const CommandOptions& opts,
                                                            CriticalCache& cache, std::uint64_t seed) {
    if (!sc.calibration_target) {
        return std::nullopt;
    }
    SimulationOptions sim{opts.workers, opts.grid};
    const auto result = calibrate_penetrance(sc, *sc.calibration_target, cache.get(sc), opts.b_power,
                                             scenario_seed(seed, 2, sc), sim);
    return result;
}

inline json penetrance_json(const Scenario& sc, const std::optional<CalibrationResult>& cal) {
    json j{{"model", sc.null_hypothesis ? "null" : std::string(to_string(sc.penetrance.kind))},
           {"f0", sc.penetrance.f0},
           {"f1", sc.penetrance.f1},
           {"f2", sc.penetrance.f2}};
    if (cal) {
        j["calibrated_power"] = cal->power;
        j["calibration_target"] = *sc.calibration_target;
    }
    return j;
}

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Components of a MAX statistic as score vectors, for its null correlation matrix.
inline std::vector<std::array<double, 3>> max_components(StatisticId id, const std::vector<double>& grid) {
    switch (id) {
    case StatisticId::Max2: return {{0, 0, 1}, {0, 1, 1}};
    case StatisticId::Max2RecAdd: return {{0, 0, 1}, {0, 0.5, 1}};
    case StatisticId::Max3: return {{0, 0, 1}, {0, 0.5, 1}, {0, 1, 1}};
    case StatisticId::Max3Mert: return {{0, 0, 1}, {0, 1, 1}};
    default: break;
    }
    std::vector<std::array<double, 3>> out;
    for (double x : grid) out.push_back({0, x, 1});
    return out;
}

/// Null correlation matrix of a MAX statistic's components at the pooled proportions.
inline CorrelationMatrix max_correlation(StatisticId id, const GenotypeTable& t, const std::vector<double>& grid) {
    const auto props = t.pooled_proportions();
    const auto comps = max_components(id, grid);
    CorrelationMatrix m(comps.size() + (id == StatisticId::Max3Mert ? 1 : 0));
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = 0; j < comps.size(); ++j)
            if (i != j) m(i, j) = std::clamp(trend_correlation(props, comps[i], comps[j]), -1.0, 1.0);
    if (id == StatisticId::Max3Mert) {
        // MERT of the extreme pair has correlation sqrt((1 + rho_01) / 2) with each member.
        const double c = std::sqrt(0.5 * (1.0 + m(0, 1)));
        m(0, 2) = m(2, 0) = c;
        m(1, 2) = m(2, 1) = c;
    }
    return m;
}

struct AnalyzeRow {
    std::string item;
    double value = std::nan("");
    double p_asymptotic = std::nan("");
    double p_permutation = std::nan("");
    double p_permutation_one_sided = std::nan("");
    std::string note;
};

inline std::vector<AnalyzeRow> analyze_table(const GenotypeTable& raw, const StatisticBattery& battery,
                                             const CommandOptions& opts) {
    const bool correct = opts.correction.value_or(false);
    const GenotypeTable table = correct ? apply_continuity_correction(raw) : raw;
    const auto sided = opts.sidedness.value_or(Sidedness::TwoSided);
    EvaluationOptions eval{sided, opts.grid};
    TableEvaluator evaluator(table, eval);
    const std::uint64_t seed = opts.seed.value_or(0);
    SimulationOptions sim{opts.workers, opts.grid};

    std::vector<AnalyzeRow> rows;
    for (auto id : battery.ids()) {
        AnalyzeRow row;
        row.item = std::string(to_string(id));
        try {
            row.value = evaluator.value(id);
            if (is_normal_type(id)) {
                double z = row.value;
                if (id == StatisticId::MertRecAdd) {
                    // The published rho_{0,1/2} is not the null correlation of Z0 and Z_HALF, so rescale.
                    const double rho = trend_correlation(table.pooled_proportions(), {0, 0, 1}, {0, 0.5, 1});
                    z /= std::sqrt((1.0 + rho) / (1.0 + evaluator.correlations().rho_0_half));
                    row.note = "asymptotic p uses the exact null variance";
                }
                row.p_asymptotic = sided == Sidedness::TwoSided ? 2.0 * normal_upper_tail(std::abs(z))
                                                                : normal_upper_tail(z);
            } else if (id == StatisticId::Chi2TwoDf) {
                row.p_asymptotic = std::exp(-0.5 * row.value);
            } else if (id == StatisticId::Allele || id == StatisticId::Hwd) {
                row.p_asymptotic = std::erfc(std::sqrt(0.5 * row.value));
            } else if (is_max_type(id)) {
                row.p_asymptotic = normal_approx_max_pvalue(max_correlation(id, table, opts.grid), row.value, 100000,
                                                            sided, derive_seed(seed, 5, static_cast<std::uint64_t>(id)),
                                                            sim);
                row.note = "asymptotic p from multivariate normal approximation";
            } else {
                row.note = "no asymptotic distribution; use --b-perm";
            }
        } catch (const Error& e) {
            row.note = e.what();
            rows.push_back(row);
            continue;
        }
        if (opts.b_perm > 0) {
            PermutationOptions perm{eval, correct};
            try {
                row.p_permutation = permutation_pvalue(raw, id, opts.b_perm, derive_seed(seed, 6, static_cast<std::uint64_t>(id)), perm);
                if (is_normal_type(id)) {
                    perm.evaluation.sidedness = Sidedness::OneSided;
                    row.p_permutation_one_sided =
                        permutation_pvalue(raw, id, opts.b_perm, derive_seed(seed, 6, static_cast<std::uint64_t>(id)), perm);
                }
            } catch (const Error& e) {
                row.note = e.what();
            }
        }
        rows.push_back(row);
    }

    try {
        const auto rho = evaluator.correlations();
        rows.push_back({"RHO_0_HALF", rho.rho_0_half, std::nan(""), std::nan(""), std::nan(""), ""});
        rows.push_back({"RHO_0_1", rho.rho_0_1, std::nan(""), std::nan(""), std::nan(""), ""});
        rows.push_back({"RHO_HALF_1", rho.rho_half_1, std::nan(""), std::nan(""), std::nan(""), ""});
        const bool cert = extreme_pair_condition_holds(CorrelationMatrix::from_triple(rho), 0, 2);
        rows.push_back({"MERT_CERTIFICATE", cert ? 1.0 : 0.0, std::nan(""), std::nan(""), std::nan(""),
                        cert ? "extreme-pair MERT is the family MERT" : "extreme-pair condition fails"});
        const auto advice = recommend_robust_test(rho.rho_0_1);
        rows.push_back({"ADVISORY", rho.rho_0_1, std::nan(""), std::nan(""), std::nan(""),
                        std::string(to_string(advice.advice)) + ": " + advice.note});
    } catch (const Error& e) {
        rows.push_back({"RHO_0_1", std::nan(""), std::nan(""), std::nan(""), std::nan(""), e.what()});
    }
    return rows;
}

} // namespace detail

/// Statistics, correlation diagnostics and p-values for user-supplied tables.
inline int run_analyze(const CommandOptions& opts, std::istream& in, std::ostream& out, std::ostream& err) {
    std::vector<TableRecord> records;
    StatisticBattery battery;
    try {
        battery = StatisticBattery::parse(opts.battery);
        if (opts.b_perm > 0) detail::require_seed(opts);
        records = read_table_records(in);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
    if (records.empty()) {
        err << "error: no table records in input\n";
        return kInvalidInput;
    }

    json results = json::array();
    if (opts.format == Format::Csv) {
        out << "# robust_assoc " << ROBUST_ASSOC_VERSION << " analyze\n";
        out << "# invocation: " << opts.invocation << "\n";
        out << "record,line,item,value,p_asymptotic,p_permutation,p_permutation_one_sided,note\n";
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto rows = detail::analyze_table(records[k].table, battery, opts);
        if (opts.format == Format::Csv) {
            for (const auto& row : rows) {
                out << (k + 1) << "," << records[k].line << "," << row.item << "," << detail::num(row.value) << ","
                    << detail::num(row.p_asymptotic) << "," << detail::num(row.p_permutation) << ","
                    << detail::num(row.p_permutation_one_sided) << ",\"" << row.note << "\"\n";
            }
        } else {
            json rec{{"record", k + 1}, {"line", records[k].line}};
            const auto& t = records[k].table;
            rec["cases"] = t.cases();
            rec["controls"] = t.controls();
            json items = json::object();
            for (const auto& row : rows) {
                json item{{"value", detail::jnum(row.value)}};
                if (!std::isnan(row.p_asymptotic)) item["p_asymptotic"] = row.p_asymptotic;
                if (!std::isnan(row.p_permutation)) item["p_permutation"] = row.p_permutation;
                if (!std::isnan(row.p_permutation_one_sided)) item["p_permutation_one_sided"] = row.p_permutation_one_sided;
                if (!row.note.empty()) item["note"] = row.note;
                items[row.item] = item;
            }
            rec["statistics"] = items;
            results.push_back(rec);
        }
    }
    if (opts.format == Format::Json) {
        out << json{{"command", "analyze"}, {"invocation", opts.invocation}, {"records", results}}.dump(2) << "\n";
    }
    return kOk;
}

namespace detail {

struct SimulationSetup {
    std::vector<Scenario> scenarios;
    StatisticBattery battery;
    std::uint64_t seed = 0;
    Provenance provenance;
};

inline SimulationSetup prepare(const CommandOptions& opts, const std::string& command) {
    SimulationSetup setup;
    setup.seed = require_seed(opts);
    setup.scenarios = load_with_overrides(opts);
    setup.battery = StatisticBattery::parse(opts.battery);
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "--alpha must lie in (0,1)");
    }
    if (opts.b_null < 1000) {
        throw Error(ErrorKind::InvalidArgument, "--b-null must be at least 1000");
    }
    if (opts.b_power == 0) {
        throw Error(ErrorKind::InvalidArgument, "--b-power must be positive");
    }
    setup.provenance = {command, opts.invocation, opts.scenarios, scenario_hash(setup.scenarios), setup.seed, {}};
    auto& s = setup.provenance.settings;
    s["alpha"] = num(opts.alpha, 4);
    s["b_null"] = std::to_string(opts.b_null);
    s["b_power"] = std::to_string(opts.b_power);
    s["battery"] = setup.battery.to_string();
    s["grid"] = grid_text(opts.grid);
    return setup;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
}

} // namespace detail

/// Size or power of every battery statistic for each scenario.
inline int run_power(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto setup = detail::prepare(opts, "power");
        detail::CriticalCache cache(opts, detail::with_optimal_tests(setup.battery), setup.seed);
        const SimulationOptions sim{opts.workers, opts.grid};
        int status = kOk;

        json results = json::array();
        std::ostringstream rows;
        std::vector<std::string> notes;
        for (auto sc : setup.scenarios) {
            // Calibration and the final run share replicate streams.
            const auto seed = detail::scenario_seed(setup.seed, 2, sc);
            const auto cal = detail::resolve_calibration(sc, opts, cache, setup.seed);
            if (cal) {
                sc.penetrance = cal->penetrance;
                notes.push_back(sc.id + ": calibrated f1=" + detail::num(sc.penetrance.f1, 6) +
                                " f2=" + detail::num(sc.penetrance.f2, 6) + " optimal_power=" +
                                detail::num(cal->power, 4));
            }
            const auto& crit = cache.get(sc);
            const auto row = estimate_power(sc, setup.battery, crit, opts.b_power, seed, sim);
            const std::string measure = sc.null_hypothesis ? "size" : "power";
            json rates = json::object();
            for (std::size_t k = 0; k < setup.battery.size(); ++k) {
                const auto id = setup.battery[k];
                if (row.errors[k] == row.replicates) status = kStatisticFailed;
                rows << sc.id << "," << to_string(id) << "," << measure << "," << detail::num(row.rates[k], 4) << ","
                     << detail::num(row.standard_errors[k], 5) << "," << detail::num(crit.threshold(id), 6) << ","
                     << row.replicates << "," << row.seed << "," << row.errors[k] << "\n";
                rates[std::string(to_string(id))] = {{"rate", row.rates[k]},
                                                     {"se", row.standard_errors[k]},
                                                     {"critical", detail::jnum(crit.threshold(id))},
                                                     {"errors", row.errors[k]}};
            }
            results.push_back({{"scenario", sc.id},
                               {"measure", measure},
                               {"design", sc.null_fingerprint()},
                               {"penetrance", detail::penetrance_json(sc, cal)},
                               {"b", row.replicates},
                               {"seed", row.seed},
                               {"critical_values", {{"alpha", crit.alpha}, {"b", crit.replicates}, {"seed", crit.seed}}},
                               {"statistics", rates}});
        }
        if (opts.format == Format::Csv) {
            setup.provenance.write_csv(out);
            for (const auto& n : notes) out << "# " << n << "\n";
            out << "scenario,statistic,measure,value,se,critical,b,seed,errors\n" << rows.str();
        } else {
            out << json{{"provenance", setup.provenance.to_json()}, {"power", results}}.dump(2) << "\n";
        }
        return status;
    });
}

/// Empirical null critical values for each scenario's design.
inline int run_criticals(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto setup = detail::prepare(opts, "criticals");
        detail::CriticalCache cache(opts, setup.battery, setup.seed);
        int status = kOk;
        json results = json::array();
        std::ostringstream rows;
        for (const auto& sc : setup.scenarios) {
            const auto& crit = cache.get(sc);
            json thresholds = json::object();
            for (std::size_t k = 0; k < setup.battery.size(); ++k) {
                if (crit.valid[k] == 0) status = kStatisticFailed;
                rows << sc.id << "," << to_string(setup.battery[k]) << "," << detail::num(crit.thresholds[k], 6) << ","
                     << detail::num(crit.alpha, 4) << "," << crit.replicates << "," << crit.seed << ","
                     << crit.valid[k] << "\n";
                thresholds[std::string(to_string(setup.battery[k]))] = {{"threshold", detail::jnum(crit.thresholds[k])},
                                                                        {"valid", crit.valid[k]}};
            }
            results.push_back({{"scenario", sc.id},
                               {"design", crit.null_fingerprint},
                               {"alpha", crit.alpha},
                               {"b", crit.replicates},
                               {"seed", crit.seed},
                               {"statistics", thresholds}});
        }
        if (opts.format == Format::Csv) {
            setup.provenance.write_csv(out);
            out << "scenario,statistic,threshold,alpha,b,seed,valid\n" << rows.str();
        } else {
            out << json{{"provenance", setup.provenance.to_json()}, {"criticals", results}}.dump(2) << "\n";
        }
        return status;
    });
}

/// Mean correlation triples over simulated tables.
inline int run_corr(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto setup = detail::prepare(opts, "corr");
        detail::CriticalCache cache(opts, detail::with_optimal_tests(setup.battery), setup.seed);
        const SimulationOptions sim{opts.workers, opts.grid};
        int status = kOk;
        json results = json::array();
        std::ostringstream rows;
        for (auto sc : setup.scenarios) {
            const auto seed = detail::scenario_seed(setup.seed, 3, sc);
            const auto cal = detail::resolve_calibration(sc, opts, cache, setup.seed);
            if (cal) sc.penetrance = cal->penetrance;
            const auto m = mean_correlation_matrix(sc, opts.b_power, seed, sim);
            if (m.errors == m.replicates) status = kStatisticFailed;
            rows << sc.id << "," << detail::num(m.mean.rho_0_half, 4) << "," << detail::num(m.mean.rho_0_1, 4) << ","
                 << detail::num(m.mean.rho_half_1, 4) << "," << m.replicates << "," << seed << "," << m.errors << "\n";
            results.push_back({{"scenario", sc.id},
                               {"penetrance", detail::penetrance_json(sc, cal)},
                               {"rho_0_half", m.mean.rho_0_half},
                               {"rho_0_1", m.mean.rho_0_1},
                               {"rho_half_1", m.mean.rho_half_1},
                               {"b", m.replicates},
                               {"seed", seed},
                               {"errors", m.errors}});
        }
        if (opts.format == Format::Csv) {
            setup.provenance.write_csv(out);
            out << "scenario,rho_0_half,rho_0_1,rho_half_1,b,seed,errors\n" << rows.str();
        } else {
            out << json{{"provenance", setup.provenance.to_json()}, {"correlations", results}}.dump(2) << "\n";
        }
        return status;
    });
}

/// Matched p-value cross-classification of two statistics.
inline int run_crosstab(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const auto first = parse_statistic(opts.stat_a);
        const auto second = parse_statistic(opts.stat_b);
        auto setup = detail::prepare(opts, "crosstab");
        setup.provenance.settings["b_reps"] = std::to_string(opts.b_reps);
        setup.provenance.settings["stat_a"] = opts.stat_a;
        setup.provenance.settings["stat_b"] = opts.stat_b;
        detail::CriticalCache cache(opts, detail::with_optimal_tests(StatisticBattery({first})), setup.seed);
        const SimulationOptions sim{opts.workers, opts.grid};
        json results = json::array();
        std::ostringstream rows;
        for (auto sc : setup.scenarios) {
            const auto seed = detail::scenario_seed(setup.seed, 4, sc);
            const auto cal = detail::resolve_calibration(sc, opts, cache, setup.seed);
            if (cal) sc.penetrance = cal->penetrance;
            const auto tab = pvalue_crosstab(sc, first, second, opts.b_null, opts.b_reps, opts.bins, seed, sim);
            json cells = json::array();
            for (std::size_t i = 0; i < tab.counts.size(); ++i) {
                for (std::size_t j = 0; j < tab.counts.size(); ++j) {
                    rows << sc.id << "," << opts.stat_a << "," << opts.stat_b << ","
                         << detail::bin_label(i, tab.boundaries) << "," << detail::bin_label(j, tab.boundaries) << ","
                         << tab.counts[i][j] << "\n";
                }
                cells.push_back(tab.counts[i]);
            }
            results.push_back({{"scenario", sc.id},
                               {"penetrance", detail::penetrance_json(sc, cal)},
                               {"first", opts.stat_a},
                               {"second", opts.stat_b},
                               {"boundaries", tab.boundaries},
                               {"counts", cells},
                               {"upper_triangle", tab.upper_triangle()},
                               {"lower_triangle", tab.lower_triangle()},
                               {"b_null", tab.null_replicates},
                               {"b", tab.replicates},
                               {"seed", seed}});
        }
        if (opts.format == Format::Csv) {
            setup.provenance.write_csv(out);
            out << "scenario,first,second,first_bin,second_bin,count\n" << rows.str();
        } else {
            out << json{{"provenance", setup.provenance.to_json()}, {"crosstabs", results}}.dump(2) << "\n";
        }
        return kOk;
    });
}

} // namespace robust_assoc::cli

#endif
