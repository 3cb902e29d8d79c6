#ifndef ROBUST_ASSOC_SCENARIO_IO_HPP
#define ROBUST_ASSOC_SCENARIO_IO_HPP

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "montecarlo.hpp"
#include "population.hpp"
#include "tables.hpp"

namespace robust_assoc {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace detail

/**
 * Parses one genotype record: six nonnegative integers r0 r1 r2 s0 s1 s2,
 * separated by commas and/or whitespace.
 */
inline GenotypeTable parse_table_record(std::string_view line, std::size_t line_number) {
    std::vector<double> cells;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const auto v = detail::to_integer(token);
        if (!v) {
            throw Error(ErrorKind::ParseError,
                        "line " + std::to_string(line_number) + ": '" + token + "' is not an integer count");
        }
        if (*v < 0) {
            throw Error(ErrorKind::NegativeCell, "line " + std::to_string(line_number) + ": negative count");
        }
        cells.push_back(static_cast<double>(*v));
        token.clear();
    };
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
            flush();
        } else {
            token += c;
        }
    }
    flush();
    if (cells.size() != 6) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": expected 6 counts, found " +
                                               std::to_string(cells.size()) + " in record '" + std::string(line) + "'");
    }
    try {
        return GenotypeTable(cells[0], cells[1], cells[2], cells[3], cells[4], cells[5]);
    } catch (const Error& e) {
        throw Error(e.kind(), "line " + std::to_string(line_number) + ": " + e.what());
    }
}

struct TableRecord {
    std::size_t line = 0;
    GenotypeTable table;
};

/// Reads every non-blank, non-comment line as a table record. A leading header line starting with a letter is skipped.
inline std::vector<TableRecord> read_table_records(std::istream& in) {
    std::vector<TableRecord> out;
    std::string line;
    std::size_t number = 0;
    bool seen = false;
    while (std::getline(in, line)) {
        ++number;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        if (!seen && std::isalpha(static_cast<unsigned char>(body.front()))) {
            seen = true;
            continue;
        }
        seen = true;
        out.push_back({number, parse_table_record(body, number)});
    }
    return out;
}

/**
 * Scenario packs: INI-style records.
 *
 *   [scenario-id]
 *   model = rec          # null | rec | add | dom | custom
 *   f0 = 0.01
 *   f2 = 0.05            # or: calibrate = 0.80
 *   p = 0.1              # or: pA, pB, R1, R2, S1, S2
 *   r = 250
 *   s = 250
 *   correction = on      # optional
 *   sidedness = two      # optional
 */
inline std::vector<Scenario> parse_scenarios(std::istream& in, const std::string& source = "<scenarios>") {
    struct Pending {
        std::string id;
        std::size_t line = 0;
        std::map<std::string, std::pair<std::string, std::size_t>> keys;
    };
    static const std::set<std::string> kKnown{"model", "f0", "f1", "f2", "calibrate", "p", "pA", "pB", "R1",
                                              "R2", "S1", "S2", "r", "s", "correction", "sidedness"};
    std::vector<Pending> pending;
    std::string line;
    std::size_t number = 0;
    auto fail = [&](std::size_t at, const std::string& msg) {
        throw Error(ErrorKind::InvalidScenario, source + ":" + std::to_string(at) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++number;
        auto body = line.substr(0, line.find('#'));
        const auto text = detail::trim(body);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) fail(number, "malformed section header");
            pending.push_back({std::string(text.substr(1, text.size() - 2)), number, {}});
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) fail(number, "expected key = value");
        if (pending.empty()) fail(number, "key outside of a [scenario] section");
        const std::string key(detail::trim(text.substr(0, eq)));
        const std::string value(detail::trim(text.substr(eq + 1)));
        if (!kKnown.count(key)) fail(number, "unknown key '" + key + "'");
        if (pending.back().keys.count(key)) fail(number, "duplicate key '" + key + "'");
        pending.back().keys[key] = {value, number};
    }

    std::vector<Scenario> out;
    std::set<std::string> ids;
    for (const auto& rec : pending) {
        if (!ids.insert(rec.id).second) fail(rec.line, "duplicate scenario id '" + rec.id + "'");
        auto has = [&](const char* k) { return rec.keys.count(k) > 0; };
        auto real = [&](const char* k) {
            const auto& [text, at] = rec.keys.at(k);
            const auto v = detail::to_double(text);
            if (!v) fail(at, std::string("'") + k + "' must be a number");
            return *v;
        };
        auto integer = [&](const char* k) {
            const auto& [text, at] = rec.keys.at(k);
            const auto v = detail::to_integer(text);
            if (!v || *v <= 0 || *v > 100000000) fail(at, std::string("'") + k + "' must be a positive integer");
            return static_cast<int>(*v);
        };

        Scenario sc;
        sc.id = rec.id;
        try {
            if (has("p")) {
                for (const char* k : {"pA", "pB", "R1", "R2", "S1", "S2"})
                    if (has(k)) fail(rec.keys.at(k).second, "mixture key mixed with single-population 'p'");
                if (!has("r") || !has("s")) fail(rec.line, "single-population scenarios need r and s");
                sc.population = HwePopulation{real("p")};
                sc.cases = integer("r");
                sc.controls = integer("s");
            } else if (has("pA")) {
                for (const char* k : {"pB", "R1", "R2", "S1", "S2"})
                    if (!has(k)) fail(rec.line, std::string("mixture scenario missing '") + k + "'");
                MixturePopulation mix{real("pA"), real("pB"), integer("R1"), integer("R2"), integer("S1"), integer("S2")};
                sc.population = mix;
                sc.cases = has("r") ? integer("r") : mix.case_total();
                sc.controls = has("s") ? integer("s") : mix.control_total();
            } else {
                fail(rec.line, "scenario needs 'p' or a mixture 'pA'/'pB'");
            }
            robust_assoc::validate(sc.population);

            if (has("correction")) {
                const auto& [v, at] = rec.keys.at("correction");
                if (v != "on" && v != "off") fail(at, "correction must be on or off");
                sc.correction = v == "on";
            }
            if (has("sidedness")) {
                const auto& [v, at] = rec.keys.at("sidedness");
                if (v != "one" && v != "two") fail(at, "sidedness must be one or two");
                sc.sidedness = v == "one" ? Sidedness::OneSided : Sidedness::TwoSided;
            }

            const std::string model = has("model") ? rec.keys.at("model").first : "null";
            const double f0 = has("f0") ? real("f0") : 0.01;
            if (model == "null") {
                sc.null_hypothesis = true;
                sc.penetrance = null_penetrance(f0);
            } else {
                sc.null_hypothesis = false;
                GeneticModel kind = GeneticModel::Custom;
                if (model == "rec") kind = GeneticModel::Recessive;
                else if (model == "add") kind = GeneticModel::Additive;
                else if (model == "dom") kind = GeneticModel::Dominant;
                else if (model != "custom") fail(rec.keys.at("model").second, "unknown model '" + model + "'");

                if (kind == GeneticModel::Custom) {
                    if (!has("f1") || !has("f2")) fail(rec.line, "custom model needs f1 and f2");
                    if (has("calibrate")) fail(rec.keys.at("calibrate").second, "custom models cannot be calibrated");
                    sc.penetrance = custom_penetrances(f0, real("f1"), real("f2"));
                } else {
                    if (has("f1")) fail(rec.keys.at("f1").second, "f1 is implied by the model");
                    if (has("calibrate") == has("f2")) fail(rec.line, "give exactly one of f2 or calibrate");
                    if (has("calibrate")) {
                        sc.calibration_target = real("calibrate");
                        sc.penetrance = penetrances_for_model(kind, f0, f0);
                    } else {
                        sc.penetrance = penetrances_for_model(kind, f0, real("f2"));
                    }
                }
            }
            sc.validate();
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InvalidScenario && std::string(e.what()).find(source) != std::string::npos) throw;
            fail(rec.line, "[" + rec.id + "] " + e.what());
        }
        out.push_back(std::move(sc));
    }
    if (out.empty()) {
        throw Error(ErrorKind::InvalidScenario, source + ": no scenarios found");
    }
    return out;
}

inline std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::InvalidScenario, "cannot open scenario file '" + path + "'");
    }
    return parse_scenarios(in, path);
}

/// Canonical one-line description of every scenario field.
inline std::string describe(const Scenario& sc) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "id=%s;null=%d;f=(%.17g,%.17g,%.17g);model=%s;calibrate=%.17g;", sc.id.c_str(),
                  sc.null_hypothesis ? 1 : 0, sc.penetrance.f0, sc.penetrance.f1, sc.penetrance.f2,
                  std::string(to_string(sc.penetrance.kind)).c_str(), sc.calibration_target.value_or(0.0));
    return buf + sc.null_fingerprint();
}

/// FNV-1a over the canonical descriptions; stable across platforms.
inline std::uint64_t scenario_hash(const std::vector<Scenario>& scenarios) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& sc : scenarios) {
        for (unsigned char c : describe(sc) + "\n") {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace robust_assoc

#endif
