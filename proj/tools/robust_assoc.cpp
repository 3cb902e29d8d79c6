#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <robust_assoc/cli.hpp>

namespace cli = robust_assoc::cli;

namespace {

unsigned default_workers() {
    if (const char* env = std::getenv("ROBUST_ASSOC_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (...) {
            std::cerr << "warning: ignoring ROBUST_ASSOC_THREADS='" << env << "'\n";
        }
    }
    return 0;
}

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust trend tests for case-control genetic association"};
    app.set_version_flag("--version", std::string("robust_assoc ") + ROBUST_ASSOC_VERSION);
    app.require_subcommand(1);

    cli::CommandOptions opts;
    opts.invocation = join_args(argc, argv);
    opts.workers = default_workers();
    std::string format = "csv";
    std::string out_path;
    std::string correction;
    std::string sidedness;
    std::vector<double> grid;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub, bool simulation) {
        sub->add_option("--battery", opts.battery, "Comma-separated statistics, or 'all'")->capture_default_str();
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_option("--out", out_path, "Output file (default stdout)");
        sub->add_option("--correction", correction, "Add 1/2 to every cell before evaluating")
            ->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--sidedness", sidedness, "one or two")->check(CLI::IsMember({"one", "two"}));
        sub->add_option("--grid", grid, "Scores for MAXGRID")->delimiter(',');
        sub->add_option("--threads", opts.workers, "Worker threads (0 = all cores)");
        auto* s = sub->add_option("--seed", seed, "Master seed");
        if (simulation) {
            s->required();
            sub->add_option("--scenarios", opts.scenarios, "Scenario pack (INI)")->required()->check(CLI::ExistingFile);
            sub->add_option("--alpha", opts.alpha, "Nominal level")->capture_default_str();
            sub->add_option("--b-null", opts.b_null, "Null replicates for critical values")->capture_default_str();
            sub->add_option("--b-power", opts.b_power, "Replicates per scenario")->capture_default_str();
        }
    };

    auto* analyze = app.add_subcommand("analyze", "Statistics and p-values for observed tables");
    common(analyze, false);
    analyze->add_option("--input", opts.input, "Table records, six counts per line ('-' = stdin)")->capture_default_str();
    analyze->add_option("--b-perm", opts.b_perm, "Permutations for permutation p-values (0 = none)");

    auto* power = app.add_subcommand("power", "Empirical size and power per scenario");
    common(power, true);
    auto* criticals = app.add_subcommand("criticals", "Empirical null critical values");
    common(criticals, true);
    auto* corr = app.add_subcommand("corr", "Mean correlations between trend statistics");
    common(corr, true);
    auto* crosstab = app.add_subcommand("crosstab", "Cross-classified p-values of two statistics");
    common(crosstab, true);
    crosstab->add_option("--stat-a", opts.stat_a, "Row statistic")->capture_default_str();
    crosstab->add_option("--stat-b", opts.stat_b, "Column statistic")->capture_default_str();
    crosstab->add_option("--b-reps", opts.b_reps, "Alternative replicates")->capture_default_str();
    crosstab->add_option("--bins", opts.bins, "Increasing p-value cut points")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    opts.format = format == "json" ? cli::Format::Json : cli::Format::Csv;
    if (!correction.empty()) opts.correction = correction == "on";
    if (!sidedness.empty()) {
        opts.sidedness = sidedness == "one" ? robust_assoc::Sidedness::OneSided : robust_assoc::Sidedness::TwoSided;
    }
    if (!grid.empty()) opts.grid = grid;
    if (app.get_subcommands().front()->count("--seed")) opts.seed = seed;

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return cli::kInvalidInput;
        }
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (analyze->parsed()) {
        if (opts.input == "-") return cli::run_analyze(opts, std::cin, out, std::cerr);
        std::ifstream in(opts.input);
        if (!in) {
            std::cerr << "error: cannot open '" << opts.input << "'\n";
            return cli::kInvalidInput;
        }
        return cli::run_analyze(opts, in, out, std::cerr);
    }
    if (power->parsed()) return cli::run_power(opts, out, std::cerr);
    if (criticals->parsed()) return cli::run_criticals(opts, out, std::cerr);
    if (corr->parsed()) return cli::run_corr(opts, out, std::cerr);
    return cli::run_crosstab(opts, out, std::cerr);
}
