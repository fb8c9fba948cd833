// Command-line front end: solve capacity curves for discrete probing models
// and the continuous example bounds, locate budget cutoffs, run Monte-Carlo
// verification, and compare the solver against its grid oracle.

#include <iostream>

#include <CLI11.hpp>

#include "probecap/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cost-constrained state-probing capacity solver"};
    app.require_subcommand(1);

    probecap::cli::RunConfig cfg;
    double gamma_value = -1.0;
    bool gamma_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--example", cfg.example, "builtin instance: ex1 ex2 ex3 dpc fading");
        sub->add_option("--model", cfg.model_path, "model file path");
        sub->add_option("--theorem", cfg.theorem, "objective: 1, 2 (lower bound), 3 or 4; default picks by model")
            ->check(CLI::Range(1, 4));
        sub->add_option("--gamma", gamma_value, "single budget value")
            ->each([&gamma_set](const std::string&) { gamma_set = true; });
        sub->add_option("--sweep", cfg.sweep_spec, "budget grid start:stop:count");
        sub->add_option("--tol", cfg.tol, "solver tolerance");
        sub->add_option("--multistarts", cfg.multistarts, "multistart count");
        sub->add_option("--seed", cfg.seed, "random seed (recorded in outputs)");
        sub->add_option("--out", cfg.out_path, "output file path");
        sub->add_option("--format", cfg.format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "compute C(gamma) at a point or over a sweep");
    add_common(solve);

    CLI::App* cutoff = app.add_subcommand("cutoff", "find the smallest budget reaching the plateau");
    add_common(cutoff);
    cutoff->add_option("--cutoff-tol", cfg.cutoff_tol, "plateau tolerance in bits");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo verification of a solve");
    add_common(simulate);
    simulate->add_option("--n", cfg.samples, "sample count for the estimator");
    simulate->add_flag("--codec", cfg.codec, "run the toy rate-splitting codec instead");
    simulate->add_option("--blocklength", cfg.block_length, "codec block length (max 16)");
    simulate->add_option("--rate-frac", cfg.rate_frac, "codec rate as a fraction of capacity");
    simulate->add_option("--epsilon", cfg.epsilon, "typicality slack");
    simulate->add_option("--trials", cfg.trials, "codec trials");

    CLI::App* oracle = app.add_subcommand("oracle", "compare the solver against the grid oracle");
    add_common(oracle);
    oracle->add_option("--resolution", cfg.resolution, "oracle grid resolution");

    CLI11_PARSE(app, argc, argv);

    if (gamma_set) cfg.gamma = gamma_value;
    if (solve->parsed()) cfg.subcommand = "solve";
    if (cutoff->parsed()) cfg.subcommand = "cutoff";
    if (simulate->parsed()) cfg.subcommand = "simulate";
    if (oracle->parsed()) cfg.subcommand = "oracle";

    return probecap::cli::run(cfg, std::cout, std::cerr);
}
