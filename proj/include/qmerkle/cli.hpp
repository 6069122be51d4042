#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qmerkle/advbound.hpp"
#include "qmerkle/harness.hpp"
#include "qmerkle/qsim.hpp"
#include "qmerkle/serialize.hpp"

namespace qmerkle::cli {

// exit codes: 0 success, 1 verification failure, 2 invalid config or IO
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailure = 1;
inline constexpr int kConfigError = 2;

namespace detail {

struct ScanArgs {
    std::string config_path;
    std::string kind = "merkle1974";
    std::vector<std::size_t> n_values;
    std::size_t k = 2;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string plot;
};

inline void add_scan_options(CLI::App* cmd, ScanArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment config");
    cmd->add_option("--kind", args.kind, "merkle1974 | ksum_classical | ksum_quantum");
    cmd->add_option("--N", args.n_values, "security parameters (repeatable)");
    cmd->add_option("--k", args.k, "subset size");
    cmd->add_option("--trials", args.trials, "trials per N");
    cmd->add_option("--seed", args.seed, "base seed");
    cmd->add_option("--out", args.out, "output path (default stdout)");
    cmd->add_option("--format", args.format, "csv | json | markdown");
    cmd->add_option("--plot", args.plot, "SVG plot path");
}

inline harness::ExperimentConfig scan_config(const ScanArgs& args, bool attack) {
    harness::ExperimentConfig cfg;
    if (!args.config_path.empty()) {
        cfg = harness::ExperimentConfig::from_file(args.config_path);
    } else {
        cfg.kind = protocols::kind_from_name(args.kind);
        cfg.N_list = args.n_values;
        cfg.k = args.k;
        cfg.trials = args.trials;
        cfg.base_seed = args.seed;
        cfg.out = args.out;
        cfg.format = args.format;
        cfg.plot = args.plot;
    }
    if (attack) cfg.attack = true;
    cfg.validate();
    return cfg;
}

inline void deliver(const std::string& content, const std::string& path, std::ostream& out) {
    if (path.empty())
        out << content;
    else
        harness::write_file(path, content);
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"query-complexity laboratory for oracle key establishment"};
    app.require_subcommand(1);

    // protocol run | protocol scan
    auto* protocol = app.add_subcommand("protocol", "run key-establishment protocols");
    protocol->require_subcommand(1);

    struct {
        std::string kind = "ksum_classical";
        std::size_t N = 8;
        std::size_t k = 2;
        std::uint64_t seed = 0;
        std::string out_path;
    } run_args;
    auto* protocol_run = protocol->add_subcommand("run", "single run, transcript as JSON");
    protocol_run->add_option("--kind", run_args.kind, "protocol kind");
    protocol_run->add_option("--N", run_args.N, "security parameter");
    protocol_run->add_option("--k", run_args.k, "subset size");
    protocol_run->add_option("--seed", run_args.seed, "run seed");
    protocol_run->add_option("--out", run_args.out_path, "output path (default stdout)");

    detail::ScanArgs scan_args;
    auto* protocol_scan =
        protocol->add_subcommand("scan", "Monte-Carlo sweep over N, table output");
    detail::add_scan_options(protocol_scan, scan_args);

    // attack run
    auto* attack = app.add_subcommand("attack", "eavesdropping experiments");
    attack->require_subcommand(1);
    detail::ScanArgs attack_args;
    auto* attack_run =
        attack->add_subcommand("run", "sweep with the matching eavesdropper attached");
    detail::add_scan_options(attack_run, attack_args);

    // adv verify | adv compose
    auto* adv_cmd = app.add_subcommand("adv", "adversary-matrix verification");
    adv_cmd->require_subcommand(1);

    struct {
        bool fast = false;
        std::vector<std::size_t> point; // n k m (optional w)
    } verify_args;
    auto* adv_verify = adv_cmd->add_subcommand("verify", "matrix identity checks");
    adv_verify->add_flag("--fast", verify_args.fast, "skip norm computations");
    adv_verify->add_option("--point", verify_args.point,
                           "single grid point: n k m [w] (default: built-in grid)");

    struct {
        std::vector<std::size_t> ells{2, 3, 4};
    } compose_args;
    auto* adv_compose = adv_cmd->add_subcommand("compose", "composition identity checks");
    adv_compose->add_option("--ell", compose_args.ells, "bucket sizes to test");

    // qsim verify
    struct {
        std::size_t trials = 100;
        std::size_t lemma_trials = 10000;
        std::uint64_t seed = 2026;
        std::string out_path;
    } qsim_args;
    auto* qsim_verify = app.add_subcommand("qsim", "query-model simulation checks")
                            ->add_subcommand("verify", "progress-law fuzz campaign");
    qsim_verify->add_option("--trials", qsim_args.trials, "random circuits");
    qsim_verify->add_option("--lemma-trials", qsim_args.lemma_trials,
                            "trace-inequality trials");
    qsim_verify->add_option("--seed", qsim_args.seed, "campaign seed");
    qsim_verify->add_option("--out", qsim_args.out_path, "output path (default stdout)");

    // report
    struct {
        std::string in_path;
        std::string format = "markdown";
        std::string plot;
        std::string fit_column;
        std::string out_path;
    } report_args;
    auto* report = app.add_subcommand("report", "re-render a results table");
    report->add_option("--in", report_args.in_path, "input CSV table")->required();
    report->add_option("--format", report_args.format, "csv | json | markdown");
    report->add_option("--plot", report_args.plot, "SVG plot path");
    report->add_option("--fit", report_args.fit_column, "append a log-log fit of a column");
    report->add_option("--out", report_args.out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        if (protocol_run->parsed()) {
            protocols::ProtocolConfig cfg{protocols::kind_from_name(run_args.kind),
                                          run_args.N, run_args.k, run_args.seed};
            cfg.validate();
            detail::deliver(to_json(protocols::run_protocol(cfg)).dump(2) + "\n",
                            run_args.out_path, out);
            return kOk;
        }

        if (protocol_scan->parsed() || attack_run->parsed()) {
            const auto& args = protocol_scan->parsed() ? scan_args : attack_args;
            auto cfg = detail::scan_config(args, attack_run->parsed());
            auto table = harness::run_experiment(cfg);
            detail::deliver(harness::emit_report(table, cfg.format, cfg.plot), cfg.out, out);
            return kOk;
        }

        if (adv_verify->parsed()) {
            struct Point {
                std::size_t n, k;
                std::uint64_t m, w;
            };
            std::vector<Point> grid;
            if (!verify_args.point.empty()) {
                if (verify_args.point.size() < 3)
                    throw harness::ConfigError("adv verify: --point needs n k m [w]");
                grid.push_back({verify_args.point[0], verify_args.point[1],
                                verify_args.point[2],
                                verify_args.point.size() > 3 ? verify_args.point[3] : 0});
            } else {
                for (std::uint64_t w : {0, 1})
                    for (auto [n, k, m] :
                         std::initializer_list<std::tuple<std::size_t, std::size_t, std::uint64_t>>{
                             {3, 2, 3}, {4, 2, 5}, {4, 3, 5}, {5, 2, 5}})
                        grid.push_back({n, k, m, w});
            }

            out << "n k m w   dGd          target       |G|          excess     "
                   "max|G.D|   status\n";
            bool all_ok = true;
            for (const auto& p : grid) {
                adv::VerifyOptions opts;
                opts.compute_norms = !verify_args.fast;
                try {
                    auto r = adv::verify_ksum_claims(p.n, p.k, p.m, p.w, opts);
                    double max_filter = 0.0;
                    for (double f : r.delta_j_norms) max_filter = std::max(max_filter, f);
                    char line[160];
                    std::snprintf(line, sizeof line,
                                  "%zu %zu %llu %llu   %.9f  %.9f  %.9f  %.3e  %.6f   pass\n",
                                  p.n, p.k, (unsigned long long)p.m, (unsigned long long)p.w,
                                  r.delta_gamma_delta, r.target, r.gamma_norm, r.excess,
                                  max_filter);
                    out << line;
                } catch (const adv::VerificationError& e) {
                    out << p.n << " " << p.k << " " << p.m << " " << p.w << "   FAIL: "
                        << e.what() << "\n";
                    all_ok = false;
                }
            }
            return all_ok ? kOk : kVerificationFailure;
        }

        if (adv_compose->parsed()) {
            auto gamma = adv::build_gamma(3, 2, 3, 0);
            auto extended = adv::zero_extend(gamma);
            const auto delta_p = adv::zero_extend_weights(
                gamma, extended, adv::DistVector::uniform(gamma.rows.count));
            const auto delta_q = adv::DistVector::uniform(gamma.cols.count);

            // nonnegative entries: the norm identity requires a factor
            // whose absolute value is itself (entrywise domination)
            Rng rng(1212);
            linalg::RMatrix rnd(4, 4);
            for (auto& v : rnd.data()) v = rng.unit();
            adv::AdversaryMatrix random4 = adv::input_indexed(std::move(rnd), 1, 4);
            const auto uniform4 = adv::DistVector::uniform(4);

            bool all_ok = true;
            for (std::size_t ell : compose_args.ells) {
                for (int which = 0; which < 2; ++which) {
                    const char* name = which == 0 ? "stacked(3,2,3)" : "random4x4";
                    try {
                        auto r = which == 0
                                     ? adv::verify_composition(extended, delta_p, delta_q, ell)
                                     : adv::verify_composition(random4, uniform4, uniform4, ell);
                        char line[160];
                        std::snprintf(line, sizeof line,
                                      "%-15s ell=%zu  bilinear %.9f=%.9f  norm %.9f=%.9f  "
                                      "worst_rel %.2e  pass\n",
                                      name, ell, r.bilinear_lhs, r.bilinear_rhs, r.norm_lhs,
                                      r.norm_rhs, r.worst_relative_error);
                        out << line;
                    } catch (const adv::VerificationError& e) {
                        out << name << " ell=" << ell << "  FAIL: " << e.what() << "\n";
                        all_ok = false;
                    }
                }
            }
            return all_ok ? kOk : kVerificationFailure;
        }

        if (qsim_verify->parsed()) {
            int exit_code = kOk;
            nlohmann::json j;
            try {
                auto campaign =
                    qsim::progress_fuzz_campaign(qsim_args.trials, qsim_args.seed);
                auto lemma =
                    qsim::lemma_simple_fuzz(8, 8, qsim_args.lemma_trials, qsim_args.seed);
                j = {{"algorithms", campaign.algorithms},
                     {"violations", campaign.violations},
                     {"bound_failures", campaign.bound_failures},
                     {"worst_margins",
                      {{"initial_error", campaign.worst_initial_error},
                       {"final", campaign.worst_final_margin},
                       {"step", campaign.worst_step_margin}}},
                     {"lemma",
                      {{"trials", lemma.trials},
                       {"violations", lemma.violations},
                       {"worst_slack", lemma.worst_slack}}}};
                if (campaign.violations > 0 || campaign.bound_failures > 0 ||
                    lemma.violations > 0)
                    exit_code = kVerificationFailure;
            } catch (const adv::VerificationError& e) {
                j = {{"error", e.what()}};
                exit_code = kVerificationFailure;
            }
            detail::deliver(j.dump(2) + "\n", qsim_args.out_path, out);
            return exit_code;
        }

        if (report->parsed()) {
            std::ifstream in(report_args.in_path, std::ios::binary);
            if (!in) throw harness::ConfigError("report: cannot open " + report_args.in_path);
            std::stringstream buffer;
            buffer << in.rdbuf();
            auto table = harness::from_csv(buffer.str());
            auto rendered =
                harness::emit_report(table, report_args.format, report_args.plot);
            if (!report_args.fit_column.empty()) {
                auto fit = harness::fit_scaling(table, report_args.fit_column);
                char line[160];
                std::snprintf(line, sizeof line,
                              "fit %s: slope %.4f +- %.4f, intercept %.4f, r2 %.6f\n",
                              report_args.fit_column.c_str(), fit.slope, fit.ci95,
                              fit.intercept, fit.r_squared);
                rendered += line;
            }
            detail::deliver(rendered, report_args.out_path, out);
            return kOk;
        }

        err << "no subcommand selected\n";
        return kConfigError;
    } catch (const harness::ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::ios_base::failure& e) {
        err << "io error: " << e.what() << "\n";
        return kConfigError;
    } catch (const adv::VerificationError& e) {
        err << "verification failure: " << e.what() << "\n";
        return kVerificationFailure;
    }
}

} // namespace qmerkle::cli
