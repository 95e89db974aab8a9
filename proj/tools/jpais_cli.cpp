// Command-line front end: experiment runner, feedback sweeps, plotting,
// convexity diagnostics and complexity tables.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "jpais/diagnostics.hpp"
#include "jpais/harness.hpp"
#include "jpais/svgplot.hpp"

namespace {

using namespace jpais;

struct RunOptions {
    std::string preset;
    std::string config_file;
    std::string out = "results.csv";
    std::string mode = "mmse";
    std::vector<double> snr;
    std::vector<int> users;
    std::vector<int> relays;
    std::vector<double> fdt;
    std::vector<double> pe;
    std::vector<std::string> algs;
    int runs = -1;
    int threads = 1;
    uint64_t seed = 1;
    bool paper_scale = false;
    harness::ExperimentSpec base_spec;
};

void add_scenario_flags(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--preset", o.preset, "named experiment (fig5, fig5-users, fig3, fig6-fdt, fig-newfig, fig7)");
    cmd->add_option("--config", o.config_file, "key=value scenario file");
    cmd->add_option("--out", o.out, "output CSV path");
    cmd->add_option("--mode", o.mode, "mmse or adaptive");
    cmd->add_option("--snr", o.snr, "SNR grid (dB)");
    cmd->add_option("--users", o.users, "user-count grid");
    cmd->add_option("--relays", o.relays, "relay-count grid");
    cmd->add_option("--fdt", o.fdt, "normalized Doppler grid");
    cmd->add_option("--algs", o.algs, "algorithms (ncis cis jpais-gpc jpais-ipc ...)");
    cmd->add_option("--runs", o.runs, "independent packets per grid point");
    cmd->add_option("--threads", o.threads, "worker threads");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_flag("--paper-scale", o.paper_scale, "1000-run averaging");
    cmd->add_option("--gain", o.base_spec.base.gain, "processing gain N");
    cmd->add_option("--paths", o.base_spec.base.paths, "multipath taps L");
    cmd->add_option("--packet", o.base_spec.base.packet_symbols, "symbols per packet");
    cmd->add_option("--train", o.base_spec.base.training_symbols, "training symbols");
    cmd->add_option("--ridge", o.base_spec.base.ridge, "allocation regularizer");
    cmd->add_option("--alpha", o.base_spec.base.forgetting, "RLS forgetting factor");
}

harness::ExperimentSpec build_spec(const RunOptions& o) {
    harness::ExperimentSpec spec = o.preset.empty() ? o.base_spec : harness::preset(o.preset);
    if (!o.preset.empty()) {
        // explicit base flags still override the preset
        spec.base.gain = o.base_spec.base.gain;
        spec.base.paths = o.base_spec.base.paths;
        spec.base.ridge = o.base_spec.base.ridge;
        spec.base.forgetting = o.base_spec.base.forgetting;
        if (o.base_spec.base.packet_symbols != SystemConfig{}.packet_symbols)
            spec.base.packet_symbols = o.base_spec.base.packet_symbols;
        if (o.base_spec.base.training_symbols != SystemConfig{}.training_symbols)
            spec.base.training_symbols = o.base_spec.base.training_symbols;
    }
    if (!o.config_file.empty()) harness::apply_config(spec.base, harness::parse_config_file(o.config_file));
    if (o.preset.empty() || o.mode != "mmse")
        spec.mode = o.mode == "adaptive" ? harness::Mode::Adaptive : harness::Mode::Mmse;
    if (!o.snr.empty()) spec.snr_db = o.snr;
    if (!o.users.empty()) spec.users = o.users;
    if (!o.relays.empty()) spec.relays = o.relays;
    if (!o.fdt.empty()) spec.doppler = o.fdt;
    if (!o.pe.empty()) spec.feedback_error = o.pe;
    if (!o.algs.empty()) {
        spec.algorithms.clear();
        for (const auto& a : o.algs) spec.algorithms.push_back(metrics::algorithm_from_name(a));
    }
    if (o.runs > 0) spec.runs = o.runs;
    if (o.paper_scale) spec.runs = 1000;
    spec.threads = o.threads;
    spec.seed = o.seed;
    spec.out_csv = o.out;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative DS-CDMA link simulator: joint power allocation and interference suppression"};
    app.require_subcommand(1);

    RunOptions run_opts, fb_opts;
    auto* run_cmd = app.add_subcommand("run", "Monte Carlo BER/throughput experiment");
    add_scenario_flags(run_cmd, run_opts);

    auto* fb_cmd = app.add_subcommand("feedback", "experiment with quantized feedback over a BSC");
    add_scenario_flags(fb_cmd, fb_opts);
    int fb_bits = 4;
    fb_cmd->add_option("--pe", fb_opts.pe, "feedback bit error probabilities");
    fb_cmd->add_option("--bits", fb_bits, "bits per quantized coefficient");

    std::string plot_csv, plot_kind = "ber_snr", plot_dir = ".";
    auto* plot_cmd = app.add_subcommand("plot", "render a figure from a results CSV");
    plot_cmd->add_option("--csv", plot_csv, "input CSV")->required();
    plot_cmd->add_option("--kind", plot_kind, "ber_snr ber_users ber_fdt nt_snr mi_snr ber_pe complexity");
    plot_cmd->add_option("--out-dir", plot_dir, "output directory");

    std::string diag_mode = "gpc";
    int diag_probes = 200, diag_mc = 2000, diag_inits = 5, diag_iters = 100;
    double diag_power = -1.0;
    uint64_t diag_seed = 1;
    SystemConfig diag_cfg;
    auto* diag_cmd = app.add_subcommand("diag", "convexity bound and initialization invariance");
    diag_cmd->add_option("--mode", diag_mode, "gpc or ipc");
    diag_cmd->add_option("--probes", diag_probes, "probe directions");
    diag_cmd->add_option("--mc", diag_mc, "Monte Carlo frames");
    diag_cmd->add_option("--inits", diag_inits, "random initializations");
    diag_cmd->add_option("--iters", diag_iters, "alternation iterations");
    diag_cmd->add_option("--power", diag_power, "constraint power (default: above the estimated bound)");
    diag_cmd->add_option("--seed", diag_seed, "seed");
    diag_cmd->add_option("--users", diag_cfg.users, "users");
    diag_cmd->add_option("--relays", diag_cfg.relays, "relays");
    diag_cmd->add_option("--gain", diag_cfg.gain, "processing gain");
    diag_cmd->add_option("--paths", diag_cfg.paths, "multipath taps");
    double diag_snr = 12.0;
    diag_cmd->add_option("--snr", diag_snr, "scenario SNR (dB)");

    SystemConfig cplx_cfg;
    std::vector<int> cplx_relays{0, 1, 2, 3, 4};
    std::string cplx_out;
    auto* cplx_cmd = app.add_subcommand("complexity", "per-symbol operation counts");
    cplx_cmd->add_option("--users", cplx_cfg.users, "users");
    cplx_cmd->add_option("--gain", cplx_cfg.gain, "processing gain");
    cplx_cmd->add_option("--paths", cplx_cfg.paths, "multipath taps");
    cplx_cmd->add_option("--relays", cplx_relays, "relay counts");
    cplx_cmd->add_option("--out", cplx_out, "optional CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto rows = harness::run_experiment(build_spec(run_opts));
            std::printf("wrote %zu rows to %s\n", rows.size(), run_opts.out.c_str());
            return 0;
        }
        if (fb_cmd->parsed()) {
            auto spec = build_spec(fb_opts);
            spec.feedback_bits = fb_bits;
            if (spec.feedback_error.size() == 1 && spec.feedback_error[0] == 0.0)
                spec.feedback_error = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
            const auto rows = harness::run_feedback_experiment(spec);
            std::printf("wrote %zu rows to %s\n", rows.size(), fb_opts.out.c_str());
            return 0;
        }
        if (plot_cmd->parsed()) {
            const auto path =
                plot::emit_plot(plot_csv, plot::kind_from_name(plot_kind), plot_dir);
            std::printf("wrote %s\n", path.c_str());
            return 0;
        }
        if (diag_cmd->parsed()) {
            diag_cfg.noise_var = snr_db_to_noise_var(diag_snr, diag_cfg.user_power);
            Rng rng = make_stream(diag_seed, {0xd1a6});
            auto sc = diagnostics::make_scenario(diag_cfg, rng);
            const auto mode = diag_mode == "ipc" ? mmse::ConstraintMode::Individual
                                                 : mmse::ConstraintMode::Global;
            const auto bound = diagnostics::convexity_bound(sc, mode, diag_probes, diag_mc, rng);
            std::printf("estimated power floor: %.6g (excluded directions: %.1f%%)\n", bound.bound,
                        100.0 * bound.excluded_fraction);
            const double power = diag_power > 0.0
                                     ? diag_power
                                     : std::max(1.1 * std::max(bound.bound, 0.0),
                                                mode == mmse::ConstraintMode::Global
                                                    ? sc.powers.total()
                                                    : sc.powers.budget[0]);
            const auto rep =
                diagnostics::init_invariance_test(sc, mode, diag_inits, power, diag_iters, rng);
            std::printf("invariance at P=%.6g: cost spread %.3e, allocation distance %.3e\n",
                        power, rep.cost_spread, rep.alloc_distance);
            return 0;
        }
        if (cplx_cmd->parsed()) {
            std::vector<metrics::RunMetrics> rows;
            std::printf("%-12s %6s %14s %14s\n", "algorithm", "n_r", "adds", "mults");
            for (int nr : cplx_relays) {
                SystemConfig cfg = cplx_cfg;
                cfg.relays = nr;
                for (auto alg : {metrics::Algorithm::NcisUp, metrics::Algorithm::NcisDown,
                                 metrics::Algorithm::CisUp, metrics::Algorithm::CisDown,
                                 metrics::Algorithm::JpaisGpc, metrics::Algorithm::JpaisIpc}) {
                    const auto ops = metrics::complexity_count(alg, cfg);
                    std::printf("%-12s %6d %14.0f %14.0f\n", metrics::algorithm_name(alg).c_str(),
                                nr, ops.adds, ops.mults);
                    metrics::RunMetrics m;
                    m.algorithm = metrics::algorithm_name(alg);
                    m.mode = "count";
                    m.users = cfg.users;
                    m.relays = nr;
                    m.adds = ops.adds;
                    m.mults = ops.mults;
                    m.runs = 0;
                    rows.push_back(m);
                }
            }
            if (!cplx_out.empty()) harness::write_csv(cplx_out, rows);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
