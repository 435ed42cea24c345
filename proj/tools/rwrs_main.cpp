// Command-line front end: batch experiments over iterated walks in random
// scenery and their continuum limits, plus the named verification checks.
//
// Exit codes: 0 success, 1 validation error, 2 runtime or statistical-gate
// failure, 3 I/O error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rwrs/rwrs.hpp>

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t replicas = 0;
    std::uint64_t workers = 0;
    std::string out_path;
    std::string format;
    bool timing = false;

    CLI::Option* o_config = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_replicas = nullptr;
    CLI::Option* o_workers = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_format = nullptr;
    CLI::Option* o_timing = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    f.o_config = sub->add_option("--config", f.config_path,
                                 "JSON config file; flags override its fields");
    f.o_seed = sub->add_option("--seed", f.seed, "master seed (default 1; never wall-clock)");
    f.o_replicas = sub->add_option("--replicas", f.replicas, "Monte Carlo replicas");
    f.o_workers = sub->add_option("--workers", f.workers, "worker threads (payload-invariant)");
    f.o_out = sub->add_option("--out", f.out_path,
                              "output file (relative paths land in $RWRS_OUT_DIR if set)");
    f.o_format = sub->add_option("--format", f.format, "payload format: json record or csv table");
    f.o_timing = sub->add_flag("--timing", f.timing, "include wall time in the JSON record");
}

rwrs::ExperimentConfig load_base_config(const CommonFlags& f) {
    rwrs::ExperimentConfig cfg;
    if (f.o_config->count()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::ios_base::failure("cannot open config file: " + f.config_path);
        rwrs::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw rwrs::ConfigError("", std::string("config is not valid JSON: ") + e.what());
        }
        cfg = rwrs::config_from_json(j);
    }
    return cfg;
}

void apply_common(const CommonFlags& f, rwrs::ExperimentConfig& cfg) {
    if (f.o_seed->count()) cfg.seed = f.seed;
    if (f.o_replicas->count()) cfg.replicas = static_cast<std::uint32_t>(f.replicas);
    if (f.o_workers->count()) cfg.workers = static_cast<unsigned>(f.workers);
    if (f.o_out->count()) cfg.out_path = f.out_path;
    if (f.o_format->count()) cfg.format = f.format;
    if (f.o_timing->count()) cfg.timing = true;
}

std::string resolve_out(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* dir = std::getenv("RWRS_OUT_DIR");
    if (!dir || !*dir) return path;
    std::string d(dir);
    if (d.back() != '/') d += '/';
    return d + path;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    const std::string full = resolve_out(path);
    std::ofstream out(full, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open for writing: " + full);
    out << text;
    if (!out) throw std::ios_base::failure("write failed: " + full);
}

// Payload selection: json emits the metrics record, csv emits the table.
int emit_result(const rwrs::ExperimentConfig& cfg, rwrs::RunResult res, double wall_seconds) {
    if (cfg.timing) res.record["wall_seconds"] = wall_seconds;
    if (cfg.format == "csv") {
        if (res.table.empty())
            throw rwrs::ConfigError("output.format",
                                    "experiment '" + cfg.experiment + "' produces no CSV table");
        write_text(cfg.out_path, res.table);
    } else {
        write_text(cfg.out_path, rwrs::record_to_json_text(res.record));
    }
    std::fprintf(stderr, "wall %.3f s\n", wall_seconds);
    return res.gate_failed ? 2 : 0;
}

int run_config(rwrs::ExperimentConfig cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    rwrs::RunResult res = rwrs::run_experiment_full(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit_result(cfg, std::move(res), wall);
}

int run_checks(const std::vector<std::string>& names, const CommonFlags& f) {
    rwrs::AcceptanceOptions opts;
    if (f.o_seed->count()) opts.seed = f.seed;
    if (f.o_workers->count()) opts.workers = static_cast<unsigned>(f.workers);
    if (opts.workers == 0) opts.workers = 1;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<rwrs::CheckResult> results;
    bool failed = false;
    for (const auto& name : names) {
        rwrs::CheckResult r = rwrs::run_check(name, opts);
        std::cout << rwrs::format_check_line(r) << "\n";
        std::cout.flush();
        std::fprintf(stderr, "check %s: %.2f s\n", r.name.c_str(), r.seconds);
        if (r.gating && !r.passed) failed = true;
        results.push_back(std::move(r));
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (f.o_out->count()) {
        rwrs::json rec = rwrs::acceptance_record(results, f.timing);
        if (f.timing) rec["wall_seconds"] = wall;
        write_text(f.out_path, rwrs::record_to_json_text(rec));
    }
    std::fprintf(stderr, "wall %.3f s\n", wall);
    return failed ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification of iterated walks in random scenery"};
    app.set_version_flag("--version", std::string(RWRS_VERSION_STRING));
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "emit one path (lattice or grid) as CSV");
    CommonFlags fsim;
    add_common(sim, fsim);
    std::string sim_model;
    std::uint64_t sim_depth = 0, sim_n = 0;
    double sim_dt = 0.0, sim_T = 0.0;
    auto* o_sim_model = sim->add_option("--model", sim_model,
                                        "srw|tower|oriented3d|nn3d|twin_level2|level2_driven_by_z|"
                                        "level2_driven_by_y|level2_driven_by_2d|brownian|delta|gamma|xi_tower");
    auto* o_sim_depth = sim->add_option("--depth", sim_depth, "tower depth");
    auto* o_sim_n = sim->add_option("--n", sim_n, "steps (lattice models)");
    auto* o_sim_dt = sim->add_option("--dt", sim_dt, "grid resolution (grid models)");
    auto* o_sim_T = sim->add_option("--T", sim_T, "time horizon (grid models)");

    // exponent
    auto* expn = app.add_subcommand("exponent", "fit a scaling exponent from a moment curve");
    CommonFlags fexp;
    add_common(expn, fexp);
    std::string exp_model;
    std::uint64_t exp_depth = 0;
    std::vector<std::uint64_t> exp_horizons;
    double exp_q = 0.0;
    bool exp_median = false;
    auto* o_exp_model = expn->add_option("--model", exp_model, "srw or tower");
    auto* o_exp_depth = expn->add_option("--depth", exp_depth, "tower depth");
    auto* o_exp_h = expn->add_option("--horizons", exp_horizons, "ascending horizons");
    auto* o_exp_q = expn->add_option("--q", exp_q, "moment order");
    auto* o_exp_med = expn->add_flag("--median", exp_median, "fit the median curve instead");

    // llt
    auto* llt = app.add_subcommand("llt", "point-probability constant of the level-2 walk at 0");
    CommonFlags fllt;
    add_common(llt, fllt);
    std::vector<std::uint64_t> llt_horizons;
    double llt_window = -1.0;
    auto* o_llt_h = llt->add_option("--horizons", llt_horizons, "ascending even horizons");
    auto* o_llt_w = llt->add_option("--window", llt_window, "trailing window fraction in [0,1)");

    // limit
    auto* lim = app.add_subcommand("limit", "distributional checks of the continuum limits");
    CommonFlags flim;
    add_common(lim, flim);
    std::string lim_kind = "variance";
    std::string lim_model;
    std::uint64_t lim_depth = 0;
    double lim_dt = 0.0, lim_T = 0.0, lim_bin_scale = 0.0;
    double lim_t = -1.0, lim_s = -1.0, lim_ss_t = -1.0, lim_ss_c = 0.0;
    std::uint64_t lim_n = 0, lim_lag = 0;
    lim->add_option("--kind", lim_kind, "variance|self_similarity|stationarity|identity")
        ->check(CLI::IsMember({"variance", "self_similarity", "stationarity", "identity"}));
    auto* o_lim_model = lim->add_option("--model", lim_model,
                                        "brownian|delta|gamma|xi_tower (stationarity also: srw|tower)");
    auto* o_lim_depth = lim->add_option("--depth", lim_depth, "level for xi_tower / tower");
    auto* o_lim_dt = lim->add_option("--dt", lim_dt, "grid resolution");
    auto* o_lim_T = lim->add_option("--T", lim_T, "time horizon (variance kind)");
    auto* o_lim_bin = lim->add_option("--bin-scale", lim_bin_scale, "bin-width prefactor c");
    auto* o_lim_t = lim->add_option("--t", lim_t, "increment start (grid stationarity)");
    auto* o_lim_s = lim->add_option("--s", lim_s, "increment length (grid stationarity)");
    auto* o_lim_ss_t = lim->add_option("--ss-t", lim_ss_t, "base time for self-similarity");
    auto* o_lim_ss_c = lim->add_option("--ss-c", lim_ss_c, "scale factor for self-similarity");
    auto* o_lim_n = lim->add_option("--n", lim_n, "increment length (discrete stationarity)");
    auto* o_lim_lag = lim->add_option("--lag", lim_lag, "lag (discrete stationarity)");

    // verify / accept
    auto* ver = app.add_subcommand("verify", "run one named check");
    CommonFlags fver;
    add_common(ver, fver);
    std::string check_name;
    ver->add_option("name", check_name,
                    "exponents|oracle|heavy_tail|delta_variance|identity|self_similarity|"
                    "stationarity|llt|depth4|invariants")
        ->required();

    auto* acc = app.add_subcommand("accept", "run the full acceptance suite");
    CommonFlags facc;
    add_common(acc, facc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            rwrs::ExperimentConfig cfg = load_base_config(fsim);
            cfg.experiment = "simulate";
            apply_common(fsim, cfg);
            if (o_sim_model->count()) cfg.process.model = sim_model;
            if (o_sim_depth->count()) cfg.process.depth = static_cast<int>(sim_depth);
            if (o_sim_n->count()) cfg.n = sim_n;
            if (o_sim_dt->count()) cfg.grid.dt = sim_dt;
            if (o_sim_T->count()) cfg.grid.T = sim_T;
            if (!fsim.o_format->count() && cfg.format == "json") cfg.format = "csv";
            return run_config(std::move(cfg));
        }
        if (expn->parsed()) {
            rwrs::ExperimentConfig cfg = load_base_config(fexp);
            cfg.experiment = "exponent";
            apply_common(fexp, cfg);
            if (o_exp_model->count()) cfg.process.model = exp_model;
            if (o_exp_depth->count()) cfg.process.depth = static_cast<int>(exp_depth);
            if (o_exp_h->count()) cfg.horizons = exp_horizons;
            if (o_exp_q->count()) cfg.moment_q = exp_q;
            if (o_exp_med->count()) cfg.use_median = exp_median;
            return run_config(std::move(cfg));
        }
        if (llt->parsed()) {
            rwrs::ExperimentConfig cfg = load_base_config(fllt);
            cfg.experiment = "llt";
            apply_common(fllt, cfg);
            if (o_llt_h->count()) cfg.horizons = llt_horizons;
            if (o_llt_w->count()) cfg.llt_window = llt_window;
            return run_config(std::move(cfg));
        }
        if (lim->parsed()) {
            rwrs::ExperimentConfig cfg = load_base_config(flim);
            cfg.experiment = lim_kind == "variance"     ? "limit_variance"
                             : lim_kind == "identity"        ? "identity_check"
                                                        : lim_kind;
            apply_common(flim, cfg);
            if (o_lim_model->count()) cfg.process.model = lim_model;
            else if (!flim.o_config->count()) cfg.process.model = "delta";
            if (o_lim_depth->count()) cfg.process.depth = static_cast<int>(lim_depth);
            if (o_lim_dt->count()) cfg.grid.dt = lim_dt;
            if (o_lim_T->count()) cfg.grid.T = lim_T;
            if (o_lim_bin->count()) cfg.grid.bin_scale = lim_bin_scale;
            if (o_lim_t->count()) cfg.stat_t = lim_t;
            if (o_lim_s->count()) cfg.stat_s = lim_s;
            if (o_lim_ss_t->count()) cfg.ss_t = lim_ss_t;
            if (o_lim_ss_c->count()) cfg.ss_c = lim_ss_c;
            if (o_lim_n->count()) cfg.stat_n = lim_n;
            if (o_lim_lag->count()) cfg.stat_lag = lim_lag;
            return run_config(std::move(cfg));
        }
        if (ver->parsed()) return run_checks({check_name}, fver);
        if (acc->parsed()) return run_checks(rwrs::check_names(), facc);
    } catch (const rwrs::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
