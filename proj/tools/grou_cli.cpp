// grou: simulate, estimate, lasso and mc front end.

#include "grou/grou.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using grou::io::json;

namespace {

std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw grou::IoError("cannot read " + p.string() + " for checksumming");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char h[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(h, sizeof h, "%02x", md[i]);
        hex += h;
    }
    return hex;
}

struct Run {
    Run(std::string cmd, std::string cfg, std::uint64_t s, fs::path dir)
        : command(std::move(cmd)), config_path(std::move(cfg)), seed(s), out(std::move(dir)) {}

    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    fs::path out;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void emit(const std::string& name, const std::string& text) {
        grou::io::write_text(out / name, text);
        artifacts.push_back(name);
    }

    void finish() const {
        json m;
        m["command"] = command;
        m["config"] = config_path;
        m["seed"] = seed;
        m["out_dir"] = out.string();
        m["tool_version"] = grou::kVersion;
        m["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json sums = json::object();
        for (const auto& a : artifacts) sums[a] = sha256_file(out / a);
        m["artifacts"] = sums;
        grou::io::write_text(out / "manifest.json", m.dump(2) + "\n");
    }
};

void prepare_out(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw grou::IoError("cannot create output directory " + out.string());
}

grou::io::Config load(const std::string& path, std::optional<std::uint64_t> seed) {
    grou::io::Config cfg = grou::io::load_config(path);
    if (seed) {
        json raw = cfg.raw;
        raw["seed"] = *seed;
        cfg = grou::io::parse_config(raw, fs::path(path).parent_path().empty() ? "." : fs::path(path).parent_path());
    }
    return cfg;
}

void print_table(const grou::EstimateReport& r) {
    std::printf("%-12s %16s %16s\n", "coordinate", "estimate", "ci_halfwidth");
    for (Eigen::Index i = 0; i < r.estimate.size(); ++i) {
        std::string name;
        if (r.kind == grou::EstimateKind::Theta) {
            name = i == 0 ? "theta1" : "theta2";
        } else {
            name = "q(" + std::to_string(i % r.d + 1) + "," + std::to_string(i / r.d + 1) + ")";
        }
        const double hw = r.ci_halfwidths ? (*r.ci_halfwidths)[i] : 0.0;
        std::printf("%-12s %16.8g %16.8g\n", name.c_str(), r.estimate[i], hw);
    }
    std::printf("horizon %.6g, level %.3g\n", r.horizon, r.ci_level);
}

int cmd_simulate(const std::string& cfg_path, const fs::path& out, std::optional<std::uint64_t> seed) {
    const grou::io::Config cfg = load(cfg_path, seed);
    prepare_out(out);
    Run run{"simulate", cfg_path, cfg.seed, out};
    const grou::DynamicsMatrix q = cfg.model.dynamics();
    grou::SamplePath path;
    if (cfg.volatility) {
        const auto& v = *cfg.volatility;
        path = grou::simulate_vol_modulated(q, v.psou, v.time_change, v.jumps, cfg.horizon, cfg.dt, cfg.seed);
    } else {
        grou::SimulationOptions so;
        so.scheme = cfg.scheme;
        path = grou::simulate_grou(q, cfg.require_driver(), cfg.horizon, cfg.dt, cfg.seed, cfg.init, so);
    }
    run.emit("path.csv", grou::io::path_csv(path));
    const std::string format = cfg.write_binary ? "csv+binary" : "csv";
    run.emit("path.json",
             grou::io::path_sidecar(path, q, cfg.driver ? &*cfg.driver : nullptr, format).dump(2) + "\n");
    const bool jumps = (cfg.driver && cfg.driver->has_jumps()) || (cfg.volatility && cfg.volatility->jumps.has_jumps());
    if (jumps) run.emit("jumps.csv", grou::io::jumps_csv(path));
    if (path.sigma_path) run.emit("sigma.csv", grou::io::sigma_csv(path));
    if (cfg.write_binary) {
        grou::io::write_path_binary(out / "path.bin", path);
        run.artifacts.push_back("path.bin");
    }
    run.finish();
    std::printf("simulated %lld steps (d = %d, %zu jumps) -> %s\n", static_cast<long long>(path.steps()), path.dim(),
                path.jump_marks.size(), out.string().c_str());
    return 0;
}

grou::LikelihoodStats stats_for(const grou::io::Config& cfg, const grou::SamplePath& path) {
    if (path.dim() != cfg.dim()) {
        throw grou::DimensionError("path dimension " + std::to_string(path.dim()) + " does not match graph size " +
                                   std::to_string(cfg.dim()));
    }
    if (path.sigma_path) {
        return grou::conditional_stats_at(path, cfg.graph, cfg.filter, {path.steps()}).front();
    }
    return grou::compute_stats(path, cfg.graph, cfg.require_driver().sigma, cfg.filter);
}

int cmd_estimate(const std::string& cfg_path, const std::string& path_file, const fs::path& out,
                 const std::string& mode) {
    const grou::io::Config cfg = load(cfg_path, std::nullopt);
    const grou::SamplePath path = grou::io::load_path(path_file);
    const grou::LikelihoodStats s = stats_for(cfg, path);
    const double t = s.t_end;
    grou::EstimateReport rep;
    if (mode == "theta") {
        rep = grou::theta_mle(s);
        rep.cov_clt = t * rep.info_matrix.inverse();
    } else {
        rep = grou::psi_mle(s);
        if (mode == "q") {
            rep.kind = grou::EstimateKind::Q;
            rep.estimate = grou::vec(grou::q_mle_matrix(s));
        }
        if (s.i_quad_full) {
            rep.cov_clt = t * s.i_quad_full->inverse();
        } else {
            rep.cov_clt = grou::kron(t * s.k.inverse(), s.sigma);
        }
    }
    grou::confidence_region(rep, cfg.ci_level);
    prepare_out(out);
    Run run{"estimate", cfg_path, cfg.seed, out};
    json j = grou::io::to_json(rep);
    j["filter"] = grou::io::to_json(s.filter);
    run.emit("estimate.json", j.dump(2) + "\n");
    run.finish();
    print_table(rep);
    return 0;
}

int cmd_lasso(const std::string& cfg_path, const std::string& path_file, const fs::path& out) {
    const grou::io::Config cfg = load(cfg_path, std::nullopt);
    if (!cfg.lasso.lambda_fixed && !cfg.lasso.schedule_valid()) {
        std::fprintf(stderr,
                     "warning: lambda schedule beta = %g is outside (1/2, (1 + gamma)/2) = (0.5, %g); "
                     "selection consistency is not guaranteed\n",
                     cfg.lasso.schedule_beta, 0.5 * (1.0 + cfg.lasso.gamma));
    }
    const grou::SamplePath path = grou::io::load_path(path_file);
    const grou::LikelihoodStats s = stats_for(cfg, path);
    prepare_out(out);
    Run run{"lasso", cfg_path, cfg.seed, out};
    const grou::LassoResult fit = grou::adaptive_lasso_fit(s, cfg.lasso);
    const grou::KktReport kkt = grou::kkt_check(s, cfg.lasso, fit);
    json j = grou::io::to_json(fit);
    j["kkt_max_residual"] = kkt.max_residual;
    j["kkt_ok"] = kkt.ok;
    j["schedule_valid"] = cfg.lasso.schedule_valid();
    if (!cfg.lasso_grid.empty()) {
        json p = json::array();
        for (const auto& r : grou::lasso_path(s, cfg.lasso, cfg.lasso_grid)) p.push_back(grou::io::to_json(r));
        j["path"] = p;
    }
    run.emit("lasso.json", j.dump(2) + "\n");
    std::ostringstream edges;
    grou::write_edge_list(edges, fit.adjacency_estimate);
    run.emit("adjacency.edges", edges.str());
    run.finish();
    std::printf("lambda %.6g, %zu nonzero entries, %d estimated edges, kkt residual %.3g\n", fit.lambda,
                fit.support.size(), static_cast<int>(fit.adjacency_estimate.sum()), kkt.max_residual);
    return 0;
}

int cmd_mc(const std::string& cfg_path, const fs::path& out, std::optional<std::uint64_t> seed,
           const std::string& scenario) {
    const grou::io::Config cfg = load(cfg_path, seed);
    if (!cfg.experiment) throw grou::ConfigError("config: mc needs an experiment section");
    grou::ExperimentConfig x = *cfg.experiment;
    if (!scenario.empty()) x.scenario = grou::scenario_from_string(scenario);
    const grou::McReport rep = grou::run_experiment(x);
    prepare_out(out);
    Run run{"mc", cfg_path, cfg.seed, out};
    run.emit("report.json", grou::io::to_json(rep).dump(2) + "\n");
    run.emit("summary.csv", grou::io::mc_summary_csv(rep));
    run.emit("coordinates.csv", grou::io::mc_coordinates_csv(rep));
    run.emit("covariance.csv", grou::io::mc_covariance_csv(rep));
    run.finish();
    std::printf("%s: %d replicates, %zu horizons, %zu failures (%.2f s)\n", rep.scenario.c_str(), rep.replicates,
                rep.tables.size(), rep.failures.size(), rep.wall_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph Ornstein-Uhlenbeck simulation and estimation"};
    app.set_version_flag("--version", std::string(grou::kVersion));
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    std::string path_file;
    std::string mode = "theta";
    std::string scenario;
    std::optional<std::uint64_t> seed;

    auto* sim = app.add_subcommand("simulate", "simulate a sample path");
    sim->add_option("--config", config, "JSON configuration")->required();
    sim->add_option("--out", out, "output directory")->required();
    sim->add_option("--seed", seed, "override the configured seed");

    auto* est = app.add_subcommand("estimate", "closed-form maximum likelihood estimates");
    est->add_option("--config", config, "JSON configuration")->required();
    est->add_option("--path", path_file, "path file (.csv or .bin)")->required();
    est->add_option("--out", out, "output directory");
    est->add_option("--mode", mode, "theta, psi or q")->check(CLI::IsMember({"theta", "psi", "q"}));

    auto* las = app.add_subcommand("lasso", "adaptive Lasso fit of the dynamics matrix");
    las->add_option("--config", config, "JSON configuration")->required();
    las->add_option("--path", path_file, "path file (.csv or .bin)")->required();
    las->add_option("--out", out, "output directory");

    auto* mc = app.add_subcommand("mc", "Monte Carlo experiment");
    mc->add_option("--config", config, "JSON configuration")->required();
    mc->add_option("--out", out, "output directory")->required();
    mc->add_option("--seed", seed, "override the configured seed");
    mc->add_option("--scenario", scenario, "override the configured scenario")
        ->check(CLI::IsMember({"theta_clt", "psi_clt", "q_masked_clt", "lasso_oracle", "conditional_clt",
                               "ergodic_limits"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(grou::ExitCode::Validation);
    }

    try {
        if (*sim) return cmd_simulate(config, out, seed);
        if (*est) return cmd_estimate(config, path_file, out, mode);
        if (*las) return cmd_lasso(config, path_file, out);
        if (*mc) return cmd_mc(config, out, seed, scenario);
    } catch (const grou::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return static_cast<int>(grou::ExitCode::Numeric);
    }
    return 0;
}
