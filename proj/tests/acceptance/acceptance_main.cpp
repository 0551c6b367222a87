// Acceptance checks. Prints one PASS/FAIL line per criterion; `--criterion N`
// runs a single one. Exit status is non-zero when any selected check fails.

#include "grou/grou.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace grou;
using testing_util::from_dense;
using testing_util::rel_err;
using testing_util::to_dense;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "" : "!") + what);
    }
};

std::string num(double x, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

ExperimentConfig ring_theta(std::vector<double> horizons, int reps, std::uint64_t seed) {
    ExperimentConfig c;
    c.scenario = Scenario::ThetaCLT;
    c.model.graph = Graph::ring(4);
    c.model.theta = {0.3, 1.0};
    c.driver = LevyDriverSpec::brownian(Mat::Identity(4, 4));
    c.horizons = std::move(horizons);
    c.dt = 0.01;
    c.replicates = reps;
    c.seed = seed;
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: closed forms against brute-force sums ------------------------------------

Outcome closed_forms() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst_stats = 0.0, worst_theta = 0.0, worst_psi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double dt = rng.uniform(0.01, 1.0);

        // theta: d in 2..4 on a random graph with at least one edge
        const int d = 2 + trial % 3;
        Mat adj = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j && rng.uniform() < 0.6) adj(i, j) = 1.0;
        adj(0, 1) = 1.0;
        const Graph g(adj);
        const Mat sigma = testing_util::random_spd(rng, d);
        const Mat values = testing_util::random_matrix(rng, d, 3);
        const SamplePath path(dt, values);
        const LikelihoodStats s = compute_theta_stats(path, g, sigma, {});
        const oracle::ThetaSums ref =
            oracle::theta_sums(testing_util::columns(values), dt, to_dense(adj), to_dense(sigma));
        const Vec h_ref = (Vec(2) << ref.h[0], ref.h[1]).finished();
        const Mat hq_ref = (Mat(2, 2) << ref.hq[0][0], ref.hq[0][1], ref.hq[1][0], ref.hq[1][1]).finished();
        worst_stats = std::max({worst_stats, rel_err(s.h, h_ref), rel_err(s.h_quad, hq_ref)});
        const EstimateReport th = theta_mle(s);
        worst_theta = std::max(worst_theta, (s.h_quad * th.estimate - s.h).norm() / s.h.norm());

        // psi: two increments identify at most a 2 x 2 K
        const int dp = 1 + trial % 2;
        const Mat sp = testing_util::random_spd(rng, dp);
        const Mat vp = testing_util::random_matrix(rng, dp, 3);
        const SamplePath pp(dt, vp);
        const LikelihoodStats ps = compute_psi_stats(pp, sp, {});
        const oracle::PsiSums pref = oracle::psi_sums(testing_util::columns(vp), dt, to_dense(sp));
        const Vec i_ref = Eigen::Map<const Vec>(pref.i_vec.data(), dp * dp);
        worst_stats = std::max({worst_stats, rel_err(ps.i_vec, i_ref), rel_err(ps.k, from_dense(pref.k))});
        const EstimateReport pe = psi_mle(ps);
        worst_psi = std::max(worst_psi, (ps.i_quad_apply(pe.estimate) - ps.i_vec).norm() / ps.i_vec.norm());
    }
    const double secs = seconds_since(t0);
    out.check(worst_stats <= 1e-12, "stats rel err " + num(worst_stats));
    out.check(worst_theta <= 1e-10, "[H]theta=H residual " + num(worst_theta));
    out.check(worst_psi <= 1e-10, "[I]psi=I residual " + num(worst_psi));
    out.check(secs < 1.0, "runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 2: Lyapunov solve against quadrature ---------------------------------------

Outcome lyapunov() {
    Outcome out;
    Rng rng(202);
    double worst = 0.0, secs = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 8;
        const Mat q = testing_util::random_stable(rng, d, rng.uniform(0.3, 1.0));
        const Mat sigma = testing_util::random_spd(rng, d);
        const double lmin = min_real_eigenvalue(q);
        const auto t0 = std::chrono::steady_clock::now();
        const Mat s = lyapunov_stationary_cov({q, Provenance::Free}, sigma);
        secs += seconds_since(t0);
        const Mat ref = from_dense(oracle::lyapunov_quadrature(to_dense(q), to_dense(sigma), 40.0 / lmin));
        worst = std::max(worst, rel_err(s, ref));
    }
    out.check(worst <= 1e-8, "max rel err " + num(worst));
    out.check(secs < 10.0, "solver runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 3: ergodic limit of [H]_T / T ----------------------------------------------

Outcome ergodic() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = ring_theta({50, 200, 800}, 100, 303);
    c.scenario = Scenario::ErgodicLimits;
    const McReport r = run_experiment(c);
    std::vector<double> med;
    for (const auto& t : r.tables) med.push_back(*t.ergodic_median_error);
    const double secs = seconds_since(t0);
    out.check(med[2] <= 0.10, "median err T=800 " + num(med[2]));
    out.check(med[0] > med[1] && med[1] > med[2], "decreasing " + num(med[0]) + " > " + num(med[1]) + " > " + num(med[2]));
    out.check(secs < 300.0, "runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 4: theta CLT -------------------------------------------------------------------

void theta_clt_checks(Outcome& out, const HorizonTable& t, double lo, double hi) {
    out.check(rel_err(t.empirical_cov, t.target_cov) <= 0.15,
              "cov rel err " + num(rel_err(t.empirical_cov, t.target_cov)));
    for (int j = 0; j < 2; ++j) {
        const double c = t.coverage[1][j];
        out.check(c >= lo && c <= hi, "coverage95[" + std::to_string(j) + "] " + num(c));
    }
}

Outcome theta_clt() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const McReport r = run_experiment(ring_theta({50, 200, 800}, 500, 404));
    const HorizonTable& t = r.tables.back();
    theta_clt_checks(out, t, 0.92, 0.98);
    out.check(t.mahalanobis_pvalue >= 0.01, "mahalanobis p " + num(t.mahalanobis_pvalue));
    const Vec slope = rmse_slope(r);
    for (int j = 0; j < 2; ++j) {
        out.check(slope[j] >= -0.65 && slope[j] <= -0.35, "rmse slope[" + std::to_string(j) + "] " + num(slope[j]));
    }
    const double secs = seconds_since(t0);
    out.check(secs < 900.0, "runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 5: psi CLT and the masked zero pattern ----------------------------------------

Outcome psi_clt() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c;
    c.scenario = Scenario::PsiCLT;
    c.model.graph = Graph::complete(3);
    c.model.param = Parametrization::Psi;
    c.model.psi = vec((Mat(3, 3) << 1.0, 0.2, -0.1, 0.15, 0.9, 0.1, -0.2, 0.1, 1.1).finished());
    c.driver = LevyDriverSpec::brownian((Mat(3, 3) << 1.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 1.0).finished());
    c.horizons = {800};
    c.replicates = 500;
    c.seed = 505;
    const McReport r = run_experiment(c);
    const HorizonTable& t = r.tables.back();
    const DynamicsMatrix q = c.model.dynamics();
    const Mat kron_target = kron(lyapunov_stationary_cov(q, c.driver.sigma).inverse(), c.driver.sigma);
    out.check(rel_err(t.target_cov, kron_target) <= 1e-10, "target is S^-1 (x) Sigma");
    out.check(rel_err(t.empirical_cov, kron_target) <= 0.20, "cov rel err " + num(rel_err(t.empirical_cov, kron_target)));

    // Masked CLT: exact zeros wherever the graph mask vanishes, nothing else.
    auto pattern_exact = [](const ExperimentConfig& cfg) {
        const McReport m = run_experiment(cfg);
        const HorizonTable& h = m.tables.back();
        const Vec mask = vec(network_mask(cfg.model.graph));
        bool ok = true;
        for (Eigen::Index a = 0; a < mask.size(); ++a) {
            for (Eigen::Index b = 0; b < mask.size(); ++b) {
                const bool zero = mask[a] == 0.0 || mask[b] == 0.0;
                if (zero) {
                    ok = ok && h.target_cov(a, b) == 0.0 && h.empirical_cov(a, b) == 0.0;
                } else if (a == b) {
                    ok = ok && h.target_cov(a, a) > 0.0 && h.empirical_cov(a, a) > 0.0;
                }
            }
        }
        return ok;
    };
    ExperimentConfig masked = c;
    masked.scenario = Scenario::QMaskedCLT;
    masked.replicates = 50;
    masked.horizons = {200};
    const bool complete_ok = pattern_exact(masked);
    masked.model.graph = Graph((Mat(3, 3) << 0, 1, 0, 1, 0, 1, 0, 1, 0).finished());
    const bool path_ok = pattern_exact(masked);
    out.check(complete_ok && path_ok, "masked zero pattern exact (complete and path graphs)");
    const double secs = seconds_since(t0);
    out.check(secs < 900.0, "runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 6: jumps ----------------------------------------------------------------------

Outcome jumps() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = ring_theta({800}, 500, 606);
    c.driver.jumps = JumpSpec{1.0, JumpLaw::Gaussian, 2.0};
    c.filter.mode = FilterMode::OracleJumps;
    const McReport oracle_run = run_experiment(c);
    for (int j = 0; j < 2; ++j) {
        const double v = oracle_run.tables[0].coverage[1][j];
        out.check(v >= 0.92 && v <= 0.98, "oracle coverage95[" + std::to_string(j) + "] " + num(v));
    }

    ExperimentConfig th = ring_theta({200}, 300, 607);
    th.driver.jumps = JumpSpec{1.0, JumpLaw::Gaussian, 2.0};
    th.dt = 0.001;
    th.filter.mode = FilterMode::Threshold;
    th.filter.threshold_c = 5.0;
    th.filter.threshold_exponent = 0.49;
    const McReport thr = run_experiment(th);
    const double recall = *thr.tables[0].filter_recall;
    out.check(recall >= 0.95, "threshold recall " + num(recall));
    for (int j = 0; j < 2; ++j) {
        const double v = thr.tables[0].coverage[1][j];
        out.check(v >= 0.90 && v <= 0.99, "threshold coverage95[" + std::to_string(j) + "] " + num(v));
    }
    out.notes.push_back("runtime " + num(seconds_since(t0), 3) + " s");
    return out;
}

// ---- 7: adaptive Lasso oracle property ---------------------------------------------

Outcome lasso_oracle() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c;
    c.scenario = Scenario::LassoOracle;
    c.model.graph = Graph::erdos_renyi(10, 0.2, 707);
    c.model.param = Parametrization::Psi;
    c.model.psi = vec(q_from_theta(c.model.graph, {0.3, 1.0}).q);
    c.driver = LevyDriverSpec::brownian(Mat::Identity(10, 10));
    c.horizons = {200, 500, 1000};
    c.replicates = 100;
    c.seed = 708;
    c.lasso.gamma = 1.0;
    c.lasso.schedule_a = 1.0;
    c.lasso.schedule_beta = 0.6;
    const McReport r = run_experiment(c);
    std::vector<double> rate;
    int kkt = 0;
    double l0 = 0.0;
    for (const auto& t : r.tables) {
        rate.push_back(*t.support_exact_rate);
        kkt += *t.kkt_failures;
        l0 = std::max(l0, *t.lambda_zero_max_diff);
        out.notes.push_back("T=" + num(t.horizon) + " tpr " + num(*t.support_tpr) + " fpr " + num(*t.support_fpr));
    }
    out.check(rate[0] <= rate[1] && rate[1] <= rate[2],
              "exact support rate " + num(rate[0]) + ", " + num(rate[1]) + ", " + num(rate[2]));
    out.check(rate[2] >= 0.8, "rate at T=1000 " + num(rate[2]));
    out.check(kkt == 0, "kkt failures " + std::to_string(kkt));
    out.check(l0 <= 1e-8, "lambda=0 vs MLE " + num(l0));
    const double secs = seconds_since(t0);
    out.check(secs < 1800.0, "runtime " + num(secs, 3) + " s");
    return out;
}

// ---- 8: conditional CLT under stochastic volatility ---------------------------------

Outcome conditional() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = ring_theta({800}, 300, 808);
    c.model.graph = Graph::ring(3);
    c.scenario = Scenario::ConditionalCLT;
    VolatilityModel vm;
    vm.psou.v = (Mat(3, 3) << 1.0, 0.05, 0.0, 0.0, 1.0, 0.05, 0.05, 0.0, 1.0).finished();
    vm.psou.subordinator.gamma_l = 0.5 * Mat::Identity(3, 3);
    vm.psou.subordinator.jump_rate = 2.0;
    vm.psou.subordinator.weight_law = WeightLaw::Exponential;
    vm.psou.subordinator.weight_param = 0.75;
    vm.jumps.gamma_j = Vec::Zero(3);
    c.volatility = vm;
    const McReport r = run_experiment(c);
    for (int j = 0; j < 2; ++j) {
        const double v = r.tables[0].coverage[1][j];
        out.check(v >= 0.91 && v <= 0.99, "coverage95[" + std::to_string(j) + "] " + num(v));
    }

    // The same volatility paths the experiment used: identical seed, stream,
    // horizon and burn-in.
    const DynamicsMatrix q = c.model.dynamics();
    const auto burn = static_cast<std::int64_t>(std::ceil(10.0 / min_real_eigenvalue(q.q) / c.dt));
    const double horizon = static_cast<double>(burn + c.steps_for(800)) * c.dt;
    double worst = 1.0;
    for (int rep = 0; rep < c.replicates; ++rep) {
        const PsouPath p = simulate_psou(vm.psou, horizon, c.dt, c.seed, static_cast<std::uint32_t>(rep));
        for (const Mat& s : p.sigma) worst = std::min(worst, min_eigenvalue_sym(s));
    }
    out.check(worst >= -1e-10, "min eigenvalue of Sigma_t " + num(worst));

    const SamplePath y = simulate_vol_modulated(q, vm.psou, vm.time_change, vm.jumps, 4000.0, c.dt, c.seed + 1);
    const EnvelopeFit f = fit_decay_envelope(autocovariance_norms(y, 200, 10), 10 * c.dt);
    out.check(f.r_squared >= 0.9, "envelope R^2 " + num(f.r_squared) + " (rate " + num(f.rate) + ")");
    out.notes.push_back("runtime " + num(seconds_since(t0), 3) + " s");
    return out;
}

// ---- 9: byte-identical artifacts ---------------------------------------------------

std::string serialize(const McReport& r) {
    return io::to_json(r).dump(2) + io::mc_summary_csv(r) + io::mc_coordinates_csv(r) + io::mc_covariance_csv(r);
}

Outcome determinism() {
    Outcome out;
    std::vector<ExperimentConfig> cfgs;
    cfgs.push_back(ring_theta({20, 40, 80}, 12, 901));
    ExperimentConfig e = cfgs.back();
    e.scenario = Scenario::ErgodicLimits;
    cfgs.push_back(e);
    ExperimentConfig j = ring_theta({40}, 8, 902);
    j.driver.jumps = JumpSpec{1.0, JumpLaw::Laplace, 1.0};
    j.filter.mode = FilterMode::Threshold;
    cfgs.push_back(j);
    ExperimentConfig p;
    p.scenario = Scenario::PsiCLT;
    p.model.graph = Graph::star(3);
    p.model.param = Parametrization::Psi;
    p.model.psi = vec(q_from_theta(p.model.graph, {0.3, 1.0}).q);
    p.driver = LevyDriverSpec::brownian(Mat::Identity(3, 3));
    p.horizons = {30, 60};
    p.replicates = 8;
    p.seed = 903;
    cfgs.push_back(p);
    p.scenario = Scenario::QMaskedCLT;
    cfgs.push_back(p);
    p.scenario = Scenario::LassoOracle;
    cfgs.push_back(p);
    ExperimentConfig v = ring_theta({20}, 6, 904);
    v.model.graph = Graph::ring(3);
    v.scenario = Scenario::ConditionalCLT;
    VolatilityModel vm;
    vm.psou.v = Mat::Identity(3, 3);
    vm.psou.subordinator.gamma_l = 0.5 * Mat::Identity(3, 3);
    vm.psou.subordinator.jump_rate = 1.0;
    vm.time_change.kind = IntegratedPositiveClock{1.0, 1.0, 0.2};
    vm.jumps = {Vec::Constant(3, 0.05), JumpSpec{0.5, JumpLaw::Uniform, 1.0}};
    v.volatility = vm;
    cfgs.push_back(v);

    int identical = 0;
    for (auto cfg : cfgs) {
        cfg.threads = 1;
        const std::string a = serialize(run_experiment(cfg));
        const std::string b = serialize(run_experiment(cfg));
        cfg.threads = 3;
        const std::string c = serialize(run_experiment(cfg));
        if (a == b && a == c) {
            ++identical;
        } else {
            out.check(false, std::string(to_string(cfg.scenario)) + " differs between runs");
        }
    }
    out.check(identical == static_cast<int>(cfgs.size()),
              std::to_string(identical) + "/" + std::to_string(cfgs.size()) + " experiments identical");

    // path, estimate and lasso artifacts
    auto artifacts = [] {
        const Graph g = Graph::ring(4);
        LevyDriverSpec drv = LevyDriverSpec::brownian(Mat::Identity(4, 4));
        drv.jumps = JumpSpec{0.5, JumpLaw::Gaussian, 1.0};
        SimulationOptions so;
        so.record_jumps = true;
        const DynamicsMatrix q = q_from_theta(g, {0.3, 1.0});
        const SamplePath path = simulate_grou(q, drv, 50.0, 0.01, 905, StationaryInit{}, so);
        const LikelihoodStats s = compute_stats(path, g, drv.sigma, {});
        LassoConfig lc;
        std::string text = io::path_csv(path) + io::jumps_csv(path) + io::path_sidecar(path, q, &drv, "csv").dump();
        text += io::to_json(theta_mle(s)).dump() + io::to_json(psi_mle(s)).dump();
        text += io::to_json(adaptive_lasso_fit(s, lc)).dump();
        return text;
    };
    out.check(artifacts() == artifacts(), "path/estimate/lasso artifacts identical");
    return out;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "closed-form statistics and estimators", closed_forms},
        {2, "Lyapunov solve vs quadrature", lyapunov},
        {3, "ergodic limit of [H]_T / T", ergodic},
        {4, "theta CLT", theta_clt},
        {5, "psi CLT and masked zero pattern", psi_clt},
        {6, "jump robustness", jumps},
        {7, "adaptive Lasso oracle property", lasso_oracle},
        {8, "conditional CLT under stochastic volatility", conditional},
        {9, "determinism", determinism},
    };
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(all.size())) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    bool ok = true;
    for (const auto& c : all) {
        if (only != 0 && c.id != only) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::ostringstream line;
        line << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ":";
        for (std::size_t i = 0; i < o.notes.size(); ++i) line << (i ? "; " : " ") << o.notes[i];
        std::printf("%s\n", line.str().c_str());
        std::fflush(stdout);
        ok = ok && o.pass;
    }
    return ok ? 0 : 1;
}
