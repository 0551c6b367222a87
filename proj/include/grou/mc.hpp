#pragma once

#include "grou/error.hpp"
#include "grou/estimators.hpp"
#include "grou/graph.hpp"
#include "grou/lasso.hpp"
#include "grou/levy.hpp"
#include "grou/likelihood.hpp"
#include "grou/linalg.hpp"
#include "grou/stats.hpp"
#include "grou/stochvol.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace grou {

enum class Scenario { ThetaCLT, PsiCLT, QMaskedCLT, LassoOracle, ConditionalCLT, ErgodicLimits };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::ThetaCLT: return "theta_clt";
        case Scenario::PsiCLT: return "psi_clt";
        case Scenario::QMaskedCLT: return "q_masked_clt";
        case Scenario::LassoOracle: return "lasso_oracle";
        case Scenario::ConditionalCLT: return "conditional_clt";
        case Scenario::ErgodicLimits: return "ergodic_limits";
    }
    return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
    for (auto sc : {Scenario::ThetaCLT, Scenario::PsiCLT, Scenario::QMaskedCLT, Scenario::LassoOracle,
                    Scenario::ConditionalCLT, Scenario::ErgodicLimits}) {
        if (to_string(sc) == s) {
            return sc;
        }
    }
    throw ConfigError("unknown scenario '" + s +
                      "' (expected theta_clt, psi_clt, q_masked_clt, lasso_oracle, conditional_clt or ergodic_limits)");
}

enum class Parametrization { Theta, Psi, Free };

/// True model: a graph plus theta, psi or a free matrix.
struct TrueModel {
    Graph graph;
    Parametrization param = Parametrization::Theta;
    ThetaParams theta{0.3, 1.0};
    Vec psi;
    Mat q_free;

    [[nodiscard]] DynamicsMatrix dynamics() const {
        switch (param) {
            case Parametrization::Theta: return q_from_theta(graph, theta);
            case Parametrization::Psi: return q_from_psi(graph, {psi});
            case Parametrization::Free: return {q_free, Provenance::Free};
        }
        return {};
    }
};

struct VolatilityModel {
    PsouSpec psou;
    TimeChangeSpec time_change;
    JumpComponentSpec jumps;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::ThetaCLT;
    TrueModel model;
    LevyDriverSpec driver;
    std::vector<double> horizons;
    double dt = 0.01;
    int replicates = 100;
    std::uint64_t seed = 1;
    ContinuousPartOptions filter;
    LassoConfig lasso;
    std::optional<VolatilityModel> volatility;  // ConditionalCLT only
    EstimateKind conditional_kind = EstimateKind::Theta;
    bool plug_in = false;
    int threads = 0;  // 0: GROU_THREADS or hardware concurrency

    void validate() const {
        if (horizons.empty() || !std::is_sorted(horizons.begin(), horizons.end()) ||
            std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end()) {
            throw ConfigError("experiment: horizons must be non-empty and strictly increasing");
        }
        if (!(horizons.front() > 0.0) || !(dt > 0.0)) {
            throw ConfigError("experiment: horizons and dt must be > 0");
        }
        if (replicates < 2) {
            throw ConfigError("experiment: replicates must be >= 2");
        }
        const int d = model.graph.size();
        if (scenario == Scenario::ConditionalCLT) {
            if (!volatility) {
                throw ConfigError("experiment: conditional_clt needs a stochvol section");
            }
        } else {
            driver.validate(d);
        }
        if ((scenario == Scenario::ThetaCLT || scenario == Scenario::ErgodicLimits) &&
            model.param != Parametrization::Theta) {
            throw ConfigError("experiment: theta scenarios need a theta parametrisation of the truth");
        }
        if (scenario == Scenario::ConditionalCLT && conditional_kind == EstimateKind::Theta &&
            model.param != Parametrization::Theta) {
            throw ConfigError("experiment: conditional theta estimation needs a theta parametrisation of the truth");
        }
        filter.validate();
        if (scenario == Scenario::LassoOracle) {
            lasso.validate();
        }
        if (!check_stationary_spectral(model.dynamics())) {
            throw ConfigError("experiment: true dynamics matrix is not stationary");
        }
    }

    [[nodiscard]] std::int64_t steps_for(double horizon) const {
        return static_cast<std::int64_t>(std::llround(horizon / dt));
    }
};

struct ReplicateFailure {
    int replicate = 0;
    double horizon = 0.0;
    std::string message;
};

/// Aggregates for one horizon. Optional blocks are filled by the scenarios
/// they belong to.
struct HorizonTable {
    double horizon = 0.0;
    int successes = 0;
    int failures = 0;
    Vec bias;
    Vec rmse;
    Mat empirical_cov;  // of sqrt(t) (estimate - truth)
    Mat target_cov;
    std::array<Vec, 3> coverage;  // per coordinate at 90/95/99 %
    Vec ks_pvalues;
    double mahalanobis_pvalue = 1.0;

    // theta scenarios: covariance of the two standardised residuals
    std::optional<Mat> cov_standardized_observed;       // [H]_t^{1/2} (est - truth)
    std::optional<Mat> cov_standardized_deterministic;  // sqrt(t) G^{1/2} (est - truth)

    std::optional<double> ergodic_median_error;  // median ||[H]_t / t - G|| / ||G||
    std::optional<double> filter_recall;

    // lasso
    std::optional<double> support_exact_rate;
    std::optional<double> support_tpr;
    std::optional<double> support_fpr;
    std::optional<int> kkt_failures;
    std::optional<double> kkt_max_residual;
    std::optional<double> lambda_zero_max_diff;
    std::optional<double> restricted_mahalanobis_pvalue;
    std::optional<int> restricted_count;
};

inline constexpr std::array<double, 3> kCoverageLevels{0.90, 0.95, 0.99};

struct McReport {
    std::string scenario;
    std::uint64_t seed = 0;
    int replicates = 0;
    int dim = 0;
    Vec truth;
    std::vector<HorizonTable> tables;
    std::vector<ReplicateFailure> failures;
    double wall_seconds = 0.0;  // not part of the serialised report
};

struct NormalityResult {
    Vec ks_pvalues;
    double mahalanobis_chi2_pvalue = 1.0;
};

/// KS against N(0, 1) per column and a chi-square(k) goodness of fit of the
/// squared row norms; rows are replicates of an already standardised vector.
inline NormalityResult normality_tests(const Mat& standardized) {
    NormalityResult out;
    const auto k = standardized.cols();
    out.ks_pvalues.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        std::vector<double> col(standardized.col(j).data(), standardized.col(j).data() + standardized.rows());
        out.ks_pvalues[j] = stats::ks_one_sample(std::move(col), stats::normal_cdf).p_value;
    }
    std::vector<double> sq(static_cast<std::size_t>(standardized.rows()));
    for (Eigen::Index i = 0; i < standardized.rows(); ++i) {
        sq[static_cast<std::size_t>(i)] = standardized.row(i).squaredNorm();
    }
    out.mahalanobis_chi2_pvalue = stats::chi2_goodness_of_fit(sq, static_cast<double>(k));
    return out;
}

/// Per-coordinate least-squares slope of log RMSE against log T.
inline Vec rmse_slope(const McReport& report) {
    if (report.tables.size() < 3) {
        throw ContractViolation("rmse_slope: need at least three horizons");
    }
    const auto k = report.tables.front().rmse.size();
    std::vector<double> logt;
    for (const auto& t : report.tables) {
        logt.push_back(std::log(t.horizon));
    }
    Vec out(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        std::vector<double> logr;
        for (const auto& t : report.tables) {
            logr.push_back(std::log(t.rmse[j]));
        }
        out[j] = stats::least_squares(logt, logr).slope;
    }
    return out;
}

namespace detail {

inline int thread_count(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("GROU_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::max(1, n);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; results are
/// written by index so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Symmetric inverse square root on the range of a PSD matrix.
inline Mat inv_sqrt_psd(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    Vec ev = es.eigenvalues();
    const double cut = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        ev[i] = ev[i] > cut ? 1.0 / std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct ReplicateHorizon {
    bool ok = false;
    std::string error;
    Vec estimate;
    Vec err_observed;          // info^{1/2} (est - truth), theta only
    Vec plug_in_var;           // diag of info^{-1}
    Mat info;
    std::optional<double> ergodic_error;
    std::optional<double> recall;
    // lasso
    std::optional<SupportScore> support;
    std::optional<KktReport> kkt;
    std::optional<double> lambda_zero_diff;
    Vec lasso_estimate;
};

struct ReplicateResult {
    std::vector<ReplicateHorizon> per_horizon;
};

}  // namespace detail

inline McReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Graph& g = cfg.model.graph;
    const int d = g.size();
    const DynamicsMatrix q = cfg.model.dynamics();
    const std::size_t nh = cfg.horizons.size();

    std::vector<std::int64_t> checkpoints;
    for (double h : cfg.horizons) {
        checkpoints.push_back(cfg.steps_for(h));
    }
    if (checkpoints.front() < 1) {
        throw ConfigError("experiment: shortest horizon is below one step");
    }

    const bool theta_kind = cfg.scenario == Scenario::ThetaCLT || cfg.scenario == Scenario::ErgodicLimits ||
                            (cfg.scenario == Scenario::ConditionalCLT && cfg.conditional_kind == EstimateKind::Theta);
    const Vec truth = theta_kind ? cfg.model.theta.as_vector() : vec(q.q);
    const Eigen::Index k = truth.size();

    // Analytic targets from the truth.
    Mat target;
    Mat g_inf;
    Mat second_moment;
    if (cfg.scenario != Scenario::ConditionalCLT) {
        second_moment = lyapunov_solve(q.q, cfg.driver.total_covariance());
        if (theta_kind) {
            g_inf = g_infinity_from_moment(second_moment, cfg.driver.sigma, g);
            target = g_inf.inverse();
        } else {
            const KroneckerPair pair = psi_clt_covariance(second_moment, cfg.driver.sigma);
            target = cfg.scenario == Scenario::QMaskedCLT ? apply_network_mask_clt(pair, g) : pair.dense();
        }
    }
    const Mat mask_diag = cfg.scenario == Scenario::QMaskedCLT ? Mat(vec(network_mask(g)).asDiagonal())
                                                               : Mat::Identity(k, k);

    const double t_max = cfg.horizons.back();
    std::vector<detail::ReplicateResult> results(static_cast<std::size_t>(cfg.replicates));

    auto run_one = [&](int r) {
        auto& res = results[static_cast<std::size_t>(r)];
        res.per_horizon.resize(nh);
        std::vector<LikelihoodStats> st;
        try {
            if (cfg.scenario == Scenario::ConditionalCLT) {
                const auto& vm = *cfg.volatility;
                VolModulatedOptions vo;
                vo.replicate = static_cast<std::uint32_t>(r);
                const SamplePath path =
                    simulate_vol_modulated(q, vm.psou, vm.time_change, vm.jumps, t_max, cfg.dt, cfg.seed, vo);
                st = conditional_stats_at(path, g, cfg.filter, checkpoints);
            } else {
                SimulationOptions so;
                so.replicate = static_cast<std::uint32_t>(r);
                so.record_jumps = cfg.driver.has_jumps();
                const SamplePath path = simulate_grou(q, cfg.driver, t_max, cfg.dt, cfg.seed, StationaryInit{}, so);
                st = compute_stats_at(path, g, cfg.driver.sigma, cfg.filter, checkpoints);
            }
        } catch (const Error& e) {
            for (auto& h : res.per_horizon) h.error = e.what();
            return;
        }
        for (std::size_t h = 0; h < nh; ++h) {
            auto& out = res.per_horizon[h];
            const LikelihoodStats& s = st[h];
            try {
                if (cfg.driver.has_jumps() && cfg.filter.mode == FilterMode::Threshold) {
                    out.recall = s.filter.recall();
                }
                if (theta_kind) {
                    EstimateReport rep = theta_mle(s);
                    out.estimate = rep.estimate;
                    out.info = rep.info_matrix;
                    out.err_observed = sym_sqrt_psd(rep.info_matrix) * (rep.estimate - truth);
                    out.plug_in_var = rep.info_matrix.inverse().diagonal();
                    if (cfg.scenario == Scenario::ErgodicLimits) {
                        out.ergodic_error = (s.h_quad / s.t_end - g_inf).norm() / g_inf.norm();
                    }
                } else {
                    EstimateReport rep = psi_mle(s);
                    out.estimate = mask_diag * rep.estimate;
                    if (s.i_quad_full) {
                        out.info = *s.i_quad_full;
                        out.plug_in_var = s.i_quad_full->inverse().diagonal();
                    } else {
                        // diag of [I]_t^{-1} is (K^{-1})_jj Sigma_ii
                        const Mat kinv = s.k.inverse();
                        out.plug_in_var.resize(k);
                        for (int j = 0; j < d; ++j) {
                            for (int i = 0; i < d; ++i) {
                                out.plug_in_var[j * d + i] = kinv(j, j) * s.sigma(i, i);
                            }
                        }
                    }
                    out.plug_in_var = mask_diag.diagonal().cwiseAbs2().cwiseProduct(out.plug_in_var);
                    if (cfg.scenario == Scenario::LassoOracle) {
                        const LassoResult fit = adaptive_lasso_fit(s, cfg.lasso);
                        out.lasso_estimate = vec(fit.q_al);
                        out.support = support_recovery_score(fit, q.q);
                        out.kkt = kkt_check(s, cfg.lasso, fit);
                        LassoConfig zero = cfg.lasso;
                        zero.lambda_fixed = 0.0;
                        const LassoResult unpen = adaptive_lasso_fit(s, zero, Vec::Zero(k));
                        out.lambda_zero_diff = (vec(unpen.q_al) - rep.estimate).cwiseAbs().maxCoeff();
                    }
                }
                out.ok = true;
            } catch (const Error& e) {
                out.error = e.what();
            }
        }
    };
    detail::parallel_for(cfg.replicates, detail::thread_count(cfg.threads), run_one);

    McReport report;
    report.scenario = to_string(cfg.scenario);
    report.seed = cfg.seed;
    report.replicates = cfg.replicates;
    report.dim = d;
    report.truth = truth;

    for (std::size_t h = 0; h < nh; ++h) {
        HorizonTable tab;
        tab.horizon = cfg.horizons[h];
        const double t = tab.horizon;
        std::vector<int> ok;
        for (int r = 0; r < cfg.replicates; ++r) {
            const auto& rh = results[static_cast<std::size_t>(r)].per_horizon[h];
            if (rh.ok) {
                ok.push_back(r);
            } else {
                report.failures.push_back({r, t, rh.error});
            }
        }
        tab.successes = static_cast<int>(ok.size());
        tab.failures = cfg.replicates - tab.successes;
        if (tab.failures > 0.05 * cfg.replicates) {
            std::string msg = "experiment aborted: " + std::to_string(tab.failures) + " of " +
                              std::to_string(cfg.replicates) + " replicates failed at horizon " + std::to_string(t);
            for (const auto& f : report.failures) {
                if (f.horizon == t) {
                    msg += "\n  replicate " + std::to_string(f.replicate) + ": " + f.message;
                    break;
                }
            }
            throw NumericError(msg);
        }
        const auto n = static_cast<Eigen::Index>(ok.size());
        const Vec truth_m = mask_diag * truth;

        Mat err(n, k);  // sqrt(t) (est - truth)
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& rh = results[static_cast<std::size_t>(ok[static_cast<std::size_t>(i)])].per_horizon[h];
            err.row(i) = (std::sqrt(t) * (rh.estimate - truth_m)).transpose();
        }
        tab.bias = err.colwise().mean().transpose() / std::sqrt(t);
        tab.rmse = (err.array().square().colwise().mean().sqrt() / std::sqrt(t)).transpose();
        const Vec zero_centre = Vec::Zero(k);
        tab.empirical_cov = stats::covariance_rows(err, &zero_centre);

        // Target covariance and standardisation.
        if (cfg.scenario == Scenario::ConditionalCLT || cfg.plug_in) {
            Mat avg = Mat::Zero(k, k);
            for (int r : ok) {
                const auto& rh = results[static_cast<std::size_t>(r)].per_horizon[h];
                if (rh.info.size() > 0) {
                    avg += t * rh.info.inverse();
                } else {
                    avg += t * Mat(rh.plug_in_var.asDiagonal());
                }
            }
            tab.target_cov = avg / static_cast<double>(n);
        } else {
            tab.target_cov = target;
        }

        for (std::size_t l = 0; l < kCoverageLevels.size(); ++l) {
            const double z = stats::two_sided_z(kCoverageLevels[l]);
            Vec cov = Vec::Zero(k);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& rh = results[static_cast<std::size_t>(ok[static_cast<std::size_t>(i)])].per_horizon[h];
                for (Eigen::Index j = 0; j < k; ++j) {
                    const bool observed = cfg.scenario == Scenario::ConditionalCLT || cfg.plug_in;
                    const double var = observed ? rh.plug_in_var[j] : target(j, j) / t;
                    const double half = z * std::sqrt(std::max(var, 0.0));
                    cov[j] += std::abs(rh.estimate[j] - truth_m[j]) <= half ? 1.0 : 0.0;
                }
            }
            tab.coverage[l] = cov / static_cast<double>(n);
        }

        // Normality of the standardised residuals, restricted to coordinates
        // with non-degenerate target variance.
        std::vector<Eigen::Index> live;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (tab.target_cov(j, j) > 1e-14) live.push_back(j);
        }
        Mat target_live(live.size(), live.size());
        for (std::size_t a = 0; a < live.size(); ++a) {
            for (std::size_t b = 0; b < live.size(); ++b) {
                target_live(a, b) = tab.target_cov(live[a], live[b]);
            }
        }
        Mat zmat(n, static_cast<Eigen::Index>(live.size()));
        if (cfg.scenario == Scenario::ConditionalCLT || (cfg.plug_in && theta_kind)) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& rh = results[static_cast<std::size_t>(ok[static_cast<std::size_t>(i)])].per_horizon[h];
                if (theta_kind) {
                    zmat.row(i) = rh.err_observed.transpose();
                } else {
                    const Mat info = rh.info.size() > 0 ? rh.info : Mat(rh.plug_in_var.cwiseInverse().asDiagonal());
                    zmat.row(i) = (sym_sqrt_psd(info) * (rh.estimate - truth_m)).transpose();
                }
            }
        } else {
            const Mat w = detail::inv_sqrt_psd(target_live);
            for (Eigen::Index i = 0; i < n; ++i) {
                Vec e(static_cast<Eigen::Index>(live.size()));
                for (std::size_t a = 0; a < live.size(); ++a) e[a] = err(i, live[a]);
                zmat.row(i) = (w * e).transpose();
            }
        }
        const NormalityResult norm = normality_tests(zmat);
        tab.ks_pvalues = Vec::Constant(k, 1.0);
        for (std::size_t a = 0; a < live.size(); ++a) tab.ks_pvalues[live[a]] = norm.ks_pvalues[a];
        tab.mahalanobis_pvalue = norm.mahalanobis_chi2_pvalue;

        if (theta_kind) {
            Mat obs(n, k);
            Mat det(n, k);
            const Mat gh = cfg.scenario == Scenario::ConditionalCLT ? Mat() : sym_sqrt_psd(g_inf);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& rh = results[static_cast<std::size_t>(ok[static_cast<std::size_t>(i)])].per_horizon[h];
                obs.row(i) = rh.err_observed.transpose();
                if (gh.size() > 0) det.row(i) = (gh * err.row(i).transpose()).transpose();
            }
            tab.cov_standardized_observed = stats::covariance_rows(obs, &zero_centre);
            if (gh.size() > 0) tab.cov_standardized_deterministic = stats::covariance_rows(det, &zero_centre);
        }

        if (cfg.scenario == Scenario::ErgodicLimits) {
            std::vector<double> e;
            for (int r : ok) e.push_back(*results[static_cast<std::size_t>(r)].per_horizon[h].ergodic_error);
            tab.ergodic_median_error = stats::median(e);
        }
        if (cfg.driver.has_jumps() && cfg.filter.mode == FilterMode::Threshold) {
            std::vector<double> rec;
            for (int r : ok) rec.push_back(*results[static_cast<std::size_t>(r)].per_horizon[h].recall);
            tab.filter_recall = stats::mean(rec);
        }

        if (cfg.scenario == Scenario::LassoOracle) {
            double exact = 0.0, tpr = 0.0, fpr = 0.0, kmax = 0.0, l0 = 0.0;
            int kfail = 0;
            std::vector<Vec> restricted;
            std::vector<Eigen::Index> supp;
            for (Eigen::Index j = 0; j < k; ++j) {
                if (truth[j] != 0.0) supp.push_back(j);
            }
            for (int r : ok) {
                const auto& rh = results[static_cast<std::size_t>(r)].per_horizon[h];
                exact += rh.support->exact_match ? 1.0 : 0.0;
                tpr += rh.support->tpr;
                fpr += rh.support->fpr;
                kfail += rh.kkt->ok ? 0 : 1;
                kmax = std::max(kmax, rh.kkt->max_residual);
                l0 = std::max(l0, *rh.lambda_zero_diff);
                if (rh.support->exact_match) {
                    Vec e(static_cast<Eigen::Index>(supp.size()));
                    for (std::size_t a = 0; a < supp.size(); ++a) {
                        e[a] = std::sqrt(t) * (rh.lasso_estimate[supp[a]] - truth[supp[a]]);
                    }
                    restricted.push_back(e);
                }
            }
            tab.support_exact_rate = exact / static_cast<double>(n);
            tab.support_tpr = tpr / static_cast<double>(n);
            tab.support_fpr = fpr / static_cast<double>(n);
            tab.kkt_failures = kfail;
            tab.kkt_max_residual = kmax;
            tab.lambda_zero_max_diff = l0;
            tab.restricted_count = static_cast<int>(restricted.size());
            if (restricted.size() >= 2) {
                // restricted information (S (x) Sigma^{-1}) on the true support
                const Mat info_full = kron(second_moment, detail::inverse_spd(cfg.driver.sigma, "Sigma"));
                Mat info(supp.size(), supp.size());
                for (std::size_t a = 0; a < supp.size(); ++a)
                    for (std::size_t b = 0; b < supp.size(); ++b) info(a, b) = info_full(supp[a], supp[b]);
                const Mat root = sym_sqrt_psd(info);
                std::vector<double> sq;
                for (const auto& e : restricted) sq.push_back((root * e).squaredNorm());
                tab.restricted_mahalanobis_pvalue =
                    stats::chi2_goodness_of_fit(sq, static_cast<double>(supp.size()));
            }
        }
        report.tables.push_back(std::move(tab));
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace grou
