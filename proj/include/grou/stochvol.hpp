#pragma once

#include "grou/error.hpp"
#include "grou/estimators.hpp"
#include "grou/graph.hpp"
#include "grou/levy.hpp"
#include "grou/likelihood.hpp"
#include "grou/linalg.hpp"
#include "grou/rng.hpp"
#include "grou/stats.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace grou {

enum class WeightLaw { Exponential, Uniform };

inline std::string to_string(WeightLaw w) { return w == WeightLaw::Exponential ? "exponential" : "uniform"; }

inline WeightLaw weight_law_from_string(const std::string& s) {
    if (s == "exponential") return WeightLaw::Exponential;
    if (s == "uniform") return WeightLaw::Uniform;
    throw ConfigError("unknown subordinator weight law '" + s + "' (expected exponential or uniform)");
}

/// Matrix subordinator with drift gamma_L and compound-Poisson rank-one
/// jumps w v v^T: v uniform on the sphere, w ~ Exponential(mean = param) or
/// U(0, param].
struct MatrixSubordinatorSpec {
    Mat gamma_l;
    double jump_rate = 0.0;
    WeightLaw weight_law = WeightLaw::Exponential;
    double weight_param = 1.0;

    [[nodiscard]] double mean_weight() const noexcept {
        return weight_law == WeightLaw::Exponential ? weight_param : 0.5 * weight_param;
    }

    [[nodiscard]] double sample_weight(Rng& rng) const {
        return weight_law == WeightLaw::Exponential ? rng.exponential(weight_param)
                                                    : weight_param * (1.0 - rng.uniform());
    }

    /// E[L_1] = gamma_L + rate E[w] E[v v^T] = gamma_L + rate E[w] I / d.
    [[nodiscard]] Mat mean_increment() const {
        const auto d = gamma_l.rows();
        return gamma_l + (jump_rate * mean_weight() / static_cast<double>(d)) * Mat::Identity(d, d);
    }

    void validate(int d) const {
        if (gamma_l.rows() != d || gamma_l.cols() != d) {
            throw ConfigError("subordinator: gamma_L must be d x d");
        }
        if (min_eigenvalue_sym(gamma_l) < -1e-12 || !gamma_l.isApprox(gamma_l.transpose(), 1e-12)) {
            throw ConfigError("subordinator: gamma_L must be symmetric positive semidefinite");
        }
        if (!(jump_rate >= 0.0) || !(weight_param > 0.0)) {
            throw ConfigError("subordinator: jump rate must be >= 0 and weight parameter > 0");
        }
    }
};

/// dSigma = -(V Sigma + Sigma V^T) dt + dL.
struct PsouSpec {
    Mat v;
    MatrixSubordinatorSpec subordinator;

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(v.rows()); }

    void validate() const {
        if (v.rows() != v.cols() || v.rows() == 0) {
            throw ConfigError("psou: V must be square");
        }
        subordinator.validate(dim());
    }

    /// E[Sigma_infinity] solving V X + X V^T = E[L_1].
    [[nodiscard]] Mat stationary_mean() const { return lyapunov_solve(v, subordinator.mean_increment()); }
};

struct LinearClock {
    double c = 1.0;
};

/// T_t = int_0^t (floor + X_s^2) ds with dX = -kappa X dt + vol dW.
struct IntegratedPositiveClock {
    double kappa = 1.0;
    double vol = 1.0;
    double floor = 0.1;
};

struct TimeChangeSpec {
    std::variant<LinearClock, IntegratedPositiveClock> kind = LinearClock{};

    void validate() const {
        if (const auto* l = std::get_if<LinearClock>(&kind)) {
            if (!(l->c > 0.0)) throw ConfigError("time change: linear rate must be > 0");
        } else {
            const auto& p = std::get<IntegratedPositiveClock>(kind);
            if (!(p.kappa > 0.0) || !(p.vol >= 0.0) || !(p.floor > 0.0)) {
                throw ConfigError("time change: need kappa > 0, vol >= 0 and floor > 0");
            }
        }
    }
};

/// Pure-jump Levy process J with drift gamma_J and compound-Poisson jumps.
struct JumpComponentSpec {
    Vec gamma_j;
    std::optional<JumpSpec> jumps;

    [[nodiscard]] bool has_jumps() const noexcept { return jumps && jumps->rate > 0.0; }
};

struct PsouPath {
    double dt = 0.0;
    std::vector<Mat> sigma;  // one per grid point
};

namespace detail {

class PsouStepper {
public:
    PsouStepper(const PsouSpec& spec, double dt, std::uint64_t seed, std::uint32_t replicate)
        : spec_(spec), dt_(dt), rng_(seed, replicate, Stream::Volatility) {
        decay_ = matrix_exponential(-dt * spec.v);
        const Mat s_gamma = lyapunov_solve(spec.v, spec.subordinator.gamma_l);
        drift_ = s_gamma - decay_ * s_gamma * decay_.transpose();
        drift_ = Mat(0.5 * (drift_ + drift_.transpose()));
    }

    void step(Mat& sigma) {
        Mat next = decay_ * sigma * decay_.transpose() + drift_;
        const auto& sub = spec_.subordinator;
        const std::uint64_t n = rng_.poisson(sub.jump_rate * dt_);
        for (std::uint64_t j = 0; j < n; ++j) {
            const double u = rng_.uniform() * dt_;
            const double w = sub.sample_weight(rng_);
            const Vec v = matrix_exponential(-(dt_ - u) * spec_.v) * rng_.unit_vector(spec_.dim());
            next.noalias() += w * v * v.transpose();
        }
        sigma = 0.5 * (next + next.transpose());
    }

private:
    const PsouSpec& spec_;
    double dt_;
    Rng rng_;
    Mat decay_;
    Mat drift_;
};

inline std::int64_t step_count(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0)) {
        throw ContractViolation("horizon and dt must be > 0");
    }
    const auto n = static_cast<std::int64_t>(std::llround(horizon / dt));
    if (n < 1) {
        throw ContractViolation("horizon shorter than one step");
    }
    return n;
}

}  // namespace detail

/// PSOU path on [0, horizon]. Without `sigma0` the process starts at its
/// stationary mean and is run for a burn-in of 20 / min Re eig(V) first.
inline PsouPath simulate_psou(const PsouSpec& spec, double horizon, double dt, std::uint64_t seed,
                              std::uint32_t replicate = 0, const std::optional<Mat>& sigma0 = std::nullopt) {
    spec.validate();
    if (!check_stationary_spectral(spec.v)) {
        throw ContractViolation("simulate_psou: V is not stationary (an eigenvalue has non-positive real part)");
    }
    const std::int64_t n = detail::step_count(horizon, dt);
    detail::PsouStepper stepper(spec, dt, seed, replicate);
    Mat sigma;
    if (sigma0) {
        sigma = *sigma0;
    } else {
        sigma = spec.stationary_mean();
        const auto burn = static_cast<std::int64_t>(std::ceil(20.0 / min_real_eigenvalue(spec.v) / dt));
        for (std::int64_t k = 0; k < burn; ++k) {
            stepper.step(sigma);
        }
    }
    PsouPath out;
    out.dt = dt;
    out.sigma.reserve(static_cast<std::size_t>(n + 1));
    out.sigma.push_back(sigma);
    for (std::int64_t k = 0; k < n; ++k) {
        stepper.step(sigma);
        out.sigma.push_back(sigma);
    }
    return out;
}

namespace detail {

class ClockStepper {
public:
    ClockStepper(const TimeChangeSpec& spec, double dt, std::uint64_t seed, std::uint32_t replicate)
        : spec_(spec), dt_(dt), rng_(seed, replicate, Stream::TimeChange) {
        if (const auto* p = std::get_if<IntegratedPositiveClock>(&spec.kind)) {
            a_ = std::exp(-p->kappa * dt);
            sd_ = p->vol * std::sqrt((1.0 - a_ * a_) / (2.0 * p->kappa));
            x_ = p->vol / std::sqrt(2.0 * p->kappa) * rng_.normal();
        }
    }

    // Increment of T over the next interval (left-point rule).
    double step() {
        if (const auto* l = std::get_if<LinearClock>(&spec_.kind)) {
            return l->c * dt_;
        }
        const auto& p = std::get<IntegratedPositiveClock>(spec_.kind);
        const double inc = (p.floor + x_ * x_) * dt_;
        x_ = a_ * x_ + sd_ * rng_.normal();
        return inc;
    }

private:
    const TimeChangeSpec& spec_;
    double dt_;
    Rng rng_;
    double a_ = 0.0;
    double sd_ = 0.0;
    double x_ = 0.0;
};

}  // namespace detail

/// Clock values T_{t_k}, k = 0..N, with T_0 = 0.
inline std::vector<double> simulate_time_change(const TimeChangeSpec& spec, double horizon, double dt,
                                                std::uint64_t seed, std::uint32_t replicate = 0) {
    spec.validate();
    const std::int64_t n = detail::step_count(horizon, dt);
    detail::ClockStepper clock(spec, dt, seed, replicate);
    std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
    for (std::int64_t k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k + 1)] = out[static_cast<std::size_t>(k)] + clock.step();
    }
    return out;
}

struct VolModulatedOptions {
    std::uint32_t replicate = 0;
    double burn_in_factor = 10.0;  // Y burn-in in units of 1 / min Re eig(Q)
};

/// dY = -Q Y dt + Sigma_t^{1/2} dW + dJ_{T_t}, started near stationarity.
///
/// Per step: exact decay of Y, Gaussian increment with covariance
/// S_k - Phi S_k Phi^T where Q S_k + S_k Q^T = Sigma_{t_k} (volatility frozen
/// over the step), and the jumps of J_T drawn by thinning at
/// rate * (T_{k+1} - T_k).
inline SamplePath simulate_vol_modulated(const DynamicsMatrix& q, const PsouSpec& psou, const TimeChangeSpec& tc,
                                         const JumpComponentSpec& jc, double horizon, double dt, std::uint64_t seed,
                                         const VolModulatedOptions& opts = {}) {
    const int d = q.dim();
    psou.validate();
    tc.validate();
    if (psou.dim() != d || jc.gamma_j.size() != d) {
        throw DimensionError("simulate_vol_modulated: component dimensions disagree");
    }
    if (!check_stationary_spectral(q)) {
        throw ContractViolation("simulate_vol_modulated: dynamics matrix is not stationary");
    }
    const std::int64_t n = detail::step_count(horizon, dt);
    const auto burn = static_cast<std::int64_t>(std::ceil(opts.burn_in_factor / min_real_eigenvalue(q.q) / dt));

    const PsouPath vol = simulate_psou(psou, static_cast<double>(burn + n) * dt, dt, seed, opts.replicate);
    detail::ClockStepper clock(tc, dt, seed, opts.replicate);
    Rng brownian(seed, opts.replicate, Stream::Brownian);
    Rng jump_rng(seed, opts.replicate, Stream::TimeChangedJumps);

    const Mat phi = matrix_exponential(-dt * q.q);
    const LyapunovOperator lyap(q.q);
    Mat drift_map(d, d);  // int_0^dt exp(-sQ) ds
    for (int i = 0; i < d; ++i) {
        drift_map.col(i) = detail::integrated_drift(q.q, Vec::Unit(d, i), dt);
    }
    const Vec drift_per_clock = drift_map * jc.gamma_j / dt;

    Vec y = Vec::Zero(d);
    Mat values(d, n + 1);
    std::vector<JumpMark> marks;
    for (std::int64_t k = 0; k < burn + n; ++k) {
        const std::int64_t out_k = k - burn;
        if (out_k == 0) {
            values.col(0) = y;
        }
        const Mat& sig = vol.sigma[static_cast<std::size_t>(k)];
        const Mat s = lyap.apply(sig);
        const Mat cov = s - phi * s * phi.transpose();
        const double d_clock = clock.step();
        Vec next = phi * y + psd_factor(0.5 * (cov + cov.transpose())) * brownian.normal_vector(d);
        next += drift_per_clock * d_clock;
        if (jc.has_jumps()) {
            const std::uint64_t count = jump_rng.poisson(jc.jumps->rate * d_clock);
            for (std::uint64_t j = 0; j < count; ++j) {
                const double u = jump_rng.uniform() * dt;
                Vec z = jc.jumps->sample(jump_rng, d);
                next.noalias() += matrix_exponential(-(dt - u) * q.q) * z;
                if (out_k >= 0) {
                    marks.push_back({out_k, static_cast<double>(out_k) * dt + u, std::move(z)});
                }
            }
        }
        y = next;
        if (out_k >= 0) {
            values.col(out_k + 1) = y;
        }
    }

    SamplePath path(dt, std::move(values));
    path.jump_marks = std::move(marks);
    path.seed = seed;
    path.sigma_path.emplace(vol.sigma.begin() + burn, vol.sigma.end());
    return path;
}

/// Sigma_t^{1/2} at every grid point (eigen-decomposition, negative
/// eigenvalues clipped).
inline std::vector<Mat> sigma_sqrt_path(const SamplePath& path) {
    if (!path.sigma_path) {
        throw ContractViolation("sigma_sqrt_path: path carries no volatility");
    }
    std::vector<Mat> out;
    out.reserve(path.sigma_path->size());
    for (const auto& s : *path.sigma_path) {
        out.push_back(sym_sqrt_psd(s));
    }
    return out;
}

/// Pseudo-inverses of the volatility path (eigenvalue floor 1e-10).
inline std::vector<Mat> sigma_inverse_path(const SamplePath& path) {
    if (!path.sigma_path) {
        throw ContractViolation("conditional estimation needs the volatility path");
    }
    std::vector<Mat> out;
    out.reserve(path.sigma_path->size());
    for (const auto& s : *path.sigma_path) {
        if (min_eigenvalue_sym(s) < -1e-10) {
            throw ContractViolation("volatility path is not positive semidefinite");
        }
        out.push_back(sym_pinv(s, 1e-10));
    }
    return out;
}

inline std::vector<LikelihoodStats> conditional_stats_at(const SamplePath& path, const Graph& g,
                                                         const ContinuousPartOptions& opts,
                                                         const std::vector<std::int64_t>& checkpoints) {
    return compute_stats_time_varying_at(path, g, sigma_inverse_path(path), opts, checkpoints);
}

/// MLE with the known volatility path inside every inner product.
inline EstimateReport conditional_estimate(const SamplePath& path, const Graph& g, const ContinuousPartOptions& opts,
                                           EstimateKind kind = EstimateKind::Theta) {
    const LikelihoodStats s = conditional_stats_at(path, g, opts, {path.steps()}).front();
    return kind == EstimateKind::Theta ? theta_mle(s) : psi_mle(s);
}

// ---- diagnostics -------------------------------------------------------------

/// Frobenius norms of the sample autocovariance at lags h = 0, stride, 2 stride, ...
inline std::vector<double> autocovariance_norms(const SamplePath& path, std::int64_t max_lag, std::int64_t stride) {
    const Mat& y = path.values();
    const Vec m = y.rowwise().mean();
    const Mat c = y.colwise() - m;
    const std::int64_t n = y.cols();
    std::vector<double> out;
    for (std::int64_t h = 0; h <= max_lag && h < n - 1; h += stride) {
        const Mat acov = c.rightCols(n - h) * c.leftCols(n - h).transpose() / static_cast<double>(n - h);
        out.push_back(acov.norm());
    }
    return out;
}

struct EnvelopeFit {
    double log_c = 0.0;
    double rate = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log ||Acov(h)|| = log C - rate h.
inline EnvelopeFit fit_decay_envelope(const std::vector<double>& norms, double lag_spacing) {
    std::vector<double> h;
    std::vector<double> logn;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        if (norms[i] > 0.0) {
            h.push_back(static_cast<double>(i) * lag_spacing);
            logn.push_back(std::log(norms[i]));
        }
    }
    const stats::LinearFit f = stats::least_squares(h, logn);
    return {f.intercept, -f.slope, f.r_squared};
}

struct BatchMeans {
    std::vector<double> means;
    double grand_mean = 0.0;
    double se = 0.0;  // standard error of one batch mean
};

inline BatchMeans batch_means(const std::vector<double>& x, int batches) {
    if (batches < 2 || static_cast<std::size_t>(batches) > x.size()) {
        throw ContractViolation("batch_means: need 2 <= batches <= series length");
    }
    const std::size_t len = x.size() / static_cast<std::size_t>(batches);
    BatchMeans out;
    for (int b = 0; b < batches; ++b) {
        const auto first = x.begin() + static_cast<std::ptrdiff_t>(b * len);
        out.means.push_back(stats::mean(std::span<const double>(&*first, len)));
    }
    out.grand_mean = stats::mean(out.means);
    out.se = std::sqrt(stats::variance(out.means));
    return out;
}

}  // namespace grou
