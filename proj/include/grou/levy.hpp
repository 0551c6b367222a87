#pragma once

#include "grou/error.hpp"
#include "grou/graph.hpp"
#include "grou/linalg.hpp"
#include "grou/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace grou {

/// Jump-size laws for the compound-Poisson part. All have finite second
/// moments, so the log-moment condition on the Levy measure holds.
enum class JumpLaw { Gaussian, Laplace, Uniform };

inline std::string to_string(JumpLaw law) {
    switch (law) {
        case JumpLaw::Gaussian: return "gaussian";
        case JumpLaw::Laplace: return "laplace";
        case JumpLaw::Uniform: return "uniform";
    }
    return "?";
}

inline JumpLaw jump_law_from_string(const std::string& s) {
    if (s == "gaussian") return JumpLaw::Gaussian;
    if (s == "laplace") return JumpLaw::Laplace;
    if (s == "uniform") return JumpLaw::Uniform;
    throw ConfigError("unknown jump law '" + s + "' (expected gaussian, laplace or uniform)");
}

/// Compound-Poisson jumps with i.i.d. coordinates:
///   Gaussian: N(0, scale^2); Laplace: Laplace(0, scale); Uniform: U[-scale, scale].
struct JumpSpec {
    double rate = 0.0;  // per unit time
    JumpLaw law = JumpLaw::Gaussian;
    double scale = 1.0;

    [[nodiscard]] Vec sample(Rng& rng, Eigen::Index d) const {
        Vec z(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            switch (law) {
                case JumpLaw::Gaussian: z[i] = scale * rng.normal(); break;
                case JumpLaw::Laplace: z[i] = rng.laplace(scale); break;
                case JumpLaw::Uniform: z[i] = rng.uniform(-scale, scale); break;
            }
        }
        return z;
    }

    /// Per-coordinate variance of a single jump.
    [[nodiscard]] double coordinate_variance() const noexcept {
        switch (law) {
            case JumpLaw::Gaussian: return scale * scale;
            case JumpLaw::Laplace: return 2.0 * scale * scale;
            case JumpLaw::Uniform: return scale * scale / 3.0;
        }
        return 0.0;
    }
};

/// Levy triplet (b, Sigma, nu) with nu compound Poisson. Because nu has finite
/// activity the compensator is folded into b: `drift` is the genuine linear
/// drift of the simulated process.
struct LevyDriverSpec {
    Vec drift;
    Mat sigma;
    std::optional<JumpSpec> jumps;

    static LevyDriverSpec brownian(const Mat& sigma) { return {Vec::Zero(sigma.rows()), sigma, std::nullopt}; }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(sigma.rows()); }

    [[nodiscard]] bool has_jumps() const noexcept { return jumps.has_value() && jumps->rate > 0.0; }

    /// Throws ConfigError when Sigma is not symmetric positive definite or the
    /// shapes disagree with d.
    void validate(int d) const {
        if (sigma.rows() != d || sigma.cols() != d || drift.size() != d) {
            throw ConfigError("driver: drift/sigma dimensions do not match d = " + std::to_string(d));
        }
        if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
            throw ConfigError("driver: sigma is not symmetric");
        }
        Eigen::LLT<Mat> llt(sigma);
        if (llt.info() != Eigen::Success) {
            throw ConfigError("driver: sigma is not positive definite (Cholesky factorisation failed)");
        }
        if (jumps) {
            if (!(jumps->rate >= 0.0) || !(jumps->scale > 0.0)) {
                throw ConfigError("driver: jump rate must be >= 0 and jump scale > 0");
            }
        }
    }

    /// Covariance per unit time of the whole driver (Brownian plus jumps);
    /// E[Y Y^T] of the stationary zero-mean solution solves the Lyapunov
    /// equation with this right-hand side.
    [[nodiscard]] Mat total_covariance() const {
        Mat c = sigma;
        if (has_jumps()) {
            c.diagonal().array() += jumps->rate * jumps->coordinate_variance();
        }
        return c;
    }
};

struct JumpMark {
    std::int64_t interval = 0;  // jump lies in (t_k, t_{k+1}]
    double time = 0.0;
    Vec size;
};

/// Uniformly sampled path t_k = k * dt, k = 0..N. Values are stored one
/// column per grid point.
class SamplePath {
public:
    SamplePath() = default;

    SamplePath(double dt, Mat values) : dt_(dt), values_(std::move(values)) {
        if (values_.cols() == 0) {
            throw ContractViolation("SamplePath: empty path");
        }
        if (dt_ && !(*dt_ > 0.0)) {
            throw ContractViolation("SamplePath: dt must be > 0");
        }
    }

    /// Path without sampling metadata (e.g. a raw binary dump).
    static SamplePath without_dt(Mat values) {
        SamplePath p;
        p.values_ = std::move(values);
        p.dt_.reset();
        return p;
    }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }
    [[nodiscard]] std::int64_t steps() const noexcept { return values_.cols() - 1; }
    [[nodiscard]] std::int64_t points() const noexcept { return values_.cols(); }
    [[nodiscard]] bool has_dt() const noexcept { return dt_.has_value(); }

    [[nodiscard]] double dt() const {
        if (!dt_) {
            throw ContractViolation("SamplePath: sampling interval unknown");
        }
        return *dt_;
    }

    [[nodiscard]] double time(std::int64_t k) const { return static_cast<double>(k) * dt(); }
    [[nodiscard]] double horizon() const { return time(steps()); }

    [[nodiscard]] auto point(std::int64_t k) const { return values_.col(k); }
    [[nodiscard]] const Mat& values() const noexcept { return values_; }
    [[nodiscard]] Mat& values() noexcept { return values_; }

    std::vector<JumpMark> jump_marks;
    std::optional<std::vector<Mat>> sigma_path;
    std::optional<std::uint64_t> seed;

    /// First `n_steps` intervals of the path, with marks and volatility
    /// restricted accordingly.
    [[nodiscard]] SamplePath prefix(std::int64_t n_steps) const {
        if (n_steps < 0 || n_steps > steps()) {
            throw ContractViolation("SamplePath::prefix: step count out of range");
        }
        SamplePath p;
        p.dt_ = dt_;
        p.values_ = values_.leftCols(n_steps + 1);
        p.seed = seed;
        for (const auto& m : jump_marks) {
            if (m.interval < n_steps) {
                p.jump_marks.push_back(m);
            }
        }
        if (sigma_path) {
            p.sigma_path.emplace(sigma_path->begin(), sigma_path->begin() + n_steps + 1);
        }
        return p;
    }

private:
    std::optional<double> dt_;
    Mat values_;
};

/// Exact sampled representation X_j = Phi X_{j-1} + Z_j on a grid of step dt.
struct Var1Representation {
    Mat phi;         // exp(-dt Q)
    Mat noise_cov;   // covariance of the Gaussian part of Z_j
    Vec noise_mean;  // integral_0^dt exp(-sQ) b ds
};

namespace detail {

// integral_0^dt exp(-sQ) b ds via the augmented exponential of [[-Q, b], [0, 0]].
inline Vec integrated_drift(const Mat& q, const Vec& b, double dt) {
    const Eigen::Index d = q.rows();
    Mat aug = Mat::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = -q * dt;
    aug.topRightCorner(d, 1) = b * dt;
    return matrix_exponential(aug).topRightCorner(d, 1);
}

// integral_0^dt exp(-sQ) Sigma exp(-sQ^T) ds by Van Loan's block exponential;
// valid for any Q.
inline Mat integrated_covariance_van_loan(const Mat& q, const Mat& sigma, double dt) {
    const Eigen::Index d = q.rows();
    Mat m = Mat::Zero(2 * d, 2 * d);
    m.topLeftCorner(d, d) = q * dt;
    m.topRightCorner(d, d) = sigma * dt;
    m.bottomRightCorner(d, d) = -q.transpose() * dt;
    const Mat e = matrix_exponential(m);
    const Mat phi = e.bottomRightCorner(d, d).transpose();
    const Mat c = phi * e.topRightCorner(d, d);
    return 0.5 * (c + c.transpose());
}

}  // namespace detail

/// Phi = exp(-dt Q); noise_cov = S - Phi S Phi^T with S the stationary
/// covariance. For non-stationary Q the covariance integral is evaluated
/// directly instead.
inline Var1Representation var1_decompose(const DynamicsMatrix& q, const LevyDriverSpec& driver, double dt) {
    if (!(dt > 0.0)) {
        throw ContractViolation("var1_decompose: dt must be > 0");
    }
    Var1Representation out;
    out.phi = matrix_exponential(-dt * q.q);
    if (check_stationary_spectral(q.q)) {
        const Mat s = lyapunov_solve(q.q, driver.sigma);
        const Mat c = s - out.phi * s * out.phi.transpose();
        out.noise_cov = 0.5 * (c + c.transpose());
    } else {
        out.noise_cov = detail::integrated_covariance_van_loan(q.q, driver.sigma, dt);
    }
    out.noise_mean = detail::integrated_drift(q.q, driver.drift, dt);
    return out;
}

/// Stationary covariance of the Brownian-driven GrOU process.
inline Mat lyapunov_stationary_cov(const DynamicsMatrix& q, const Mat& sigma) {
    return lyapunov_solve(q.q, sigma);
}

struct StationaryInit {};
struct FixedInit {
    Vec y0;
};
using InitialCondition = std::variant<StationaryInit, FixedInit>;

enum class Scheme { Exact, Euler };

struct SimulationOptions {
    Scheme scheme = Scheme::Exact;
    std::uint32_t replicate = 0;  // selects the RNG streams
    bool record_jumps = true;
};

namespace detail {

class GrouStepper {
public:
    GrouStepper(const DynamicsMatrix& q, const LevyDriverSpec& driver, double dt, const SimulationOptions& opts,
                std::uint64_t seed)
        : q_(q.q),
          driver_(driver),
          dt_(dt),
          scheme_(opts.scheme),
          gauss_(seed, opts.replicate, Stream::Gaussian),
          jumps_(seed, opts.replicate, Stream::Jumps),
          d_(q.q.rows()),
          xi_(d_),
          next_(d_) {
        if (scheme_ == Scheme::Exact) {
            const Var1Representation v = var1_decompose(q, driver, dt);
            phi_ = v.phi;
            mean_ = v.noise_mean;
            factor_ = psd_factor(v.noise_cov);
        } else {
            phi_ = Mat::Identity(d_, d_) - dt * q_;
            mean_ = driver.drift * dt;
            factor_ = psd_factor(driver.sigma * dt);
        }
    }

    // Advances y over one interval; appends jump marks when `marks` is given.
    void step(Eigen::Ref<Vec> y, std::int64_t interval, std::vector<JumpMark>* marks) {
        for (Eigen::Index i = 0; i < d_; ++i) {
            xi_[i] = gauss_.normal();
        }
        next_.noalias() = phi_ * y;
        next_ += mean_;
        next_.noalias() += factor_ * xi_;
        if (driver_.has_jumps()) {
            const std::uint64_t n = jumps_.poisson(driver_.jumps->rate * dt_);
            for (std::uint64_t j = 0; j < n; ++j) {
                const double u = jumps_.uniform() * dt_;
                Vec z = driver_.jumps->sample(jumps_, d_);
                if (scheme_ == Scheme::Exact) {
                    next_.noalias() += matrix_exponential(-(dt_ - u) * q_) * z;
                } else {
                    next_ += z;
                }
                if (marks) {
                    marks->push_back({interval, static_cast<double>(interval) * dt_ + u, std::move(z)});
                }
            }
        }
        y = next_;
    }

    Rng& init_rng() { return gauss_; }

private:
    Mat q_;
    const LevyDriverSpec& driver_;
    double dt_;
    Scheme scheme_;
    Rng gauss_;
    Rng jumps_;
    Eigen::Index d_;
    Mat phi_;
    Vec mean_;
    Mat factor_;
    Vec xi_;
    Vec next_;
};

}  // namespace detail

/// Simulates dY = -Q Y dt + dL on [0, horizon] with step dt.
///
/// The Gaussian part is advanced with the exact VAR(1) transition; each
/// compound-Poisson jump z arriving at time tau inside an interval is carried
/// to the grid point as exp(-(t_{k+1} - tau) Q) z and recorded in
/// `jump_marks`. Stationary initialisation draws Y_0 ~ N(Q^{-1} b, S) and,
/// when jumps are present, runs a burn-in of 10 / min Re(eig Q) time units.
inline SamplePath simulate_grou(const DynamicsMatrix& q, const LevyDriverSpec& driver, double horizon, double dt,
                                std::uint64_t seed, const InitialCondition& init, const SimulationOptions& opts = {}) {
    const int d = q.dim();
    driver.validate(d);
    if (!(dt > 0.0) || !(horizon > 0.0)) {
        throw ContractViolation("simulate_grou: horizon and dt must be > 0");
    }
    const auto steps = static_cast<std::int64_t>(std::llround(horizon / dt));
    if (steps < 1) {
        throw ContractViolation("simulate_grou: horizon shorter than one step");
    }
    const bool stationary_init = std::holds_alternative<StationaryInit>(init);
    if (stationary_init && !check_stationary_spectral(q)) {
        throw ContractViolation("simulate_grou: stationary initialisation requires a stationary dynamics matrix");
    }

    detail::GrouStepper stepper(q, driver, dt, opts, seed);
    Vec y(d);
    if (stationary_init) {
        Rng init_rng(seed, opts.replicate, Stream::Init);
        const Mat s = lyapunov_stationary_cov(q, driver.sigma);
        const Vec mean = q.q.partialPivLu().solve(driver.drift);
        y = mean + psd_factor(s) * init_rng.normal_vector(d);
        if (driver.has_jumps()) {
            const double burn_in = 10.0 / min_real_eigenvalue(q.q);
            const auto burn_steps = static_cast<std::int64_t>(std::ceil(burn_in / dt));
            for (std::int64_t k = 0; k < burn_steps; ++k) {
                stepper.step(y, -1, nullptr);
            }
        }
    } else {
        y = std::get<FixedInit>(init).y0;
        if (y.size() != d) {
            throw DimensionError("simulate_grou: initial value has wrong dimension");
        }
    }

    Mat values(d, steps + 1);
    values.col(0) = y;
    SamplePath path;
    std::vector<JumpMark> marks;
    for (std::int64_t k = 0; k < steps; ++k) {
        stepper.step(y, k, opts.record_jumps ? &marks : nullptr);
        values.col(k + 1) = y;
    }
    path = SamplePath(dt, std::move(values));
    path.jump_marks = std::move(marks);
    path.seed = seed;
    return path;
}

// ---- ergodic averages ----------------------------------------------------------

/// Left-point Riemann average (1/t) sum_k g(Y_{t_k}) dt over the path; a
/// single-point path returns g(Y_0).
template <class Functional>
Mat ergodic_average(const SamplePath& path, Functional&& g) {
    if (path.steps() == 0) {
        return g(path.point(0));
    }
    Mat acc = g(path.point(0));
    for (std::int64_t k = 1; k < path.steps(); ++k) {
        acc += g(path.point(k));
    }
    return acc / static_cast<double>(path.steps());
}

namespace functional {

inline auto identity() {
    return [](const auto& y) -> Mat { return Mat(y); };
}

inline auto outer() {
    return [](const auto& y) -> Mat { return y * y.transpose(); };
}

/// 2x2 matrix of the integrands <A_bar y, A_bar y>, <A_bar y, y>, <y, A_bar y>,
/// <y, y> in the Sigma^{-1} inner product.
inline auto g_infinity_integrands(const Mat& a_bar, const Mat& sigma) {
    const Mat sigma_inv = sigma.inverse();
    return [a_bar, sigma_inv](const auto& y) -> Mat {
        const Vec ay = a_bar * y;
        const Vec wy = sigma_inv * y;
        const Vec way = sigma_inv * ay;
        Mat out(2, 2);
        out(0, 0) = ay.dot(way);
        out(0, 1) = ay.dot(wy);
        out(1, 0) = Vec(y).dot(way);
        out(1, 1) = Vec(y).dot(wy);
        return out;
    };
}

}  // namespace functional

}  // namespace grou
