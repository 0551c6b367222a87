#pragma once

#include "grou/error.hpp"
#include "grou/estimators.hpp"
#include "grou/graph.hpp"
#include "grou/lasso.hpp"
#include "grou/levy.hpp"
#include "grou/likelihood.hpp"
#include "grou/mc.hpp"
#include "grou/stochvol.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace grou::io {

using json = nlohmann::ordered_json;

// ---- numbers -------------------------------------------------------------------

/// Round-trip decimal form (17 significant digits).
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

/// Row-major nested arrays.
inline json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

inline Vec vec_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + ": expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

/// Matrix from nested arrays; a bare number s means s * I_d when d is known.
inline Mat mat_from_json(const json& j, const std::string& what, std::optional<int> d = std::nullopt) {
    if (j.is_number()) {
        if (!d) throw ConfigError(what + ": scalar shorthand needs a known dimension");
        return j.get<double>() * Mat::Identity(*d, *d);
    }
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a matrix (array of rows)");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Vec r = vec_from_json(j[static_cast<std::size_t>(i)], what);
        if (r.size() != cols) throw DimensionError(what + ": ragged matrix");
        m.row(i) = r.transpose();
    }
    if (d && (rows != *d || cols != *d)) {
        throw DimensionError(what + ": expected " + std::to_string(*d) + " x " + std::to_string(*d));
    }
    return m;
}

// ---- config ----------------------------------------------------------------------

struct Config {
    json raw;
    std::uint64_t seed = 1;
    Graph graph;
    TrueModel model;
    std::optional<LevyDriverSpec> driver;
    double horizon = 10.0;
    double dt = 0.01;
    InitialCondition init = StationaryInit{};
    Scheme scheme = Scheme::Exact;
    bool write_binary = false;
    std::optional<VolatilityModel> volatility;
    ContinuousPartOptions filter;
    LassoConfig lasso;
    std::vector<double> lasso_grid;
    double ci_level = 0.95;
    std::optional<ExperimentConfig> experiment;

    [[nodiscard]] int dim() const { return graph.size(); }

    [[nodiscard]] const LevyDriverSpec& require_driver() const {
        if (!driver) throw ConfigError("config: driver.sigma is required");
        return *driver;
    }
};

namespace detail {

inline const json& need(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: key '") + key + "' has the wrong type");
    }
}

inline Graph parse_graph(const json& g, std::uint64_t seed, const std::filesystem::path& base) {
    const std::string type = get_or<std::string>(g, "type", "ring");
    if (type == "edgelist" || type == "csv") {
        std::filesystem::path p = need(g, "path", "graph").get<std::string>();
        if (p.is_relative()) p = base / p;
        std::ifstream in(p);
        if (!in) throw IoError("cannot open graph file " + p.string());
        if (type == "csv") return read_adjacency_csv(in);
        std::optional<int> d;
        if (g.contains("d")) d = g.at("d").get<int>();
        return read_edge_list(in, d);
    }
    const int d = need(g, "d", "graph").get<int>();
    if (d < 1) throw ConfigError("graph: d must be >= 1");
    if (type == "ring") return Graph::ring(d);
    if (type == "complete") return Graph::complete(d);
    if (type == "star") return Graph::star(d);
    if (type == "edgeless") return Graph::edgeless(d);
    if (type == "erdos_renyi") {
        return Graph::erdos_renyi(d, need(g, "p", "graph").get<double>(), get_or<std::uint64_t>(g, "seed", seed));
    }
    throw ConfigError("graph: unknown type '" + type + "'");
}

inline TrueModel parse_dynamics(const json& j, const Graph& g) {
    TrueModel m;
    m.graph = g;
    const std::string p = get_or<std::string>(j, "parametrization", "theta");
    const int d = g.size();
    if (p == "theta") {
        const Vec th = vec_from_json(need(j, "theta", "dynamics"), "dynamics.theta");
        if (th.size() != 2) throw ConfigError("dynamics.theta must have two entries (network, momentum)");
        m.param = Parametrization::Theta;
        m.theta = ThetaParams::from_vector(th);
    } else if (p == "psi") {
        m.param = Parametrization::Psi;
        const json& v = need(j, "psi", "dynamics");
        m.psi = v.is_array() && !v.empty() && v[0].is_array() ? vec(mat_from_json(v, "dynamics.psi", d))
                                                              : vec_from_json(v, "dynamics.psi");
        if (m.psi.size() != d * d) throw DimensionError("dynamics.psi must have d^2 entries");
    } else if (p == "free") {
        m.param = Parametrization::Free;
        m.q_free = mat_from_json(need(j, "q", "dynamics"), "dynamics.q", d);
    } else {
        throw ConfigError("dynamics: unknown parametrization '" + p + "' (expected theta, psi or free)");
    }
    return m;
}

inline JumpSpec parse_jumps(const json& j) {
    JumpSpec s;
    s.rate = get_or<double>(j, "rate", 0.0);
    s.law = jump_law_from_string(get_or<std::string>(j, "law", "gaussian"));
    s.scale = get_or<double>(j, "scale", 1.0);
    if (!(s.rate >= 0.0) || !(s.scale > 0.0)) throw ConfigError("jumps: rate must be >= 0 and scale > 0");
    return s;
}

inline LevyDriverSpec parse_driver(const json& j, int d) {
    LevyDriverSpec s;
    s.sigma = mat_from_json(need(j, "sigma", "driver"), "driver.sigma", d);
    s.drift = j.contains("drift") ? vec_from_json(j.at("drift"), "driver.drift") : Vec::Zero(d);
    if (j.contains("jumps")) s.jumps = parse_jumps(j.at("jumps"));
    s.validate(d);
    return s;
}

inline VolatilityModel parse_stochvol(const json& j, int d) {
    VolatilityModel vm;
    vm.psou.v = mat_from_json(need(j, "v", "stochvol"), "stochvol.v", d);
    const json& sub = need(j, "subordinator", "stochvol");
    vm.psou.subordinator.gamma_l =
        sub.contains("gamma_l") ? mat_from_json(sub.at("gamma_l"), "stochvol.subordinator.gamma_l", d) : Mat::Zero(d, d);
    vm.psou.subordinator.jump_rate = get_or<double>(sub, "rate", 0.0);
    vm.psou.subordinator.weight_law = weight_law_from_string(get_or<std::string>(sub, "weight_law", "exponential"));
    vm.psou.subordinator.weight_param = get_or<double>(sub, "weight_param", 1.0);
    vm.psou.validate();
    if (j.contains("time_change")) {
        const json& tc = j.at("time_change");
        const std::string kind = get_or<std::string>(tc, "kind", "linear");
        if (kind == "linear") {
            vm.time_change.kind = LinearClock{get_or<double>(tc, "c", 1.0)};
        } else if (kind == "integrated_positive") {
            vm.time_change.kind = IntegratedPositiveClock{get_or<double>(tc, "kappa", 1.0),
                                                          get_or<double>(tc, "vol", 1.0),
                                                          get_or<double>(tc, "floor", 0.1)};
        } else {
            throw ConfigError("stochvol.time_change: unknown kind '" + kind + "'");
        }
        vm.time_change.validate();
    }
    vm.jumps.gamma_j = Vec::Zero(d);
    if (j.contains("jumps")) {
        const json& jj = j.at("jumps");
        if (jj.contains("drift")) vm.jumps.gamma_j = vec_from_json(jj.at("drift"), "stochvol.jumps.drift");
        if (vm.jumps.gamma_j.size() != d) throw DimensionError("stochvol.jumps.drift must have d entries");
        vm.jumps.jumps = parse_jumps(jj);
    }
    return vm;
}

}  // namespace detail

/// Parses and validates a JSON configuration (see schemas/config.schema.json).
/// Relative file references are resolved against `base`.
inline Config parse_config(const json& j, const std::filesystem::path& base = ".") {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    Config c;
    c.raw = j;
    try {
        c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
        c.graph = detail::parse_graph(detail::need(j, "graph", "config"), c.seed, base);
        const int d = c.graph.size();
        if (j.contains("dynamics")) {
            c.model = detail::parse_dynamics(j.at("dynamics"), c.graph);
        } else {
            c.model.graph = c.graph;
        }
        if (j.contains("driver") && j.at("driver").contains("sigma")) {
            c.driver = detail::parse_driver(j.at("driver"), d);
        }
        if (j.contains("simulation")) {
            const json& s = j.at("simulation");
            c.horizon = detail::get_or<double>(s, "horizon", c.horizon);
            c.dt = detail::get_or<double>(s, "dt", c.dt);
            if (!(c.horizon > 0.0) || !(c.dt > 0.0)) throw ConfigError("simulation: horizon and dt must be > 0");
            if (s.contains("init") && s.at("init").is_array()) {
                c.init = FixedInit{vec_from_json(s.at("init"), "simulation.init")};
            } else if (detail::get_or<std::string>(s, "init", "stationary") != "stationary") {
                throw ConfigError("simulation.init must be \"stationary\" or an array");
            }
            const std::string scheme = detail::get_or<std::string>(s, "scheme", "exact");
            if (scheme != "exact" && scheme != "euler") throw ConfigError("simulation.scheme must be exact or euler");
            c.scheme = scheme == "exact" ? Scheme::Exact : Scheme::Euler;
            c.write_binary = detail::get_or<bool>(s, "binary", false);
        }
        if (j.contains("stochvol")) c.volatility = detail::parse_stochvol(j.at("stochvol"), d);
        if (j.contains("filter")) {
            const json& f = j.at("filter");
            c.filter.mode = filter_mode_from_string(detail::get_or<std::string>(f, "mode", "none"));
            if (f.contains("c")) c.filter.threshold_c = f.at("c").get<double>();
            c.filter.threshold_exponent = detail::get_or<double>(f, "exponent", 0.49);
            c.filter.validate();
        }
        if (j.contains("lasso")) {
            const json& l = j.at("lasso");
            c.lasso.gamma = detail::get_or<double>(l, "gamma", 1.0);
            c.lasso.schedule_a = detail::get_or<double>(l, "a", 1.0);
            c.lasso.schedule_beta = detail::get_or<double>(l, "beta", 0.6);
            if (l.contains("lambda")) c.lasso.lambda_fixed = l.at("lambda").get<double>();
            c.lasso.max_iter = detail::get_or<int>(l, "max_iter", 10000);
            c.lasso.tol = detail::get_or<double>(l, "tol", 1e-10);
            c.lasso.exempt_diagonal = detail::get_or<bool>(l, "exempt_diagonal", false);
            if (l.contains("grid")) {
                for (const auto& x : l.at("grid")) c.lasso_grid.push_back(x.get<double>());
            }
            c.lasso.validate();
        }
        if (j.contains("estimate")) {
            c.ci_level = detail::get_or<double>(j.at("estimate"), "level", 0.95);
            if (!(c.ci_level >= 0.0 && c.ci_level < 1.0)) throw ConfigError("estimate.level must lie in [0, 1)");
        }
        if (j.contains("experiment")) {
            const json& e = j.at("experiment");
            ExperimentConfig x;
            x.scenario = scenario_from_string(detail::get_or<std::string>(e, "scenario", "theta_clt"));
            x.model = c.model;
            if (c.driver) x.driver = *c.driver;
            for (const auto& h : detail::need(e, "horizons", "experiment")) x.horizons.push_back(h.get<double>());
            x.dt = c.dt;
            x.replicates = detail::get_or<int>(e, "replicates", 100);
            x.seed = c.seed;
            x.filter = c.filter;
            x.lasso = c.lasso;
            x.volatility = c.volatility;
            x.plug_in = detail::get_or<bool>(e, "plug_in", false);
            x.threads = detail::get_or<int>(e, "threads", 0);
            const std::string kind = detail::get_or<std::string>(e, "conditional_kind", "theta");
            if (kind != "theta" && kind != "psi") throw ConfigError("experiment.conditional_kind must be theta or psi");
            x.conditional_kind = kind == "theta" ? EstimateKind::Theta : EstimateKind::Psi;
            if (x.scenario != Scenario::ConditionalCLT && !c.driver) {
                throw ConfigError("experiment: driver.sigma is required");
            }
            c.experiment = x;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + p.string() + ": " + e.what());
    }
}

inline Config load_config(const std::filesystem::path& p) {
    return parse_config(read_json_file(p), p.parent_path().empty() ? "." : p.parent_path());
}

// ---- path files --------------------------------------------------------------------

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed for " + p.string());
}

/// `t,y1,...,yd`, one row per grid point.
inline std::string path_csv(const SamplePath& path) {
    std::ostringstream out;
    out << 't';
    for (int i = 0; i < path.dim(); ++i) out << ",y" << i + 1;
    out << '\n';
    for (std::int64_t k = 0; k < path.points(); ++k) {
        out << (path.has_dt() ? fmt(path.time(k)) : std::to_string(k));
        for (int i = 0; i < path.dim(); ++i) out << ',' << fmt(path.values()(i, k));
        out << '\n';
    }
    return out.str();
}

/// `interval,time,z1,...,zd`, one row per jump.
inline std::string jumps_csv(const SamplePath& path) {
    std::ostringstream out;
    out << "interval,time";
    for (int i = 0; i < path.dim(); ++i) out << ",z" << i + 1;
    out << '\n';
    for (const auto& m : path.jump_marks) {
        out << m.interval << ',' << fmt(m.time);
        for (Eigen::Index i = 0; i < m.size.size(); ++i) out << ',' << fmt(m.size[i]);
        out << '\n';
    }
    return out.str();
}

/// `t,s11,s12,...` with Sigma_t flattened row-major.
inline std::string sigma_csv(const SamplePath& path) {
    std::ostringstream out;
    const int d = path.dim();
    out << 't';
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out << ",s" << i + 1 << '_' << j + 1;
    out << '\n';
    const auto& sp = *path.sigma_path;
    for (std::size_t k = 0; k < sp.size(); ++k) {
        out << fmt(path.time(static_cast<std::int64_t>(k)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out << ',' << fmt(sp[k](i, j));
        out << '\n';
    }
    return out.str();
}

/// Columnar little-endian float64: all N+1 values of y1, then y2, ...
inline void write_path_binary(const std::filesystem::path& p, const SamplePath& path) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    const Mat t = path.values().transpose();  // (N+1) x d, column-major = columnar
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw IoError("write failed for " + p.string());
}

inline Mat read_path_binary(const std::filesystem::path& p, int d) {
    std::ifstream in(p, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + p.string());
    const auto bytes = static_cast<std::int64_t>(in.tellg());
    if (d < 1 || bytes % (static_cast<std::int64_t>(sizeof(double)) * d) != 0) {
        throw IoError("binary path " + p.string() + " has a size inconsistent with d = " + std::to_string(d));
    }
    const std::int64_t rows = bytes / static_cast<std::int64_t>(sizeof(double)) / d;
    Mat t(rows, d);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(t.data()), bytes);
    if (!in) throw IoError("read failed for " + p.string());
    return t.transpose();
}

inline std::vector<std::vector<double>> read_csv_numbers(const std::filesystem::path& p, std::string* header) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    if (!std::getline(in, line)) throw IoError(p.string() + " is empty");
    if (header) *header = line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw IoError(p.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Sidecar written next to a path: sampling metadata and the generating model.
inline json path_sidecar(const SamplePath& path, const DynamicsMatrix& q, const LevyDriverSpec* driver,
                         const std::string& format) {
    json j;
    j["format"] = format;
    j["d"] = path.dim();
    j["steps"] = path.steps();
    j["dt"] = path.dt();
    j["horizon"] = path.horizon();
    if (path.seed) j["seed"] = *path.seed;
    j["q"] = to_json(q.q);
    if (driver) {
        json dj;
        dj["drift"] = to_json(driver->drift);
        dj["sigma"] = to_json(driver->sigma);
        if (driver->jumps) {
            dj["jumps"] = {{"rate", driver->jumps->rate},
                           {"law", to_string(driver->jumps->law)},
                           {"scale", driver->jumps->scale}};
        }
        j["driver"] = dj;
    }
    j["jump_count"] = path.jump_marks.size();
    j["has_sigma_path"] = path.sigma_path.has_value();
    return j;
}

/// Loads a path from CSV (`t,y1..yd`) or a `.bin` dump. The sampling interval
/// comes from the JSON sidecar (same stem) when present, otherwise from the
/// t column of a CSV; a binary without a sidecar has none. Jump marks and a
/// volatility path are picked up from `<stem>_jumps.csv` / `<stem>_sigma.csv`
/// or `jumps.csv` / `sigma.csv` in the same directory.
inline SamplePath load_path(const std::filesystem::path& p) {
    std::filesystem::path sidecar = p;
    sidecar.replace_extension(".json");
    std::optional<json> meta;
    if (std::filesystem::exists(sidecar)) meta = read_json_file(sidecar);

    SamplePath path;
    if (p.extension() == ".bin") {
        if (!meta) throw IoError("binary path " + p.string() + " needs its JSON sidecar for the dimension");
        const Mat values = read_path_binary(p, (*meta)["d"].get<int>());
        path = meta->contains("dt") ? SamplePath((*meta)["dt"].get<double>(), values) : SamplePath::without_dt(values);
    } else {
        std::string header;
        const auto rows = read_csv_numbers(p, &header);
        if (rows.size() < 2) throw IoError(p.string() + ": need at least two grid points");
        const auto d = static_cast<Eigen::Index>(rows[0].size()) - 1;
        if (d < 1) throw IoError(p.string() + ": expected columns t,y1,...,yd");
        Mat values(d, static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (static_cast<Eigen::Index>(rows[k].size()) != d + 1) throw IoError(p.string() + ": ragged row");
            for (Eigen::Index i = 0; i < d; ++i) values(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<std::size_t>(i + 1)];
        }
        const double dt = meta && meta->contains("dt") ? (*meta)["dt"].get<double>() : rows[1][0] - rows[0][0];
        if (!(dt > 0.0)) throw IoError(p.string() + ": t column is not increasing");
        path = SamplePath(dt, std::move(values));
    }
    if (meta && meta->contains("seed")) path.seed = (*meta)["seed"].get<std::uint64_t>();

    const auto dir = p.parent_path();
    const std::string stem = p.stem().string();
    auto sibling = [&](const std::string& suffix) -> std::optional<std::filesystem::path> {
        for (const auto& cand : {dir / (stem + "_" + suffix + ".csv"), dir / (suffix + ".csv")}) {
            if (std::filesystem::exists(cand)) return cand;
        }
        return std::nullopt;
    };
    if (auto jp = sibling("jumps")) {
        for (const auto& r : read_csv_numbers(*jp, nullptr)) {
            if (static_cast<int>(r.size()) != path.dim() + 2) throw IoError(jp->string() + ": ragged row");
            JumpMark m;
            m.interval = static_cast<std::int64_t>(r[0]);
            m.time = r[1];
            m.size = Eigen::Map<const Vec>(r.data() + 2, path.dim());
            path.jump_marks.push_back(std::move(m));
        }
    }
    if (auto sp = sibling("sigma")) {
        std::vector<Mat> sig;
        const int d = path.dim();
        for (const auto& r : read_csv_numbers(*sp, nullptr)) {
            if (static_cast<int>(r.size()) != d * d + 1) throw IoError(sp->string() + ": ragged row");
            Mat s(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s(i, j) = r[static_cast<std::size_t>(1 + i * d + j)];
            sig.push_back(std::move(s));
        }
        path.sigma_path = std::move(sig);
    }
    return path;
}

// ---- reports ---------------------------------------------------------------------

inline json to_json(const FilterReport& f) {
    return {{"mode", to_string(f.mode)},         {"removed", f.removed},
            {"true_positive", f.true_positive}, {"false_positive", f.false_positive},
            {"false_negative", f.false_negative}, {"true_negative", f.true_negative}};
}

inline json to_json(const LikelihoodStats& s) {
    json j;
    j["d"] = s.d;
    j["horizon"] = s.t_end;
    j["steps"] = s.steps;
    if (s.has_theta) {
        j["h"] = to_json(s.h);
        j["h_quad"] = to_json(s.h_quad);
    }
    if (s.has_psi) {
        j["i_vec"] = to_json(s.i_vec);
        j["k"] = to_json(s.k);
    }
    j["filter"] = to_json(s.filter);
    return j;
}

inline json to_json(const EstimateReport& r) {
    json j;
    j["kind"] = to_string(r.kind);
    j["d"] = r.d;
    j["horizon"] = r.horizon;
    j["estimate"] = to_json(r.estimate);
    if (r.kind != EstimateKind::Theta) j["estimate_matrix"] = to_json(Mat(vec_inverse(r.estimate)));
    if (r.info_matrix.size() > 0) j["info_matrix"] = to_json(r.info_matrix);
    if (r.cov_clt) j["cov_clt"] = to_json(*r.cov_clt);
    if (r.truth) j["truth"] = to_json(*r.truth);
    if (r.standardized) j["standardized"] = to_json(*r.standardized);
    if (r.ci_halfwidths) {
        j["ci_level"] = r.ci_level;
        j["ci_halfwidths"] = to_json(*r.ci_halfwidths);
    }
    return j;
}

inline json to_json(const LassoResult& r) {
    json j;
    j["lambda"] = r.lambda;
    j["sweeps"] = r.sweeps;
    j["q_al"] = to_json(r.q_al);
    j["support"] = r.support;
    j["adjacency_estimate"] = to_json(r.adjacency_estimate);
    j["weights"] = to_json(r.weights);
    j["objective_trace"] = r.objective_trace;
    return j;
}

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    if (v) {
        if constexpr (std::is_same_v<T, Mat>) j[key] = to_json(*v);
        else j[key] = *v;
    }
}

inline json to_json(const HorizonTable& t) {
    json j;
    j["horizon"] = t.horizon;
    j["successes"] = t.successes;
    j["failures"] = t.failures;
    j["bias"] = to_json(t.bias);
    j["rmse"] = to_json(t.rmse);
    j["empirical_cov"] = to_json(t.empirical_cov);
    j["target_cov"] = to_json(t.target_cov);
    json cov;
    for (std::size_t l = 0; l < kCoverageLevels.size(); ++l) {
        cov[fmt(kCoverageLevels[l])] = to_json(t.coverage[l]);
    }
    j["coverage"] = cov;
    j["ks_pvalues"] = to_json(t.ks_pvalues);
    j["mahalanobis_pvalue"] = t.mahalanobis_pvalue;
    put_opt(j, "cov_standardized_observed", t.cov_standardized_observed);
    put_opt(j, "cov_standardized_deterministic", t.cov_standardized_deterministic);
    put_opt(j, "ergodic_median_error", t.ergodic_median_error);
    put_opt(j, "filter_recall", t.filter_recall);
    put_opt(j, "support_exact_rate", t.support_exact_rate);
    put_opt(j, "support_tpr", t.support_tpr);
    put_opt(j, "support_fpr", t.support_fpr);
    put_opt(j, "kkt_failures", t.kkt_failures);
    put_opt(j, "kkt_max_residual", t.kkt_max_residual);
    put_opt(j, "lambda_zero_max_diff", t.lambda_zero_max_diff);
    put_opt(j, "restricted_mahalanobis_pvalue", t.restricted_mahalanobis_pvalue);
    put_opt(j, "restricted_count", t.restricted_count);
    return j;
}

inline json to_json(const McReport& r) {
    json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["replicates"] = r.replicates;
    j["d"] = r.dim;
    j["truth"] = to_json(r.truth);
    json tabs = json::array();
    for (const auto& t : r.tables) tabs.push_back(to_json(t));
    j["tables"] = tabs;
    if (r.tables.size() >= 3) j["rmse_slope"] = to_json(rmse_slope(r));
    json fails = json::array();
    for (const auto& f : r.failures) {
        fails.push_back({{"replicate", f.replicate}, {"horizon", f.horizon}, {"message", f.message}});
    }
    j["failures"] = fails;
    return j;
}

/// Flat per-coordinate table: horizon,coordinate,bias,rmse,cov90,cov95,cov99,ks_p.
inline std::string mc_coordinates_csv(const McReport& r) {
    std::ostringstream out;
    out << "horizon,coordinate,bias,rmse,coverage90,coverage95,coverage99,ks_pvalue\n";
    for (const auto& t : r.tables) {
        for (Eigen::Index j = 0; j < t.bias.size(); ++j) {
            out << fmt(t.horizon) << ',' << j << ',' << fmt(t.bias[j]) << ',' << fmt(t.rmse[j]) << ','
                << fmt(t.coverage[0][j]) << ',' << fmt(t.coverage[1][j]) << ',' << fmt(t.coverage[2][j]) << ','
                << fmt(t.ks_pvalues[j]) << '\n';
        }
    }
    return out.str();
}

/// horizon,which,i,j,value for the empirical and target covariances.
inline std::string mc_covariance_csv(const McReport& r) {
    std::ostringstream out;
    out << "horizon,matrix,i,j,value\n";
    for (const auto& t : r.tables) {
        for (const auto& [name, m] : {std::pair<const char*, const Mat*>{"empirical", &t.empirical_cov},
                                      std::pair<const char*, const Mat*>{"target", &t.target_cov}}) {
            for (Eigen::Index i = 0; i < m->rows(); ++i)
                for (Eigen::Index j = 0; j < m->cols(); ++j)
                    out << fmt(t.horizon) << ',' << name << ',' << i << ',' << j << ',' << fmt((*m)(i, j)) << '\n';
        }
    }
    return out.str();
}

/// One row per horizon with the scalar summaries (empty cells when absent).
inline std::string mc_summary_csv(const McReport& r) {
    std::ostringstream out;
    out << "horizon,successes,failures,mahalanobis_pvalue,ergodic_median_error,filter_recall,"
           "support_exact_rate,support_tpr,support_fpr,kkt_failures,lambda_zero_max_diff\n";
    auto o = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& t : r.tables) {
        out << fmt(t.horizon) << ',' << t.successes << ',' << t.failures << ',' << fmt(t.mahalanobis_pvalue) << ','
            << o(t.ergodic_median_error) << ',' << o(t.filter_recall) << ',' << o(t.support_exact_rate) << ','
            << o(t.support_tpr) << ',' << o(t.support_fpr) << ','
            << (t.kkt_failures ? std::to_string(*t.kkt_failures) : std::string()) << ','
            << o(t.lambda_zero_max_diff) << '\n';
    }
    return out.str();
}

}  // namespace grou::io
