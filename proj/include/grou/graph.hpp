#pragma once

#include "grou/error.hpp"
#include "grou/linalg.hpp"
#include "grou/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace grou {

/// Static graph on d nodes with a 0/1 adjacency matrix and empty diagonal.
/// The adjacency matrix need not be symmetric.
class Graph {
public:
    Graph() = default;

    explicit Graph(Mat adjacency) : adj_(std::move(adjacency)) {
        if (adj_.rows() != adj_.cols() || adj_.rows() == 0) {
            throw DimensionError("Graph: adjacency must be a non-empty square matrix");
        }
        for (Eigen::Index i = 0; i < adj_.rows(); ++i) {
            for (Eigen::Index j = 0; j < adj_.cols(); ++j) {
                const double a = adj_(i, j);
                if (a != 0.0 && a != 1.0) {
                    throw ContractViolation("Graph: adjacency entries must be 0 or 1");
                }
                if (i == j && a != 0.0) {
                    throw ContractViolation("Graph: adjacency diagonal must be zero (node " + std::to_string(i) + ")");
                }
            }
        }
    }

    static Graph edgeless(int d) { return Graph(Mat::Zero(d, d)); }

    static Graph complete(int d) {
        Mat a = Mat::Ones(d, d);
        a.diagonal().setZero();
        return Graph(std::move(a));
    }

    /// Undirected cycle 0-1-...-(d-1)-0.
    static Graph ring(int d) {
        Mat a = Mat::Zero(d, d);
        if (d == 2) {
            a(0, 1) = a(1, 0) = 1;
        } else if (d > 2) {
            for (int i = 0; i < d; ++i) {
                a(i, (i + 1) % d) = 1;
                a((i + 1) % d, i) = 1;
            }
        }
        return Graph(std::move(a));
    }

    /// Undirected star with node 0 as the hub.
    static Graph star(int d) {
        Mat a = Mat::Zero(d, d);
        for (int i = 1; i < d; ++i) {
            a(0, i) = a(i, 0) = 1;
        }
        return Graph(std::move(a));
    }

    /// Undirected Erdos-Renyi G(d, p); each unordered pair is an edge with
    /// probability p, drawn from the Graph stream of `seed`.
    static Graph erdos_renyi(int d, double p, std::uint64_t seed) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("erdos_renyi: p must lie in [0, 1]");
        }
        Rng rng(seed, 0, Stream::Graph);
        Mat a = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (rng.uniform() < p) {
                    a(i, j) = a(j, i) = 1;
                }
            }
        }
        return Graph(std::move(a));
    }

    [[nodiscard]] int size() const noexcept { return static_cast<int>(adj_.rows()); }
    [[nodiscard]] const Mat& adjacency() const noexcept { return adj_; }
    [[nodiscard]] int edge_count() const noexcept { return static_cast<int>(adj_.sum()); }

    /// Edgeless graphs are valid but the network effect cannot be estimated.
    [[nodiscard]] bool network_identifiable() const noexcept { return edge_count() > 0; }

    friend bool operator==(const Graph& a, const Graph& b) { return a.adj_ == b.adj_; }

private:
    Mat adj_;
};

/// Row i divided by max(1, degree of i); isolated nodes give zero rows.
inline Mat row_normalize(const Graph& g) {
    Mat out = g.adjacency();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double n = std::max(1.0, out.row(i).sum());
        out.row(i) /= n;
    }
    return out;
}

struct ThetaParams {
    double network = 0.0;   // theta_1
    double momentum = 0.0;  // theta_2

    [[nodiscard]] Vec as_vector() const { return (Vec(2) << network, momentum).finished(); }
    static ThetaParams from_vector(const Vec& v) { return {v[0], v[1]}; }
};

struct PsiParams {
    Vec psi;  // length d^2, column-stacked
};

enum class Provenance { FromTheta, FromPsi, Free };

struct DynamicsMatrix {
    Mat q;
    Provenance provenance = Provenance::Free;

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(q.rows()); }
};

inline DynamicsMatrix q_from_theta(const Graph& g, const ThetaParams& p) {
    const int d = g.size();
    return {p.momentum * Mat::Identity(d, d) + p.network * row_normalize(g), Provenance::FromTheta};
}

/// Hadamard mask (I + A_bar); vec of it is the diagonal of D_A.
inline Mat network_mask(const Graph& g) {
    return Mat::Identity(g.size(), g.size()) + row_normalize(g);
}

inline DynamicsMatrix q_from_psi(const Graph& g, const PsiParams& p) {
    const auto d = static_cast<Eigen::Index>(g.size());
    if (p.psi.size() != d * d) {
        throw DimensionError("q_from_psi: psi has length " + std::to_string(p.psi.size()) + ", expected " +
                             std::to_string(d * d));
    }
    return {network_mask(g).cwiseProduct(vec_inverse(p.psi)), Provenance::FromPsi};
}

struct StationarityCheck {
    bool stationary = false;
    int failing_row = -1;  // -1 when not applicable
    std::string reason;

    explicit operator bool() const noexcept { return stationary; }
};

/// Gersgorin sufficient condition theta_2 > 0 and theta_2 > |theta_1|.
inline StationarityCheck check_stationary_theta(const ThetaParams& p) {
    if (!(p.momentum > 0.0)) {
        return {false, -1, "momentum theta_2 must be > 0"};
    }
    if (!(p.momentum > std::abs(p.network))) {
        return {false, -1, "momentum theta_2 must dominate |theta_1|"};
    }
    return {true, -1, "theta_2 > |theta_1| and theta_2 > 0"};
}

/// Row-wise strict diagonal dominance with positive diagonal, applied to the
/// assembled Q(psi).
inline StationarityCheck check_stationary_psi(const Graph& g, const PsiParams& p) {
    const Mat q = q_from_psi(g, p).q;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        const double off = q.row(i).cwiseAbs().sum() - std::abs(q(i, i));
        if (!(q(i, i) > 0.0)) {
            return {false, static_cast<int>(i), "row " + std::to_string(i) + ": diagonal entry not positive"};
        }
        if (!(q(i, i) > off)) {
            return {false, static_cast<int>(i), "row " + std::to_string(i) + ": not strictly diagonally dominant"};
        }
    }
    return {true, -1, "Q(psi) strictly diagonally dominant with positive diagonal"};
}

/// Ground truth: every eigenvalue has real part above 1e-12 * ||Q||_1.
inline bool check_stationary_spectral(const Mat& q) {
    const double scale = std::max(norm1(q), std::numeric_limits<double>::min());
    return min_real_eigenvalue(q) > 1e-12 * scale;
}

inline bool check_stationary_spectral(const DynamicsMatrix& q) { return check_stationary_spectral(q.q); }

// ---- IO ---------------------------------------------------------------------

/// Edge list: one `i j` pair per line (0-based), `#` starts a comment.
/// Each line sets a_ij = 1. When `d` is not given, it is max index + 1.
inline Graph read_edge_list(std::istream& in, std::optional<int> d = std::nullopt) {
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int max_index = -1;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream ls(line);
        int i = 0;
        int j = 0;
        if (!(ls >> i)) {
            continue;
        }
        if (!(ls >> j) || i < 0 || j < 0) {
            throw ConfigError("edge list line " + std::to_string(line_no) + ": expected `i j`");
        }
        edges.emplace_back(i, j);
        max_index = std::max({max_index, i, j});
    }
    const int n = d.value_or(max_index + 1);
    if (n <= 0) {
        throw ConfigError("edge list: cannot infer node count from an empty list");
    }
    Mat a = Mat::Zero(n, n);
    for (const auto& [i, j] : edges) {
        if (i >= n || j >= n) {
            throw ConfigError("edge list: index out of range for d = " + std::to_string(n));
        }
        if (i == j) {
            throw ContractViolation("edge list: self-loop on node " + std::to_string(i));
        }
        a(i, j) = 1;
    }
    return Graph(std::move(a));
}

inline void write_edge_list(std::ostream& out, const Mat& adjacency) {
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
            if (adjacency(i, j) != 0.0) {
                out << i << ' ' << j << '\n';
            }
        }
    }
}

/// Dense 0/1 CSV, one row per line.
inline Graph read_adjacency_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("adjacency csv: bad cell '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n) {
            throw DimensionError("adjacency csv: row " + std::to_string(i) + " has wrong length");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = rows[i][j];
        }
    }
    return Graph(std::move(a));
}

inline Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open graph file " + path);
    }
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return read_adjacency_csv(in);
    }
    return read_edge_list(in);
}

}  // namespace grou
