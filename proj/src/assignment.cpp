#include "bglmb/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace bglmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

AssignmentResult optimal_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    AssignmentResult res;
    res.row_to_col.assign(n, -1);
    if (n == 0) {
        res.feasible = true;
        return res;
    }
    if (n > m) throw std::invalid_argument("optimal_assignment: needs rows <= cols");

    // shortest augmenting path with potentials, 1-indexed with column 0 sentinel
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (!(delta < kInf)) return res;  // no finite augmenting path
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) res.row_to_col[p[j] - 1] = j - 1;
    res.cost = 0.0;
    for (int i = 0; i < n; ++i) res.cost += cost(i, res.row_to_col[i]);
    res.feasible = std::isfinite(res.cost);
    return res;
}

namespace {

// a Murty subproblem: pairs fixed into the solution plus forbidden pairs
struct MurtyNode {
    std::vector<std::pair<int, int>> forced;
    std::vector<std::pair<int, int>> forbidden;
    AssignmentResult best;
    std::uint64_t seq = 0;
};

struct NodeOrder {
    bool operator()(const MurtyNode& a, const MurtyNode& b) const {
        if (a.best.cost != b.best.cost) return a.best.cost > b.best.cost;
        return a.seq > b.seq;
    }
};

// solve the reduced problem and translate back to full-matrix indices
bool solve_node(const Eigen::MatrixXd& cost, MurtyNode& node) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    std::vector saved_row(n, false), saved_col(m, false);
    for (auto [r, c] : node.forced) {
        saved_row[r] = true;
        saved_col[c] = true;
    }
    std::vector<int> rows, cols;
    for (int r = 0; r < n; ++r)
        if (!saved_row[r]) rows.push_back(r);
    for (int c = 0; c < m; ++c)
        if (!saved_col[c]) cols.push_back(c);

    Eigen::MatrixXd sub(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = cost(rows[i], cols[j]);
    for (auto [r, c] : node.forbidden) {
        const auto ri = std::find(rows.begin(), rows.end(), r);
        const auto ci = std::find(cols.begin(), cols.end(), c);
        if (ri != rows.end() && ci != cols.end())
            sub(ri - rows.begin(), ci - cols.begin()) = kInf;
    }
    AssignmentResult sol = optimal_assignment(sub);
    if (!sol.feasible) return false;

    node.best.row_to_col.assign(n, -1);
    node.best.cost = sol.cost;
    for (auto [r, c] : node.forced) {
        node.best.row_to_col[r] = c;
        node.best.cost += cost(r, c);
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        node.best.row_to_col[rows[i]] = cols[sol.row_to_col[i]];
    node.best.feasible = std::isfinite(node.best.cost);
    return node.best.feasible;
}

}  // namespace

std::vector<AssignmentResult> murty(const Eigen::MatrixXd& cost, int k) {
    if (k <= 0) throw std::invalid_argument("murty: k must be positive");
    std::vector<AssignmentResult> out;
    const int n = static_cast<int>(cost.rows());
    if (n == 0) {
        AssignmentResult empty;
        empty.feasible = true;
        out.push_back(empty);
        return out;
    }

    std::priority_queue<MurtyNode, std::vector<MurtyNode>, NodeOrder> pq;
    std::uint64_t seq = 0;
    MurtyNode root;
    root.seq = seq++;
    if (!solve_node(cost, root)) return out;
    pq.push(std::move(root));

    while (!pq.empty() && static_cast<int>(out.size()) < k) {
        MurtyNode node = pq.top();
        pq.pop();
        out.push_back(node.best);

        // partition: walk the emitted solution, branching on each free pair
        MurtyNode base;
        base.forced = node.forced;
        base.forbidden = node.forbidden;
        std::vector<char> is_forced(n, 0);
        for (auto [r, c] : node.forced) is_forced[r] = 1;
        for (int r = 0; r < n; ++r) {
            if (is_forced[r]) continue;
            MurtyNode child = base;
            child.forbidden.emplace_back(r, node.best.row_to_col[r]);
            child.seq = seq++;
            if (solve_node(cost, child)) pq.push(std::move(child));
            base.forced.emplace_back(r, node.best.row_to_col[r]);
        }
    }
    return out;
}

std::vector<RankedMap> ranked_assignment(const Eigen::MatrixXd& scores, int k) {
    if (k <= 0) throw std::invalid_argument("ranked_assignment: k must be positive");
    const int n_rows = static_cast<int>(scores.rows());
    const int n_meas = static_cast<int>(scores.cols()) - 1;
    if (n_meas < 0) throw std::invalid_argument("ranked_assignment: need a miss column");
    if (scores.size() > 0 && scores.minCoeff() < 0.0)
        throw std::invalid_argument("ranked_assignment: scores must be nonnegative");

    if (n_rows == 0) {
        return {RankedMap{{}, 1.0}};
    }

    // columns: measurements first, then one private miss column per row
    Eigen::MatrixXd cost(n_rows, n_meas + n_rows);
    cost.setConstant(kInf);
    for (int i = 0; i < n_rows; ++i) {
        for (int j = 0; j < n_meas; ++j) cost(i, j) = -std::log(scores(i, j + 1));
        cost(i, n_meas + i) = -std::log(scores(i, 0));
    }

    std::vector<RankedMap> out;
    for (const AssignmentResult& sol : murty(cost, k)) {
        RankedMap rm;
        rm.theta.assign(n_rows, 0);
        rm.weight = 1.0;
        for (int i = 0; i < n_rows; ++i) {
            const int c = sol.row_to_col[i];
            rm.theta[i] = c < n_meas ? c + 1 : 0;
            rm.weight *= scores(i, rm.theta[i]);
        }
        out.push_back(std::move(rm));
    }
    return out;
}

}  // namespace bglmb
