#pragma once
#include <vector>
#include <Eigen/Dense>

namespace bglmb {

struct AssignmentResult {
    std::vector<int> row_to_col;  // one column per row
    double cost = 0.0;
    bool feasible = false;
};

/// Exact minimum-cost assignment of every row to a distinct column.
/// Requires rows <= cols; +inf entries mark forbidden pairs. Infeasible
/// instances (no finite full assignment) come back with feasible = false.
AssignmentResult optimal_assignment(const Eigen::MatrixXd& cost);

/// Up to k cheapest full assignments in nondecreasing cost order
/// (Murty partitioning over optimal_assignment).
std::vector<AssignmentResult> murty(const Eigen::MatrixXd& cost, int k);

/// theta: per-label measurement index in {0, 1, ..., |Z|}, 0 = missed detection.
using AssociationMap = std::vector<int>;

struct RankedMap {
    AssociationMap theta;
    double weight = 0.0;
};

/// The K highest-weight association maps of an |L| x (|Z|+1) nonnegative score
/// matrix, ranked by the product of per-label scores. Column 0 is the missed
/// detection score and stays available to every label simultaneously; columns
/// 1..|Z| are one-to-one. Exact top-K; zero-weight maps are not emitted.
std::vector<RankedMap> ranked_assignment(const Eigen::MatrixXd& scores, int k);

}  // namespace bglmb
