#pragma once
#include <compare>
#include <vector>
#include <Eigen/Dense>

namespace bglmb {

/// Kinematic state vector. Layout depends on the owning motion model:
/// coordinated turn [px, vx, py, vy, omega] (dim 5), constant velocity
/// [px, vx, py, vy] (dim 4). Positions are always entries 0 and 2.
using KinematicState = Eigen::VectorXd;

inline constexpr int kPosX = 0;
inline constexpr int kPosY = 2;

inline Eigen::Vector2d position_of(const KinematicState& x) {
    return {x(kPosX), x(kPosY)};
}

/// Class label on the augmented state space: clutter generator or actual target.
enum class ClassLabel : int { Clutter = 0, Target = 1 };

enum class SensorKind { BearingRange, LinearPosition };
enum class MotionKind { CoordinatedTurn, ConstantVelocity };

/// Rectangular surveillance region. For bearing-range sensing the
/// measurement space is the rectangle [-pi, pi] x [0, range_max].
struct Region {
    double xmin = -1000.0, xmax = 1000.0;
    double ymin = -1000.0, ymax = 1000.0;
    double range_max = 1500.0;

    double area() const { return (xmax - xmin) * (ymax - ymin); }
    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
};

/// Area of the measurement space (the clutter spatial density is its inverse).
double meas_space_area(SensorKind sensor, const Region& region);

/// One frame's measurement finite set: (theta, range) pairs or (x, y) positions.
struct DetectionSet {
    int frame = 0;
    std::vector<Eigen::Vector2d> points;
};

/// Track label: (birth frame, birth index), ordered lexicographically.
struct Label {
    int frame = 0;
    int index = 0;
    auto operator<=>(const Label&) const = default;
};

struct TrackPoint {
    int frame = 0;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::VectorXd state;  // full kinematic state when available
};

/// One label's time-stamped trajectory.
struct Track {
    int id = 0;  // serialized integer id (assigned in order of first appearance)
    Label label;
    std::vector<TrackPoint> points;  // frame indices strictly increasing

    int birth_frame() const { return points.empty() ? -1 : points.front().frame; }
    int last_frame() const { return points.empty() ? -1 : points.back().frame; }
};

}  // namespace bglmb
