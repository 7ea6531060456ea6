#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "bglmb/models.hpp"
#include "bglmb/rng.hpp"
#include "bglmb/types.hpp"

namespace bglmb {

/// One scripted target: alive on frames [birth, death).
struct TargetScript {
    int birth = 1;
    int death = 101;
    KinematicState x0;  // coordinated-turn layout [px, vx, py, vy, omega]
};

/// Synthetic scenario description (see scenarios/*.scn for the file format).
struct ScenarioSpec {
    int duration = 100;
    Region region;
    SensorKind sensor = SensorKind::BearingRange;
    CoordinatedTurnModel ct;
    BearingRangeModel bearing_range;
    LinearPositionModel linear;
    double p_d = 0.98;
    std::vector<TargetScript> targets;
    // piecewise-constant clutter rate: (from_frame, rate), sorted by frame
    std::vector<std::pair<int, double>> clutter_steps{{1, 10.0}};
    std::uint64_t seed = 0;

    double clutter_rate_at(int frame) const;
    void validate() const;  // throws DataError on inconsistent scripts
};

struct GroundTruth {
    int duration = 0;
    /// frames[k] holds (script index, state) pairs present at frame k+1.
    std::vector<std::vector<std::pair<int, KinematicState>>> frames;
    /// true clutter count per frame, filled in by generate_measurements
    std::vector<int> clutter_counts;

    std::vector<Track> to_tracks() const;
};

/// Propagate every scripted target through the coordinated-turn transition
/// between its birth and death frames. Deterministic under the rng seed.
GroundTruth generate_truth(const ScenarioSpec& spec, Rng& rng);

/// Detect each present target with probability p_d, draw the measurement from
/// the sensor likelihood, add Poisson clutter uniform on the measurement
/// space, shuffle. Points outside the observation region are dropped.
std::vector<DetectionSet> generate_measurements(GroundTruth& truth, const ScenarioSpec& spec,
                                                Rng& rng);

}  // namespace bglmb
