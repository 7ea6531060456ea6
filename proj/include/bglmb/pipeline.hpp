#pragma once
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bglmb/glmb.hpp"
#include "bglmb/rmb.hpp"
#include "bglmb/rng.hpp"

namespace bglmb {

/// Full tracker parameterization. Everything here comes from the
/// configuration file; nothing is hard-coded in the filters.
struct TrackerConfig {
    ModelSet models;
    BirthSpec rmb_birth;   // target sites plus clutter-generator spray entries
    BirthSpec glmb_birth;  // target sites only
    RmbParams rmb;
    GlmbParams glmb;
    std::uint64_t seed = 0;
    int lambda_window = 10;   // moving-average width for the plugged-in rate; 1 = raw
    double lambda_min = 0.1;  // floor before the clutter density division
    std::optional<double> fixed_clutter;  // set: plain GLMB with a constant rate

    /// Defaults matching the shipped synthetic scenario.
    static TrackerConfig defaults();
};

struct FrameResult {
    int frame = 0;
    ClutterEstimate clutter;
    double lambda_used = 0.0;  // smoothed + floored rate fed to the GLMB
    std::vector<std::pair<Label, KinematicState>> estimates;
    int hypothesis_count = 0;
    double duration_s = 0.0;
};

/// The boosted tracker: a one-step RMB filter estimates the clutter rate
/// each frame and plugs it into the GLMB update. With fixed_clutter set the
/// RMB stage is bypassed and the plain GLMB runs at the given constant rate.
class Pipeline {
public:
    explicit Pipeline(TrackerConfig cfg);

    FrameResult process_frame(const DetectionSet& detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    const RmbState& rmb_state() const { return rmb_; }
    const GlmbDensity& glmb_density() const { return glmb_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    RmbState rmb_;
    GlmbDensity glmb_;
    Rng rng_;
    std::deque<double> lambda_hist_;
    std::vector<Track> tracks_;
    std::map<Label, int> track_index_;
};

struct RunResult {
    std::vector<Track> tracks;
    std::vector<FrameResult> frames;
};

/// Fold the pipeline over a detection sequence from empty initial states.
RunResult run_sequence(const std::vector<DetectionSet>& detections, const TrackerConfig& cfg);

}  // namespace bglmb
