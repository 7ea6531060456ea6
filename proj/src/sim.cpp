#include "bglmb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bglmb/errors.hpp"

namespace bglmb {

double ScenarioSpec::clutter_rate_at(int frame) const {
    double rate = 0.0;
    for (const auto& [from, r] : clutter_steps)
        if (frame >= from) rate = r;
    return rate;
}

void ScenarioSpec::validate() const {
    if (duration < 1) throw DataError("scenario: duration must be at least 1");
    for (const auto& t : targets) {
        if (!(t.birth < t.death) || t.death > duration + 1 || t.birth < 1)
            throw DataError("scenario: target script needs 1 <= birth < death <= duration+1");
        if (t.x0.size() != 5) throw DataError("scenario: target state must have dim 5");
    }
    for (const auto& [from, r] : clutter_steps)
        if (r < 0.0) throw DataError("scenario: clutter rate must be nonnegative");
}

std::vector<Track> GroundTruth::to_tracks() const {
    std::vector<Track> tracks;
    std::map<int, int> index;
    for (int k = 0; k < duration; ++k) {
        for (const auto& [script, x] : frames[k]) {
            auto [it, fresh] = index.try_emplace(script, static_cast<int>(tracks.size()));
            if (fresh) {
                Track t;
                t.id = script + 1;
                t.label = {k + 1, script};
                tracks.push_back(std::move(t));
            }
            tracks[it->second].points.push_back({k + 1, position_of(x), x});
        }
    }
    return tracks;
}

GroundTruth generate_truth(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    GroundTruth truth;
    truth.duration = spec.duration;
    truth.frames.resize(spec.duration);
    truth.clutter_counts.assign(spec.duration, 0);
    for (std::size_t i = 0; i < spec.targets.size(); ++i) {
        const auto& script = spec.targets[i];
        KinematicState x = script.x0;
        for (int frame = script.birth; frame < script.death && frame <= spec.duration; ++frame) {
            truth.frames[frame - 1].emplace_back(static_cast<int>(i), x);
            x = ct_sample(x, spec.ct, rng);
        }
    }
    return truth;
}

std::vector<DetectionSet> generate_measurements(GroundTruth& truth, const ScenarioSpec& spec,
                                                Rng& rng) {
    std::vector<DetectionSet> out(truth.duration);
    for (int k = 0; k < truth.duration; ++k) {
        DetectionSet& set = out[k];
        set.frame = k + 1;
        for (const auto& [script, x] : truth.frames[k]) {
            if (rng.uniform() >= spec.p_d) continue;
            Eigen::Vector2d z;
            if (spec.sensor == SensorKind::BearingRange) {
                const Eigen::Vector2d pred = bearing_range_h(x, spec.bearing_range);
                z(0) = wrap_angle(pred(0) + spec.bearing_range.sigma_theta * rng.normal());
                z(1) = pred(1) + spec.bearing_range.sigma_r * rng.normal();
                if (z(1) < 0.0 || z(1) > spec.region.range_max) continue;
            } else {
                Eigen::LLT<Eigen::Matrix2d> llt(spec.linear.sigma);
                z = spec.linear.H * x
                    + Eigen::Vector2d(llt.matrixL() * rng.normal_vec(2));
                if (!spec.region.contains(z(0), z(1))) continue;
            }
            set.points.push_back(z);
        }
        const int n_clutter = rng.poisson(spec.clutter_rate_at(k + 1));
        truth.clutter_counts[k] = n_clutter;
        for (int i = 0; i < n_clutter; ++i) {
            Eigen::Vector2d z;
            if (spec.sensor == SensorKind::BearingRange) {
                z(0) = rng.uniform(-M_PI, M_PI);
                z(1) = rng.uniform(0.0, spec.region.range_max);
            } else {
                z(0) = rng.uniform(spec.region.xmin, spec.region.xmax);
                z(1) = rng.uniform(spec.region.ymin, spec.region.ymax);
            }
            set.points.push_back(z);
        }
        rng.shuffle(set.points);
    }
    return out;
}

}  // namespace bglmb
