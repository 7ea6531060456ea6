#include "bglmb/pipeline.hpp"

#include <chrono>
#include <numeric>

#include "bglmb/errors.hpp"

namespace bglmb {

TrackerConfig TrackerConfig::defaults() {
    TrackerConfig cfg;
    cfg.models.ct = {1.0, 5.0, M_PI / 180.0};
    cfg.models.cv = {1.0, 5.0};
    cfg.models.rw = {20.0};
    cfg.models.bearing_range = {2.0 * M_PI / 180.0, 10.0, Eigen::Vector2d::Zero()};
    cfg.models.linear = make_linear_position_model(5, 25.0 * Eigen::Matrix2d::Identity());
    cfg.models.sd = {0.99, 0.90, 0.98, 0.50};

    const double sites[4][2] = {{0, 800}, {-700, -300}, {700, -300}, {-300, 300}};
    for (const auto& s : sites) {
        BirthEntry entry;
        entry.r = 0.03;
        entry.cls = ClassLabel::Target;
        entry.density = birth_site_density(s[0], s[1], 5, 30.0, 15.0, 0.06);
        cfg.glmb_birth.entries.push_back(entry);
        cfg.rmb_birth.entries.push_back(entry);
    }
    for (int i = 0; i < 2; ++i) {
        BirthEntry spray;
        spray.r = 0.3;
        spray.cls = ClassLabel::Clutter;
        spray.uniform_over_region = true;
        cfg.rmb_birth.entries.push_back(spray);
    }
    return cfg;
}

Pipeline::Pipeline(TrackerConfig cfg)
    : cfg_(std::move(cfg)), glmb_(GlmbDensity::empty(0)), rng_(cfg_.seed) {
    cfg_.models.sd.validate();
    if (cfg_.lambda_window < 1) throw DataError("lambda window must be at least 1");
    if (!(cfg_.lambda_min > 0.0)) throw DataError("lambda floor must be positive");
}

FrameResult Pipeline::process_frame(const DetectionSet& detections) {
    const auto t0 = std::chrono::steady_clock::now();
    FrameResult result;
    result.frame = glmb_.frame + 1;

    double lambda_smoothed;
    if (cfg_.fixed_clutter) {
        result.clutter.frame = result.frame;
        result.clutter.lambda_hat = *cfg_.fixed_clutter;
        lambda_smoothed = *cfg_.fixed_clutter;
    } else {
        rmb_ = rmb_predict(rmb_, cfg_.models, cfg_.rmb_birth, cfg_.rmb, rng_);
        rmb_ = rmb_update(rmb_, detections, cfg_.models, cfg_.rmb);
        result.clutter = estimate_clutter_rate(rmb_, cfg_.models.sd.p_d0);
        rmb_ = prune_merge_resample(rmb_, cfg_.rmb);
        lambda_hist_.push_back(result.clutter.lambda_hat);
        while (static_cast<int>(lambda_hist_.size()) > cfg_.lambda_window)
            lambda_hist_.pop_front();
        lambda_smoothed = std::accumulate(lambda_hist_.begin(), lambda_hist_.end(), 0.0)
            / static_cast<double>(lambda_hist_.size());
    }
    result.lambda_used = std::max(lambda_smoothed, cfg_.lambda_min);
    const double kappa =
        result.lambda_used / meas_space_area(cfg_.models.sensor, cfg_.models.region);

    glmb_ = glmb_predict(glmb_, cfg_.models, cfg_.glmb_birth, cfg_.glmb);
    glmb_ = glmb_update(glmb_, detections, cfg_.models, kappa, cfg_.glmb);
    result.estimates = extract_estimates(glmb_);
    result.hypothesis_count = static_cast<int>(glmb_.hypotheses.size());

    for (const auto& [label, state] : result.estimates) {
        auto [it, fresh] = track_index_.try_emplace(label, static_cast<int>(tracks_.size()));
        if (fresh) {
            Track t;
            t.id = static_cast<int>(tracks_.size()) + 1;
            t.label = label;
            tracks_.push_back(std::move(t));
        }
        tracks_[it->second].points.push_back({result.frame, position_of(state), state});
    }

    result.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

RunResult run_sequence(const std::vector<DetectionSet>& detections, const TrackerConfig& cfg) {
    if (detections.empty()) throw DataError("run_sequence: empty detection sequence");
    Pipeline pipeline(cfg);
    RunResult out;
    out.frames.reserve(detections.size());
    for (const auto& z : detections) out.frames.push_back(pipeline.process_frame(z));
    out.tracks = pipeline.tracks();
    return out;
}

}  // namespace bglmb
