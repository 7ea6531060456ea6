#pragma once
#include <vector>

#include "bglmb/models.hpp"
#include "bglmb/rng.hpp"
#include "bglmb/types.hpp"

namespace bglmb {

/// Existence probabilities are kept strictly below 1 so the update equations
/// (which divide by 1 - r terms) stay finite.
inline constexpr double kMaxExistence = 1.0 - 1e-6;

struct HybridParticle {
    KinematicState x;
    ClassLabel u = ClassLabel::Target;
    double w = 0.0;
};

/// One Bernoulli component of the robust multi-Bernoulli filter: existence
/// probability plus a weighted particle set over the hybrid
/// (kinematic x {clutter, target}) space.
struct HybridBernoulli {
    double r = 0.0;
    std::vector<HybridParticle> particles;

    double weight_sum() const;
    double clutter_fraction() const;  // total particle weight with u = 0
};

struct RmbState {
    int frame = 0;
    std::vector<HybridBernoulli> components;

    double existence_sum() const;
};

/// Per-frame estimated clutter rate with the generator statistics behind it.
struct ClutterEstimate {
    int frame = 0;
    double lambda_hat = 0.0;
    double n_clutter_gen = 0.0;  // EAP clutter-generator count
};

struct RmbParams {
    int n_particles = 1000;
    double r_prune = 1e-3;
    int m_max = 100;
};

/// Prediction: birth components followed by survivors, each particle pushed
/// through its own class's transition, weights scaled by the class survival
/// probability and renormalized.
RmbState rmb_predict(const RmbState& state, const ModelSet& models, const BirthSpec& birth,
                     const RmbParams& params, Rng& rng);

/// Measurement update: one legacy component per predicted component plus one
/// measurement-updated component per detection. Deterministic (measurement
/// components are reduced to n_particles by fixed-offset systematic resampling).
RmbState rmb_update(const RmbState& state, const DetectionSet& detections,
                    const ModelSet& models, const RmbParams& params);

/// EAP clutter rate: sum over components of r times the clutter weight
/// fraction, scaled by the clutter-generator detection probability.
ClutterEstimate estimate_clutter_rate(const RmbState& state, double p_d0);

/// Drop components below r_prune, cap at m_max by existence, resample every
/// survivor back to n_particles with equal weights.
RmbState prune_merge_resample(const RmbState& state, const RmbParams& params);

/// Fixed-offset systematic resampling; weights need not be normalized.
std::vector<int> systematic_resample_indices(const std::vector<double>& weights, int n);

}  // namespace bglmb
