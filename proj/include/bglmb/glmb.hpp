#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "bglmb/assignment.hpp"
#include "bglmb/models.hpp"
#include "bglmb/types.hpp"

namespace bglmb {

/// One label's single-object density inside a hypothesis.
struct LabeledDensity {
    Label label;
    GaussianMixture gm;
};

/// Track-table entry shared between hypotheses. Tracklets are interned by
/// (parent tracklet, association event), so equal history ids imply the same
/// label, the same measurement history and therefore the same density.
struct Tracklet {
    Label label;
    GaussianMixture gm;
    std::uint64_t history = 0;
};

/// One (label set, association history) term of the GLMB mixture. `tracks`
/// indexes the owning density's table and is kept sorted by label.
struct GlmbHypothesis {
    double w = 0.0;
    std::vector<int> tracks;
};

/// Weighted set of hypotheses with the shared tracklet table behind them.
struct GlmbDensity {
    int frame = 0;
    std::vector<Tracklet> table;
    std::vector<GlmbHypothesis> hypotheses;
    std::uint64_t next_history = 1;

    /// Single empty hypothesis with unit weight.
    static GlmbDensity empty(int frame = 0);

    std::vector<LabeledDensity> densities(const GlmbHypothesis& hyp) const;
    std::vector<double> cardinality_distribution() const;
    double weight_sum() const;
};

struct GlmbParams {
    int k_update = 100;     // association maps requested per hypothesis
    int k_predict = 20;     // survival/birth terms kept per hypothesis
    int h_max = 1000;       // hypothesis cap
    double w_prune = 1e-6;  // hypothesis prune threshold, applied after normalization
    int gm_max_terms = 10;
    double gm_prune = 1e-5;
};

/// Prediction to the next frame: per hypothesis, the best survival subsets
/// weighted by [eta_S]^J [q_S]^(L-J), expanded against the multi-Bernoulli
/// birth subsets; surviving densities are pushed through the motion model.
GlmbDensity glmb_predict(const GlmbDensity& prior, const ModelSet& models,
                         const BirthSpec& birth, const GlmbParams& params);

/// Measurement update with clutter density kappa (uniform over the
/// observation region). Association maps are enumerated exactly in weight
/// order per hypothesis; the result is truncated, pruned and renormalized.
GlmbDensity glmb_update(const GlmbDensity& predicted, const DetectionSet& detections,
                        const ModelSet& models, double kappa, const GlmbParams& params);

/// MAP-cardinality estimator: pick the most probable cardinality, then the
/// heaviest hypothesis of that size, and report each label's mixture mean.
std::vector<std::pair<Label, KinematicState>> extract_estimates(const GlmbDensity& density);

}  // namespace bglmb
