#include "bglmb/rmb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bglmb/errors.hpp"

namespace bglmb {

double HybridBernoulli::weight_sum() const {
    double s = 0.0;
    for (const auto& p : particles) s += p.w;
    return s;
}

double HybridBernoulli::clutter_fraction() const {
    double s = 0.0;
    for (const auto& p : particles)
        if (p.u == ClassLabel::Clutter) s += p.w;
    return s;
}

double RmbState::existence_sum() const {
    double s = 0.0;
    for (const auto& c : components) s += c.r;
    return s;
}

std::vector<int> systematic_resample_indices(const std::vector<double>& weights, int n) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total))
        throw NumericError("systematic resample: weights have no finite mass");
    std::vector<int> out;
    out.reserve(n);
    std::size_t j = 0;
    double cum = weights[0];
    for (int k = 0; k < n; ++k) {
        const double target = (k + 0.5) * total / n;
        while (cum <= target && j + 1 < weights.size()) cum += weights[++j];
        out.push_back(static_cast<int>(j));
    }
    return out;
}

namespace {

KinematicState sample_mixture(const GaussianMixture& gm, Rng& rng) {
    double u = rng.uniform();
    int idx = 0;
    for (; idx + 1 < gm.size(); ++idx) {
        u -= gm.w[idx];
        if (u <= 0.0) break;
    }
    const Gaussian& g = gm.comp[idx];
    Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("birth density covariance not positive definite");
    return g.mean + llt.matrixL() * rng.normal_vec(static_cast<int>(g.mean.size()));
}

HybridBernoulli sample_birth(const BirthEntry& entry, const ModelSet& models, int n, Rng& rng) {
    HybridBernoulli comp;
    comp.r = std::min(entry.r, kMaxExistence);
    comp.particles.resize(n);
    for (auto& p : comp.particles) {
        p.u = entry.cls;
        p.w = 1.0 / n;
        if (entry.uniform_over_region) {
            p.x = KinematicState::Zero(models.state_dim());
            p.x(kPosX) = rng.uniform(models.region.xmin, models.region.xmax);
            p.x(kPosY) = rng.uniform(models.region.ymin, models.region.ymax);
        } else {
            p.x = sample_mixture(entry.density, rng);
        }
    }
    return comp;
}

void renormalize(HybridBernoulli& comp) {
    const double s = comp.weight_sum();
    if (!(s > 0.0)) throw NumericError("rmb component lost all particle weight");
    for (auto& p : comp.particles) p.w /= s;
}

}  // namespace

RmbState rmb_predict(const RmbState& state, const ModelSet& models, const BirthSpec& birth,
                     const RmbParams& params, Rng& rng) {
    RmbState out;
    out.frame = state.frame + 1;
    for (const auto& entry : birth.entries)
        out.components.push_back(sample_birth(entry, models, params.n_particles, rng));

    for (const auto& comp : state.components) {
        if (comp.particles.empty()) throw std::invalid_argument("rmb component has no particles");
        HybridBernoulli survived;
        double survival_mass = 0.0;  // sum_u <p_u, p_S,u>
        survived.particles.reserve(comp.particles.size());
        for (const auto& p : comp.particles) {
            const double ps = models.sd.p_s(p.u);
            survival_mass += p.w * ps;
            HybridParticle np;
            np.u = p.u;
            np.x = motion_sample(p.x, p.u, models, rng);
            np.w = p.w * ps;
            survived.particles.push_back(std::move(np));
        }
        survived.r = std::min(comp.r * survival_mass, kMaxExistence);
        renormalize(survived);
        out.components.push_back(std::move(survived));
    }
    return out;
}

RmbState rmb_update(const RmbState& state, const DetectionSet& detections,
                    const ModelSet& models, const RmbParams& params) {
    RmbState out;
    out.frame = state.frame;
    const std::size_t n_comp = state.components.size();
    if (n_comp == 0) return out;

    const double g0 = models.clutter_meas_density();

    // clamped existence, detection mass and per-particle detection probability
    std::vector<double> r(n_comp), det_mass(n_comp);
    for (std::size_t j = 0; j < n_comp; ++j) {
        r[j] = std::min(state.components[j].r, kMaxExistence);
        double d = 0.0;
        for (const auto& p : state.components[j].particles) d += p.w * models.sd.p_d(p.u);
        det_mass[j] = d;
    }

    // legacy components (missed-detection branch)
    for (std::size_t j = 0; j < n_comp; ++j) {
        const auto& comp = state.components[j];
        HybridBernoulli legacy;
        double miss_mass = 0.0;
        legacy.particles.reserve(comp.particles.size());
        for (const auto& p : comp.particles) {
            HybridParticle np = p;
            np.w = p.w * (1.0 - models.sd.p_d(p.u));
            miss_mass += np.w;
            legacy.particles.push_back(std::move(np));
        }
        legacy.r = std::min(r[j] * miss_mass / (1.0 - r[j] * det_mass[j]), kMaxExistence);
        renormalize(legacy);
        out.components.push_back(std::move(legacy));
    }

    if (detections.points.empty()) return out;

    // cache predicted measurements of target-class particles (the expensive part)
    std::vector<std::vector<Eigen::Vector2d>> pred(n_comp);
    for (std::size_t j = 0; j < n_comp; ++j) {
        const auto& particles = state.components[j].particles;
        pred[j].resize(particles.size());
        for (std::size_t i = 0; i < particles.size(); ++i) {
            if (particles[i].u != ClassLabel::Target) continue;
            if (models.sensor == SensorKind::BearingRange)
                pred[j][i] = bearing_range_h(particles[i].x, models.bearing_range);
            else
                pred[j][i] = models.linear.H * particles[i].x;
        }
    }
    double lin_norm = 0.0;
    Eigen::Matrix2d lin_inv = Eigen::Matrix2d::Zero();
    if (models.sensor == SensorKind::LinearPosition) {
        lin_inv = models.linear.sigma.inverse();
        lin_norm = 1.0 / (2.0 * M_PI * std::sqrt(models.linear.sigma.determinant()));
    }
    const auto& br = models.bearing_range;
    const double br_norm = 1.0 / (2.0 * M_PI * br.sigma_theta * br.sigma_r);

    std::vector<double> flat_w;  // particle weights of the measurement-updated component
    for (const auto& z : detections.points) {
        flat_w.clear();
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < n_comp; ++j) {
            const auto& particles = state.components[j].particles;
            double s = 0.0;  // sum_u <p_u, g_u(z|.) p_D,u>
            for (std::size_t i = 0; i < particles.size(); ++i) {
                const auto& p = particles[i];
                double g;
                if (p.u == ClassLabel::Clutter) {
                    g = g0;
                } else if (models.sensor == SensorKind::BearingRange) {
                    const double dt = wrap_angle(z(0) - pred[j][i](0));
                    const double dr = z(1) - pred[j][i](1);
                    g = br_norm * std::exp(-0.5 * (dt * dt / (br.sigma_theta * br.sigma_theta)
                                                   + dr * dr / (br.sigma_r * br.sigma_r)));
                } else {
                    const Eigen::Vector2d nu = z - pred[j][i];
                    g = lin_norm * std::exp(-0.5 * nu.dot(lin_inv * nu));
                }
                const double val = p.w * g * models.sd.p_d(p.u);
                s += val;
                flat_w.push_back(val * r[j] / (1.0 - r[j]));
            }
            num += r[j] * (1.0 - r[j]) * s / std::pow(1.0 - r[j] * det_mass[j], 2);
            den += r[j] * s / (1.0 - r[j] * det_mass[j]);
        }

        HybridBernoulli updated;
        updated.r = den > 0.0 ? std::min(num / den, kMaxExistence) : 0.0;
        const double total = std::accumulate(flat_w.begin(), flat_w.end(), 0.0);
        if (total > 0.0) {
            const auto idx = systematic_resample_indices(flat_w, params.n_particles);
            updated.particles.reserve(idx.size());
            for (int flat : idx) {
                // invert the flat index back to (component, particle)
                std::size_t j = 0, base = 0;
                while (flat >= static_cast<int>(base + state.components[j].particles.size()))
                    base += state.components[j++].particles.size();
                HybridParticle np = state.components[j].particles[flat - base];
                np.w = 1.0 / params.n_particles;
                updated.particles.push_back(std::move(np));
            }
        } else {
            // nothing explains this measurement; keep a dead placeholder component
            updated.r = 0.0;
            updated.particles = state.components[0].particles;
            for (auto& p : updated.particles) p.w = 1.0 / updated.particles.size();
        }
        out.components.push_back(std::move(updated));
    }
    return out;
}

ClutterEstimate estimate_clutter_rate(const RmbState& state, double p_d0) {
    ClutterEstimate est;
    est.frame = state.frame;
    for (const auto& comp : state.components)
        est.n_clutter_gen += comp.r * comp.clutter_fraction();
    est.lambda_hat = std::max(0.0, est.n_clutter_gen * p_d0);
    return est;
}

RmbState prune_merge_resample(const RmbState& state, const RmbParams& params) {
    RmbState out;
    out.frame = state.frame;
    std::vector<int> keep;
    for (std::size_t j = 0; j < state.components.size(); ++j)
        if (state.components[j].r >= params.r_prune) keep.push_back(static_cast<int>(j));
    std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) {
        return state.components[a].r > state.components[b].r;
    });
    if (static_cast<int>(keep.size()) > params.m_max) keep.resize(params.m_max);

    for (int j : keep) {
        const auto& comp = state.components[j];
        std::vector<double> w(comp.particles.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = comp.particles[i].w;
        HybridBernoulli resampled;
        resampled.r = comp.r;
        const auto idx = systematic_resample_indices(w, params.n_particles);
        resampled.particles.reserve(idx.size());
        for (int i : idx) {
            HybridParticle np = comp.particles[i];
            np.w = 1.0 / params.n_particles;
            resampled.particles.push_back(std::move(np));
        }
        out.components.push_back(std::move(resampled));
    }
    return out;
}

}  // namespace bglmb
