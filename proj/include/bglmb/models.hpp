#pragma once
#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "bglmb/gaussian.hpp"
#include "bglmb/rng.hpp"
#include "bglmb/types.hpp"

namespace bglmb {

/// Coordinated turn dynamics for actual targets, state [px, vx, py, vy, omega].
struct CoordinatedTurnModel {
    double T = 1.0;                // sampling period [s]
    double sigma_w = 5.0;          // process noise [m/s^2]
    double sigma_omega = 0.0175;   // turn-rate noise [rad/s]
};

/// Constant velocity dynamics, state [px, vx, py, vy].
struct ConstantVelocityModel {
    double T = 1.0;
    double sigma_w = 5.0;
};

/// Clutter-generator dynamics: random walk on position, everything else frozen.
struct RandomWalkModel {
    double sigma_rw = 20.0;  // per-axis position std [m or px]
};

/// Bearing-range sensor. The bearing is measured from the +y axis
/// (atan of px over py, resolved over all four quadrants).
struct BearingRangeModel {
    double sigma_theta = 2.0 * M_PI / 180.0;  // [rad]
    double sigma_r = 10.0;                    // [m]
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
};

/// Linear position sensor: z = H x + noise, H selecting (px, py).
struct LinearPositionModel {
    Eigen::MatrixXd H;
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
};

LinearPositionModel make_linear_position_model(int state_dim, const Eigen::Matrix2d& sigma);

/// Per-class survival and detection probabilities, state independent.
struct SurvivalDetectionSpec {
    double p_s1 = 0.99;
    double p_s0 = 0.90;
    double p_d1 = 0.98;
    double p_d0 = 0.50;

    void validate() const;  // throws unless all in (0, 1]
    double p_s(ClassLabel u) const { return u == ClassLabel::Target ? p_s1 : p_s0; }
    double p_d(ClassLabel u) const { return u == ClassLabel::Target ? p_d1 : p_d0; }
};

/// One spontaneous-birth Bernoulli component.
struct BirthEntry {
    double r = 0.03;                     // birth existence probability / label weight
    ClassLabel cls = ClassLabel::Target;
    GaussianMixture density;             // over the kinematic state
    bool uniform_over_region = false;    // clutter spray: positions ~ U(region), rest zero
};

struct BirthSpec {
    std::vector<BirthEntry> entries;
};

/// Single-Gaussian birth density centered on a site with zero velocity.
GaussianMixture birth_site_density(double x, double y, int state_dim, double std_pos,
                                   double std_vel, double std_omega);

/// Everything both filters need to know about the world.
struct ModelSet {
    MotionKind motion = MotionKind::CoordinatedTurn;
    CoordinatedTurnModel ct;
    ConstantVelocityModel cv;
    RandomWalkModel rw;
    SensorKind sensor = SensorKind::BearingRange;
    BearingRangeModel bearing_range;
    LinearPositionModel linear;
    SurvivalDetectionSpec sd;
    Region region;

    int state_dim() const { return motion == MotionKind::CoordinatedTurn ? 5 : 4; }
    double clutter_meas_density() const;  // uniform g_0 over the measurement space
};

// --- coordinated turn -------------------------------------------------------

/// Transition matrix F(omega) of the planar coordinated turn model; falls back
/// to the constant-velocity limit for |omega| below 1e-10 rad/s.
Eigen::Matrix4d ct_matrix(double omega, double T);

/// Process-noise gain G (4x2).
Eigen::Matrix<double, 4, 2> ct_noise_gain(double T);

/// Deterministic part of the turn map: [F(omega) x(0:3); omega].
KinematicState ct_mean(const KinematicState& x, double T);

/// Jacobian of ct_mean at x (5x5).
Eigen::MatrixXd ct_jacobian(const KinematicState& x, double T);

/// Linearized moment propagation: mean through ct_mean, covariance through the
/// Jacobian plus diag(sigma_w^2 G G^T, sigma_omega^2).
std::pair<KinematicState, Eigen::MatrixXd> ct_predict_moments(
    const KinematicState& mean, const Eigen::MatrixXd& cov, const CoordinatedTurnModel& model);

KinematicState ct_sample(const KinematicState& x, const CoordinatedTurnModel& model, Rng& rng);

// --- constant velocity ------------------------------------------------------

Eigen::Matrix4d cv_matrix(double T);
std::pair<KinematicState, Eigen::MatrixXd> cv_predict_moments(
    const KinematicState& mean, const Eigen::MatrixXd& cov, const ConstantVelocityModel& model);
KinematicState cv_sample(const KinematicState& x, const ConstantVelocityModel& model, Rng& rng);

// --- clutter generators -----------------------------------------------------

KinematicState rw_sample(const KinematicState& x, const RandomWalkModel& model, Rng& rng);

// --- measurement models -----------------------------------------------------

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

Eigen::Vector2d bearing_range_h(const KinematicState& x, const BearingRangeModel& model);
double bearing_range_loglik(const Eigen::Vector2d& z, const KinematicState& x,
                            const BearingRangeModel& model);
double linear_position_loglik(const Eigen::Vector2d& z, const KinematicState& x,
                              const LinearPositionModel& model);

// --- class-conditional dispatch used by the SMC filter ----------------------

KinematicState motion_sample(const KinematicState& x, ClassLabel u, const ModelSet& models, Rng& rng);
double target_meas_loglik(const Eigen::Vector2d& z, const KinematicState& x, const ModelSet& models);

// --- Gaussian propagation used by the GLMB ----------------------------------

Gaussian predict_gaussian(const Gaussian& g, const ModelSet& models);
GaussianMixture gm_predict(const GaussianMixture& gm, const ModelSet& models);

struct GmUpdate {
    GaussianMixture gm;
    double log_lik = 0.0;  // log of the mixture predictive density at z
};

GmUpdate gm_measurement_update(const GaussianMixture& gm, const Eigen::Vector2d& z,
                               const ModelSet& models);
double gm_predictive_loglik(const GaussianMixture& gm, const Eigen::Vector2d& z,
                            const ModelSet& models);

}  // namespace bglmb
