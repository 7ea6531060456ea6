#include "bglmb/models.hpp"

#include <cmath>
#include <stdexcept>

#include "bglmb/errors.hpp"

namespace bglmb {

namespace {

constexpr double kOmegaEps = 1e-10;   // below this the turn map is the CV limit
constexpr double kSeriesEps = 1e-4;   // switch to series for the omega-derivatives

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

LinearPositionModel make_linear_position_model(int state_dim, const Eigen::Matrix2d& sigma) {
    LinearPositionModel m;
    m.H = Eigen::MatrixXd::Zero(2, state_dim);
    m.H(0, kPosX) = 1.0;
    m.H(1, kPosY) = 1.0;
    m.sigma = sigma;
    return m;
}

GaussianMixture birth_site_density(double x, double y, int state_dim, double std_pos,
                                   double std_vel, double std_omega) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(state_dim);
    mean(kPosX) = x;
    mean(kPosY) = y;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(state_dim);
    diag(0) = std_pos * std_pos;
    diag(1) = std_vel * std_vel;
    diag(2) = std_pos * std_pos;
    diag(3) = std_vel * std_vel;
    if (state_dim == 5) diag(4) = std_omega * std_omega;
    return single_gaussian(mean, Eigen::MatrixXd(diag.asDiagonal()));
}

void SurvivalDetectionSpec::validate() const {
    for (double p : {p_s1, p_s0, p_d1, p_d0})
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("survival/detection probabilities must lie in (0, 1]");
}

double meas_space_area(SensorKind sensor, const Region& region) {
    if (sensor == SensorKind::BearingRange) return 2.0 * M_PI * region.range_max;
    return region.area();
}

double ModelSet::clutter_meas_density() const {
    return 1.0 / meas_space_area(sensor, region);
}

Eigen::Matrix4d ct_matrix(double omega, double T) {
    require_finite(omega, "omega");
    require_finite(T, "T");
    if (T <= 0.0) throw std::invalid_argument("T must be positive");
    double a, b, s, c;
    if (std::abs(omega) < kOmegaEps) {
        a = T;
        b = 0.0;
        s = 0.0;
        c = 1.0;
    } else {
        const double wt = omega * T;
        s = std::sin(wt);
        c = std::cos(wt);
        a = s / omega;
        b = (1.0 - c) / omega;
    }
    Eigen::Matrix4d f;
    f << 1, a, 0, -b,
         0, c, 0, -s,
         0, b, 1, a,
         0, s, 0, c;
    return f;
}

Eigen::Matrix<double, 4, 2> ct_noise_gain(double T) {
    Eigen::Matrix<double, 4, 2> g;
    g << T * T / 2.0, 0,
         T,           0,
         0,           T * T / 2.0,
         0,           T;
    return g;
}

KinematicState ct_mean(const KinematicState& x, double T) {
    if (x.size() != 5) throw std::invalid_argument("coordinated turn state must have dim 5");
    KinematicState out(5);
    out.head<4>() = ct_matrix(x(4), T) * x.head<4>();
    out(4) = x(4);
    return out;
}

Eigen::MatrixXd ct_jacobian(const KinematicState& x, double T) {
    if (x.size() != 5) throw std::invalid_argument("coordinated turn state must have dim 5");
    const double omega = x(4);
    const double vx = x(1), vy = x(3);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(5, 5);
    j.topLeftCorner<4, 4>() = ct_matrix(omega, T);
    j(4, 4) = 1.0;

    // d/domega of [a, c, b, s] with a = sin(wT)/w, b = (1-cos(wT))/w
    double da, db, dc, ds;
    if (std::abs(omega * T) < kSeriesEps) {
        // series about omega = 0; direct formulas cancel catastrophically here
        da = -omega * T * T * T / 3.0;
        db = T * T / 2.0 - omega * omega * T * T * T * T / 8.0;
        dc = -T * std::sin(omega * T);
        ds = T * std::cos(omega * T);
    } else {
        const double wt = omega * T;
        const double s = std::sin(wt), c = std::cos(wt);
        da = (wt * c - s) / (omega * omega);
        db = (wt * s - (1.0 - c)) / (omega * omega);
        dc = -T * s;
        ds = T * c;
    }
    j(0, 4) = da * vx - db * vy;
    j(1, 4) = dc * vx - ds * vy;
    j(2, 4) = db * vx + da * vy;
    j(3, 4) = ds * vx + dc * vy;
    return j;
}

std::pair<KinematicState, Eigen::MatrixXd> ct_predict_moments(
    const KinematicState& mean, const Eigen::MatrixXd& cov, const CoordinatedTurnModel& model) {
    check_symmetric_psd(cov);
    const Eigen::MatrixXd j = ct_jacobian(mean, model.T);
    const Eigen::Matrix<double, 4, 2> g = ct_noise_gain(model.T);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(5, 5);
    q.topLeftCorner<4, 4>() = model.sigma_w * model.sigma_w * g * g.transpose();
    q(4, 4) = model.sigma_omega * model.sigma_omega;
    Eigen::MatrixXd out = j * cov * j.transpose() + q;
    out = 0.5 * (out + out.transpose());
    return {ct_mean(mean, model.T), out};
}

KinematicState ct_sample(const KinematicState& x, const CoordinatedTurnModel& model, Rng& rng) {
    KinematicState out = ct_mean(x, model.T);
    if (model.sigma_w > 0.0)
        out.head<4>() += model.sigma_w * (ct_noise_gain(model.T) * rng.normal_vec(2));
    if (model.sigma_omega > 0.0) out(4) += model.sigma_omega * rng.normal();
    return out;
}

Eigen::Matrix4d cv_matrix(double T) {
    return ct_matrix(0.0, T);
}

std::pair<KinematicState, Eigen::MatrixXd> cv_predict_moments(
    const KinematicState& mean, const Eigen::MatrixXd& cov, const ConstantVelocityModel& model) {
    check_symmetric_psd(cov);
    const Eigen::Matrix4d f = cv_matrix(model.T);
    const Eigen::Matrix<double, 4, 2> g = ct_noise_gain(model.T);
    Eigen::MatrixXd out = f * cov * f.transpose()
        + model.sigma_w * model.sigma_w * g * g.transpose();
    out = 0.5 * (out + out.transpose());
    return {f * mean, out};
}

KinematicState cv_sample(const KinematicState& x, const ConstantVelocityModel& model, Rng& rng) {
    KinematicState out = cv_matrix(model.T) * x;
    if (model.sigma_w > 0.0)
        out += model.sigma_w * (ct_noise_gain(model.T) * rng.normal_vec(2));
    return out;
}

KinematicState rw_sample(const KinematicState& x, const RandomWalkModel& model, Rng& rng) {
    KinematicState out = x;
    if (model.sigma_rw > 0.0) {
        out(kPosX) += model.sigma_rw * rng.normal();
        out(kPosY) += model.sigma_rw * rng.normal();
    }
    return out;
}

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

Eigen::Vector2d bearing_range_h(const KinematicState& x, const BearingRangeModel& model) {
    const double px = x(kPosX) - model.origin(0);
    const double py = x(kPosY) - model.origin(1);
    const double r = std::hypot(px, py);
    if (r < 1e-9)
        throw std::invalid_argument("bearing undefined: state at the sensor origin");
    return {std::atan2(px, py), r};  // bearing from the +y axis
}

double bearing_range_loglik(const Eigen::Vector2d& z, const KinematicState& x,
                            const BearingRangeModel& model) {
    const Eigen::Vector2d pred = bearing_range_h(x, model);
    const double dt = wrap_angle(z(0) - pred(0));
    const double dr = z(1) - pred(1);
    return -std::log(2.0 * M_PI * model.sigma_theta * model.sigma_r)
        - 0.5 * (dt * dt / (model.sigma_theta * model.sigma_theta)
                 + dr * dr / (model.sigma_r * model.sigma_r));
}

double linear_position_loglik(const Eigen::Vector2d& z, const KinematicState& x,
                              const LinearPositionModel& model) {
    return log_mvnpdf(z, model.H * x, model.sigma);
}

KinematicState motion_sample(const KinematicState& x, ClassLabel u, const ModelSet& models,
                             Rng& rng) {
    if (u == ClassLabel::Clutter) return rw_sample(x, models.rw, rng);
    if (models.motion == MotionKind::CoordinatedTurn) return ct_sample(x, models.ct, rng);
    return cv_sample(x, models.cv, rng);
}

double target_meas_loglik(const Eigen::Vector2d& z, const KinematicState& x,
                          const ModelSet& models) {
    if (models.sensor == SensorKind::BearingRange)
        return bearing_range_loglik(z, x, models.bearing_range);
    return linear_position_loglik(z, x, models.linear);
}

Gaussian predict_gaussian(const Gaussian& g, const ModelSet& models) {
    if (models.motion == MotionKind::CoordinatedTurn) {
        auto [m, p] = ct_predict_moments(g.mean, g.cov, models.ct);
        return {m, p};
    }
    auto [m, p] = cv_predict_moments(g.mean, g.cov, models.cv);
    return {m, p};
}

GaussianMixture gm_predict(const GaussianMixture& gm, const ModelSet& models) {
    GaussianMixture out = gm;
    for (auto& c : out.comp) c = predict_gaussian(c, models);
    return out;
}

namespace {

// per-component innovation terms shared by the update and the predictive density
struct InnovationTerms {
    Eigen::Vector2d nu;
    Eigen::Matrix2d s;
    Eigen::MatrixXd h;
};

InnovationTerms innovation(const Gaussian& g, const Eigen::Vector2d& z, const ModelSet& models) {
    InnovationTerms t;
    if (models.sensor == SensorKind::BearingRange) {
        const auto& br = models.bearing_range;
        const Eigen::Vector2d pred = bearing_range_h(g.mean, br);
        const double px = g.mean(kPosX) - br.origin(0);
        const double py = g.mean(kPosY) - br.origin(1);
        const double r2 = px * px + py * py;
        const double r = std::sqrt(r2);
        t.h = Eigen::MatrixXd::Zero(2, g.mean.size());
        t.h(0, kPosX) = py / r2;
        t.h(0, kPosY) = -px / r2;
        t.h(1, kPosX) = px / r;
        t.h(1, kPosY) = py / r;
        t.nu << wrap_angle(z(0) - pred(0)), z(1) - pred(1);
        Eigen::Matrix2d rcov = Eigen::Matrix2d::Zero();
        rcov(0, 0) = br.sigma_theta * br.sigma_theta;
        rcov(1, 1) = br.sigma_r * br.sigma_r;
        t.s = t.h * g.cov * t.h.transpose() + rcov;
    } else {
        t.h = models.linear.H;
        t.nu = z - t.h * g.mean;
        t.s = t.h * g.cov * t.h.transpose() + models.linear.sigma;
    }
    return t;
}

double loglik_of(const InnovationTerms& t) {
    Eigen::LLT<Eigen::Matrix2d> llt(t.s);
    if (llt.info() != Eigen::Success)
        throw NumericError("measurement update: innovation covariance not PD");
    const Eigen::Vector2d zv = llt.matrixL().solve(t.nu);
    const double log_det = std::log(llt.matrixL()(0, 0)) + std::log(llt.matrixL()(1, 1));
    return -std::log(2.0 * M_PI) - log_det - 0.5 * zv.squaredNorm();
}

}  // namespace

GmUpdate gm_measurement_update(const GaussianMixture& gm, const Eigen::Vector2d& z,
                               const ModelSet& models) {
    GmUpdate out;
    std::vector<double> logw(gm.size());
    for (int i = 0; i < gm.size(); ++i) {
        const Gaussian& g = gm.comp[i];
        const InnovationTerms t = innovation(g, z, models);
        const double ll = loglik_of(t);
        const Eigen::MatrixXd k = g.cov * t.h.transpose() * t.s.inverse();
        Gaussian upd;
        upd.mean = g.mean + k * t.nu;
        // Joseph form keeps the covariance PSD under the EKF linearization
        const Eigen::MatrixXd ikh =
            Eigen::MatrixXd::Identity(g.mean.size(), g.mean.size()) - k * t.h;
        Eigen::Matrix2d rcov;
        if (models.sensor == SensorKind::BearingRange) {
            rcov = Eigen::Matrix2d::Zero();
            rcov(0, 0) = models.bearing_range.sigma_theta * models.bearing_range.sigma_theta;
            rcov(1, 1) = models.bearing_range.sigma_r * models.bearing_range.sigma_r;
        } else {
            rcov = models.linear.sigma;
        }
        upd.cov = ikh * g.cov * ikh.transpose() + k * rcov * k.transpose();
        upd.cov = 0.5 * (upd.cov + upd.cov.transpose());
        out.gm.comp.push_back(std::move(upd));
        logw[i] = std::log(gm.w[i]) + ll;
    }
    out.log_lik = log_sum_exp(logw);
    if (!std::isfinite(out.log_lik)) {
        // measurement is unrepresentably far from every term; keep the prior shape
        out.gm.w.assign(gm.w.begin(), gm.w.end());
        return out;
    }
    out.gm.w.resize(gm.size());
    for (int i = 0; i < gm.size(); ++i) out.gm.w[i] = std::exp(logw[i] - out.log_lik);
    return out;
}

double gm_predictive_loglik(const GaussianMixture& gm, const Eigen::Vector2d& z,
                            const ModelSet& models) {
    std::vector<double> logw(gm.size());
    for (int i = 0; i < gm.size(); ++i) {
        const InnovationTerms t = innovation(gm.comp[i], z, models);
        logw[i] = std::log(gm.w[i]) + loglik_of(t);
    }
    return log_sum_exp(logw);
}

}  // namespace bglmb
