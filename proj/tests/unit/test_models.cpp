#include <doctest.h>

#include <cmath>

#include "bglmb/models.hpp"

using namespace bglmb;

namespace {

KinematicState ct_state(double px, double vx, double py, double vy, double omega) {
    KinematicState x(5);
    x << px, vx, py, vy, omega;
    return x;
}

}  // namespace

TEST_CASE("ct_matrix constant-velocity limit") {
    const Eigen::Matrix4d f = ct_matrix(0.0, 1.0);
    Eigen::Matrix4d expect;
    expect << 1, 1, 0, 0,
              0, 1, 0, 0,
              0, 0, 1, 1,
              0, 0, 0, 1;
    CHECK((f - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ct_matrix quarter turn, hand evaluated") {
    const double q = 2.0 / M_PI;
    const Eigen::Matrix4d f = ct_matrix(M_PI / 2.0, 1.0);
    Eigen::Matrix4d expect;
    expect << 1, q, 0, -q,
              0, 0, 0, -1,
              0, q, 1, q,
              0, 1, 0, 0;
    CHECK((f - expect).cwiseAbs().maxCoeff() < 1e-12);

    // negated turn rate flips the sign of every sine term
    const Eigen::Matrix4d g = ct_matrix(-M_PI / 2.0, 1.0);
    Eigen::Matrix4d expect_neg;
    expect_neg << 1, q, 0, q,
                  0, 0, 0, 1,
                  0, -q, 1, q,
                  0, -1, 0, 0;
    CHECK((g - expect_neg).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ct_matrix rejects bad input and converges to the CV matrix") {
    CHECK_THROWS_AS(ct_matrix(std::nan(""), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ct_matrix(0.0, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK_THROWS_AS(ct_matrix(0.0, 0.0), std::invalid_argument);
    CHECK((ct_matrix(1e-12, 1.0) - ct_matrix(0.0, 1.0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ct_predict_moments noiseless CV limit") {
    const CoordinatedTurnModel model{1.0, 0.0, 0.0};
    const auto [mean, cov] =
        ct_predict_moments(ct_state(0, 1, 0, 0, 0), Eigen::MatrixXd::Zero(5, 5), model);
    CHECK((mean - ct_state(1, 1, 0, 0, 0)).norm() == doctest::Approx(0.0));
    CHECK(cov.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("ct_predict_moments noise term is sigma_w^2 G G^T") {
    const CoordinatedTurnModel model{1.0, 1.0, 0.1};
    const auto [mean, cov] =
        ct_predict_moments(ct_state(0, 0, 0, 0, 0), Eigen::MatrixXd::Zero(5, 5), model);
    Eigen::Matrix4d expect;
    expect << 0.25, 0.5, 0, 0,
              0.5,  1.0, 0, 0,
              0,    0,   0.25, 0.5,
              0,    0,   0.5,  1.0;
    CHECK((cov.topLeftCorner<4, 4>() - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(cov(4, 4) == doctest::Approx(0.01));
    CHECK(mean.norm() == doctest::Approx(0.0));
}

TEST_CASE("ct_predict_moments keeps covariance symmetric PSD") {
    Rng rng(7);
    const CoordinatedTurnModel model{1.0, 3.0, 0.05};
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(
            5, 5, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
        const Eigen::MatrixXd cov = a * a.transpose();
        const KinematicState x = ct_state(rng.uniform(-500, 500), rng.uniform(-20, 20),
                                          rng.uniform(-500, 500), rng.uniform(-20, 20),
                                          rng.uniform(-0.1, 0.1));
        const auto [mean, out] = ct_predict_moments(x, cov, model);
        CHECK((out - out.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-9 * out.diagonal().maxCoeff());
    }
    CHECK_THROWS_AS(
        ct_predict_moments(ct_state(0, 0, 0, 0, 0), -Eigen::MatrixXd::Identity(5, 5), model),
        std::invalid_argument);
}

TEST_CASE("ct_sample with zero noise is the deterministic turn map") {
    Rng rng(1);
    const CoordinatedTurnModel model{1.0, 0.0, 0.0};
    const KinematicState x = ct_state(10, 2, -5, 1, 0.1);
    CHECK((ct_sample(x, model, rng) - ct_mean(x, 1.0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("ct_sample monte carlo moments") {
    Rng rng(42);
    const CoordinatedTurnModel model{1.0, 2.0, 0.02};
    const KinematicState x = ct_state(100, 10, -50, 5, 0.05);
    const int n = 100000;
    Eigen::MatrixXd samples(5, n);
    for (int i = 0; i < n; ++i) samples.col(i) = ct_sample(x, model, rng);
    const KinematicState mean = ct_mean(x, model.T);
    const Eigen::Matrix<double, 4, 2> g = ct_noise_gain(model.T);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(5, 5);
    p.topLeftCorner<4, 4>() = model.sigma_w * model.sigma_w * g * g.transpose();
    p(4, 4) = model.sigma_omega * model.sigma_omega;

    const Eigen::VectorXd sample_mean = samples.rowwise().mean();
    for (int i = 0; i < 5; ++i) {
        const double se = std::sqrt(p(i, i) / n);
        CHECK(std::abs(sample_mean(i) - mean(i)) < 4.0 * se + 1e-12);
    }
    const Eigen::MatrixXd centered = samples.colwise() - sample_mean;
    const Eigen::MatrixXd sample_cov = centered * centered.transpose() / (n - 1.0);
    CHECK((sample_cov - p).norm() < 0.1 * p.norm());
}

TEST_CASE("rw_sample touches positions only") {
    Rng rng(3);
    const KinematicState x = ct_state(1, 2, 3, 4, 0.1);
    SUBCASE("zero noise is the identity") {
        CHECK((rw_sample(x, RandomWalkModel{0.0}, rng) - x).norm() == doctest::Approx(0.0));
    }
    SUBCASE("per-axis variance matches sigma^2") {
        const RandomWalkModel model{5.0};
        const int n = 100000;
        double sx = 0, sxx = 0, sy = 0, syy = 0;
        for (int i = 0; i < n; ++i) {
            const KinematicState s = rw_sample(x, model, rng);
            CHECK(s(1) == x(1));
            CHECK(s(3) == x(3));
            CHECK(s(4) == x(4));
            sx += s(0) - x(0);
            sxx += (s(0) - x(0)) * (s(0) - x(0));
            sy += s(2) - x(2);
            syy += (s(2) - x(2)) * (s(2) - x(2));
        }
        const double var_x = sxx / n - (sx / n) * (sx / n);
        const double var_y = syy / n - (sy / n) * (sy / n);
        CHECK(std::abs(var_x - 25.0) < 0.05 * 25.0);
        CHECK(std::abs(var_y - 25.0) < 0.05 * 25.0);
    }
}

TEST_CASE("bearing_range_loglik conventions") {
    const BearingRangeModel model{0.01, 2.0, Eigen::Vector2d::Zero()};
    const KinematicState ahead = ct_state(0, 0, 100, 0, 0);

    SUBCASE("zero residual hits the normalization constant") {
        const double ll = bearing_range_loglik({0.0, 100.0}, ahead, model);
        CHECK(ll == doctest::Approx(-std::log(2.0 * M_PI * 0.01 * 2.0)).epsilon(1e-12));
    }
    SUBCASE("bearing is measured from the +y axis") {
        CHECK(bearing_range_h(ct_state(100, 0, 0, 0, 0), model)(0)
              == doctest::Approx(M_PI / 2.0));
    }
    SUBCASE("adding 2 pi to the measured bearing changes nothing") {
        const double a = bearing_range_loglik({0.3, 101.0}, ahead, model);
        const double b = bearing_range_loglik({0.3 + 2.0 * M_PI, 101.0}, ahead, model);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    SUBCASE("state at the sensor origin is rejected") {
        CHECK_THROWS_AS(bearing_range_loglik({0.0, 1.0}, ct_state(0, 1, 0, 1, 0), model),
                        std::invalid_argument);
    }
}

TEST_CASE("linear_position_loglik") {
    const auto model = make_linear_position_model(4, Eigen::Matrix2d::Identity());
    KinematicState x(4);
    x << 3, 1, -2, 0;

    CHECK(linear_position_loglik({3, -2}, x, model)
          == doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-12));
    CHECK(linear_position_loglik({4, -2}, x, model)
          == doctest::Approx(-std::log(2.0 * M_PI) - 0.5).epsilon(1e-12));

    SUBCASE("matches a direct dense quadratic-form evaluation") {
        Rng rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::Matrix2d a;
            a << rng.normal(), rng.normal(), rng.normal(), rng.normal();
            const Eigen::Matrix2d sigma =
                a * a.transpose() + 0.5 * Eigen::Matrix2d::Identity();
            const auto m = make_linear_position_model(4, sigma);
            KinematicState xs(4);
            xs << rng.uniform(-10, 10), rng.normal(), rng.uniform(-10, 10), rng.normal();
            const Eigen::Vector2d z(rng.uniform(-10, 10), rng.uniform(-10, 10));
            const Eigen::Vector2d nu = z - m.H * xs;
            const double direct = -std::log(2.0 * M_PI)
                - 0.5 * std::log(sigma.determinant())
                - 0.5 * nu.dot(sigma.inverse() * nu);
            CHECK(linear_position_loglik(z, xs, m) == doctest::Approx(direct).epsilon(1e-10));
        }
    }
    SUBCASE("singular covariance is rejected") {
        const auto bad = make_linear_position_model(4, Eigen::Matrix2d::Zero());
        CHECK_THROWS(linear_position_loglik({0, 0}, x, bad));
    }
}

TEST_CASE("log-likelihood decreases monotonically along a residual ray") {
    const BearingRangeModel br{0.02, 5.0, Eigen::Vector2d::Zero()};
    const KinematicState x = ct_state(50, 0, 80, 0, 0);
    const Eigen::Vector2d pred = bearing_range_h(x, br);
    double prev = bearing_range_loglik(pred, x, br);
    for (int step = 1; step <= 10; ++step) {
        const Eigen::Vector2d z = pred + step * Eigen::Vector2d(0.01, 2.0);
        const double ll = bearing_range_loglik(z, x, br);
        CHECK(ll < prev);
        CHECK(std::isfinite(ll));
        prev = ll;
    }
}
