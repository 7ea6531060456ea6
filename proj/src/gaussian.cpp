#include "bglmb/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bglmb/errors.hpp"

namespace bglmb {

double log_mvnpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
    const int d = static_cast<int>(x.size());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("log_mvnpdf: covariance is not positive definite");
    const Eigen::VectorXd resid = x - mean;
    const Eigen::VectorXd z = llt.matrixL().solve(resid);
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += std::log(llt.matrixL()(i, i));
    return -0.5 * d * std::log(2.0 * M_PI) - log_det - 0.5 * z.squaredNorm();
}

double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;  // all -inf (or contains +inf)
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

void check_symmetric_psd(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("covariance must be square");
    const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
        throw std::invalid_argument("covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol * scale)
        throw std::invalid_argument("covariance must be positive semidefinite");
}

void GaussianMixture::normalize() {
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (s <= 0.0) throw NumericError("gaussian mixture has no weight mass");
    for (double& wi : w) wi /= s;
}

Eigen::VectorXd GaussianMixture::mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(comp.front().mean.size());
    for (int i = 0; i < size(); ++i) m += w[i] * comp[i].mean;
    return m;
}

void GaussianMixture::cap(int max_terms, double min_weight) {
    std::vector<int> order(comp.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return w[a] > w[b]; });
    GaussianMixture kept;
    for (int idx : order) {
        if (static_cast<int>(kept.comp.size()) >= max_terms) break;
        if (w[idx] < min_weight && !kept.comp.empty()) break;
        kept.w.push_back(w[idx]);
        kept.comp.push_back(comp[idx]);
    }
    kept.normalize();
    *this = std::move(kept);
}

GaussianMixture single_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    GaussianMixture gm;
    gm.w.push_back(1.0);
    gm.comp.push_back({std::move(mean), std::move(cov)});
    return gm;
}

}  // namespace bglmb
