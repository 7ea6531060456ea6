#pragma once
#include <vector>
#include <Eigen/Dense>

namespace bglmb {

double log_mvnpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov);

double log_sum_exp(const std::vector<double>& v);

/// Throws std::invalid_argument unless m is symmetric positive semidefinite
/// (within tol, relative to the largest diagonal entry).
void check_symmetric_psd(const Eigen::MatrixXd& m, double tol = 1e-8);

struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Gaussian mixture with weights kept normalized to 1.
struct GaussianMixture {
    std::vector<double> w;
    std::vector<Gaussian> comp;

    int size() const { return static_cast<int>(comp.size()); }
    void normalize();
    Eigen::VectorXd mean() const;

    /// Drop terms below min_weight, keep at most max_terms by weight, renormalize.
    void cap(int max_terms, double min_weight);
};

GaussianMixture single_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

}  // namespace bglmb
