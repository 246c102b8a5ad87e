#pragma once

// Covariance matrix adaptation evolution strategy (maximizing), standard
// constants from Hansen's tutorial: log-decreasing recombination weights,
// cumulative step-size adaptation, rank-one + rank-mu covariance update.

#include "babbler/random.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace babbler {

struct cma_params {
    double sigma0 = 0.3;
    std::size_t lambda = 10;
    std::size_t mu = 0;           // 0 selects lambda / 2
    std::vector<double> weights;  // optional explicit recombination weights (size mu)
    double eigen_floor = 1e-12;
};

class cma_state {
public:
    cma_state() = default;
    cma_state(const Eigen::VectorXd& mean, const cma_params& params = {});

    std::size_t dimension() const { return static_cast<std::size_t>(mean_.size()); }
    std::size_t lambda() const { return lambda_; }
    std::size_t mu() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    double sigma() const { return sigma_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    const Eigen::VectorXd& path_sigma() const { return p_sigma_; }
    const Eigen::VectorXd& path_c() const { return p_c_; }
    std::size_t generation() const { return generation_; }
    double min_eigenvalue() const { return eigenvalues_.minCoeff(); }

    /// Draws lambda points from N(mean, sigma^2 C).
    std::vector<Eigen::VectorXd> sample(rng& gen) const;

    /// Updates from offspring and their rewards (higher is better). Ties keep
    /// offspring order.
    void update(std::span<const Eigen::VectorXd> offspring, std::span<const double> rewards);

    // Test hooks.
    void set_sigma(double sigma) { sigma_ = sigma; }
    void set_covariance(const Eigen::MatrixXd& c);

private:
    void decompose();

    Eigen::VectorXd mean_;
    double sigma_ = 0.3;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd basis_;       // eigenvectors of C
    Eigen::VectorXd eigenvalues_; // of C
    Eigen::VectorXd p_sigma_;
    Eigen::VectorXd p_c_;
    std::size_t generation_ = 0;
    std::size_t lambda_ = 10;
    std::vector<double> weights_;
    double mu_eff_ = 1;
    double c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0, chi_n_ = 0;
    double eigen_floor_ = 1e-12;
};

}  // namespace babbler
