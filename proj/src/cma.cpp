#include "babbler/cma.hpp"

#include "babbler/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace babbler {

cma_state::cma_state(const Eigen::VectorXd& mean, const cma_params& params)
    : mean_(mean), sigma_(params.sigma0), lambda_(params.lambda), eigen_floor_(params.eigen_floor)
{
    const auto n = static_cast<double>(mean.size());
    if (mean.size() == 0 || lambda_ < 2)
        throw config_invalid("CMA-ES needs a non-empty mean and lambda >= 2");

    if (!params.weights.empty()) {
        weights_ = params.weights;
    } else {
        const std::size_t mu = params.mu ? params.mu : lambda_ / 2;
        if (mu == 0 || mu > lambda_)
            throw config_invalid("CMA-ES needs 1 <= mu <= lambda");
        weights_.resize(mu);
        for (std::size_t i = 0; i < mu; ++i)
            weights_[i] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
    }
    if (weights_.size() > lambda_)
        throw config_invalid("more recombination weights than offspring");
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    double sq = 0.0;
    for (double& w : weights_) {
        w /= total;
        sq += w * w;
    }
    mu_eff_ = 1.0 / sq;

    c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
    c_mu_ = std::max(0.0, c_mu_);
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    cov_ = Eigen::MatrixXd::Identity(mean.size(), mean.size());
    p_sigma_ = Eigen::VectorXd::Zero(mean.size());
    p_c_ = Eigen::VectorXd::Zero(mean.size());
    decompose();
}

void cma_state::set_covariance(const Eigen::MatrixXd& c)
{
    cov_ = c;
    decompose();
}

void cma_state::decompose()
{
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_);
    basis_ = solver.eigenvectors();
    eigenvalues_ = solver.eigenvalues();
    if (eigenvalues_.minCoeff() < eigen_floor_ || !eigenvalues_.allFinite()) {
        for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i)
            if (!(eigenvalues_(i) >= eigen_floor_))
                eigenvalues_(i) = eigen_floor_;
        cov_ = basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
        cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    }
}

std::vector<Eigen::VectorXd> cma_state::sample(rng& gen) const
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXd scale = eigenvalues_.cwiseSqrt();
    std::vector<Eigen::VectorXd> out(lambda_);
    Eigen::VectorXd z(mean_.size());
    for (auto& x : out) {
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z(i) = normal(gen);
        x = mean_ + sigma_ * (basis_ * scale.cwiseProduct(z));
    }
    return out;
}

void cma_state::update(std::span<const Eigen::VectorXd> offspring, std::span<const double> rewards)
{
    if (offspring.size() != lambda_ || rewards.size() != lambda_)
        throw dimension_mismatch("update needs exactly lambda offspring and rewards");
    for (const auto& x : offspring)
        if (x.size() != mean_.size())
            throw dimension_mismatch("offspring dimension differs from the search space");

    const auto n = static_cast<double>(mean_.size());
    std::vector<std::size_t> order(lambda_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rewards[a] > rewards[b]; });

    const Eigen::VectorXd old_mean = mean_;
    std::vector<Eigen::VectorXd> steps(weights_.size());
    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(mean_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        steps[i] = (offspring[order[i]] - old_mean) / sigma_;
        y_w += weights_[i] * steps[i];
    }
    if (weights_.size() == 1 && weights_[0] == 1.0)
        mean_ = offspring[order[0]];
    else
        mean_ = old_mean + sigma_ * y_w;

    // C^{-1/2} y_w
    const Eigen::VectorXd inv_sqrt = eigenvalues_.cwiseSqrt().cwiseInverse();
    const Eigen::VectorXd whitened = basis_ * inv_sqrt.cwiseProduct(basis_.transpose() * y_w);
    p_sigma_ = (1.0 - c_sigma_) * p_sigma_ + std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;

    ++generation_;
    const double ps_norm = p_sigma_.norm();
    const double correction = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * static_cast<double>(generation_)));
    const bool h_sigma = ps_norm / correction < (1.4 + 2.0 / (n + 1.0)) * chi_n_;
    p_c_ = (1.0 - c_c_) * p_c_ + (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i)
        rank_mu.noalias() += weights_[i] * steps[i] * steps[i].transpose();
    const double delta = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
    cov_ = (1.0 - c_1_ - c_mu_) * cov_ + c_1_ * (p_c_ * p_c_.transpose() + delta * cov_) + c_mu_ * rank_mu;

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
    decompose();
}

}  // namespace babbler
