#include "babbler/cma.hpp"
#include "babbler/errors.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

using namespace babbler;

namespace {

double sphere(const Eigen::VectorXd& x, const Eigen::VectorXd& target)
{
    return -(x - target).squaredNorm();
}

std::vector<double> score(const std::vector<Eigen::VectorXd>& xs, const Eigen::VectorXd& target)
{
    std::vector<double> r;
    for (const auto& x : xs)
        r.push_back(sphere(x, target));
    return r;
}

}  // namespace

TEST_CASE("recombination weights")
{
    cma_state s(Eigen::VectorXd::Constant(16, 0.5));
    CHECK(s.lambda() == 10);
    CHECK(s.mu() == 5);
    CHECK(s.sigma() == 0.3);
    CHECK(s.dimension() == 16);
    const auto& w = s.weights();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    for (std::size_t i = 1; i < w.size(); ++i)
        CHECK(w[i] < w[i - 1]);
    // w_i proportional to ln(mu + 1/2) - ln i
    double norm = 0.0;
    for (std::size_t i = 1; i <= 5; ++i)
        norm += std::log(5.5) - std::log(static_cast<double>(i));
    for (std::size_t i = 1; i <= 5; ++i)
        CHECK(w[i - 1] == doctest::Approx((std::log(5.5) - std::log(static_cast<double>(i))) / norm));
    CHECK(s.covariance() == Eigen::MatrixXd::Identity(16, 16));
    CHECK(s.generation() == 0);
}

TEST_CASE("construction errors")
{
    CHECK_THROWS_AS(cma_state(Eigen::VectorXd()), config_invalid);
    cma_params p;
    p.lambda = 1;
    CHECK_THROWS_AS(cma_state(Eigen::VectorXd::Zero(3), p), config_invalid);
    p.lambda = 10;
    p.mu = 11;
    CHECK_THROWS_AS(cma_state(Eigen::VectorXd::Zero(3), p), config_invalid);
}

TEST_CASE("mu = 1 moves the mean onto the best offspring")
{
    cma_params p;
    p.mu = 1;
    cma_state s(Eigen::VectorXd::Zero(4), p);
    CHECK(s.weights() == std::vector<double>{1.0});
    rng gen(1);
    const auto xs = s.sample(gen);
    REQUIRE(xs.size() == 10);
    std::vector<double> r(10, 0.0);
    r[7] = 1.0;
    s.update(xs, r);
    CHECK((s.mean() - xs[7]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.generation() == 1);
}

TEST_CASE("ties keep offspring order")
{
    cma_params p;
    p.mu = 1;
    cma_state s(Eigen::VectorXd::Zero(3), p);
    rng gen(2);
    const auto xs = s.sample(gen);
    s.update(xs, std::vector<double>(xs.size(), 0.25));
    CHECK((s.mean() - xs[0]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sphere in 16 dimensions converges")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        rng gen(seed);
        Eigen::VectorXd target(16);
        std::uniform_real_distribution<double> u(0.2, 0.8);
        for (auto& v : target)
            v = u(gen);
        cma_state s(Eigen::VectorXd::Constant(16, 0.5));
        std::size_t g = 0;
        for (; g < 1000 && (s.mean() - target).norm() >= 1e-3; ++g) {
            const auto xs = s.sample(gen);
            s.update(xs, score(xs, target));
        }
        CHECK(g < 1000);
        CHECK(s.sigma() < 1e-2);
    }
}

TEST_CASE("covariance stays positive definite under random rewards")
{
    rng gen(11);
    std::normal_distribution<double> n(0.0, 1.0);
    cma_state s(Eigen::VectorXd::Constant(16, 0.5));
    for (int g = 0; g < 1000; ++g) {
        const auto xs = s.sample(gen);
        std::vector<double> r(xs.size());
        for (auto& v : r)
            v = n(gen);
        s.update(xs, r);
        const Eigen::MatrixXd& c = s.covariance();
        REQUIRE((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
        REQUIRE(eig.eigenvalues().minCoeff() > 0.0);
        REQUIRE(s.min_eigenvalue() >= 1e-12);
        REQUIRE(std::isfinite(s.sigma()));
        REQUIRE(s.sigma() > 0.0);
    }
    CHECK(s.generation() == 1000);
}

TEST_CASE("samples follow N(mean, sigma^2 C)")
{
    Eigen::MatrixXd c(3, 3);
    c << 2.0, 0.6, 0.0, 0.6, 1.0, -0.3, 0.0, -0.3, 0.5;
    Eigen::VectorXd mean(3);
    mean << 1.0, -2.0, 0.5;
    cma_state s(mean);
    s.set_covariance(c);
    s.set_sigma(0.5);
    rng gen(3);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(3, 3);
    std::size_t count = 0;
    while (count < 100000) {
        for (const auto& x : s.sample(gen)) {
            sum += x;
            outer += x * x.transpose();
            ++count;
        }
    }
    const Eigen::VectorXd m = sum / static_cast<double>(count);
    const Eigen::MatrixXd cov = outer / static_cast<double>(count) - m * m.transpose();
    CHECK((m - mean).cwiseAbs().maxCoeff() < 0.01);
    CHECK((cov - 0.25 * c).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("update validates its inputs")
{
    cma_state s(Eigen::VectorXd::Zero(4));
    rng gen(4);
    auto xs = s.sample(gen);
    CHECK_THROWS_AS(s.update(xs, std::vector<double>(9, 0.0)), dimension_mismatch);
    xs[3] = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(s.update(xs, std::vector<double>(10, 0.0)), dimension_mismatch);
    xs.pop_back();
    CHECK_THROWS_AS(s.update(xs, std::vector<double>(9, 0.0)), dimension_mismatch);
}
