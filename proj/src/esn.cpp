#include "babbler/esn.hpp"

#include "babbler/binary_io.hpp"
#include "babbler/errors.hpp"
#include "babbler/parallel.hpp"
#include "babbler/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace babbler {

int esn_model::class_index(vowel v) const
{
    auto it = std::find(classes.begin(), classes.end(), v);
    return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

double spectral_radius_of(const Eigen::SparseMatrix<double, Eigen::RowMajor>& w)
{
    const Eigen::MatrixXd dense(w);
    if (dense.rows() == 0)
        return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

esn_model init_reservoir(std::size_t n, std::uint64_t seed, const esn_params& params,
                         std::vector<vowel> classes)
{
    if (n == 0)
        throw config_invalid("reservoir size must be at least 1");
    rng gen(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    esn_model model;
    model.leak = params.leak;
    model.spectral_radius = params.spectral_radius;
    model.classes = std::move(classes);

    const std::size_t cells = n * n;
    const auto nnz = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.density * static_cast<double>(cells))));

    std::vector<std::size_t> positions(cells);
    for (int attempt = 0;; ++attempt) {
        if (attempt >= 1000)
            throw config_invalid("could not draw a reservoir with non-zero spectral radius");
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        for (std::size_t k = 0; k < nnz; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, cells - 1);
            std::swap(positions[k], positions[pick(gen)]);
        }
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(nnz);
        for (std::size_t k = 0; k < nnz; ++k)
            triplets.emplace_back(static_cast<int>(positions[k] / n), static_cast<int>(positions[k] % n),
                                  unit(gen));
        model.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        model.w.setFromTriplets(triplets.begin(), triplets.end());
        const double rho = spectral_radius_of(model.w);
        if (rho > 1e-9) {
            model.w *= params.spectral_radius / rho;
            break;
        }
    }

    model.w_in.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_channels));
    std::uniform_real_distribution<double> input(-params.input_scale, params.input_scale);
    for (Eigen::Index r = 0; r < model.w_in.rows(); ++r)
        for (Eigen::Index c = 0; c < model.w_in.cols(); ++c)
            model.w_in(r, c) = input(gen);

    model.w_out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.classes.size()),
                                        static_cast<Eigen::Index>(n + 1));
    return model;
}

std::size_t washout_frames(std::size_t frames)
{
    const auto w = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(frames))));
    return frames > w ? w : (frames > 0 ? frames - 1 : 0);
}

Eigen::MatrixXd run_reservoir(const esn_model& model, const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& initial)
{
    const Eigen::Index n = model.w_in.rows();
    Eigen::MatrixXd states(inputs.rows(), n);
    Eigen::VectorXd x = initial;
    const Eigen::MatrixXd drive = inputs * model.w_in.transpose();
    Eigen::VectorXd pre(n);
    for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
        pre.noalias() = model.w * x;
        pre += drive.row(t).transpose();
        x = (1.0 - model.leak) * x + model.leak * pre.array().tanh().matrix();
        states.row(t) = x.transpose();
    }
    return states;
}

Eigen::MatrixXd harvest_states(const esn_model& model, const feature_stream& features)
{
    const auto frames = static_cast<std::size_t>(features.frames.rows());
    if (frames == 0)
        throw empty_features("feature stream has no frames");
    const Eigen::MatrixXd all = run_reservoir(model, features.frames, Eigen::VectorXd::Zero(model.w_in.rows()));
    const auto washout = static_cast<Eigen::Index>(washout_frames(frames));
    return all.bottomRows(all.rows() - washout);
}

readout_accumulator::readout_accumulator(std::size_t reservoir, std::size_t classes)
    : xtx_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reservoir + 1), static_cast<Eigen::Index>(reservoir + 1))),
      xty_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reservoir + 1), static_cast<Eigen::Index>(classes)))
{
}

void readout_accumulator::add(const Eigen::MatrixXd& states, int cls)
{
    const Eigen::Index n = states.cols();
    if (n + 1 != xtx_.rows())
        throw dimension_mismatch("state width does not match the accumulator");
    if (cls < 0 || cls >= xty_.cols())
        throw dimension_mismatch("class index out of range");
    Eigen::MatrixXd x(states.rows(), n + 1);
    x.leftCols(n) = states;
    x.col(n).setOnes();
    xtx_.noalias() += x.transpose() * x;
    xty_.col(cls) += x.colwise().sum().transpose();
    frames_ += static_cast<std::size_t>(states.rows());
}

void readout_accumulator::merge(const readout_accumulator& other)
{
    xtx_ += other.xtx_;
    xty_ += other.xty_;
    frames_ += other.frames_;
}

Eigen::MatrixXd readout_accumulator::solve(double ridge) const
{
    auto attempt = [&](double lambda, Eigen::MatrixXd& out) {
        Eigen::MatrixXd a = xtx_;
        const Eigen::Index n = a.rows() - 1;
        a.diagonal().head(n).array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            return false;
        if (ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff()))
            return false;
        Eigen::MatrixXd sol = ldlt.solve(xty_);
        if (!sol.allFinite())
            return false;
        out = sol.transpose();
        return true;
    };
    if (frames_ == 0)
        throw singular_system("no training frames");
    Eigen::MatrixXd w;
    if (attempt(ridge, w))
        return w;
    if (attempt(ridge > 0 ? ridge * 1e3 : 1e-6, w))
        return w;
    throw singular_system("readout system is singular even after raising the ridge");
}

esn_model train_readout(const esn_model& model, const readout_accumulator& acc, double ridge)
{
    esn_model out = model;
    out.w_out = acc.solve(ridge);
    out.trained = true;
    return out;
}

readout_accumulator accumulate_readout(const esn_model& model, std::span<const training_sample> samples,
                                       unsigned jobs)
{
    readout_accumulator acc(model.size(), model.class_count());
    constexpr std::size_t block = 64;
    std::vector<Eigen::MatrixXd> states(block);
    for (std::size_t start = 0; start < samples.size(); start += block) {
        const std::size_t count = std::min(block, samples.size() - start);
        parallel_for(count, jobs, [&](std::size_t k) {
            states[k] = harvest_states(model, *samples[start + k].features);
        });
        for (std::size_t k = 0; k < count; ++k) {
            const int cls = model.class_index(samples[start + k].label);
            if (cls >= 0)
                acc.add(states[k], cls);
        }
    }
    return acc;
}

esn_model train_readout(const esn_model& model, std::span<const training_sample> samples, double ridge,
                        unsigned jobs)
{
    return train_readout(model, accumulate_readout(model, samples, jobs), ridge);
}

double confidence_vector::of(vowel v) const
{
    auto it = std::find(classes.begin(), classes.end(), v);
    return it == classes.end() ? 0.0 : confidences[static_cast<std::size_t>(it - classes.begin())];
}

std::vector<double> softmax(std::span<const double> a)
{
    std::vector<double> out(a.size());
    if (a.empty())
        return out;
    const double top = *std::max_element(a.begin(), a.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = std::exp(a[i] - top);
        sum += out[i];
    }
    for (double& v : out)
        v /= sum;
    return out;
}

confidence_vector classify_states(const esn_model& model, const Eigen::MatrixXd& states)
{
    if (!model.trained)
        throw untrained_model("classifier readout has not been trained");
    const Eigen::Index n = states.cols();
    Eigen::VectorXd mean(n + 1);
    mean.head(n) = states.colwise().mean().transpose();
    mean(n) = 1.0;
    const Eigen::VectorXd a = model.w_out * mean;

    confidence_vector cv;
    cv.classes = model.classes;
    cv.confidences = softmax(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
    cv.predicted = static_cast<std::size_t>(
        std::max_element(cv.confidences.begin(), cv.confidences.end()) - cv.confidences.begin());
    return cv;
}

confidence_vector classify(const esn_model& model, const feature_stream& features)
{
    if (!model.trained)
        throw untrained_model("classifier readout has not been trained");
    return classify_states(model, harvest_states(model, features));
}

evaluation evaluate_predictions(std::span<const vowel> truth, std::span<const vowel> predicted,
                                const std::vector<vowel>& classes)
{
    const auto c = static_cast<Eigen::Index>(classes.size());
    evaluation ev;
    ev.counts = Eigen::MatrixXi::Zero(c, c);
    std::size_t wrong = 0;
    auto index = [&](vowel v) {
        auto it = std::find(classes.begin(), classes.end(), v);
        return it == classes.end() ? Eigen::Index{-1} : static_cast<Eigen::Index>(it - classes.begin());
    };
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const Eigen::Index t = index(truth[k]);
        const Eigen::Index p = index(predicted[k]);
        if (t < 0 || p < 0)
            continue;
        ++ev.counts(t, p);
        ++ev.samples;
        if (t != p)
            ++wrong;
    }
    ev.error_rate = ev.samples ? static_cast<double>(wrong) / static_cast<double>(ev.samples) : 0.0;
    ev.confusion = ev.counts.cast<double>();
    for (Eigen::Index r = 0; r < c; ++r) {
        const double total = ev.confusion.row(r).sum();
        if (total > 0)
            ev.confusion.row(r) /= total;
    }
    return ev;
}

evaluation evaluate(const esn_model& model, std::span<const training_sample> test, unsigned jobs)
{
    std::vector<vowel> truth(test.size()), predicted(test.size());
    parallel_for(test.size(), jobs, [&](std::size_t k) {
        truth[k] = test[k].label;
        predicted[k] = classify(model, *test[k].features).predicted_class();
    });
    return evaluate_predictions(truth, predicted, model.classes);
}

namespace {
constexpr std::uint32_t model_magic = 0x4E534542;  // "BESN" little-endian
constexpr std::uint32_t model_version = 1;
}  // namespace

void save_model(const std::filesystem::path& path, const esn_model& model)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw format_error("cannot write " + path.string());
    le::put<std::uint32_t>(os, model_magic);
    le::put<std::uint32_t>(os, model_version);
    le::put<std::uint64_t>(os, model.size());
    le::put<std::uint64_t>(os, model.class_count());
    le::put<std::uint64_t>(os, static_cast<std::uint64_t>(model.w_in.cols()));
    le::put<double>(os, model.leak);
    le::put<double>(os, model.spectral_radius);
    le::put<std::uint8_t>(os, model.trained ? 1 : 0);
    for (vowel v : model.classes)
        le::put<std::uint8_t>(os, static_cast<std::uint8_t>(v));
    for (Eigen::Index r = 0; r < model.w_in.rows(); ++r)
        for (Eigen::Index c = 0; c < model.w_in.cols(); ++c)
            le::put<double>(os, model.w_in(r, c));
    le::put<std::uint64_t>(os, static_cast<std::uint64_t>(model.w.nonZeros()));
    for (Eigen::Index r = 0; r < model.w.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.w, r); it; ++it) {
            le::put<std::uint64_t>(os, static_cast<std::uint64_t>(it.row()));
            le::put<std::uint64_t>(os, static_cast<std::uint64_t>(it.col()));
            le::put<double>(os, it.value());
        }
    for (Eigen::Index r = 0; r < model.w_out.rows(); ++r)
        for (Eigen::Index c = 0; c < model.w_out.cols(); ++c)
            le::put<double>(os, model.w_out(r, c));
}

esn_model load_model(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw format_error("cannot read " + path.string());
    if (le::get<std::uint32_t>(is) != model_magic)
        throw format_error(path.string() + ": not a reservoir model file");
    if (le::get<std::uint32_t>(is) != model_version)
        throw format_error(path.string() + ": unsupported model version");
    esn_model model;
    const auto n = static_cast<Eigen::Index>(le::get<std::uint64_t>(is));
    const auto c = static_cast<Eigen::Index>(le::get<std::uint64_t>(is));
    const auto inputs = static_cast<Eigen::Index>(le::get<std::uint64_t>(is));
    model.leak = le::get<double>(is);
    model.spectral_radius = le::get<double>(is);
    model.trained = le::get<std::uint8_t>(is) != 0;
    for (Eigen::Index k = 0; k < c; ++k)
        model.classes.push_back(static_cast<vowel>(le::get<std::uint8_t>(is)));
    model.w_in.resize(n, inputs);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index col = 0; col < inputs; ++col)
            model.w_in(r, col) = le::get<double>(is);
    const auto nnz = le::get<std::uint64_t>(is);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const auto row = static_cast<int>(le::get<std::uint64_t>(is));
        const auto col = static_cast<int>(le::get<std::uint64_t>(is));
        triplets.emplace_back(row, col, le::get<double>(is));
    }
    model.w.resize(n, n);
    model.w.setFromTriplets(triplets.begin(), triplets.end());
    model.w_out.resize(c, n + 1);
    for (Eigen::Index r = 0; r < c; ++r)
        for (Eigen::Index col = 0; col < n + 1; ++col)
            model.w_out(r, col) = le::get<double>(is);
    return model;
}

}  // namespace babbler
