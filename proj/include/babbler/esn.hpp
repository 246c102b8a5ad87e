#pragma once

// Echo state network classifier: fixed sparse leaky-integrator reservoir,
// ridge-regression readout, softmax over time-averaged class activations.

#include "babbler/auditory.hpp"
#include "babbler/vowel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace babbler {

struct esn_params {
    std::size_t size = 100;
    double spectral_radius = 0.9;
    double leak = 0.3;
    double density = 0.1;
    double input_scale = 0.5;
    double ridge = 1e-4;
};

struct esn_model {
    Eigen::MatrixXd w_in;                               // N x inputs
    Eigen::SparseMatrix<double, Eigen::RowMajor> w;     // N x N
    Eigen::MatrixXd w_out;                              // C x (N + 1), bias column last
    double leak = 0.3;
    double spectral_radius = 0.9;
    std::vector<vowel> classes;
    bool trained = false;

    std::size_t size() const { return static_cast<std::size_t>(w_in.rows()); }
    std::size_t class_count() const { return classes.size(); }
    int class_index(vowel v) const;
};

/// Largest absolute eigenvalue of a reservoir matrix.
double spectral_radius_of(const Eigen::SparseMatrix<double, Eigen::RowMajor>& w);

esn_model init_reservoir(std::size_t n, std::uint64_t seed, const esn_params& params = {},
                         std::vector<vowel> classes = six_classes());

std::size_t washout_frames(std::size_t frames);

/// Runs the reservoir from x(0) = 0 and returns post-washout states, one row per frame.
Eigen::MatrixXd harvest_states(const esn_model& model, const feature_stream& features);

/// Same, from an explicit initial state, without washout.
Eigen::MatrixXd run_reservoir(const esn_model& model, const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& initial);

/// Sufficient statistics of the ridge problem, so readouts can be refit without
/// re-harvesting states.
class readout_accumulator {
public:
    readout_accumulator() = default;
    readout_accumulator(std::size_t reservoir, std::size_t classes);

    /// Adds a clip: every post-washout frame is taught the one-hot target of `cls`.
    void add(const Eigen::MatrixXd& states, int cls);
    void merge(const readout_accumulator& other);

    /// Solves (X'X + ridge*I_w) W' = X'Y; the bias column is not regularized.
    Eigen::MatrixXd solve(double ridge) const;

    std::size_t frames() const { return frames_; }

private:
    Eigen::MatrixXd xtx_;
    Eigen::MatrixXd xty_;
    std::size_t frames_ = 0;
};

struct training_sample {
    const feature_stream* features;
    vowel label;
};

/// Sufficient statistics for `samples`; labels outside the model's classes are skipped.
readout_accumulator accumulate_readout(const esn_model& model, std::span<const training_sample> samples,
                                       unsigned jobs = 1);

/// Fits W_out. Raises the ridge by 1e3 once on a singular system, then throws.
esn_model train_readout(const esn_model& model, std::span<const training_sample> samples,
                        double ridge = 1e-4, unsigned jobs = 1);
esn_model train_readout(const esn_model& model, const readout_accumulator& acc, double ridge = 1e-4);

struct confidence_vector {
    std::vector<double> confidences;
    std::vector<vowel> classes;
    std::size_t predicted = 0;

    vowel predicted_class() const { return classes.at(predicted); }
    double of(vowel v) const;
};

std::vector<double> softmax(std::span<const double> activations);

confidence_vector classify(const esn_model& model, const feature_stream& features);
confidence_vector classify_states(const esn_model& model, const Eigen::MatrixXd& states);

struct evaluation {
    double error_rate = 0.0;
    Eigen::MatrixXd confusion;  // rows true, columns predicted, row-normalized
    Eigen::MatrixXi counts;
    std::size_t samples = 0;
};

/// Predictions are class indices into `classes`; samples whose label is not a class are skipped.
evaluation evaluate_predictions(std::span<const vowel> truth, std::span<const vowel> predicted,
                                const std::vector<vowel>& classes);
evaluation evaluate(const esn_model& model, std::span<const training_sample> test, unsigned jobs = 1);

// Binary container: "BESN", u32 version, u64 N, u64 C, u64 inputs, f64 leak, f64 rho,
// u8 trained, C x u8 class ids, W_in (N x inputs), u64 nnz + (u64 row, u64 col, f64)
// triplets, W_out (C x (N+1)). All little-endian, matrices row-major.
void save_model(const std::filesystem::path& path, const esn_model& model);
esn_model load_model(const std::filesystem::path& path);

}  // namespace babbler
