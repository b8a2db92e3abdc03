#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tcsim/rng.hpp"

namespace tcsim {

struct Bounds {
    std::vector<std::pair<double, double>> dims;

    int size() const { return static_cast<int>(dims.size()); }
    double lower(int d) const { return dims[static_cast<std::size_t>(d)].first; }
    double upper(int d) const { return dims[static_cast<std::size_t>(d)].second; }
    double span(int d) const { return upper(d) - lower(d); }
    double diagonal() const;
    void validate() const;  // throws std::invalid_argument unless lower < upper per dim
};

// Stratified design: per dimension, exactly one point falls in each of the m
// equal sub-intervals, uniformly placed, with dimensions permuted
// independently.
std::vector<std::vector<double>> lhs_sample(const Bounds& bounds, int m, SplitMix64& rng);

struct KernelConfig {
    double signal_variance = 1.0;
    std::vector<double> lengthscales;  // in normalized units; resized on fit
    double jitter = 1e-6;
    bool fit_hyperparameters = true;
};

// Zero-mean Gaussian process with a Matern-5/2 kernel over inputs normalized
// to the unit box; outputs are centered. Hyperparameters are picked by log
// marginal likelihood over a small grid unless pinned by the caller.
class GpModel {
public:
    GpModel() = default;

    static GpModel fit(const std::vector<std::vector<double>>& X, const std::vector<double>& W,
                       const Bounds& bounds, KernelConfig config = {});

    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };
    Prediction predict(std::span<const double> x) const;

    // Kernel between two raw-space points, for cross-checks against the
    // closed form.
    double kernel_value(std::span<const double> a, std::span<const double> b) const;

    const KernelConfig& kernel() const { return config_; }
    int size() const { return static_cast<int>(X_.rows()); }

private:
    Bounds bounds_;
    KernelConfig config_;
    Eigen::MatrixXd X_;       // normalized training inputs
    Eigen::MatrixXd chol_;    // lower Cholesky factor of K + jitter I
    Eigen::VectorXd alpha_;   // (K + jitter I)^-1 (W - center)
    double center_ = 0.0;

    Eigen::VectorXd normalize(std::span<const double> x) const;
    double kernel_normalized(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

// Approximate argmax of the UCB acquisition mean + beta * sigma over the box:
// quasi-random probes followed by coordinate refinement of the best few.
std::vector<double> suggest_next(const GpModel& model, const Bounds& bounds, double beta,
                                 std::uint64_t seed);

struct TraceRow {
    int iteration = 0;  // 0-based over all evaluations, LHS included
    std::vector<double> params;
    double objective = 0.0;
    double acquisition = 0.0;  // 0 for design points
    double best_so_far = 0.0;
    bool penalized = false;
};

struct OptimizationResult {
    std::vector<double> best_params;
    double best_objective = 0.0;
    std::vector<TraceRow> trace;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Objective evaluations that throw are recorded with a large negative value
// instead of aborting the loop.
constexpr double kFailedObjectiveValue = -1e4;

OptimizationResult optimize(const Objective& objective, const Bounds& bounds, int n_init,
                            int n_iter, double beta, std::uint64_t seed, int workers = 1,
                            const std::function<void(const TraceRow&)>& on_row = {});

}  // namespace tcsim
