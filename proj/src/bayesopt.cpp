#include "tcsim/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tcsim {

namespace {

constexpr double kMaxJitter = 1e-4;
constexpr double kMinJitter = 1e-8;

double matern52(double r) {
    const double s = std::sqrt(5.0) * r;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

// First d primes, for Halton probes.
constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

}  // namespace

double Bounds::diagonal() const {
    double s = 0.0;
    for (int d = 0; d < size(); ++d) s += span(d) * span(d);
    return std::sqrt(s);
}

void Bounds::validate() const {
    if (dims.empty()) throw std::invalid_argument("bounds: empty");
    for (const auto& [lo, hi] : dims)
        if (!(lo < hi)) throw std::invalid_argument("bounds: lower must be < upper per dimension");
}

std::vector<std::vector<double>> lhs_sample(const Bounds& bounds, int m, SplitMix64& rng) {
    bounds.validate();
    if (m < 1) throw std::invalid_argument("lhs_sample: m must be >= 1");
    const int dim = bounds.size();

    std::vector<std::vector<double>> points(static_cast<std::size_t>(m),
                                            std::vector<double>(static_cast<std::size_t>(dim)));
    std::vector<int> strata(static_cast<std::size_t>(m));
    for (int d = 0; d < dim; ++d) {
        std::iota(strata.begin(), strata.end(), 0);
        for (int k = m - 1; k > 0; --k) {
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k + 1));
            std::swap(strata[static_cast<std::size_t>(k)], strata[static_cast<std::size_t>(j)]);
        }
        for (int k = 0; k < m; ++k) {
            const double u = (strata[static_cast<std::size_t>(k)] + rng.next_double()) / m;
            points[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] =
                bounds.lower(d) + u * bounds.span(d);
        }
    }
    return points;
}

Eigen::VectorXd GpModel::normalize(std::span<const double> x) const {
    Eigen::VectorXd z(bounds_.size());
    for (int d = 0; d < bounds_.size(); ++d)
        z[d] = (x[static_cast<std::size_t>(d)] - bounds_.lower(d)) / bounds_.span(d);
    return z;
}

double GpModel::kernel_normalized(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double r2 = 0.0;
    for (int d = 0; d < a.size(); ++d) {
        const double u = (a[d] - b[d]) / config_.lengthscales[static_cast<std::size_t>(d)];
        r2 += u * u;
    }
    return config_.signal_variance * matern52(std::sqrt(r2));
}

double GpModel::kernel_value(std::span<const double> a, std::span<const double> b) const {
    return kernel_normalized(normalize(a), normalize(b));
}

namespace {

struct FitState {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;  // centered
};

// Builds K + jitter I and factorizes it, escalating the jitter when the
// factorization fails.
bool factorize(const FitState& st, const KernelConfig& cfg, Eigen::MatrixXd* chol,
               double* used_jitter) {
    const int m = static_cast<int>(st.X.rows());
    Eigen::MatrixXd K(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            double r2 = 0.0;
            for (int d = 0; d < st.X.cols(); ++d) {
                const double u =
                    (st.X(i, d) - st.X(j, d)) / cfg.lengthscales[static_cast<std::size_t>(d)];
                r2 += u * u;
            }
            K(i, j) = K(j, i) = cfg.signal_variance * matern52(std::sqrt(r2));
        }
    }
    for (double jitter = std::max(cfg.jitter, kMinJitter); jitter <= kMaxJitter * (1.0 + 1e-12);
         jitter *= 10.0) {
        Eigen::MatrixXd A = K + jitter * Eigen::MatrixXd::Identity(m, m);
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            *chol = llt.matrixL();
            *used_jitter = jitter;
            return true;
        }
    }
    return false;
}

double log_marginal_likelihood(const FitState& st, const KernelConfig& cfg) {
    Eigen::MatrixXd L;
    double jitter = 0.0;
    if (!factorize(st, cfg, &L, &jitter)) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd alpha =
        L.transpose().triangularView<Eigen::Upper>().solve(
            L.triangularView<Eigen::Lower>().solve(st.y));
    double log_det = 0.0;
    for (int i = 0; i < L.rows(); ++i) log_det += std::log(L(i, i));
    return -0.5 * st.y.dot(alpha) - log_det -
           0.5 * static_cast<double>(st.y.size()) * std::log(6.283185307179586);
}

}  // namespace

GpModel GpModel::fit(const std::vector<std::vector<double>>& X, const std::vector<double>& W,
                     const Bounds& bounds, KernelConfig config) {
    bounds.validate();
    if (X.empty() || X.size() != W.size())
        throw std::invalid_argument("gp_fit: need matching, nonempty X and W");
    const int dim = bounds.size();
    const int m = static_cast<int>(X.size());

    GpModel model;
    model.bounds_ = bounds;
    model.X_.resize(m, dim);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(X[static_cast<std::size_t>(i)].size()) != dim)
            throw std::invalid_argument("gp_fit: input dimension mismatch");
        model.X_.row(i) = model.normalize(X[static_cast<std::size_t>(i)]).transpose();
    }
    model.center_ = std::accumulate(W.begin(), W.end(), 0.0) / m;

    FitState st;
    st.X = model.X_;
    st.y.resize(m);
    for (int i = 0; i < m; ++i) st.y[i] = W[static_cast<std::size_t>(i)] - model.center_;

    if (config.lengthscales.empty())
        config.lengthscales.assign(static_cast<std::size_t>(dim), 0.5);
    if (static_cast<int>(config.lengthscales.size()) != dim)
        throw std::invalid_argument("gp_fit: lengthscale dimension mismatch");

    if (config.fit_hyperparameters && m >= 3) {
        const double sample_var = st.y.squaredNorm() / std::max(1, m - 1);
        static const double kScaleGrid[] = {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.5};
        std::vector<double> var_grid;
        if (sample_var > 0.0)
            var_grid = {0.5 * sample_var, sample_var, 2.0 * sample_var};
        else
            var_grid = {1.0};

        KernelConfig best = config;
        double best_lml = -std::numeric_limits<double>::infinity();
        for (double var : var_grid) {
            for (double ell : kScaleGrid) {
                KernelConfig trial = config;
                trial.signal_variance = var;
                trial.lengthscales.assign(static_cast<std::size_t>(dim), ell);
                const double lml = log_marginal_likelihood(st, trial);
                if (lml > best_lml) {
                    best_lml = lml;
                    best = trial;
                }
            }
        }
        // Two coordinate sweeps refining per-dimension lengthscales.
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (int d = 0; d < dim; ++d) {
                for (double ell : kScaleGrid) {
                    KernelConfig trial = best;
                    trial.lengthscales[static_cast<std::size_t>(d)] = ell;
                    const double lml = log_marginal_likelihood(st, trial);
                    if (lml > best_lml) {
                        best_lml = lml;
                        best = trial;
                    }
                }
            }
        }
        config = best;
    }

    double used_jitter = 0.0;
    if (!factorize(st, config, &model.chol_, &used_jitter))
        throw std::runtime_error(
            "gp_fit: covariance factorization failed even at jitter 1e-4; "
            "inputs likely contain duplicates with conflicting values");
    config.jitter = used_jitter;
    model.config_ = config;
    model.alpha_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(
        model.chol_.triangularView<Eigen::Lower>().solve(st.y));
    return model;
}

GpModel::Prediction GpModel::predict(std::span<const double> x) const {
    if (X_.rows() == 0) throw std::logic_error("gp_predict: model not fitted");
    const Eigen::VectorXd z = normalize(x);
    const int m = static_cast<int>(X_.rows());
    Eigen::VectorXd k(m);
    for (int i = 0; i < m; ++i) k[i] = kernel_normalized(z, X_.row(i).transpose());

    Prediction p;
    p.mean = k.dot(alpha_) + center_;
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    p.variance = std::max(0.0, config_.signal_variance - v.squaredNorm());
    return p;
}

std::vector<double> suggest_next(const GpModel& model, const Bounds& bounds, double beta,
                                 std::uint64_t seed) {
    bounds.validate();
    if (beta < 0.0) throw std::invalid_argument("suggest_next: beta must be nonnegative");
    const int dim = bounds.size();
    if (dim > static_cast<int>(std::size(kHaltonBases)))
        throw std::invalid_argument("suggest_next: more dimensions than Halton bases");

    SplitMix64 rng(substream_seed(seed, Stream::acquisition));
    std::vector<double> rotation(static_cast<std::size_t>(dim));
    for (double& r : rotation) r = rng.next_double();

    auto ucb = [&](const std::vector<double>& x) {
        const GpModel::Prediction p = model.predict(x);
        return p.mean + beta * std::sqrt(p.variance);
    };

    constexpr int kProbes = 2048;
    constexpr int kTop = 8;
    std::vector<std::pair<double, std::vector<double>>> scored;
    scored.reserve(kProbes);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int i = 1; i <= kProbes; ++i) {
        for (int d = 0; d < dim; ++d) {
            double u = halton(i, kHaltonBases[d]) + rotation[static_cast<std::size_t>(d)];
            if (u >= 1.0) u -= 1.0;
            x[static_cast<std::size_t>(d)] = bounds.lower(d) + u * bounds.span(d);
        }
        scored.emplace_back(ucb(x), x);
    }
    std::partial_sort(scored.begin(), scored.begin() + kTop, scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<double> best_x = scored.front().second;
    double best_value = scored.front().first;
    for (int c = 0; c < kTop; ++c) {
        std::vector<double> cur = scored[static_cast<std::size_t>(c)].second;
        double cur_value = scored[static_cast<std::size_t>(c)].first;
        double step = 0.1;
        for (int round = 0; round < 25; ++round) {
            bool improved = false;
            for (int d = 0; d < dim; ++d) {
                for (double sign : {-1.0, 1.0}) {
                    std::vector<double> trial = cur;
                    double& coord = trial[static_cast<std::size_t>(d)];
                    coord = std::clamp(coord + sign * step * bounds.span(d), bounds.lower(d),
                                       bounds.upper(d));
                    const double value = ucb(trial);
                    if (value > cur_value) {
                        cur = trial;
                        cur_value = value;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.6;
            if (step < 1e-5) break;
        }
        if (cur_value > best_value) {
            best_value = cur_value;
            best_x = cur;
        }
    }
    return best_x;
}

OptimizationResult optimize(const Objective& objective, const Bounds& bounds, int n_init,
                            int n_iter, double beta, std::uint64_t seed, int workers,
                            const std::function<void(const TraceRow&)>& on_row) {
    bounds.validate();
    if (n_init < 1) throw std::invalid_argument("optimize: n_init must be >= 1");

    OptimizationResult result;
    result.best_objective = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> X;
    std::vector<double> W;

    auto evaluate = [&](const std::vector<double>& x) -> std::pair<double, bool> {
        try {
            return {objective(x), false};
        } catch (const std::exception&) {
            return {kFailedObjectiveValue, true};
        }
    };
    auto record = [&](const std::vector<double>& x, double value, bool penalized,
                      double acquisition) {
        X.push_back(x);
        W.push_back(value);
        if (value > result.best_objective) {
            result.best_objective = value;
            result.best_params = x;
        }
        TraceRow row{static_cast<int>(result.trace.size()), x,          value,
                     acquisition,                           result.best_objective, penalized};
        result.trace.push_back(row);
        if (on_row) on_row(row);
    };

    SplitMix64 design_rng(substream_seed(seed, Stream::lhs_design));
    const std::vector<std::vector<double>> design = lhs_sample(bounds, n_init, design_rng);
    if (workers > 1) {
        std::vector<std::future<std::pair<double, bool>>> futures;
        futures.reserve(design.size());
        std::size_t next = 0, done = 0;
        std::vector<std::pair<double, bool>> values(design.size());
        while (done < design.size()) {
            while (next < design.size() &&
                   futures.size() - done < static_cast<std::size_t>(workers)) {
                futures.push_back(std::async(std::launch::async, evaluate, design[next]));
                ++next;
            }
            values[done] = futures[done].get();
            ++done;
        }
        for (std::size_t i = 0; i < design.size(); ++i)
            record(design[i], values[i].first, values[i].second, 0.0);
    } else {
        for (const auto& x : design) {
            const auto [value, penalized] = evaluate(x);
            record(x, value, penalized, 0.0);
        }
    }

    for (int it = 0; it < n_iter; ++it) {
        const GpModel model = GpModel::fit(X, W, bounds);
        const std::vector<double> x =
            suggest_next(model, bounds, beta, substream_seed(seed, Stream::acquisition,
                                                             static_cast<std::uint64_t>(it)));
        const GpModel::Prediction p = model.predict(x);
        const auto [value, penalized] = evaluate(x);
        record(x, value, penalized, p.mean + beta * std::sqrt(p.variance));
    }
    return result;
}

}  // namespace tcsim
