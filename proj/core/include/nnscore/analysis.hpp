#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnscore/dataset.hpp"
#include "nnscore/schedules.hpp"

namespace nnscore {

enum class EstimatorKind { Exact, McSingle, McPosterior, UniformSnis, KnnSnis, Stf };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::KnnSnis;
    std::size_t n = 256;  // batch size; ignored by Exact and McSingle
    std::size_t k = 64;   // KnnSnis only
};

std::string estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& token);

/// The bias/variance/MSE sweep: per t, draw m_points (x, z) pairs from the
/// joint, run each estimator reps times per z, and decompose the error into
/// squared bias (of the per-z sample mean) and variance (unbiased, divisor
/// reps - 1), both averaged over z and divided by the dimension.
struct EvalProtocol {
    std::vector<double> t_grid;
    std::size_t m_points = 500;
    std::size_t reps = 50;
    std::vector<EstimatorSpec> estimators;
    std::uint64_t master_seed = 0;
    std::size_t threads = 0;  // 0 = hardware default
};

struct EstimatorReportRow {
    double t = 0.0;
    std::string estimator;
    std::string target;  // "mean" or "score"
    std::size_t n = 0;
    std::size_t k = 0;
    double bias_sq = 0.0;
    double variance = 0.0;
    double mse = 0.0;      // bias_sq + variance by construction
    double ess_mean = 0.0;
};

struct EstimatorReport {
    static constexpr const char* kCsvHeader = "t,estimator,target,n,k,bias_sq,variance,mse,ess_mean";
    std::vector<EstimatorReportRow> rows;
    std::string to_csv() const;
};

EstimatorReport run_eval(const DatasetStore& data, const DiffusionSchedule& schedule,
                         const EvalProtocol& protocol);

/// One covariance-bound trial. rho is the normalizing-constant ratio
/// Z_q / P(z) against the unnormalized marginal P(z) = sum_i p_t(z|x_i);
/// satisfied means lhs <= rhs * (1 + 1e-9).
struct BoundReportRow {
    std::size_t trial = 0;
    double t = 0.0;
    std::size_t k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double rho = 0.0;
    bool satisfied = true;
    double margin = 0.0;
};

struct BoundReport {
    static constexpr const char* kCsvHeader = "trial,t,k,lhs,rhs,rho,satisfied,margin";
    std::vector<BoundReportRow> rows;
    std::size_t violations() const;
    std::string to_csv() const;
};

/// Trace of the KNN-proposal covariance against rho times the trace of the
/// posterior-proposal covariance. Trials draw x ~ D, t log-uniform in
/// [t_min, t_max] of the schedule, z from the forward likelihood; both sides
/// are evaluated analytically.
BoundReport verify_theorem1(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::size_t trials, std::size_t k, std::size_t n,
                            std::uint64_t seed);

/// Trace of the KNN-proposal covariance against the posterior-mass-weighted
/// posterior-proposal trace plus ((N - k)/N) times the uniform-proposal
/// trace.
BoundReport verify_theorem2(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::size_t trials, std::size_t k, std::size_t n,
                            std::uint64_t seed);

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t count);

}  // namespace nnscore
