#pragma once

#include <span>
#include <vector>

#include "nnscore/dataset.hpp"
#include "nnscore/schedules.hpp"

namespace nnscore {

/// Exact categorical posterior over dataset atoms, log domain.
/// log_probs is normalized (its logsumexp is 0); log_marginal is
/// log sum_i p_t(z|x_i) in the constant-free convention, the unnormalized
/// marginal that the proposal-to-posterior ratio Z_q / P(z) is taken
/// against.
struct ExactPosterior {
    std::vector<double> log_probs;
    double log_marginal = 0.0;
};

/// Constant-free log p_t(z|x_i) for every atom, sharing the precomputed-norm
/// distance expansion with search so likelihood exponents agree bit-for-bit.
std::vector<double> atom_log_likelihoods(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t);

/// Single-atom version, used for lazily evaluated tail weights.
double atom_log_likelihood(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::span<const double> z, double t, std::size_t i);

ExactPosterior exact_posterior(const DatasetStore& data, const DiffusionSchedule& schedule,
                               std::span<const double> z, double t);

/// sum_i p_t(x_i|z) x_i — the optimal denoiser.
std::vector<double> exact_posterior_mean(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t);

/// (posterior mean - z / scale(t)) / sigma(t)^2 — the marginal score.
std::vector<double> exact_score(const DatasetStore& data, const DiffusionSchedule& schedule,
                                std::span<const double> z, double t);

/// Which estimator the analytic covariance refers to: the posterior-mean
/// estimate or the score estimate (identical up to a 1/sigma^4 factor).
enum class CovTarget { Mean, Score };

/// Analytic SNIS covariance diagonal for a batch of n draws from the given
/// normalized proposal (log domain, one entry per atom):
///   (1/n) sum_i p_t(x_i|z)^2 / q(x_i) * (x_i - mu)^{o2}
/// with an extra 1/sigma^4 for the Score target. Atoms with zero posterior
/// mass contribute zero regardless of q; zero q mass under positive
/// posterior mass is rejected (the variance would be infinite).
std::vector<double> snis_covariance_diag(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t,
                                         std::span<const double> proposal_log_probs,
                                         std::size_t n, CovTarget target);

/// Closed form of the uniform-proposal covariance trace (Mean target):
///   (N/n) sum_i p_t(x_i|z)^2 ||x_i - mu||^2.
double uniform_trace(const DatasetStore& data, const DiffusionSchedule& schedule,
                     std::span<const double> z, double t, std::size_t n);

/// Posterior expectation of ||candidate - x||^2; minimized by the exact
/// posterior mean.
double optimal_denoiser_check(const DatasetStore& data, const DiffusionSchedule& schedule,
                              std::span<const double> z, double t,
                              std::span<const double> candidate);

}  // namespace nnscore
