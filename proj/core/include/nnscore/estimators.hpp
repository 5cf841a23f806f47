#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nnscore/dataset.hpp"
#include "nnscore/knn.hpp"
#include "nnscore/rng.hpp"
#include "nnscore/schedules.hpp"

namespace nnscore {

/// Truncated nearest-neighbour proposal in log domain. The k neighbours
/// carry their exact constant-free forward log-likelihoods (recomputed from
/// the search distances, no point retrieval); every other atom is lumped
/// into a flat tail at the k-th neighbour's likelihood. log_zq normalizes
/// the k + 1 atom masses:
///   Z_q = sum_j exp(neighbor_log_lik[j]) + (n_total - k) exp(tail_log_lik).
struct KnnProposal {
    std::vector<double> neighbor_log_lik;      // ascending distance order
    std::vector<std::size_t> neighbor_indices; // matching order
    double tail_log_lik = 0.0;                 // k-th neighbour's log-likelihood
    double log_zq = 0.0;
    std::size_t k = 0;
    std::size_t n_total = 0;
};

/// q(x) = 1/N for every atom.
struct UniformProposal {};

/// Posterior-mean estimate and the score it induces. ess is the effective
/// sample size 1 / sum(normalized_weight^2), a weight-degeneracy diagnostic.
struct ScoreEstimate {
    std::vector<double> mean_hat;
    std::vector<double> score_hat;
    double ess = 1.0;
    std::size_t n_used = 1;
};

/// Single-sample estimate under joint-sample semantics: x_ref is the dataset
/// point that generated z, so the estimate is x_ref itself and the score is
/// its conditional score.
ScoreEstimate mc_single(const DatasetStore& data, const DiffusionSchedule& schedule,
                        std::span<const double> x_ref, std::span<const double> z, double t);

/// Averages n draws from the exact posterior (inverse CDF over atoms in
/// descending-probability order). Costs a full O(N d) posterior evaluation;
/// reference baseline only.
ScoreEstimate mc_posterior(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::span<const double> z, double t, std::size_t n, RngStream& rng);

/// Builds the truncated proposal at (z, t). The search query is z / scale(t)
/// for generalized schedules.
KnnProposal build_knn_proposal(const KnnIndex& index, const DiffusionSchedule& schedule,
                               std::span<const double> z, double t, std::size_t k);

/// Expands the lumped proposal into one normalized log-probability per
/// dataset atom (tail atoms all share the k-th likelihood).
std::vector<double> expand_proposal_log_probs(const KnnProposal& proposal);

/// A drawn batch with each member's proposal log-probability. Recording one
/// lets a caller reuse the same batch with weights recomputed at another
/// (z, t) — see snis_reweight.
struct SnisBatch {
    std::vector<std::size_t> indices;
    std::vector<double> log_q;
};

/// Self-normalized importance-sampling estimate with n i.i.d. draws from
/// the proposal. Drawing the lumped tail atom selects a uniform member of
/// the non-neighbour set (by rejection) and evaluates its true likelihood
/// on demand. When record is non-null the drawn batch is stored there.
ScoreEstimate snis_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, const KnnProposal& proposal,
                            std::size_t n, RngStream& rng, SnisBatch* record = nullptr);

ScoreEstimate snis_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, UniformProposal proposal,
                            std::size_t n, RngStream& rng, SnisBatch* record = nullptr);

/// SNIS estimate reusing a previously drawn batch: weights are the current
/// likelihoods at (z, t) against the recorded proposal probabilities.
ScoreEstimate snis_reweight(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, const SnisBatch& batch);

/// Uniform-proposal SNIS that deterministically includes the generating
/// point x_ref in the batch without accounting for it in the weights.
ScoreEstimate stf_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::size_t x_ref_index, std::span<const double> z, double t,
                           std::size_t n, RngStream& rng);

}  // namespace nnscore
