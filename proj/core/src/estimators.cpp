#include "nnscore/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnscore/math.hpp"
#include "nnscore/oracle.hpp"

namespace nnscore {

namespace {

// Weighted batch accumulator. Weights arrive in log domain; the mean is the
// single-division ratio sum(w x) / sum(w) after max-subtraction, which keeps
// a fully concentrated batch exactly equal to its atom.
struct WeightedBatch {
    std::vector<double> log_weights;
    std::vector<std::size_t> indices;

    void add(double log_w, std::size_t index) {
        log_weights.push_back(log_w);
        indices.push_back(index);
    }
};

ScoreEstimate finalize(const DatasetStore& data, const DiffusionSchedule& schedule,
                       std::span<const double> z, double t, const WeightedBatch& batch) {
    const double max_lw = *std::max_element(batch.log_weights.begin(), batch.log_weights.end());

    double weight_sum = 0.0;
    double weight_sq_sum = 0.0;
    std::vector<double> weighted(data.dim(), 0.0);
    for (std::size_t i = 0; i < batch.log_weights.size(); ++i) {
        const double w = std::exp(batch.log_weights[i] - max_lw);
        weight_sum += w;
        weight_sq_sum += w * w;
        const auto x = data.point(batch.indices[i]);
        for (std::size_t j = 0; j < data.dim(); ++j) {
            weighted[j] += w * static_cast<double>(x[j]);
        }
    }

    ScoreEstimate estimate;
    estimate.n_used = batch.log_weights.size();
    estimate.ess = (weight_sum * weight_sum) / weight_sq_sum;
    estimate.mean_hat.resize(data.dim());
    estimate.score_hat.resize(data.dim());
    const double sig = sigma(schedule, t);
    const double inv_var = 1.0 / (sig * sig);
    const double inv_scale = 1.0 / scale(schedule, t);
    for (std::size_t j = 0; j < data.dim(); ++j) {
        estimate.mean_hat[j] = weighted[j] / weight_sum;
        estimate.score_hat[j] = (estimate.mean_hat[j] - z[j] * inv_scale) * inv_var;
    }
    return estimate;
}

}  // namespace

ScoreEstimate mc_single(const DatasetStore& data, const DiffusionSchedule& schedule,
                        std::span<const double> x_ref, std::span<const double> z, double t) {
    if (x_ref.size() != data.dim() || z.size() != data.dim()) {
        throw std::invalid_argument("x_ref/z dimension mismatch");
    }
    ScoreEstimate estimate;
    estimate.mean_hat.assign(x_ref.begin(), x_ref.end());
    estimate.score_hat = conditional_score(schedule, x_ref, z, t);
    estimate.ess = 1.0;
    estimate.n_used = 1;
    return estimate;
}

ScoreEstimate mc_posterior(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::span<const double> z, double t, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("mc_posterior requires n >= 1");
    const ExactPosterior posterior = exact_posterior(data, schedule, z, t);

    // Inverse CDF over atoms in descending-probability order.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (posterior.log_probs[a] != posterior.log_probs[b]) {
            return posterior.log_probs[a] > posterior.log_probs[b];
        }
        return a < b;
    });
    std::vector<double> cumulative(data.size());
    double running = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        running += std::exp(posterior.log_probs[order[r]]);
        cumulative[r] = running;
    }

    std::vector<double> sum(data.dim(), 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t rank = it == cumulative.end() ? cumulative.size() - 1
                                                        : static_cast<std::size_t>(it - cumulative.begin());
        const auto x = data.point(order[rank]);
        for (std::size_t j = 0; j < data.dim(); ++j) sum[j] += static_cast<double>(x[j]);
    }

    ScoreEstimate estimate;
    estimate.n_used = n;
    estimate.ess = static_cast<double>(n);
    estimate.mean_hat.resize(data.dim());
    estimate.score_hat.resize(data.dim());
    const double sig = sigma(schedule, t);
    const double inv_var = 1.0 / (sig * sig);
    const double inv_scale = 1.0 / scale(schedule, t);
    for (std::size_t j = 0; j < data.dim(); ++j) {
        estimate.mean_hat[j] = sum[j] / static_cast<double>(n);
        estimate.score_hat[j] = (estimate.mean_hat[j] - z[j] * inv_scale) * inv_var;
    }
    return estimate;
}

KnnProposal build_knn_proposal(const KnnIndex& index, const DiffusionSchedule& schedule,
                               std::span<const double> z, double t, std::size_t k) {
    const DatasetStore& data = index.data();
    if (k < 1 || k > data.size()) {
        throw std::invalid_argument("k must satisfy 1 <= k <= dataset size");
    }
    const double sig = sigma(schedule, t);
    const double inv_scale = 1.0 / scale(schedule, t);
    std::vector<double> query(z.begin(), z.end());
    for (double& v : query) v *= inv_scale;

    const NeighborSet neighbors = search(index, query, k);

    KnnProposal proposal;
    proposal.k = k;
    proposal.n_total = data.size();
    proposal.neighbor_indices = neighbors.indices;
    proposal.neighbor_log_lik.resize(k);
    const double inv_two_var = 1.0 / (2.0 * sig * sig);
    for (std::size_t j = 0; j < k; ++j) {
        proposal.neighbor_log_lik[j] = -neighbors.dists[j] * neighbors.dists[j] * inv_two_var;
    }
    proposal.tail_log_lik = proposal.neighbor_log_lik.back();

    std::vector<double> terms = proposal.neighbor_log_lik;
    if (k < data.size()) {
        terms.push_back(std::log(static_cast<double>(data.size() - k)) + proposal.tail_log_lik);
    }
    proposal.log_zq = log_sum_exp(terms);
    return proposal;
}

std::vector<double> expand_proposal_log_probs(const KnnProposal& proposal) {
    std::vector<double> log_probs(proposal.n_total, proposal.tail_log_lik - proposal.log_zq);
    for (std::size_t j = 0; j < proposal.k; ++j) {
        log_probs[proposal.neighbor_indices[j]] = proposal.neighbor_log_lik[j] - proposal.log_zq;
    }
    return log_probs;
}

ScoreEstimate snis_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, const KnnProposal& proposal,
                            std::size_t n, RngStream& rng, SnisBatch* record) {
    if (n < 1) throw std::invalid_argument("snis_estimate requires n >= 1");
    if (proposal.n_total != data.size()) {
        throw std::invalid_argument("proposal was built for a different dataset");
    }

    const std::size_t k = proposal.k;
    const std::size_t n_total = proposal.n_total;

    // Categorical over k + 1 atoms: neighbours in ascending-distance order,
    // then the lumped tail.
    std::vector<double> cumulative(k + (k < n_total ? 1 : 0));
    double running = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        running += std::exp(proposal.neighbor_log_lik[j] - proposal.log_zq);
        cumulative[j] = running;
    }
    if (k < n_total) {
        running += static_cast<double>(n_total - k) *
                   std::exp(proposal.tail_log_lik - proposal.log_zq);
        cumulative[k] = running;
    }

    std::vector<std::size_t> sorted_neighbors = proposal.neighbor_indices;
    std::sort(sorted_neighbors.begin(), sorted_neighbors.end());
    auto in_neighbor_set = [&](std::size_t i) {
        return std::binary_search(sorted_neighbors.begin(), sorted_neighbors.end(), i);
    };

    // Lazily evaluated tail likelihoods need the scaled query.
    const double sig = sigma(schedule, t);
    const double inv_scale = 1.0 / scale(schedule, t);
    const double inv_two_var = 1.0 / (2.0 * sig * sig);
    std::vector<double> query(z.begin(), z.end());
    for (double& v : query) v *= inv_scale;
    const double query_sq_norm = squared_norm(query);

    if (record) {
        record->indices.clear();
        record->log_q.clear();
        record->indices.reserve(n);
        record->log_q.reserve(n);
    }

    // Log-weights carry a common log_zq shift that self-normalization
    // cancels: neighbours weigh exactly Z_q, tail members Z_q * exp(ll - tail).
    WeightedBatch batch;
    for (std::size_t draw = 0; draw < n; ++draw) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t atom = it == cumulative.end() ? cumulative.size() - 1
                                                        : static_cast<std::size_t>(it - cumulative.begin());
        std::size_t member;
        double log_q;
        if (atom < k) {
            member = proposal.neighbor_indices[atom];
            log_q = proposal.neighbor_log_lik[atom] - proposal.log_zq;
            batch.add(0.0, member);
        } else {
            std::size_t i = rng.uniform_index(n_total);
            while (in_neighbor_set(i)) i = rng.uniform_index(n_total);
            const double ll = -data.squared_distance_to(query, query_sq_norm, i) * inv_two_var;
            member = i;
            log_q = proposal.tail_log_lik - proposal.log_zq;
            batch.add(ll - proposal.tail_log_lik, i);
        }
        if (record) {
            record->indices.push_back(member);
            record->log_q.push_back(log_q);
        }
    }
    return finalize(data, schedule, z, t, batch);
}

namespace {

// Per-atom constant-free log-likelihood, evaluated only for drawn atoms so
// a batch costs O(n d), not O(N d).
struct LazyLogLik {
    LazyLogLik(const DatasetStore& data, const DiffusionSchedule& schedule,
               std::span<const double> z, double t)
        : data_(data), query_(z.begin(), z.end()) {
        const double sig = sigma(schedule, t);
        const double inv_scale = 1.0 / scale(schedule, t);
        for (double& v : query_) v *= inv_scale;
        query_sq_norm_ = squared_norm(query_);
        inv_two_var_ = 1.0 / (2.0 * sig * sig);
    }

    double operator()(std::size_t i) const {
        return -data_.squared_distance_to(query_, query_sq_norm_, i) * inv_two_var_;
    }

    const DatasetStore& data_;
    std::vector<double> query_;
    double query_sq_norm_ = 0.0;
    double inv_two_var_ = 0.0;
};

}  // namespace

ScoreEstimate snis_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, UniformProposal,
                            std::size_t n, RngStream& rng, SnisBatch* record) {
    if (n < 1) throw std::invalid_argument("snis_estimate requires n >= 1");
    const LazyLogLik log_lik(data, schedule, z, t);
    const double log_q = -std::log(static_cast<double>(data.size()));

    if (record) {
        record->indices.clear();
        record->log_q.clear();
    }

    // The constant proposal probability cancels in self-normalization.
    WeightedBatch batch;
    for (std::size_t draw = 0; draw < n; ++draw) {
        const std::size_t i = rng.uniform_index(data.size());
        batch.add(log_lik(i), i);
        if (record) {
            record->indices.push_back(i);
            record->log_q.push_back(log_q);
        }
    }
    return finalize(data, schedule, z, t, batch);
}

ScoreEstimate snis_reweight(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::span<const double> z, double t, const SnisBatch& batch) {
    if (batch.indices.empty() || batch.indices.size() != batch.log_q.size()) {
        throw std::invalid_argument("snis_reweight requires a nonempty recorded batch");
    }
    const LazyLogLik log_lik(data, schedule, z, t);
    WeightedBatch reweighted;
    for (std::size_t i = 0; i < batch.indices.size(); ++i) {
        reweighted.add(log_lik(batch.indices[i]) - batch.log_q[i], batch.indices[i]);
    }
    return finalize(data, schedule, z, t, reweighted);
}

ScoreEstimate stf_estimate(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::size_t x_ref_index, std::span<const double> z, double t,
                           std::size_t n, RngStream& rng) {
    if (n < 2) throw std::invalid_argument("stf_estimate requires n >= 2");
    if (x_ref_index >= data.size()) throw std::invalid_argument("x_ref index out of range");
    const LazyLogLik log_lik(data, schedule, z, t);

    WeightedBatch batch;
    batch.add(log_lik(x_ref_index), x_ref_index);
    for (std::size_t draw = 1; draw < n; ++draw) {
        const std::size_t i = rng.uniform_index(data.size());
        batch.add(log_lik(i), i);
    }
    return finalize(data, schedule, z, t, batch);
}

}  // namespace nnscore
