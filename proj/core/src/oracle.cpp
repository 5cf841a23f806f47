#include "nnscore/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "nnscore/math.hpp"

namespace nnscore {

namespace {

void check_time(double t) {
    if (!(t > 0.0)) throw std::domain_error("diffusion time must be positive");
}

// Query point in data space: z / scale(t). For EDM this is z itself.
std::vector<double> scaled_query(const DiffusionSchedule& schedule, std::span<const double> z,
                                 double t) {
    const double inv_scale = 1.0 / scale(schedule, t);
    std::vector<double> u(z.begin(), z.end());
    for (double& v : u) v *= inv_scale;
    return u;
}

}  // namespace

std::vector<double> atom_log_likelihoods(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t) {
    check_time(t);
    if (z.size() != data.dim()) throw std::invalid_argument("z dimension mismatch");
    const auto u = scaled_query(schedule, z, t);
    const double u_sq_norm = squared_norm(u);
    const double sig = sigma(schedule, t);
    const double inv_two_var = 1.0 / (2.0 * sig * sig);

    std::vector<double> lls(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        lls[i] = -data.squared_distance_to(u, u_sq_norm, i) * inv_two_var;
    }
    return lls;
}

double atom_log_likelihood(const DatasetStore& data, const DiffusionSchedule& schedule,
                           std::span<const double> z, double t, std::size_t i) {
    check_time(t);
    const auto u = scaled_query(schedule, z, t);
    const double sig = sigma(schedule, t);
    return -data.squared_distance_to(u, squared_norm(u), i) / (2.0 * sig * sig);
}

ExactPosterior exact_posterior(const DatasetStore& data, const DiffusionSchedule& schedule,
                               std::span<const double> z, double t) {
    ExactPosterior posterior;
    posterior.log_probs = atom_log_likelihoods(data, schedule, z, t);
    posterior.log_marginal = log_sum_exp(posterior.log_probs);
    for (double& lp : posterior.log_probs) lp -= posterior.log_marginal;
    return posterior;
}

std::vector<double> exact_posterior_mean(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t) {
    const ExactPosterior posterior = exact_posterior(data, schedule, z, t);
    std::vector<double> mean(data.dim(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double p = std::exp(posterior.log_probs[i]);
        if (p == 0.0) continue;
        const auto x = data.point(i);
        for (std::size_t j = 0; j < data.dim(); ++j) {
            mean[j] += p * static_cast<double>(x[j]);
        }
    }
    return mean;
}

std::vector<double> exact_score(const DatasetStore& data, const DiffusionSchedule& schedule,
                                std::span<const double> z, double t) {
    std::vector<double> mean = exact_posterior_mean(data, schedule, z, t);
    const double sig = sigma(schedule, t);
    const double inv_var = 1.0 / (sig * sig);
    const double inv_scale = 1.0 / scale(schedule, t);
    for (std::size_t j = 0; j < mean.size(); ++j) {
        mean[j] = (mean[j] - z[j] * inv_scale) * inv_var;
    }
    return mean;
}

std::vector<double> snis_covariance_diag(const DatasetStore& data,
                                         const DiffusionSchedule& schedule,
                                         std::span<const double> z, double t,
                                         std::span<const double> proposal_log_probs,
                                         std::size_t n, CovTarget target) {
    if (n < 1) throw std::invalid_argument("batch size n must be >= 1");
    if (proposal_log_probs.size() != data.size()) {
        throw std::invalid_argument("proposal must assign a log-probability per atom");
    }
    const double norm_check = log_sum_exp(proposal_log_probs);
    if (std::abs(norm_check) > 1e-9) {
        throw std::invalid_argument("proposal log-probabilities are not normalized");
    }

    const ExactPosterior posterior = exact_posterior(data, schedule, z, t);
    const std::vector<double> mean = exact_posterior_mean(data, schedule, z, t);

    std::vector<double> diag(data.dim(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double lp = posterior.log_probs[i];
        if (lp == kNegInf) continue;  // zero posterior mass contributes nothing
        const double lq = proposal_log_probs[i];
        if (lq == kNegInf) {
            throw std::invalid_argument(
                "proposal assigns zero mass to an atom with positive posterior mass");
        }
        const double ratio = std::exp(2.0 * lp - lq);
        if (ratio == 0.0) continue;
        const auto x = data.point(i);
        for (std::size_t j = 0; j < data.dim(); ++j) {
            const double dev = static_cast<double>(x[j]) - mean[j];
            diag[j] += ratio * dev * dev;
        }
    }

    double factor = 1.0 / static_cast<double>(n);
    if (target == CovTarget::Score) {
        const double sig = sigma(schedule, t);
        factor /= sig * sig * sig * sig;
    }
    for (double& v : diag) v *= factor;
    return diag;
}

double uniform_trace(const DatasetStore& data, const DiffusionSchedule& schedule,
                     std::span<const double> z, double t, std::size_t n) {
    if (n < 1) throw std::invalid_argument("batch size n must be >= 1");
    const ExactPosterior posterior = exact_posterior(data, schedule, z, t);
    const std::vector<double> mean = exact_posterior_mean(data, schedule, z, t);

    double trace = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double p = std::exp(posterior.log_probs[i]);
        if (p == 0.0) continue;
        const auto x = data.point(i);
        double sq_dev = 0.0;
        for (std::size_t j = 0; j < data.dim(); ++j) {
            const double dev = static_cast<double>(x[j]) - mean[j];
            sq_dev += dev * dev;
        }
        trace += p * p * sq_dev;
    }
    return trace * static_cast<double>(data.size()) / static_cast<double>(n);
}

double optimal_denoiser_check(const DatasetStore& data, const DiffusionSchedule& schedule,
                              std::span<const double> z, double t,
                              std::span<const double> candidate) {
    if (candidate.size() != data.dim()) throw std::invalid_argument("candidate dimension mismatch");
    const ExactPosterior posterior = exact_posterior(data, schedule, z, t);

    double objective = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double p = std::exp(posterior.log_probs[i]);
        if (p == 0.0) continue;
        const auto x = data.point(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < data.dim(); ++j) {
            const double diff = candidate[j] - static_cast<double>(x[j]);
            sq += diff * diff;
        }
        objective += p * sq;
    }
    return objective;
}

}  // namespace nnscore
