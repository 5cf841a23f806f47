#include "nnscore/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nnscore/csv.hpp"
#include "nnscore/errors.hpp"
#include "nnscore/estimators.hpp"
#include "nnscore/math.hpp"
#include "nnscore/oracle.hpp"
#include "nnscore/parallel.hpp"
#include "nnscore/rng.hpp"

namespace nnscore {

namespace {

// Seed-derivation tags; keeps the streams of distinct phases disjoint.
constexpr std::uint64_t kTagEvalPair = 0xE1;
constexpr std::uint64_t kTagEvalRep = 0xE2;
constexpr std::uint64_t kTagBoundTrial = 0xB1;

std::vector<double> draw_forward(const DatasetStore& data, const DiffusionSchedule& schedule,
                                 double t, std::size_t x_index, RngStream& rng) {
    const double s = scale(schedule, t);
    const double sig = sigma(schedule, t);
    const auto x = data.point(x_index);
    std::vector<double> z(data.dim());
    for (std::size_t j = 0; j < data.dim(); ++j) {
        z[j] = s * static_cast<double>(x[j]) + s * sig * rng.normal();
    }
    return z;
}

}  // namespace

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Exact: return "exact";
        case EstimatorKind::McSingle: return "single";
        case EstimatorKind::McPosterior: return "posterior";
        case EstimatorKind::UniformSnis: return "uniform";
        case EstimatorKind::KnnSnis: return "knn";
        case EstimatorKind::Stf: return "stf";
    }
    throw std::logic_error("unreachable estimator kind");
}

EstimatorKind parse_estimator_kind(const std::string& token) {
    if (token == "exact") return EstimatorKind::Exact;
    if (token == "single" || token == "mc_single") return EstimatorKind::McSingle;
    if (token == "posterior" || token == "mc_posterior") return EstimatorKind::McPosterior;
    if (token == "uniform") return EstimatorKind::UniformSnis;
    if (token == "knn") return EstimatorKind::KnnSnis;
    if (token == "stf") return EstimatorKind::Stf;
    throw ConfigError("unknown estimator '" + token +
                      "' (expected exact|single|posterior|uniform|knn|stf)");
}

std::string EstimatorReport::to_csv() const {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << format_double(row.t) << ',' << row.estimator << ',' << row.target << ','
            << row.n << ',' << row.k << ',' << format_double(row.bias_sq) << ','
            << format_double(row.variance) << ',' << format_double(row.mse) << ','
            << format_double(row.ess_mean) << '\n';
    }
    return out.str();
}

std::size_t BoundReport::violations() const {
    std::size_t count = 0;
    for (const auto& row : rows) count += row.satisfied ? 0 : 1;
    return count;
}

std::string BoundReport::to_csv() const {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.trial << ',' << format_double(row.t) << ',' << row.k << ','
            << format_double(row.lhs) << ',' << format_double(row.rhs) << ','
            << format_double(row.rho) << ',' << (row.satisfied ? 1 : 0) << ','
            << format_double(row.margin) << '\n';
    }
    return out.str();
}

namespace {

void validate_protocol(const DatasetStore& data, const EvalProtocol& protocol) {
    if (protocol.t_grid.empty()) throw ConfigError("protocol requires a nonempty t grid");
    for (double t : protocol.t_grid) {
        if (!(t > 0.0)) throw ConfigError("protocol t grid must be positive");
    }
    if (protocol.m_points < 1) throw ConfigError("protocol requires m_points >= 1");
    if (protocol.reps < 2) throw ConfigError("protocol requires reps >= 2 (variance needs 2)");
    if (protocol.estimators.empty()) throw ConfigError("protocol requires at least one estimator");
    for (const auto& spec : protocol.estimators) {
        if (spec.kind != EstimatorKind::Exact && spec.kind != EstimatorKind::McSingle &&
            spec.n < 1) {
            throw ConfigError("estimator batch size must be >= 1");
        }
        if (spec.kind == EstimatorKind::Stf && spec.n < 2) {
            throw ConfigError("stf estimator requires n >= 2");
        }
        if (spec.kind == EstimatorKind::KnnSnis && (spec.k < 1 || spec.k > data.size())) {
            throw ConfigError("knn estimator requires 1 <= k <= dataset size");
        }
    }
}

// Per-(t, point, estimator) statistics before aggregation over points.
struct PairStats {
    double bias_sq = 0.0;   // ||mean over reps - mu||^2 / d
    double variance = 0.0;  // per-dim sample variance, averaged over dims
    double ess_sum = 0.0;
};

}  // namespace

EstimatorReport run_eval(const DatasetStore& data, const DiffusionSchedule& schedule,
                         const EvalProtocol& protocol) {
    validate_protocol(data, protocol);

    const std::size_t n_t = protocol.t_grid.size();
    const std::size_t n_points = protocol.m_points;
    const std::size_t n_est = protocol.estimators.size();
    const std::size_t dim = data.dim();
    const std::size_t reps = protocol.reps;

    const KnnIndex index = build_index(data);
    std::vector<PairStats> stats(n_t * n_points * n_est);

    parallel_for(n_t * n_points, protocol.threads, [&](std::size_t item) {
        const std::size_t t_idx = item / n_points;
        const std::size_t point_idx = item % n_points;
        const double t = protocol.t_grid[t_idx];

        RngStream pair_rng(derive_seed(protocol.master_seed, kTagEvalPair, t_idx, point_idx));
        const std::size_t x_index = pair_rng.uniform_index(data.size());
        const std::vector<double> z = draw_forward(data, schedule, t, x_index, pair_rng);
        const std::vector<double> x_ref = data.point_as_double(x_index);
        const std::vector<double> mu = exact_posterior_mean(data, schedule, z, t);

        for (std::size_t e = 0; e < n_est; ++e) {
            const EstimatorSpec& spec = protocol.estimators[e];
            try {
                // One proposal per (z, t, k), shared across repetitions.
                KnnProposal proposal;
                if (spec.kind == EstimatorKind::KnnSnis) {
                    proposal = build_knn_proposal(index, schedule, z, t, spec.k);
                }

                std::vector<double> estimates(reps * dim);
                double ess_sum = 0.0;
                for (std::size_t r = 0; r < reps; ++r) {
                    RngStream rep_rng(derive_seed(protocol.master_seed, kTagEvalRep,
                                                  (item * n_est + e), r));
                    ScoreEstimate est;
                    switch (spec.kind) {
                        case EstimatorKind::Exact:
                            est.mean_hat = mu;
                            est.ess = 1.0;
                            break;
                        case EstimatorKind::McSingle:
                            est = mc_single(data, schedule, x_ref, z, t);
                            break;
                        case EstimatorKind::McPosterior:
                            est = mc_posterior(data, schedule, z, t, spec.n, rep_rng);
                            break;
                        case EstimatorKind::UniformSnis:
                            est = snis_estimate(data, schedule, z, t, UniformProposal{}, spec.n,
                                                rep_rng);
                            break;
                        case EstimatorKind::KnnSnis:
                            est = snis_estimate(data, schedule, z, t, proposal, spec.n, rep_rng);
                            break;
                        case EstimatorKind::Stf:
                            est = stf_estimate(data, schedule, x_index, z, t, spec.n, rep_rng);
                            break;
                    }
                    for (std::size_t j = 0; j < dim; ++j) estimates[r * dim + j] = est.mean_hat[j];
                    ess_sum += est.ess;
                }

                std::vector<double> rep_mean(dim, 0.0);
                for (std::size_t r = 0; r < reps; ++r) {
                    for (std::size_t j = 0; j < dim; ++j) rep_mean[j] += estimates[r * dim + j];
                }
                for (double& v : rep_mean) v /= static_cast<double>(reps);

                PairStats& slot = stats[item * n_est + e];
                for (std::size_t j = 0; j < dim; ++j) {
                    const double dev = rep_mean[j] - mu[j];
                    slot.bias_sq += dev * dev;
                }
                slot.bias_sq /= static_cast<double>(dim);
                double sq_sum = 0.0;
                for (std::size_t r = 0; r < reps; ++r) {
                    for (std::size_t j = 0; j < dim; ++j) {
                        const double dev = estimates[r * dim + j] - rep_mean[j];
                        sq_sum += dev * dev;
                    }
                }
                slot.variance = sq_sum / static_cast<double>((reps - 1) * dim);
                slot.ess_sum = ess_sum;
            } catch (const std::exception& err) {
                throw std::runtime_error("estimator '" + estimator_name(spec.kind) +
                                         "' failed at t=" + format_double(t) + ", point " +
                                         std::to_string(point_idx) + ": " + err.what());
            }
        }
    });

    EstimatorReport report;
    report.rows.reserve(n_t * n_est * 2);
    for (std::size_t t_idx = 0; t_idx < n_t; ++t_idx) {
        const double t = protocol.t_grid[t_idx];
        const double sig = sigma(schedule, t);
        const double score_factor = 1.0 / (sig * sig * sig * sig);
        for (std::size_t e = 0; e < n_est; ++e) {
            const EstimatorSpec& spec = protocol.estimators[e];
            double bias_sq = 0.0;
            double variance = 0.0;
            double ess = 0.0;
            for (std::size_t p = 0; p < n_points; ++p) {
                const PairStats& slot = stats[(t_idx * n_points + p) * n_est + e];
                bias_sq += slot.bias_sq;
                variance += slot.variance;
                ess += slot.ess_sum;
            }
            bias_sq /= static_cast<double>(n_points);
            variance /= static_cast<double>(n_points);
            ess /= static_cast<double>(n_points * reps);

            const std::size_t k_col = spec.kind == EstimatorKind::KnnSnis ? spec.k : 0;
            const std::size_t n_col =
                (spec.kind == EstimatorKind::Exact || spec.kind == EstimatorKind::McSingle)
                    ? 1
                    : spec.n;
            report.rows.push_back({t, estimator_name(spec.kind), "mean", n_col, k_col, bias_sq,
                                   variance, bias_sq + variance, ess});
            // The score estimate is affine in the mean estimate at fixed
            // (z, t), so its error statistics are the mean statistics
            // scaled by 1/sigma^4.
            report.rows.push_back({t, estimator_name(spec.kind), "score", n_col, k_col,
                                   bias_sq * score_factor, variance * score_factor,
                                   (bias_sq + variance) * score_factor, ess});
        }
    }
    return report;
}

namespace {

struct BoundTrialContext {
    double t = 0.0;
    std::vector<double> z;
    KnnProposal proposal;
    ExactPosterior posterior;
    double lhs = 0.0;
    double tr_posterior = 0.0;
    double rho = 0.0;
};

BoundTrialContext run_bound_trial(const DatasetStore& data, const DiffusionSchedule& schedule,
                                  const KnnIndex& index, std::size_t k, std::size_t n,
                                  std::uint64_t seed, std::size_t trial) {
    RngStream rng(derive_seed(seed, kTagBoundTrial, trial, k));
    const std::size_t x_index = rng.uniform_index(data.size());
    const double log_lo = std::log(schedule.t_min);
    const double log_hi = std::log(schedule.t_max);
    const double t = std::exp(log_lo + rng.uniform() * (log_hi - log_lo));

    BoundTrialContext ctx;
    ctx.t = t;
    ctx.z = draw_forward(data, schedule, t, x_index, rng);
    ctx.proposal = build_knn_proposal(index, schedule, ctx.z, t, k);
    ctx.posterior = exact_posterior(data, schedule, ctx.z, t);

    const std::vector<double> q_knn = expand_proposal_log_probs(ctx.proposal);
    const std::vector<double> diag_knn =
        snis_covariance_diag(data, schedule, ctx.z, t, q_knn, n, CovTarget::Mean);
    const std::vector<double> diag_post = snis_covariance_diag(
        data, schedule, ctx.z, t, ctx.posterior.log_probs, n, CovTarget::Mean);
    for (double v : diag_knn) ctx.lhs += v;
    for (double v : diag_post) ctx.tr_posterior += v;
    ctx.rho = std::exp(ctx.proposal.log_zq - ctx.posterior.log_marginal);
    return ctx;
}

}  // namespace

BoundReport verify_theorem1(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::size_t trials, std::size_t k, std::size_t n,
                            std::uint64_t seed) {
    if (k < 1 || k > data.size()) throw std::invalid_argument("k must satisfy 1 <= k <= N");
    const KnnIndex index = build_index(data);

    BoundReport report;
    report.rows.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const BoundTrialContext ctx = run_bound_trial(data, schedule, index, k, n, seed, trial);
        BoundReportRow row;
        row.trial = trial;
        row.t = ctx.t;
        row.k = k;
        row.lhs = ctx.lhs;
        row.rho = ctx.rho;
        row.rhs = ctx.rho * ctx.tr_posterior;
        row.satisfied = row.lhs <= row.rhs * (1.0 + 1e-9);
        row.margin = row.rhs - row.lhs;
        report.rows.push_back(row);
    }
    return report;
}

BoundReport verify_theorem2(const DatasetStore& data, const DiffusionSchedule& schedule,
                            std::size_t trials, std::size_t k, std::size_t n,
                            std::uint64_t seed) {
    if (k < 1 || k > data.size()) throw std::invalid_argument("k must satisfy 1 <= k <= N");
    const KnnIndex index = build_index(data);
    const double tail_fraction =
        static_cast<double>(data.size() - k) / static_cast<double>(data.size());

    BoundReport report;
    report.rows.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const BoundTrialContext ctx = run_bound_trial(data, schedule, index, k, n, seed, trial);
        // Posterior mass on the neighbour set: 1 - sum_{x not in K} p(z|x)/P(z).
        const double mass_on_k =
            std::exp(log_sum_exp(ctx.proposal.neighbor_log_lik) - ctx.posterior.log_marginal);
        const double u_trace = uniform_trace(data, schedule, ctx.z, ctx.t, n);

        BoundReportRow row;
        row.trial = trial;
        row.t = ctx.t;
        row.k = k;
        row.lhs = ctx.lhs;
        row.rho = ctx.rho;
        row.rhs = mass_on_k * ctx.tr_posterior + tail_fraction * u_trace;
        row.satisfied = row.lhs <= row.rhs * (1.0 + 1e-9);
        row.margin = row.rhs - row.lhs;
        report.rows.push_back(row);
    }
    return report;
}

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && lo < hi) || count < 2) {
        throw ConfigError("log grid requires 0 < lo < hi and count >= 2");
    }
    std::vector<double> grid(count);
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

}  // namespace nnscore
