#pragma once

#include <span>
#include <vector>

namespace nnscore {

enum class ScheduleKind { Edm, Vp };

/// Noise schedule of the forward process. EDM: sigma(t) = t, scale(t) = 1.
/// VP: sigma(t) = sqrt(exp(beta_d t^2 / 2 + beta_min t) - 1),
///     scale(t) = 1 / sqrt(exp(beta_d t^2 / 2 + beta_min t)).
struct DiffusionSchedule {
    ScheduleKind kind = ScheduleKind::Edm;
    double beta_d = 19.9;   // VP only
    double beta_min = 0.1;  // VP only
    double t_min = 0.002;
    double t_max = 80.0;

    static DiffusionSchedule edm(double t_min = 0.002, double t_max = 80.0);
    static DiffusionSchedule vp(double beta_d = 19.9, double beta_min = 0.1,
                                double t_min = 1e-3, double t_max = 1.0);
};

double sigma(const DiffusionSchedule& schedule, double t);
double scale(const DiffusionSchedule& schedule, double t);

/// d sigma / dt and d scale / dt, used by the probability-flow drift.
double sigma_deriv(const DiffusionSchedule& schedule, double t);
double scale_deriv(const DiffusionSchedule& schedule, double t);

/// ConstantFree drops the Gaussian normalizer (it cancels in every weight,
/// posterior, and normalizing-constant ratio downstream and would underflow
/// at small t). ExactConstant includes the full -(d/2) log(2 pi sigma^2).
enum class LikelihoodMode { ConstantFree, ExactConstant };

/// Log-density of N(z / scale(t); x, sigma(t)^2 I).
double log_forward_likelihood(const DiffusionSchedule& schedule, std::span<const double> x,
                              std::span<const double> z, double t,
                              LikelihoodMode mode = LikelihoodMode::ConstantFree);

/// Gradient in z of log_forward_likelihood: (x - z / scale(t)) / sigma(t)^2.
std::vector<double> conditional_score(const DiffusionSchedule& schedule,
                                      std::span<const double> x, std::span<const double> z,
                                      double t);

}  // namespace nnscore
