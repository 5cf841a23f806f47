#include "nnscore/schedules.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nnscore/errors.hpp"
#include "nnscore/math.hpp"

namespace nnscore {

namespace {

void check_time(double t) {
    if (!(t > 0.0)) throw std::domain_error("diffusion time must be positive");
}

void check_dims(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw std::invalid_argument("x and z dimensions differ");
}

// VP exponent h(t) = beta_d t^2 / 2 + beta_min t and its derivative.
double vp_exponent(const DiffusionSchedule& s, double t) {
    return 0.5 * s.beta_d * t * t + s.beta_min * t;
}
double vp_exponent_deriv(const DiffusionSchedule& s, double t) { return s.beta_d * t + s.beta_min; }

}  // namespace

DiffusionSchedule DiffusionSchedule::edm(double t_min, double t_max) {
    if (!(t_min > 0.0 && t_min < t_max)) throw ConfigError("schedule requires 0 < t_min < t_max");
    return DiffusionSchedule{ScheduleKind::Edm, 0.0, 0.0, t_min, t_max};
}

DiffusionSchedule DiffusionSchedule::vp(double beta_d, double beta_min, double t_min,
                                        double t_max) {
    if (!(beta_d > 0.0) || !(beta_min > 0.0)) throw ConfigError("VP betas must be positive");
    if (!(t_min > 0.0 && t_min < t_max)) throw ConfigError("schedule requires 0 < t_min < t_max");
    return DiffusionSchedule{ScheduleKind::Vp, beta_d, beta_min, t_min, t_max};
}

double sigma(const DiffusionSchedule& schedule, double t) {
    check_time(t);
    if (schedule.kind == ScheduleKind::Edm) return t;
    // expm1 keeps precision for small t where exp(h) - 1 ~ h.
    return std::sqrt(std::expm1(vp_exponent(schedule, t)));
}

double scale(const DiffusionSchedule& schedule, double t) {
    check_time(t);
    if (schedule.kind == ScheduleKind::Edm) return 1.0;
    return std::exp(-0.5 * vp_exponent(schedule, t));
}

double sigma_deriv(const DiffusionSchedule& schedule, double t) {
    check_time(t);
    if (schedule.kind == ScheduleKind::Edm) return 1.0;
    const double h = vp_exponent(schedule, t);
    return std::exp(h) * vp_exponent_deriv(schedule, t) / (2.0 * std::sqrt(std::expm1(h)));
}

double scale_deriv(const DiffusionSchedule& schedule, double t) {
    check_time(t);
    if (schedule.kind == ScheduleKind::Edm) return 0.0;
    return -0.5 * vp_exponent_deriv(schedule, t) * scale(schedule, t);
}

double log_forward_likelihood(const DiffusionSchedule& schedule, std::span<const double> x,
                              std::span<const double> z, double t, LikelihoodMode mode) {
    check_time(t);
    check_dims(x, z);
    const double sig = sigma(schedule, t);
    const double inv_scale = 1.0 / scale(schedule, t);
    double sq_dist = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = z[j] * inv_scale - x[j];
        sq_dist += diff * diff;
    }
    double log_lik = -sq_dist / (2.0 * sig * sig);
    if (mode == LikelihoodMode::ExactConstant) {
        log_lik -= 0.5 * static_cast<double>(x.size()) *
                   std::log(2.0 * std::numbers::pi * sig * sig);
    }
    return log_lik;
}

std::vector<double> conditional_score(const DiffusionSchedule& schedule,
                                      std::span<const double> x, std::span<const double> z,
                                      double t) {
    check_time(t);
    check_dims(x, z);
    const double inv_var = 1.0 / (sigma(schedule, t) * sigma(schedule, t));
    const double inv_scale = 1.0 / scale(schedule, t);
    std::vector<double> score(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        score[j] = (x[j] - z[j] * inv_scale) * inv_var;
    }
    return score;
}

}  // namespace nnscore
