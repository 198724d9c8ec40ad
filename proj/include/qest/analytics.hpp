#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "qest/errors.hpp"
#include "qest/trace.hpp"

namespace qest {

// Closed-form fidelity dynamics for coplanar states, i.e. both Bloch vectors
// on the great circle preserved by the drive. theta and theta_e are the
// circle coordinates of the actual state and the estimate; the relative
// half-angle theta_r = (theta - theta_e)/2 carries the fidelity through
// F = cos^2(theta_r), and the mean angle theta_bar = (theta + theta_e)/2
// carries the oscillation.

// Coordinates (theta_bar, theta_r) with theta/theta_e derived, so the
// defining identities hold exactly.
class AngleCoords {
  public:
    static AngleCoords from_polar(double theta, double theta_e) {
        if (!std::isfinite(theta) || !std::isfinite(theta_e)) {
            throw invalid_parameter("AngleCoords: non-finite angle");
        }
        if (theta < 0.0 || theta > std::numbers::pi || theta_e < 0.0 ||
            theta_e > std::numbers::pi) {
            throw invalid_parameter("AngleCoords: polar angle outside [0,pi]");
        }
        return AngleCoords(0.5 * (theta + theta_e), 0.5 * (theta - theta_e));
    }

    // Unrestricted variant for oscillation-averaging sweeps, where the mean
    // angle winds around the whole circle.
    static AngleCoords from_mean(double theta_bar, double theta_r) {
        if (!std::isfinite(theta_bar) || !std::isfinite(theta_r)) {
            throw invalid_parameter("AngleCoords: non-finite angle");
        }
        return AngleCoords(theta_bar, theta_r);
    }

    double theta_bar() const { return theta_bar_; }
    double theta_r() const { return theta_r_; }
    double theta() const { return theta_bar_ + theta_r_; }
    double theta_e() const { return theta_bar_ - theta_r_; }
    double fidelity() const {
        const double c = std::cos(theta_r_);
        return c * c;
    }

  private:
    AngleCoords(double theta_bar, double theta_r) : theta_bar_(theta_bar), theta_r_(theta_r) {}

    double theta_bar_, theta_r_;
};

namespace detail {
inline void check_dp(double dp, const char* where) {
    if (!std::isfinite(dp) || dp < 0.0 || dp > 1.0) {
        throw invalid_parameter(std::string(where) + ": dp outside [0,1]");
    }
}
inline void check_sign(int sign, const char* where) {
    if (sign != 1 && sign != -1) {
        throw invalid_parameter(std::string(where) + ": sign must be +1 or -1");
    }
}
} // namespace detail

// Expected fidelity change of one elementary step for coplanar states, as a
// function of the circle coordinates. omega_e_tau is the rotation advance of
// the estimate per step and delta_tau the per-step phase lag between actual
// and estimated rotation.
inline double delta_f_closed_form(double theta, double theta_e, double omega_e_tau,
                                  double dp, double delta_tau) {
    if (!std::isfinite(theta) || !std::isfinite(theta_e) || !std::isfinite(omega_e_tau) ||
        !std::isfinite(delta_tau)) {
        throw invalid_parameter("delta_f_closed_form: non-finite input");
    }
    detail::check_dp(dp, "delta_f_closed_form");
    const double a = omega_e_tau + theta_e;
    const double ca = std::cos(a);
    const double den = 1.0 - dp * dp * ca * ca;
    if (den <= 1e-15) {
        throw degenerate_geometry("delta_f_closed_form: projective measurement aligned with the estimate");
    }
    const double tr = 0.5 * (theta - theta_e);
    const double sa = std::sin(a);
    const double str = std::sin(tr);
    const double ctr = std::cos(tr);
    const double ctr_shift = std::cos(tr + 0.5 * delta_tau);
    const double gain = dp * dp * sa * sa * str * str;
    const double drift = (1.0 - dp * dp) * (ctr * ctr - ctr_shift * ctr_shift);
    return (gain - drift) / den;
}

// The same increment in (fidelity, mean angle, relative half-angle)
// coordinates. The sign argument selects the branch of
// cos(theta_r) sin(theta_r) = sign * sqrt(F(1-F)); passing
// sign = sign(cos(theta_r) sin(theta_r)) reproduces delta_f_closed_form.
inline double delta_f_mean_angle(double f, double theta_bar, double theta_r,
                                 double omega_e_tau, double dp, double delta_tau,
                                 int sign) {
    if (!std::isfinite(f) || !std::isfinite(theta_bar) || !std::isfinite(theta_r) ||
        !std::isfinite(omega_e_tau) || !std::isfinite(delta_tau)) {
        throw invalid_parameter("delta_f_mean_angle: non-finite input");
    }
    detail::check_dp(dp, "delta_f_mean_angle");
    detail::check_sign(sign, "delta_f_mean_angle");
    const double ctr = std::cos(theta_r);
    if (std::abs(f - ctr * ctr) > 1e-12) {
        throw invalid_coordinates("delta_f_mean_angle: f != cos^2(theta_r)");
    }
    const double a = omega_e_tau + theta_bar - theta_r;
    const double ca = std::cos(a);
    const double den = 1.0 - dp * dp * ca * ca;
    if (den <= 1e-15) {
        throw degenerate_geometry("delta_f_mean_angle: projective measurement aligned with the estimate");
    }
    const double sa = std::sin(a);
    const double root = std::sqrt(std::max(0.0, f * (1.0 - f)));
    const double gain = dp * dp * sa * sa * (1.0 - f);
    const double drift = (1.0 - dp * dp) * (sign * root * std::sin(delta_tau) +
                                            (f - 0.5) * (1.0 - std::cos(delta_tau)));
    return (gain - drift) / den;
}

// Continuum-limit rate of fidelity change:
//   dF/dt = (gamma/2)(1-F) + sign * delta * sqrt(F(1-F)).
inline double ode_rhs(double f, double gamma, double delta, int sign) {
    if (!(f >= 0.0 && f <= 1.0)) {
        throw std::domain_error("ode_rhs: fidelity outside [0,1]");
    }
    if (!std::isfinite(gamma) || !std::isfinite(delta)) {
        throw invalid_parameter("ode_rhs: non-finite coefficient");
    }
    detail::check_sign(sign, "ode_rhs");
    return 0.5 * gamma * (1.0 - f) +
           sign * delta * std::sqrt(std::max(0.0, f * (1.0 - f)));
}

// Measurement-sequence strength of the discrete protocol, dp^2 / tau.
inline double gamma_from_discrete(double dp, double tau) {
    detail::check_dp(dp, "gamma_from_discrete");
    if (!std::isfinite(tau) || tau <= 0.0) {
        throw invalid_parameter("gamma_from_discrete: tau must be positive");
    }
    return dp * dp / tau;
}

// Fidelity of the matched-frequency continuum limit, F(t) = 1 - exp(-gamma t/2).
inline double closed_form_fidelity(double t, double gamma) {
    if (!std::isfinite(t) || t < 0.0) {
        throw std::domain_error("closed_form_fidelity: negative time");
    }
    if (!std::isfinite(gamma) || gamma < 0.0) {
        throw invalid_parameter("closed_form_fidelity: negative gamma");
    }
    return 1.0 - std::exp(-0.5 * gamma * t);
}

// Stationary fidelities of the two rate-equation branches and their mean.
struct AsymptoticFidelities {
    double f_plus;
    double f_minus;
    double f_bar;
};

inline AsymptoticFidelities asymptotic_fidelities(double gamma, double delta) {
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw invalid_parameter("asymptotic_fidelities: gamma must be positive");
    }
    if (!std::isfinite(delta)) {
        throw invalid_parameter("asymptotic_fidelities: non-finite delta");
    }
    const double f_minus = gamma * gamma / (gamma * gamma + 4.0 * delta * delta);
    return {1.0, f_minus, 0.5 * (1.0 + f_minus)};
}

// One branch of the fidelity rate equation with its initial value.
class OdeSpec {
  public:
    OdeSpec(double gamma, double delta, int sign, double f0)
        : gamma_(gamma), delta_(delta), sign_(sign), f0_(f0) {
        if (!std::isfinite(gamma) || gamma <= 0.0) {
            throw invalid_parameter("OdeSpec: gamma must be positive");
        }
        if (!std::isfinite(delta)) throw invalid_parameter("OdeSpec: non-finite delta");
        detail::check_sign(sign, "OdeSpec");
        if (!(f0 >= 0.0 && f0 <= 1.0)) {
            throw invalid_parameter("OdeSpec: f0 outside [0,1]");
        }
    }

    double gamma() const { return gamma_; }
    double delta() const { return delta_; }
    int sign() const { return sign_; }
    double f0() const { return f0_; }

  private:
    double gamma_, delta_;
    int sign_;
    double f0_;
};

// Classical fixed-step 4th-order integration of the fidelity rate equation
// on [0, t_end] with step h. Stage evaluations clamp their argument to [0,1]
// (the square root is undefined outside), and each accepted value is clamped
// back to [0,1]; F = 1 is an absorbing fixed point. The number of clamped
// steps is reported through clamp_events when given.
inline FidelityTrace integrate_ode(const OdeSpec& spec, double t_end, double h,
                                   std::size_t* clamp_events = nullptr) {
    if (!std::isfinite(t_end) || !std::isfinite(h) || h <= 0.0 || h > t_end) {
        throw invalid_parameter("integrate_ode: need 0 < h <= t_end");
    }
    const auto rhs = [&spec](double f) {
        const double fc = std::clamp(f, 0.0, 1.0);
        return 0.5 * spec.gamma() * (1.0 - fc) +
               spec.sign() * spec.delta() * std::sqrt(std::max(0.0, fc * (1.0 - fc)));
    };
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    std::size_t clamped = 0;

    FidelityTrace trace;
    trace.times.reserve(n_steps + 1);
    trace.fidelities.reserve(n_steps + 1);
    double f = spec.f0();
    trace.times.push_back(0.0);
    trace.fidelities.push_back(f);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double k1 = rhs(f);
        const double k2 = rhs(f + 0.5 * h * k1);
        const double k3 = rhs(f + 0.5 * h * k2);
        const double k4 = rhs(f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        if (f < 0.0 || f > 1.0) {
            f = std::clamp(f, 0.0, 1.0);
            ++clamped;
        }
        trace.times.push_back(static_cast<double>(k) * h);
        trace.fidelities.push_back(f);
    }
    if (clamp_events != nullptr) *clamp_events = clamped;
    return trace;
}

// Pointwise mean of the plus and minus branches; the deterministic
// prediction for the ensemble-averaged fidelity under detuning.
inline FidelityTrace averaged_ode_prediction(double gamma, double delta, double f0,
                                             double t_end, double h) {
    const FidelityTrace plus = integrate_ode(OdeSpec(gamma, delta, +1, f0), t_end, h);
    const FidelityTrace minus = integrate_ode(OdeSpec(gamma, delta, -1, f0), t_end, h);
    FidelityTrace avg;
    avg.times = plus.times;
    avg.fidelities.resize(plus.size());
    for (std::size_t i = 0; i < plus.size(); ++i) {
        avg.fidelities[i] = 0.5 * (plus.fidelities[i] + minus.fidelities[i]);
    }
    return avg;
}

} // namespace qest
