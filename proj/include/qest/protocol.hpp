#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "qest/errors.hpp"
#include "qest/qubit.hpp"
#include "qest/trace.hpp"

namespace qest {

// Physical and protocol parameters of the estimation run: actual drive
// frequency omega, the frequency omega_e used to propagate the estimate,
// measurement strength dp, and the period tau between measurements.
class ProtocolParams {
  public:
    ProtocolParams(double omega, double omega_e, double dp, double tau)
        : omega_(omega), omega_e_(omega_e), dp_(dp), tau_(tau) {
        if (!std::isfinite(omega) || !std::isfinite(omega_e)) {
            throw invalid_parameter("ProtocolParams: non-finite frequency");
        }
        if (!std::isfinite(dp) || dp < 0.0 || dp > 1.0) {
            throw invalid_parameter("ProtocolParams: dp outside [0,1]");
        }
        if (!std::isfinite(tau) || tau <= 0.0) {
            throw invalid_parameter("ProtocolParams: tau must be positive");
        }
    }

    double omega() const { return omega_; }
    double omega_e() const { return omega_e_; }
    double dp() const { return dp_; }
    double tau() const { return tau_; }

    // Frequency mismatch between the actual drive and the estimate's.
    double delta() const { return omega_ - omega_e_; }
    // Measurement-sequence strength dp^2/tau; the rate constant of the
    // continuum limit.
    double gamma() const { return dp_ * dp_ / tau_; }

  private:
    double omega_, omega_e_, dp_, tau_;
};

// Record of one elementary step: outcome index, its probability under the
// actual state, the post-step states and their overlap fidelity.
struct StepOutcome {
    int outcome;
    double prob;
    QubitState actual_after;
    QubitState estimate_after;
    double fidelity_after;
};

// Propagates the actual state with omega and the estimate with omega_e for
// one period tau.
inline std::pair<QubitState, QubitState> evolve_pair(const QubitState& actual,
                                                     const QubitState& estimate,
                                                     double omega, double omega_e,
                                                     double tau) {
    return {apply_unitary(make_propagator(omega, tau), actual),
            apply_unitary(make_propagator(omega_e, tau), estimate)};
}

inline std::pair<QubitState, QubitState> evolve_pair(const QubitState& actual,
                                                     const QubitState& estimate,
                                                     const ProtocolParams& params) {
    return evolve_pair(actual, estimate, params.omega(), params.omega_e(), params.tau());
}

// Selective measurement of the actual state plus the conditioned estimate
// update. `u` is a uniform variate on [0,1) supplied by the caller; outcome 0
// is selected iff u < p0 = <actual|e0|actual>. The actual state collapses to
// kraus(n)|actual> renormalized; the estimate is pushed through the same
// Kraus operator and renormalized by its own outcome probability.
inline StepOutcome measure_and_update(const QubitState& actual, const QubitState& estimate,
                                      const MeasurementModel& model, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw invalid_parameter("measure_and_update: u outside [0,1)");
    }
    const double p0 = real_expectation(model.e0(), actual);
    const int n = u < p0 ? 0 : 1;
    const double pn = real_expectation(model.effect(n), actual);
    const double pn_e = real_expectation(model.effect(n), estimate);
    if (pn_e < 1e-15) {
        throw degenerate_update("measure_and_update: estimate assigns zero probability to the observed outcome");
    }
    QubitState actual_after = apply_kraus_normalized(model.kraus(n), actual);
    QubitState estimate_after = apply_kraus_normalized(model.kraus(n), estimate);
    const double f = fidelity(actual_after, estimate_after);
    return {n, pn, actual_after, estimate_after, f};
}

// One protocol step: unitary evolution of both states, then the unsharp
// measurement and estimate update.
inline StepOutcome elementary_step(const QubitState& actual, const QubitState& estimate,
                                   const ProtocolParams& params, const MeasurementModel& model,
                                   double u) {
    auto [a, e] = evolve_pair(actual, estimate, params);
    return measure_and_update(a, e, model, u);
}

// Outcome-averaged fidelity change of one elementary step, by explicit
// enumeration of both outcomes. This is the reference the closed-form
// increment is tested against.
inline double expected_delta_f_bruteforce(const QubitState& actual, const QubitState& estimate,
                                          const ProtocolParams& params,
                                          const MeasurementModel& model) {
    const double f_before = fidelity(actual, estimate);
    auto [a, e] = evolve_pair(actual, estimate, params);
    double mean_f_after = 0.0;
    for (int n = 0; n < 2; ++n) {
        const double pn = real_expectation(model.effect(n), a);
        if (pn <= 0.0) continue;  // outcome never observed
        const double pn_e = real_expectation(model.effect(n), e);
        if (pn_e < 1e-15) {
            throw degenerate_update("expected_delta_f_bruteforce: estimate assigns zero probability to a reachable outcome");
        }
        mean_f_after += pn * fidelity(apply_kraus_normalized(model.kraus(n), a),
                                      apply_kraus_normalized(model.kraus(n), e));
    }
    return mean_f_after - f_before;
}

// Runs n_steps elementary steps, recording fidelity at t = 0, tau, 2 tau, ...
// The uniform stream is consumed once per step, in step order.
template <typename UniformSource>
FidelityTrace run_trajectory(const ProtocolParams& params, const MeasurementModel& model,
                             const QubitState& init_actual, const QubitState& init_estimate,
                             long n_steps, UniformSource&& u01) {
    if (n_steps < 0) throw invalid_parameter("run_trajectory: negative step count");
    const Operator2 u_actual = make_propagator(params.omega(), params.tau());
    const Operator2 u_estimate = make_propagator(params.omega_e(), params.tau());

    FidelityTrace trace;
    trace.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    trace.fidelities.reserve(static_cast<std::size_t>(n_steps) + 1);
    trace.times.push_back(0.0);
    trace.fidelities.push_back(fidelity(init_actual, init_estimate));

    QubitState actual = init_actual;
    QubitState estimate = init_estimate;
    for (long k = 1; k <= n_steps; ++k) {
        actual = apply_unitary(u_actual, actual);
        estimate = apply_unitary(u_estimate, estimate);
        StepOutcome out = measure_and_update(actual, estimate, model, u01());
        actual = out.actual_after;
        estimate = out.estimate_after;
        trace.times.push_back(static_cast<double>(k) * params.tau());
        trace.fidelities.push_back(out.fidelity_after);
    }
    return trace;
}

} // namespace qest
