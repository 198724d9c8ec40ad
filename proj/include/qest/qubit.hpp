#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "qest/errors.hpp"
#include "qest/linalg.hpp"

namespace qest {

// Normalized two-component pure state. Construction rejects non-finite
// amplitudes and amplitude pairs whose norm deviates from 1 by more than
// 1e-9; accepted amplitudes are rescaled to exact unit norm, so the
// normalization invariant holds after every public operation.
class QubitState {
  public:
    QubitState(Complex a0, Complex a1) : a0_(a0), a1_(a1) {
        if (!is_finite(a0) || !is_finite(a1)) {
            throw invalid_parameter("QubitState: non-finite amplitude");
        }
        const double n = std::sqrt(std::norm(a0_) + std::norm(a1_));
        if (std::abs(n - 1.0) > 1e-9) {
            throw invalid_state("QubitState: amplitudes not normalized");
        }
        rescale(n);
    }

    // Normalizes any nonzero finite amplitude pair (used for measurement
    // collapse, where the norm carries the outcome probability).
    static QubitState from_unnormalized(Complex a0, Complex a1) {
        if (!is_finite(a0) || !is_finite(a1)) {
            throw invalid_parameter("QubitState: non-finite amplitude");
        }
        const double n = std::sqrt(std::norm(a0) + std::norm(a1));
        if (!(n > 1e-150)) throw invalid_state("QubitState: zero norm");
        QubitState s(unchecked{}, a0, a1);
        s.rescale(n);
        return s;
    }

    static QubitState ket0() { return {1.0, 0.0}; }
    static QubitState ket1() { return {0.0, 1.0}; }

    Complex a0() const { return a0_; }
    Complex a1() const { return a1_; }

  private:
    struct unchecked {};
    QubitState(unchecked, Complex a0, Complex a1) : a0_(a0), a1_(a1) {}

    void rescale(double n) {
        const double inv = 1.0 / n;
        a0_ *= inv;
        a1_ *= inv;
    }

    Complex a0_, a1_;
};

inline Complex inner_product(const QubitState& a, const QubitState& b) {
    return std::conj(a.a0()) * b.a0() + std::conj(a.a1()) * b.a1();
}

// Overlap fidelity |<a|b>|^2. Symmetric and insensitive to global phases.
inline double fidelity(const QubitState& a, const QubitState& b) {
    return std::norm(inner_product(a, b));
}

// Re <s|op|s>; exact probability/expectation for Hermitian op.
inline double real_expectation(const Operator2& op, const QubitState& s) {
    const Complex v0 = op(0, 0) * s.a0() + op(0, 1) * s.a1();
    const Complex v1 = op(1, 0) * s.a0() + op(1, 1) * s.a1();
    return (std::conj(s.a0()) * v0 + std::conj(s.a1()) * v1).real();
}

inline QubitState apply_unitary(const Operator2& u, const QubitState& s) {
    return QubitState::from_unnormalized(u(0, 0) * s.a0() + u(0, 1) * s.a1(),
                                         u(1, 0) * s.a0() + u(1, 1) * s.a1());
}

// Applies a Kraus operator and renormalizes (collapse to the posterior state).
inline QubitState apply_kraus_normalized(const Operator2& m, const QubitState& s) {
    return QubitState::from_unnormalized(m(0, 0) * s.a0() + m(0, 1) * s.a1(),
                                         m(1, 0) * s.a0() + m(1, 1) * s.a1());
}

// Bloch-sphere coordinates: polar angle from +z in [0,pi], azimuth in [0,2pi).
struct BlochAngles {
    double theta;
    double phi;

    BlochAngles(double theta_, double phi_) : theta(theta_), phi(phi_) {
        if (!std::isfinite(theta) || !std::isfinite(phi)) {
            throw invalid_parameter("BlochAngles: non-finite angle");
        }
        if (theta < 0.0 || theta > std::numbers::pi) {
            throw invalid_parameter("BlochAngles: theta outside [0,pi]");
        }
        if (phi < 0.0 || phi >= 2.0 * std::numbers::pi) {
            throw invalid_parameter("BlochAngles: phi outside [0,2pi)");
        }
    }
};

inline BlochAngles to_bloch(const QubitState& s) {
    const double r0 = std::abs(s.a0());
    const double r1 = std::abs(s.a1());
    const double theta = 2.0 * std::atan2(r1, r0);
    // Azimuth is undefined at the poles; report 0 there.
    if (r0 < 1e-15 || r1 < 1e-15) return {theta, 0.0};
    double phi = std::arg(s.a1() * std::conj(s.a0()));
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
    return {theta, phi};
}

inline QubitState from_bloch(const BlochAngles& angles) {
    const double c = std::cos(0.5 * angles.theta);
    const double s = std::sin(0.5 * angles.theta);
    return {Complex(c, 0.0), std::polar(s, angles.phi)};
}

// Coherent rotation about x for duration tau: the evolution operator of
// H = (omega/2) sigma_x, i.e. cos(omega tau/2) 1 - i sin(omega tau/2) sigma_x.
inline Operator2 make_propagator(double omega, double tau) {
    if (!std::isfinite(omega) || !std::isfinite(tau)) {
        throw invalid_parameter("make_propagator: non-finite input");
    }
    if (tau < 0.0) throw invalid_parameter("make_propagator: negative duration");
    const double half = 0.5 * omega * tau;
    const Complex c(std::cos(half), 0.0);
    const Complex ms(0.0, -std::sin(half));
    return Operator2::unitary(c, ms, ms, c);
}

// Symmetric two-outcome unsharp sigma_z measurement of strength dp:
// effects e_n = (1 -/+ dp sigma_z)/2 with their positive-root Kraus
// operators m_n = sqrt(e_n). dp = 0 extracts nothing, dp = 1 is projective.
class MeasurementModel {
  public:
    explicit MeasurementModel(double dp)
        : dp_(dp),
          e0_(Operator2::effect(0.5 * (1.0 + dp), 0.0, 0.0, 0.5 * (1.0 - dp))),
          e1_(Operator2::effect(0.5 * (1.0 - dp), 0.0, 0.0, 0.5 * (1.0 + dp))),
          m0_(std::sqrt(0.5 * (1.0 + dp)), 0.0, 0.0, std::sqrt(0.5 * (1.0 - dp))),
          m1_(std::sqrt(0.5 * (1.0 - dp)), 0.0, 0.0, std::sqrt(0.5 * (1.0 + dp))) {}

    double dp() const { return dp_; }
    const Operator2& e0() const { return e0_; }
    const Operator2& e1() const { return e1_; }
    const Operator2& m0() const { return m0_; }
    const Operator2& m1() const { return m1_; }

    const Operator2& effect(int outcome) const { return outcome == 0 ? e0_ : e1_; }
    const Operator2& kraus(int outcome) const { return outcome == 0 ? m0_ : m1_; }

  private:
    double dp_;
    Operator2 e0_, e1_, m0_, m1_;
};

inline MeasurementModel make_measurement_model(double dp) {
    if (!std::isfinite(dp) || dp < 0.0 || dp > 1.0) {
        throw invalid_parameter("make_measurement_model: dp outside [0,1]");
    }
    return MeasurementModel(dp);
}

// Effects as seen from the frame co-rotating at omega_e: conjugation of the
// static effects by the estimated propagator,
//   e0' = [1 + dp (cos(omega_e tau) sigma_z + sin(omega_e tau) sigma_y)]/2,
// and e1' = 1 - e0'.
inline std::pair<Operator2, Operator2> time_varying_effects(const MeasurementModel& model,
                                                            double omega_e, double tau) {
    if (!std::isfinite(omega_e) || !std::isfinite(tau)) {
        throw invalid_parameter("time_varying_effects: non-finite input");
    }
    const double a = omega_e * tau;
    const double zc = model.dp() * std::cos(a);
    const double ys = model.dp() * std::sin(a);
    const Operator2 e0p = Operator2::effect(0.5 * (1.0 + zc), Complex(0.0, -0.5 * ys),
                                            Complex(0.0, 0.5 * ys), 0.5 * (1.0 - zc));
    const Operator2 e1p = Operator2::effect(0.5 * (1.0 - zc), Complex(0.0, 0.5 * ys),
                                            Complex(0.0, -0.5 * ys), 0.5 * (1.0 + zc));
    return {e0p, e1p};
}

} // namespace qest
