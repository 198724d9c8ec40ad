#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "qest/errors.hpp"

namespace qest {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// 2x2 complex matrix, row-major. Immutable value type housing unitaries,
// measurement effects, Kraus operators and the Pauli matrices.
class Operator2 {
  public:
    Operator2(Complex m00, Complex m01, Complex m10, Complex m11)
        : m_{m00, m01, m10, m11} {
        for (const Complex& z : m_) {
            if (!is_finite(z)) throw invalid_parameter("Operator2: non-finite entry");
        }
    }

    static Operator2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Operator2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
    static Operator2 pauli_y() {
        return {0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0};
    }
    static Operator2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

    // Checked constructor for unitaries: requires U^dag U = 1 within tol.
    static Operator2 unitary(Complex m00, Complex m01, Complex m10, Complex m11,
                             double tol = 1e-12) {
        Operator2 u(m00, m01, m10, m11);
        if (!u.is_unitary(tol)) throw invalid_parameter("Operator2: not unitary");
        return u;
    }

    // Checked constructor for effects: Hermitian with eigenvalues in [0,1]
    // within tol.
    static Operator2 effect(Complex m00, Complex m01, Complex m10, Complex m11,
                            double tol = 1e-12) {
        Operator2 e(m00, m01, m10, m11);
        if (!e.is_hermitian(tol)) throw invalid_parameter("Operator2: effect not Hermitian");
        auto [lo, hi] = e.hermitian_eigenvalues();
        if (lo < -tol || hi > 1.0 + tol) {
            throw invalid_parameter("Operator2: effect eigenvalues outside [0,1]");
        }
        return e;
    }

    Complex operator()(int row, int col) const { return m_[2 * row + col]; }

    Operator2 adjoint() const {
        return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
    }

    bool is_hermitian(double tol = 1e-12) const {
        return std::abs(m_[0].imag()) <= tol && std::abs(m_[3].imag()) <= tol &&
               std::abs(m_[1] - std::conj(m_[2])) <= tol;
    }

    bool is_unitary(double tol = 1e-12) const;

    // Eigenvalues of a (near-)Hermitian matrix, ascending.
    std::pair<double, double> hermitian_eigenvalues() const {
        const double h = 0.5 * (m_[0].real() + m_[3].real());
        const double d = 0.5 * (m_[0].real() - m_[3].real());
        const double r = std::sqrt(d * d + std::norm(m_[1]));
        return {h - r, h + r};
    }

  private:
    std::array<Complex, 4> m_;
};

inline Operator2 operator+(const Operator2& a, const Operator2& b) {
    return {a(0, 0) + b(0, 0), a(0, 1) + b(0, 1), a(1, 0) + b(1, 0), a(1, 1) + b(1, 1)};
}

inline Operator2 operator-(const Operator2& a, const Operator2& b) {
    return {a(0, 0) - b(0, 0), a(0, 1) - b(0, 1), a(1, 0) - b(1, 0), a(1, 1) - b(1, 1)};
}

inline Operator2 operator*(const Operator2& a, const Operator2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

inline Operator2 operator*(Complex s, const Operator2& a) {
    return {s * a(0, 0), s * a(0, 1), s * a(1, 0), s * a(1, 1)};
}

// Largest entrywise magnitude; the norm used by every validation tolerance.
inline double max_abs(const Operator2& a) {
    double m = 0.0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) m = std::max(m, std::abs(a(r, c)));
    }
    return m;
}

inline bool Operator2::is_unitary(double tol) const {
    return max_abs(adjoint() * *this - identity()) <= tol;
}

} // namespace qest
