#pragma once

#include <algorithm>
#include <cassert>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cpgeo {

using cplx = std::complex<double>;

/// Thrown when a series operation needs a nonzero constant term
/// (division, square root) and the operand does not have one.
struct singular_series_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Truncated power series in one (complex) variable: the computational
/// stand-in for the jet of a holomorphic function at a point.
///
/// All binary operations require both operands to have the same length;
/// results are truncated to that length. Coefficients are stored constant
/// term first.
class Jet {
public:
    Jet() = default;

    explicit Jet(std::size_t length) : c_(length) {}

    static Jet constant(cplx value, std::size_t length) {
        Jet j(length);
        if (length > 0) j.c_[0] = value;
        return j;
    }

    /// Jet of the identity map t -> t expanded at `center`.
    static Jet variable(cplx center, std::size_t length) {
        Jet j(length);
        if (length > 0) j.c_[0] = center;
        if (length > 1) j.c_[1] = 1.0;
        return j;
    }

    static Jet from_coefficients(std::vector<cplx> coeffs) {
        Jet j;
        j.c_ = std::move(coeffs);
        return j;
    }

    std::size_t length() const { return c_.size(); }
    std::size_t order() const { return c_.empty() ? 0 : c_.size() - 1; }

    cplx& operator[](std::size_t k) { return c_[k]; }
    const cplx& operator[](std::size_t k) const { return c_[k]; }

    const std::vector<cplx>& coefficients() const { return c_; }

    /// Horner evaluation at offset dt from the expansion point.
    cplx eval(cplx dt) const {
        cplx acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) acc = acc * dt + c_[k];
        return acc;
    }

    Jet& operator+=(const Jet& o) {
        assert(c_.size() == o.c_.size());
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        assert(c_.size() == o.c_.size());
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator+=(cplx s) {
        if (!c_.empty()) c_[0] += s;
        return *this;
    }
    Jet& operator-=(cplx s) {
        if (!c_.empty()) c_[0] -= s;
        return *this;
    }
    Jet& operator*=(cplx s) {
        for (auto& a : c_) a *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, cplx s) { return a += s; }
    friend Jet operator+(cplx s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, cplx s) { return a -= s; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }

    friend Jet operator-(const Jet& a) {
        Jet r(a.length());
        for (std::size_t k = 0; k < a.length(); ++k) r.c_[k] = -a.c_[k];
        return r;
    }

    friend Jet operator-(cplx s, const Jet& a) {
        Jet r = -a;
        r += s;
        return r;
    }

    /// Cauchy product truncated to the common length.
    friend Jet operator*(const Jet& a, const Jet& b) {
        assert(a.length() == b.length());
        const std::size_t n = a.length();
        Jet r(n);
        for (std::size_t k = 0; k < n; ++k) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
            r.c_[k] = acc;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        assert(a.length() == b.length());
        const std::size_t n = a.length();
        if (n == 0) return Jet{};
        if (b.c_[0] == cplx(0.0)) {
            throw singular_series_error("series division by zero constant term");
        }
        Jet r(n);
        for (std::size_t k = 0; k < n; ++k) {
            cplx acc = a.c_[k];
            for (std::size_t j = 1; j <= k; ++j) acc -= b.c_[j] * r.c_[k - j];
            r.c_[k] = acc / b.c_[0];
        }
        return r;
    }

    friend Jet operator/(cplx s, const Jet& b) {
        return Jet::constant(s, b.length()) / b;
    }

private:
    std::vector<cplx> c_;
};

/// Square root with an explicit constant-term seed, for tracking a branch
/// across successive expansions: `seed` must square to a[0] (up to sign
/// choice, pass the previously continued value).
inline Jet sqrt(const Jet& a, cplx seed) {
    const std::size_t n = a.length();
    if (n == 0) return Jet{};
    if (seed == cplx(0.0)) {
        throw singular_series_error("series sqrt at a zero of the argument");
    }
    Jet r(n);
    r[0] = seed;
    for (std::size_t k = 1; k < n; ++k) {
        cplx acc = a[k];
        for (std::size_t j = 1; j < k; ++j) acc -= r[j] * r[k - j];
        r[k] = acc / (2.0 * seed);
    }
    return r;
}

/// Principal-branch square root.
inline Jet sqrt(const Jet& a) {
    if (a.length() == 0) return Jet{};
    return sqrt(a, std::sqrt(a[0]));
}

/// cosh and sinh of a jet, computed together through the coupled
/// recurrence ch' = sh*a', sh' = ch*a'.
inline std::pair<Jet, Jet> cosh_sinh(const Jet& a) {
    const std::size_t n = a.length();
    Jet ch(n), sh(n);
    if (n == 0) return {ch, sh};
    ch[0] = std::cosh(a[0]);
    sh[0] = std::sinh(a[0]);
    for (std::size_t k = 1; k < n; ++k) {
        cplx accc = 0.0, accs = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            accc += double(j) * a[j] * sh[k - j];
            accs += double(j) * a[j] * ch[k - j];
        }
        ch[k] = accc / double(k);
        sh[k] = accs / double(k);
    }
    return {ch, sh};
}

inline Jet cosh(const Jet& a) { return cosh_sinh(a).first; }

} // namespace cpgeo
