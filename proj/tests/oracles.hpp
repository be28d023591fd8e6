#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library: closed forms, polynomial roots and brute-force quadrature.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct PointMix {
    std::vector<double> w;
    std::vector<double> t;
};

inline double g_atoms(const PointMix& m, double x)
{
    double g = 0.0;
    for (std::size_t i = 0; i < m.w.size(); ++i) g += m.w[i] / (x - m.t[i]);
    return g;
}

inline double dg_atoms(const PointMix& m, double x)
{
    double d = 0.0;
    for (std::size_t i = 0; i < m.w.size(); ++i) d -= m.w[i] / ((x - m.t[i]) * (x - m.t[i]));
    return d;
}

inline long double phi_prime_atoms(const PointMix& m, double sigma, double c, long double x)
{
    long double g = 0.0L, dg = 0.0L;
    for (std::size_t i = 0; i < m.w.size(); ++i) {
        const long double d = x - m.t[i];
        g += m.w[i] / d;
        dg -= m.w[i] / (d * d);
    }
    const long double s2 = static_cast<long double>(sigma) * sigma;
    const long double k = 1.0L + c * s2 * g;
    return k * k + 2.0L * x * k * c * s2 * dg + s2 * (1.0L - c) * c * s2 * dg;
}

/// Bisection of a sign change of f on [a, b] in long double.
inline double bisect(const std::function<long double(long double)>& f, long double a, long double b)
{
    const bool fa = f(a) > 0;
    for (int i = 0; i < 200; ++i) {
        const long double m = 0.5L * (a + b);
        if ((f(m) > 0) == fa)
            a = m;
        else
            b = m;
    }
    return static_cast<double>(0.5L * (a + b));
}

/// Composite Simpson with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

/// Stieltjes transform of the uniform law on [lo, hi] by brute-force quadrature.
inline cplx g_uniform_quadrature(double lo, double hi, cplx z, int n = 200000)
{
    const double h = (hi - lo) / n;
    cplx acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt / (z - x);
    }
    return acc * h / 3.0 / (hi - lo);
}

/// Roots of a3 z^3 + a2 z^2 + a1 z + a0 by Durand-Kerner.
inline std::array<cplx, 3> cubic_roots(cplx a3, cplx a2, cplx a1, cplx a0)
{
    const cplx b2 = a2 / a3, b1 = a1 / a3, b0 = a0 / a3;
    auto p = [&](cplx z) { return ((z + b2) * z + b1) * z + b0; };
    std::array<cplx, 3> r{cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9) * cplx(0.4, 0.9)};
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx denom = 1.0;
            for (int j = 0; j < 3; ++j)
                if (j != i) denom *= r[i] - r[j];
            const cplx step = p(r[i]) / denom;
            r[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-16) break;
    }
    // Newton polish on the original polynomial.
    for (auto& z : r)
        for (int k = 0; k < 5; ++k) {
            const cplx f = ((z + b2) * z + b1) * z + b0;
            const cplx df = (3.0 * z + 2.0 * b2) * z + b1;
            if (std::abs(df) > 0) z -= f / df;
        }
    return r;
}

/**
 * Limit-law Stieltjes transform for nu = delta_a. Clearing denominators in
 * g = k / (k^2 z - q k - a), k = 1 - s g, s = sigma^2 c, q = sigma^2 (1 - c),
 * gives a cubic in g; the admissible root satisfies Im g < 0, Im(z g) <= 0.
 */
inline std::optional<cplx> g_mu_point_mass(double sigma, double c, double a, cplx z)
{
    const double s = sigma * sigma * c;
    const double q = sigma * sigma * (1.0 - c);
    const auto roots = cubic_roots(s * s * z, -2.0 * s * z + q * s, z - q - a + s, -1.0);
    std::optional<cplx> pick;
    int count = 0;
    for (const auto& g : roots)
        if (g.imag() < 0.0 && (z * g).imag() <= 1e-12 * std::abs(z * g)) {
            pick = g;
            ++count;
        }
    if (count != 1) return std::nullopt;
    return pick;
}

/// Phi for nu = delta_1, sigma = 1, c = 1, and its derivative.
inline double phi_delta1(double x) { return x * x * x / ((x - 1) * (x - 1)); }
inline double phi_prime_delta1(double x) { return x * x * (x - 3) / ((x - 1) * (x - 1) * (x - 1)); }

/// Composite 5-point Gauss-Legendre; never evaluates f at a or b.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels)
{
    static const double xs[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double ws[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                 0.2369268850561891};
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < 5; ++k) acc += ws[k] * f(mid + 0.5 * h * xs[k]);
    }
    return acc * 0.5 * h;
}

/// Integral of the Marchenko-Pastur density of ratio c, scale sigma, via x = mid - half cos(theta).
inline double mp_mass(double c, double sigma, const std::function<double(double)>& density, int panels = 4000)
{
    const double s2 = sigma * sigma;
    const double lo = s2 * (1 - std::sqrt(c)) * (1 - std::sqrt(c));
    const double hi = s2 * (1 + std::sqrt(c)) * (1 + std::sqrt(c));
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    return gauss_legendre(
        [&](double th) {
            const double x = mid - half * std::cos(th);
            if (x <= 0.0) return 0.0;
            return density(x) * half * std::sin(th);
        },
        0.0, std::numbers::pi, panels);
}

}  // namespace oracle
