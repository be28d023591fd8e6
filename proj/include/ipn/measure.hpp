#pragma once

/**
 * @file measure.hpp
 * @brief Compactly supported probability measures on [0, inf).
 *
 * A MeasureSpec is a finite mixture of point masses and uniform segments.
 * This class is closed under everything the rest of the library needs:
 * the Stieltjes transform and its derivative have closed forms, the
 * support is a finite union of closed intervals, and the CDF and its
 * generalized inverse are piecewise linear.
 */

#include <complex>
#include <cstddef>
#include <vector>

namespace ipn {

using cplx = std::complex<double>;

struct Atom {
    double weight = 0.0;
    double location = 0.0;
};

struct Segment {
    double weight = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Closed interval; lo == hi for a point mass.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
    [[nodiscard]] double width() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Sorted, pairwise disjoint closed intervals whose union is a support.
struct SupportComponents {
    std::vector<Interval> intervals;

    [[nodiscard]] double distance(double x) const;
    [[nodiscard]] bool contains(double x, double tol = 0.0) const { return distance(x) <= tol; }
    [[nodiscard]] double min() const { return intervals.front().lo; }
    [[nodiscard]] double max() const { return intervals.back().hi; }
};

class MeasureSpec {
public:
    MeasureSpec() = default;

    /// Validates on construction; throws ValidationError.
    MeasureSpec(std::vector<Atom> atoms, std::vector<Segment> segments);

    static MeasureSpec point_mass(double location);
    static MeasureSpec uniform(double lo, double hi);

    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }

    /// Stieltjes transform \int dm(x) / (z - x).
    [[nodiscard]] cplx stieltjes(cplx z) const;
    [[nodiscard]] double stieltjes(double x) const;

    /// Derivative -\int dm(x) / (z - x)^2.
    [[nodiscard]] cplx stieltjes_prime(cplx z) const;
    [[nodiscard]] double stieltjes_prime(double x) const;

    [[nodiscard]] const SupportComponents& support() const { return support_; }

    /// m((-inf, x]).
    [[nodiscard]] double cdf(double x) const;

    /// inf{x : cdf(x) >= alpha}, alpha in [0, 1].
    [[nodiscard]] double quantile(double alpha) const;

    /// m([lo, hi]).
    [[nodiscard]] double mass(double lo, double hi) const;

    /// Quantiles at the levels (i - 1/2) / count, i = 1..count, ascending.
    [[nodiscard]] std::vector<double> quantile_grid(std::size_t count) const;

private:
    void validate() const;
    void build_support();
    void check_outside_support(double x) const;

    std::vector<Atom> atoms_;
    std::vector<Segment> segments_;
    SupportComponents support_;
};

/// Absolute distance below which a real point counts as inside a support.
inline constexpr double kSupportTolerance = 1e-12;

// Free-function spellings of the measure operations.
inline cplx g_nu(const MeasureSpec& m, cplx z) { return m.stieltjes(z); }
inline double g_nu(const MeasureSpec& m, double x) { return m.stieltjes(x); }
inline cplx g_nu_prime(const MeasureSpec& m, cplx z) { return m.stieltjes_prime(z); }
inline double g_nu_prime(const MeasureSpec& m, double x) { return m.stieltjes_prime(x); }
inline const SupportComponents& support_of(const MeasureSpec& m) { return m.support(); }

/// Marchenko-Pastur law scaled by sigma^2, ratio c in (0, 1].
struct MarchenkoPastur {
    double c = 1.0;
    double sigma = 1.0;

    [[nodiscard]] Interval edges() const;
    [[nodiscard]] double density(double x) const;
};

inline double mp_density(double c, double sigma, double x) { return MarchenkoPastur{c, sigma}.density(x); }

}  // namespace ipn
