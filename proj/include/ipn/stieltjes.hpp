#pragma once

/**
 * @file stieltjes.hpp
 * @brief Fixed-point solver for the Stieltjes transform g_mu of the limit law,
 *        density recovery by Stieltjes inversion, CDF and quantiles.
 *
 * g = g_mu(z) is the solution with Im g < 0, Im(z g) <= 0 of
 *
 *     g = (1 - s g) g_nu(w(g)),   w(g) = (1 - s g)^2 z - sigma^2 (1 - c)(1 - s g),
 *
 * with s = sigma^2 c.
 */

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "ipn/measure.hpp"
#include "ipn/subordination.hpp"

namespace ipn {

/// Imaginary offset used to evaluate g_mu on the real axis.
inline constexpr double kRealAxisOffset = 1e-9;

struct SolveOptions {
    double tol = 1e-13;
    double damping = 0.5;
    std::size_t max_iterations = 100000;
    /// Below this imaginary part the solve always goes through continuation.
    double continuation_threshold = 1.0;
};

struct GSolution {
    cplx z;
    cplx g;
    std::size_t iterations = 0;  ///< summed over continuation stages
    double residual = 0.0;       ///< |g - F(g)| at the final stage
};

/// Requires Im z > 0; throws DomainError otherwise and ConvergenceError on failure.
GSolution solve_g(const ModelParams& p, cplx z, const SolveOptions& opts = {});

/// Re g_mu(x + i kRealAxisOffset).
double g_mu_real(const ModelParams& p, double x, const SolveOptions& opts = {});

struct DensityOptions {
    std::vector<double> eps{1e-3, 5e-4, 2.5e-4};
    double clamp = 1e-6;
    /// Points closer than this to 0 are skipped when c == 1.
    double zero_exclusion = 1e-6;
    SolveOptions solve;
};

struct DensityGrid {
    std::vector<double> xs;
    std::vector<double> fs;
    std::vector<bool> valid;
    double eps_used = 0.0;  ///< smallest epsilon in the extrapolation

    [[nodiscard]] std::size_t size() const { return xs.size(); }
    /// Trapezoid rule over the valid points.
    [[nodiscard]] double trapezoid_mass() const;
};

/**
 * Density at a single point: -Im g(x + i eps) / pi at the three epsilons,
 * combined by two rounds of Richardson extrapolation. Returns NaN when the
 * solver fails or the result is negative beyond the clamp.
 */
double density_at(const ModelParams& p, double x, const DensityOptions& opts = {});

DensityGrid density(const ModelParams& p, const std::vector<double>& xs, const DensityOptions& opts = {});

/// Uniform grid of count points spanning the support with a margin on both sides.
std::vector<double> density_grid_points(const SupportResult& s, std::size_t count, double margin = 0.05);

struct DistributionOptions {
    std::size_t panels = 256;
    double tol = 1e-6;
    int max_depth = 12;
    DensityOptions density;
};

/**
 * CDF and quantiles of the limit law.
 *
 * Each support interval [a, b] is parametrised by x = a + (b - a)(1 - cos(pi t)) / 2,
 * which clusters nodes at the edges. The density is integrated by adaptive
 * Simpson over equal t-panels; the CDF interpolates the cumulative table
 * linearly in t and the quantile inverts that interpolant exactly.
 *
 * Interval l is rescaled to carry mass nu([u_l, v_l]); the unscaled quadrature
 * masses are kept in raw_masses().
 */
class SpectralDistribution {
public:
    explicit SpectralDistribution(ModelParams p, const DistributionOptions& opts = {});
    SpectralDistribution(std::shared_ptr<const SubordinationMap> map, const DistributionOptions& opts = {});

    [[nodiscard]] const SubordinationMap& map() const { return *map_; }
    [[nodiscard]] const SupportResult& support() const { return map_->support(); }

    [[nodiscard]] double cdf(double x) const;
    /// alpha in (0, 1); throws DomainError otherwise.
    [[nodiscard]] double quantile(double alpha) const;

    [[nodiscard]] const std::vector<double>& raw_masses() const { return raw_masses_; }
    [[nodiscard]] const std::vector<double>& target_masses() const { return target_masses_; }

private:
    struct Table {
        Interval range;
        std::vector<double> cumulative;  ///< normalised to [0, 1], one entry per panel boundary
    };

    void build(const DistributionOptions& opts);
    [[nodiscard]] double x_of(const Table& t, double tau) const;
    [[nodiscard]] double tau_of(const Table& t, double x) const;

    std::shared_ptr<const SubordinationMap> map_;
    std::vector<Table> tables_;
    std::vector<double> raw_masses_;
    std::vector<double> target_masses_;
    std::vector<double> offsets_;
};

double cdf_mu(const ModelParams& p, double x);
double quantile_mu(const ModelParams& p, double alpha);

/// |c w g_nu(w)^2 + (1-c) g_nu(w) - (c x g_mu(x)^2 + (1-c) g_mu(x))| with w = omega(x).
double h_residual(const SubordinationMap& map, double x, const SolveOptions& opts = {});
double h_residual(const ModelParams& p, double x);

/// |1/(1 - sigma^2 c g_mu(x)) - (1 + sigma^2 c g_nu(omega(x)))|.
double chain_residual(const SubordinationMap& map, double x, const SolveOptions& opts = {});

}  // namespace ipn
