#pragma once

/**
 * @file subordination.hpp
 * @brief Subordination map Phi, its inverse omega, and the support of the
 *        limiting spectral law of (sigma X / sqrt(N) + A)(sigma X / sqrt(N) + A)^*.
 *
 * For a model (sigma, c, nu):
 *
 *     Phi(x) = x (1 + c sigma^2 g_nu(x))^2 + sigma^2 (1 - c)(1 + c sigma^2 g_nu(x))
 *
 * is defined off supp(nu). The admissible set E is the open set where
 * Phi'(u) > 0 and g_nu(u) > -1 / (sigma^2 c); it has the canonical form
 *
 *     E = (-inf, u_1) U (v_1, u_2) U ... U (v_p, +inf)
 *
 * and the limiting law is supported on the union of [Phi(u_l^-), Phi(v_l^+)].
 * omega is the inverse of Phi restricted to E.
 */

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "ipn/measure.hpp"

namespace ipn {

struct ModelParams {
    double sigma = 1.0;  ///< noise scale
    double c = 1.0;      ///< dimension ratio n / N in (0, 1]
    MeasureSpec nu;      ///< limit of the spectral measures of A A^*

    /// Throws ValidationError. sigma == 0 is accepted only when allow_noiseless is set.
    void validate(bool allow_noiseless = false) const;
};

/// Boundaries u_1 < v_1 < ... < u_p < v_p of the complement of E.
struct AdmissibleSet {
    std::vector<double> u;
    std::vector<double> v;

    [[nodiscard]] std::size_t p() const { return u.size(); }

    /// True when x lies in E, i.e. outside every [u_l, v_l].
    [[nodiscard]] bool contains(double x) const;

    /// Index l (0-based) of the component [u_l, v_l] containing x.
    [[nodiscard]] std::optional<std::size_t> component_of(double x) const;

    /// Distance from x to the nearest boundary point.
    [[nodiscard]] double boundary_distance(double x) const;
};

struct SupportResult {
    std::vector<Interval> intervals;
    bool zero_in_support = false;
    AdmissibleSet boundaries;

    [[nodiscard]] double distance(double x) const;
    [[nodiscard]] bool contains(double x) const { return distance(x) == 0.0; }
};

struct RootIsolationOptions {
    std::size_t initial_points = 4096;
    std::size_t max_points = 65536;
    double boundary_tolerance = 1e-11;
    /// |Phi'| at or below this counts as zero, hence outside E.
    double derivative_floor = 1e-12;
};

struct OneSidedLimitOptions {
    double initial_step = 1e-6;
    int max_halvings = 40;
    double tolerance = 1e-9;
};

double phi(const ModelParams& p, double x);
double phi_prime(const ModelParams& p, double x);

/**
 * The point where g_nu crosses -1/(sigma^2 c) inside the gap (lo, hi) of supp(nu);
 * lo may be -inf. g_nu is decreasing there, so the g-condition holds exactly to
 * the left of the returned point.
 */
double g_condition_crossing(const ModelParams& p, double lo, double hi, double tol = 1e-11);

/// Pointwise membership test for E, straight from its definition.
bool satisfies_admissibility(const ModelParams& p, double u, double derivative_floor = 1e-12);

/// Zero-membership rule: c < 1 never; c = 1 iff 0 in supp(nu) or g_nu(0) <= -1/sigma^2.
bool zero_in_support(const ModelParams& p);

AdmissibleSet admissible_set(const ModelParams& p, const RootIsolationOptions& opts = {});

/**
 * Cached analysis of one model: admissible set, support, Phi and omega.
 *
 * Construction performs the root isolation once; every other member is a
 * cheap query. Immutable after construction.
 */
class SubordinationMap {
public:
    explicit SubordinationMap(ModelParams params, const RootIsolationOptions& opts = {},
                              const OneSidedLimitOptions& limit_opts = {});

    [[nodiscard]] const ModelParams& params() const { return params_; }
    [[nodiscard]] const AdmissibleSet& admissible() const { return support_.boundaries; }
    [[nodiscard]] const SupportResult& support() const { return support_; }

    [[nodiscard]] double phi(double x) const { return ipn::phi(params_, x); }
    [[nodiscard]] double phi_prime(double x) const { return ipn::phi_prime(params_, x); }

    /// Phi(u^-) and Phi(v^+) by extrapolation over a geometric step sequence.
    [[nodiscard]] double phi_left_limit(double u) const;
    [[nodiscard]] double phi_right_limit(double v) const;

    /// Unique u in E with Phi(u) = x, for x outside the support.
    [[nodiscard]] double omega(double x) const;

private:
    ModelParams params_;
    OneSidedLimitOptions limit_opts_;
    SupportResult support_;
};

SupportResult support(const ModelParams& p, const RootIsolationOptions& opts = {});
double omega(const ModelParams& p, double x);

/**
 * K(x) = x + sigma^2 (1 - c) / (1 - sigma^2 c g_aux(x)), where g_aux is the
 * Stieltjes transform of the limit law of the auxiliary model (sigma sqrt(c), nu, 1),
 * obtained from the fixed-point solver. The auxiliary support is computed once.
 */
class KTransform {
public:
    explicit KTransform(ModelParams params);

    [[nodiscard]] const SubordinationMap& auxiliary() const { return *aux_; }
    [[nodiscard]] double operator()(double x) const;

private:
    ModelParams params_;
    std::shared_ptr<const SubordinationMap> aux_;
};

double k_transform(const ModelParams& p, double x);

}  // namespace ipn
