#include "ipn/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "ipn/errors.hpp"

namespace ipn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZeroEdgeScale = 0.1;

struct FixedPoint {
    const ModelParams& p;
    cplx z;

    cplx operator()(cplx g) const
    {
        const double s2 = p.sigma * p.sigma;
        const cplx k = 1.0 - s2 * p.c * g;
        const cplx w = k * k * z - s2 * (1.0 - p.c) * k;
        return k * p.nu.stieltjes(w);
    }
};

struct StageResult {
    cplx g;
    std::size_t iterations;
    double residual;
    bool converged;
};

StageResult iterate(const ModelParams& p, cplx z, cplx g, const SolveOptions& opts)
{
    const FixedPoint F{p, z};
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        const cplx f = F(g);
        residual = std::abs(f - g);
        if (!std::isfinite(residual)) return {g, it, residual, false};
        if (residual <= opts.tol * std::max(1.0, std::abs(g))) return {g, it, residual, true};
        g = (1.0 - opts.damping) * g + opts.damping * f;
    }
    return {g, opts.max_iterations, residual, false};
}

/// Adaptive Simpson on [a, b] given f(a), f(m), f(b).
template <class F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

GSolution solve_g(const ModelParams& p, cplx z, const SolveOptions& opts)
{
    if (!(z.imag() > 0.0)) throw DomainError("solve_g requires Im z > 0");
    p.validate(/*allow_noiseless=*/true);

    std::size_t total = 0;
    if (z.imag() >= opts.continuation_threshold) {
        const auto r = iterate(p, z, 1.0 / z, opts);
        if (r.converged) return {z, r.g, r.iterations, r.residual};
        total += r.iterations;
    }

    // Walk down from z + i 2^m, warm-starting each stage from the previous one.
    cplx g = 0.0;
    bool first = true;
    for (int m = 10; m >= -10; --m) {
        const cplx zz = z + cplx(0.0, std::ldexp(1.0, m));
        const auto r = iterate(p, zz, first ? 1.0 / zz : g, opts);
        total += r.iterations;
        if (std::isfinite(std::abs(r.g))) g = r.g;
        first = false;
    }
    const auto r = iterate(p, z, g, opts);
    total += r.iterations;
    if (!r.converged) {
        std::ostringstream os;
        os.precision(17);
        os << "fixed-point solver did not converge at z = " << z.real() << " + " << z.imag() << "i (residual "
           << r.residual << ")";
        throw ConvergenceError(os.str());
    }
    return {z, r.g, total, r.residual};
}

double g_mu_real(const ModelParams& p, double x, const SolveOptions& opts)
{
    return solve_g(p, cplx(x, kRealAxisOffset), opts).g.real();
}

double DensityGrid::trapezoid_mass() const
{
    double acc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (valid[i - 1] && valid[i]) acc += 0.5 * (fs[i - 1] + fs[i]) * (xs[i] - xs[i - 1]);
    return acc;
}

double density_at(const ModelParams& p, double x, const DensityOptions& opts)
{
    if (p.c == 1.0 && std::abs(x) < opts.zero_exclusion) return kNaN;
    if (opts.eps.size() != 3) throw ValidationError("density needs exactly three epsilons");

    double f[3];
    try {
        auto sol = solve_g(p, cplx(x, opts.eps[0]), opts.solve);
        f[0] = -sol.g.imag() / std::numbers::pi;
        for (int i = 1; i < 3; ++i) {
            const auto r = iterate(p, cplx(x, opts.eps[i]), sol.g, opts.solve);
            if (!r.converged) return kNaN;
            sol.g = r.g;
            f[i] = -r.g.imag() / std::numbers::pi;
        }
    } catch (const ConvergenceError&) {
        return kNaN;
    }
    // Halving steps: the first round removes the O(eps) term, the second O(eps^2).
    const double r1 = 2.0 * f[1] - f[0];
    const double r1h = 2.0 * f[2] - f[1];
    const double value = (4.0 * r1h - r1) / 3.0;
    if (value < -opts.clamp) return kNaN;
    return std::max(value, 0.0);
}

DensityGrid density(const ModelParams& p, const std::vector<double>& xs, const DensityOptions& opts)
{
    DensityGrid out;
    out.xs = xs;
    out.fs.resize(xs.size());
    out.valid.resize(xs.size());
    out.eps_used = *std::ranges::min_element(opts.eps);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = density_at(p, xs[i], opts);
        out.valid[i] = std::isfinite(f);
        out.fs[i] = out.valid[i] ? f : 0.0;
    }
    return out;
}

std::vector<double> density_grid_points(const SupportResult& s, std::size_t count, double margin)
{
    const double lo = s.intervals.front().lo;
    const double hi = s.intervals.back().hi;
    const double pad = margin * (hi - lo);
    const double a = std::max(0.0, lo - pad);
    const double b = hi + pad;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i)
        xs[i] = count == 1 ? 0.5 * (a + b) : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    return xs;
}

SpectralDistribution::SpectralDistribution(ModelParams p, const DistributionOptions& opts)
    : SpectralDistribution(std::make_shared<const SubordinationMap>(std::move(p)), opts)
{
}

SpectralDistribution::SpectralDistribution(std::shared_ptr<const SubordinationMap> map, const DistributionOptions& opts)
    : map_(std::move(map))
{
    build(opts);
}

double SpectralDistribution::x_of(const Table& t, double tau) const
{
    return t.range.lo + t.range.width() * 0.5 * (1.0 - std::cos(std::numbers::pi * tau));
}

double SpectralDistribution::tau_of(const Table& t, double x) const
{
    const double r = std::clamp(1.0 - 2.0 * (x - t.range.lo) / t.range.width(), -1.0, 1.0);
    return std::acos(r) / std::numbers::pi;
}

void SpectralDistribution::build(const DistributionOptions& opts)
{
    const auto& sup = map_->support();
    const auto& e = sup.boundaries;
    const auto& p = map_->params();
    const std::size_t panels = std::max<std::size_t>(opts.panels, 1);

    double offset = 0.0;
    for (std::size_t l = 0; l < sup.intervals.size(); ++l) {
        Table table{sup.intervals[l], {}};
        const double width = table.range.width();
        // At a singular zero edge (c = 1) a fixed epsilon smears the x^{-1/2} blow-up;
        // shrink it in proportion to the distance from 0 there.
        const bool zero_edge = l == 0 && sup.zero_in_support && p.c == 1.0;
        auto integrand = [&](double tau) {
            const double x = x_of(table, tau);
            double f;
            if (zero_edge && x < kZeroEdgeScale) {
                DensityOptions local = opts.density;
                for (auto& eps : local.eps) eps *= x / kZeroEdgeScale;
                f = density_at(p, x, local);
            } else {
                f = density_at(p, x, opts.density);
            }
            if (!std::isfinite(f)) return 0.0;
            return f * width * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * tau);
        };

        table.cumulative.assign(panels + 1, 0.0);
        const double h = 1.0 / static_cast<double>(panels);
        // Endpoints are edges of the support: the integrand vanishes there.
        double fa = 0.0;
        for (std::size_t i = 0; i < panels; ++i) {
            const double a = h * static_cast<double>(i);
            const double b = i + 1 == panels ? 1.0 : a + h;
            const double fb = i + 1 == panels ? 0.0 : integrand(b);
            const double fm = integrand(0.5 * (a + b));
            const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            const double piece = simpson(integrand, a, b, fa, fm, fb, whole, opts.tol * h, opts.max_depth);
            table.cumulative[i + 1] = table.cumulative[i] + std::max(piece, 0.0);
            fa = fb;
        }
        const double raw = table.cumulative.back();
        if (!(raw > 0.0)) throw ConvergenceError("density integrates to zero on a support interval");
        for (auto& v : table.cumulative) v /= raw;

        raw_masses_.push_back(raw);
        target_masses_.push_back(p.nu.mass(e.u[l], e.v[l]));
        offsets_.push_back(offset);
        offset += target_masses_.back();
        tables_.push_back(std::move(table));
    }
}

double SpectralDistribution::cdf(double x) const
{
    const std::size_t panels = tables_.front().cumulative.size() - 1;
    for (std::size_t l = 0; l < tables_.size(); ++l) {
        const auto& t = tables_[l];
        if (x < t.range.lo) return offsets_[l];
        if (x > t.range.hi) continue;
        const double pos = tau_of(t, x) * static_cast<double>(panels);
        const std::size_t i = std::min(static_cast<std::size_t>(pos), panels - 1);
        const double frac = pos - static_cast<double>(i);
        const double local = t.cumulative[i] + frac * (t.cumulative[i + 1] - t.cumulative[i]);
        return offsets_[l] + target_masses_[l] * local;
    }
    return std::min(1.0, offsets_.back() + target_masses_.back());
}

double SpectralDistribution::quantile(double alpha) const
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    std::size_t l = 0;
    while (l + 1 < tables_.size() && alpha > offsets_[l] + target_masses_[l]) ++l;
    const auto& t = tables_[l];
    const double q = std::clamp((alpha - offsets_[l]) / target_masses_[l], 0.0, 1.0);

    const auto& cum = t.cumulative;
    const std::size_t panels = cum.size() - 1;
    // First panel whose right cumulative value reaches q.
    const auto it = std::lower_bound(cum.begin() + 1, cum.end(), q);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()) - 1, panels - 1);
    const double span = cum[i + 1] - cum[i];
    const double frac = span > 0.0 ? std::clamp((q - cum[i]) / span, 0.0, 1.0) : 0.0;
    return x_of(t, (static_cast<double>(i) + frac) / static_cast<double>(panels));
}

double cdf_mu(const ModelParams& p, double x) { return SpectralDistribution(p).cdf(x); }

double quantile_mu(const ModelParams& p, double alpha) { return SpectralDistribution(p).quantile(alpha); }

double h_residual(const SubordinationMap& map, double x, const SolveOptions& opts)
{
    const auto& p = map.params();
    const double w = map.omega(x);
    const double gn = p.nu.stieltjes(w);
    const double gm = g_mu_real(p, x, opts);
    const double lhs = p.c * w * gn * gn + (1.0 - p.c) * gn;
    const double rhs = p.c * x * gm * gm + (1.0 - p.c) * gm;
    return std::abs(lhs - rhs);
}

double h_residual(const ModelParams& p, double x) { return h_residual(SubordinationMap(p), x); }

double chain_residual(const SubordinationMap& map, double x, const SolveOptions& opts)
{
    const auto& p = map.params();
    const double s = p.sigma * p.sigma * p.c;
    const double gm = g_mu_real(p, x, opts);
    const double gn = p.nu.stieltjes(map.omega(x));
    return std::abs(1.0 / (1.0 - s * gm) - (1.0 + s * gn));
}

}  // namespace ipn
