#include "ipn/subordination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ipn/errors.hpp"
#include "ipn/stieltjes.hpp"

namespace ipn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bisection on an open interval (lo, hi) where pred(lo+) == lo_value and
/// pred(hi-) != lo_value. Endpoints are never evaluated.
template <class Pred>
double bisect(Pred&& pred, double lo, double hi, bool lo_value, double tol)
{
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double width_tol = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid));
        if (hi - lo <= width_tol || mid <= lo || mid >= hi) return mid;
        if (pred(mid) == lo_value)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Open piece of E lying in one gap of supp(nu).
struct Piece {
    double lo;
    double hi;
};

/// Chebyshev-spaced interior nodes, clustered toward both ends of [lo, hi].
std::vector<double> scan_nodes(double lo, double hi, std::size_t count)
{
    std::vector<double> xs(count);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        xs[k] = mid - half * std::cos(std::numbers::pi * t);
    }
    return xs;
}

struct Run {
    std::size_t first;
    std::size_t last;
};

std::vector<Run> positive_runs(const std::vector<bool>& signs)
{
    std::vector<Run> runs;
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (!signs[i]) continue;
        if (!runs.empty() && runs.back().last + 1 == i)
            runs.back().last = i;
        else
            runs.push_back({i, i});
    }
    return runs;
}

std::string describe_gap(double lo, double hi)
{
    std::ostringstream os;
    os.precision(12);
    os << "(" << lo << ", " << hi << ")";
    return os.str();
}

class AdmissibleScanner {
public:
    AdmissibleScanner(const ModelParams& p, const RootIsolationOptions& opts) : p_(p), opts_(opts)
    {
        const auto& supp = p.nu.support();
        scale_ = std::max({1.0, supp.max(), p.sigma * p.sigma});
    }

    std::vector<Piece> run()
    {
        const auto& comps = p_.nu.support().intervals;
        std::vector<Piece> pieces;
        auto push = [&](std::optional<Piece> piece) {
            if (piece) pieces.push_back(*piece);
        };

        push(scan_left_gap(comps.front().lo));
        for (std::size_t i = 0; i + 1 < comps.size(); ++i) push(scan_bounded_gap(comps[i].hi, comps[i + 1].lo));
        push(scan_right_gap(comps.back().hi));
        return pieces;
    }

private:
    bool positive(double u) const { return phi_prime(p_, u) > opts_.derivative_floor; }

    // g_nu decreases from +inf to -inf across a bounded gap, and from 0 to -inf
    // on the left unbounded one, so the g-condition cuts each gap at one point.
    double g_crossing(double lo, double hi) const { return g_condition_crossing(p_, lo, hi, opts_.boundary_tolerance); }

    double far_point(double anchor, double direction) const
    {
        double reach = 4.0 * scale_;
        for (int k = 0; k < 200; ++k, reach *= 2.0) {
            const double u = anchor + direction * reach;
            if (positive(u)) return u;
        }
        throw ConvergenceError("Phi' does not become positive far from the support");
    }

    std::optional<Piece> scan_left_gap(double first_lo)
    {
        const double x_star = g_crossing(-kInf, first_lo);
        const double far = std::min(far_point(std::min(x_star, 0.0), -1.0), x_star - scale_);
        return scan(far, x_star, /*lo_unbounded=*/true, /*hi_unbounded=*/false);
    }

    std::optional<Piece> scan_bounded_gap(double lo, double hi)
    {
        const double x_star = g_crossing(lo, hi);
        return scan(lo, x_star, false, false);
    }

    std::optional<Piece> scan_right_gap(double last_hi)
    {
        const double far = std::max(far_point(last_hi, 1.0), last_hi + scale_);
        return scan(last_hi, far, false, true);
    }

    std::optional<Piece> scan(double lo, double hi, bool lo_unbounded, bool hi_unbounded)
    {
        for (std::size_t count = opts_.initial_points; count <= opts_.max_points; count *= 2) {
            const auto xs = scan_nodes(lo, hi, count);
            std::vector<bool> signs(count);
            for (std::size_t k = 0; k < count; ++k) signs[k] = positive(xs[k]);
            const auto runs = positive_runs(signs);

            if (runs.empty()) {
                if (lo_unbounded || hi_unbounded)
                    throw ConvergenceError("no admissible points in unbounded gap " + describe_gap(lo, hi));
                return std::nullopt;
            }
            if (runs.size() > 1) continue;

            // The scan uses the floor to read signs; boundaries are refined with
            // strict positivity so a double root of Phi' is not shifted by it.
            auto pos = [this](double u) { return phi_prime(p_, u) > 0.0; };
            auto [first, last] = runs.front();
            while (first > 0 && pos(xs[first - 1])) --first;
            while (last + 1 < count && pos(xs[last + 1])) ++last;
            const double tol = opts_.boundary_tolerance;

            Piece piece{};
            if (first == 0)
                piece.lo = lo_unbounded ? -kInf : bisect(pos, lo, xs[0], false, tol);
            else
                piece.lo = bisect(pos, xs[first - 1], xs[first], false, tol);
            if (last == count - 1)
                piece.hi = hi_unbounded ? kInf : bisect(pos, xs[last], hi, true, tol);
            else
                piece.hi = bisect(pos, xs[last], xs[last + 1], true, tol);

            if (lo_unbounded && first != 0)
                throw ConvergenceError("admissible set does not extend to -inf in gap " + describe_gap(lo, hi));
            if (hi_unbounded && last != count - 1)
                throw ConvergenceError("admissible set does not extend to +inf in gap " + describe_gap(lo, hi));
            return piece;
        }
        throw ConvergenceError("sign pattern of Phi' not resolved after refinement in gap " + describe_gap(lo, hi));
    }

    const ModelParams& p_;
    RootIsolationOptions opts_;
    double scale_ = 1.0;
};

template <class F>
double one_sided_limit(F&& f, double x, double direction, const OneSidedLimitOptions& opts)
{
    double h = opts.initial_step;
    double prev_value = f(x + direction * h);
    double prev_extrap = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < opts.max_halvings; ++k) {
        h *= 0.5;
        const double value = f(x + direction * h);
        const double extrap = 2.0 * value - prev_value;
        if (std::isfinite(prev_extrap) && std::abs(extrap - prev_extrap) <= opts.tolerance * std::max(1.0, std::abs(extrap)))
            return extrap;
        prev_value = value;
        prev_extrap = extrap;
    }
    std::ostringstream os;
    os.precision(17);
    os << "one-sided limit of Phi at " << x << " did not converge";
    throw ConvergenceError(os.str());
}

}  // namespace

void ModelParams::validate(bool allow_noiseless) const
{
    if (!std::isfinite(sigma) || sigma < 0.0 || (sigma == 0.0 && !allow_noiseless))
        throw ValidationError("sigma must be > 0");
    if (!(c > 0.0 && c <= 1.0)) throw ValidationError("c must lie in (0, 1]");
    if (nu.atoms().empty() && nu.segments().empty()) throw ValidationError("nu is empty");
}

bool AdmissibleSet::contains(double x) const { return !component_of(x).has_value(); }

std::optional<std::size_t> AdmissibleSet::component_of(double x) const
{
    for (std::size_t l = 0; l < u.size(); ++l)
        if (u[l] <= x && x <= v[l]) return l;
    return std::nullopt;
}

double AdmissibleSet::boundary_distance(double x) const
{
    double best = kInf;
    for (std::size_t l = 0; l < u.size(); ++l) best = std::min({best, std::abs(x - u[l]), std::abs(x - v[l])});
    return best;
}

double SupportResult::distance(double x) const
{
    double best = kInf;
    for (const auto& iv : intervals) {
        if (iv.contains(x)) return 0.0;
        best = std::min(best, x < iv.lo ? iv.lo - x : x - iv.hi);
    }
    return best;
}

double phi(const ModelParams& p, double x)
{
    if (p.sigma == 0.0) return x;
    const double s2 = p.sigma * p.sigma;
    const double k = 1.0 + p.c * s2 * p.nu.stieltjes(x);
    return x * k * k + s2 * (1.0 - p.c) * k;
}

double phi_prime(const ModelParams& p, double x)
{
    if (p.sigma == 0.0) return 1.0;
    const double s2 = p.sigma * p.sigma;
    const double cs2 = p.c * s2;
    const double k = 1.0 + cs2 * p.nu.stieltjes(x);
    const double dg = p.nu.stieltjes_prime(x);
    return k * k + 2.0 * x * k * cs2 * dg + s2 * (1.0 - p.c) * cs2 * dg;
}

double g_condition_crossing(const ModelParams& p, double lo, double hi, double tol)
{
    const double threshold = -1.0 / (p.sigma * p.sigma * p.c);
    auto above = [&](double u) { return p.nu.stieltjes(u) > threshold; };
    if (!std::isfinite(lo)) {
        double reach = 1.0;
        lo = hi - reach;
        while (!above(lo)) {
            reach *= 2.0;
            lo = hi - reach;
            if (!std::isfinite(lo)) throw ConvergenceError("cannot bracket the g-condition left of the support");
        }
    }
    return bisect(above, lo, hi, true, tol);
}

bool satisfies_admissibility(const ModelParams& p, double u, double derivative_floor)
{
    if (p.nu.support().distance(u) <= kSupportTolerance) return false;
    return p.nu.stieltjes(u) > -1.0 / (p.sigma * p.sigma * p.c) && phi_prime(p, u) > derivative_floor;
}

bool zero_in_support(const ModelParams& p)
{
    if (p.c < 1.0) return false;
    if (p.nu.support().distance(0.0) <= kSupportTolerance) return true;
    return p.nu.stieltjes(0.0) <= -1.0 / (p.sigma * p.sigma);
}

AdmissibleSet admissible_set(const ModelParams& p, const RootIsolationOptions& opts)
{
    p.validate();
    const auto pieces = AdmissibleScanner(p, opts).run();
    if (pieces.size() < 2 || pieces.front().lo != -kInf || pieces.back().hi != kInf)
        throw ConvergenceError("admissible set does not have the canonical form");

    AdmissibleSet out;
    for (std::size_t l = 0; l + 1 < pieces.size(); ++l) {
        out.u.push_back(pieces[l].hi);
        out.v.push_back(pieces[l + 1].lo);
        if (!(out.u.back() < out.v.back())) throw ConvergenceError("degenerate admissible-set component");
    }
    return out;
}

SubordinationMap::SubordinationMap(ModelParams params, const RootIsolationOptions& opts,
                                   const OneSidedLimitOptions& limit_opts)
    : params_(std::move(params)), limit_opts_(limit_opts)
{
    params_.validate();
    support_.boundaries = admissible_set(params_, opts);
    support_.zero_in_support = zero_in_support(params_);

    const auto& e = support_.boundaries;
    for (std::size_t l = 0; l < e.p(); ++l) {
        double lo = phi_left_limit(e.u[l]);
        const double hi = phi_right_limit(e.v[l]);
        // The law lives on [0, inf); when zero belongs to the support the
        // bottom edge is exactly zero.
        if (l == 0 && support_.zero_in_support) lo = 0.0;
        support_.intervals.push_back({lo, hi});
    }
    for (std::size_t l = 0; l < support_.intervals.size(); ++l) {
        const auto& iv = support_.intervals[l];
        if (!(iv.lo < iv.hi)) throw ConvergenceError("support interval is degenerate");
        if (l > 0 && !(support_.intervals[l - 1].hi < iv.lo)) throw ConvergenceError("support intervals are not separated");
    }
}

double SubordinationMap::phi_left_limit(double u) const
{
    return one_sided_limit([this](double x) { return phi(x); }, u, -1.0, limit_opts_);
}

double SubordinationMap::phi_right_limit(double v) const
{
    return one_sided_limit([this](double x) { return phi(x); }, v, 1.0, limit_opts_);
}

double SubordinationMap::omega(double x) const
{
    if (support_.distance(x) <= 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "omega: " << x << " lies inside the support";
        throw DomainError(os.str());
    }
    const auto& e = support_.boundaries;
    const auto& ivs = support_.intervals;

    // Piece j of E is (v_{j-1}, u_j) with v_{-1} = -inf and u_p = +inf.
    std::size_t j = 0;
    while (j < ivs.size() && x > ivs[j].hi) ++j;
    double lo = j == 0 ? -kInf : e.v[j - 1];
    double hi = j == e.p() ? kInf : e.u[j];

    auto below = [&](double u) { return phi(u) < x; };
    if (!std::isfinite(lo)) {
        double reach = std::max(1.0, std::abs(x));
        lo = hi - reach;
        while (!below(lo)) {
            reach *= 2.0;
            lo = hi - reach;
            if (!std::isfinite(lo)) throw ConvergenceError("omega: cannot bracket on the left");
        }
    }
    if (!std::isfinite(hi)) {
        double reach = std::max(1.0, std::abs(x));
        hi = lo + reach;
        while (below(hi)) {
            reach *= 2.0;
            hi = lo + reach;
            if (!std::isfinite(hi)) throw ConvergenceError("omega: cannot bracket on the right");
        }
    }
    return bisect(below, lo, hi, true, 0.0);
}

SupportResult support(const ModelParams& p, const RootIsolationOptions& opts)
{
    return SubordinationMap(p, opts).support();
}

double omega(const ModelParams& p, double x) { return SubordinationMap(p).omega(x); }

KTransform::KTransform(ModelParams params) : params_(std::move(params))
{
    params_.validate();
    if (!(params_.c < 1.0)) throw DomainError("K transform requires c < 1");
    aux_ = std::make_shared<const SubordinationMap>(ModelParams{params_.sigma * std::sqrt(params_.c), 1.0, params_.nu});
}

double KTransform::operator()(double x) const
{
    if (aux_->support().distance(x) <= 0.0) throw DomainError("K transform argument lies inside the auxiliary support");
    const double g = solve_g(aux_->params(), cplx(x, kRealAxisOffset)).g.real();
    const double s2 = params_.sigma * params_.sigma;
    return x + s2 * (1.0 - params_.c) / (1.0 - s2 * params_.c * g);
}

double k_transform(const ModelParams& p, double x) { return KTransform(p)(x); }

}  // namespace ipn
