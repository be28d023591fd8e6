#include "ipn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ipn/errors.hpp"

namespace ipn {

double SupportComponents::distance(double x) const
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& iv : intervals) {
        if (iv.contains(x)) return 0.0;
        best = std::min(best, x < iv.lo ? iv.lo - x : x - iv.hi);
    }
    return best;
}

MeasureSpec::MeasureSpec(std::vector<Atom> atoms, std::vector<Segment> segments)
    : atoms_(std::move(atoms)), segments_(std::move(segments))
{
    validate();
    std::ranges::sort(atoms_, {}, &Atom::location);
    std::ranges::sort(segments_, {}, &Segment::lo);
    build_support();
}

MeasureSpec MeasureSpec::point_mass(double location) { return MeasureSpec({{1.0, location}}, {}); }

MeasureSpec MeasureSpec::uniform(double lo, double hi) { return MeasureSpec({}, {{1.0, lo, hi}}); }

void MeasureSpec::validate() const
{
    auto fail = [](const std::string& what) { throw ValidationError("invalid measure: " + what); };

    if (atoms_.empty() && segments_.empty()) fail("no atoms and no segments");

    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0)) fail("atom weight must be > 0");
        if (!(a.location >= 0.0) || !std::isfinite(a.location)) fail("atom location must be finite and >= 0");
        total += a.weight;
    }
    for (const auto& s : segments_) {
        if (!(s.weight > 0.0)) fail("segment weight must be > 0");
        if (!(s.lo >= 0.0) || !std::isfinite(s.hi)) fail("segment endpoints must be finite and >= 0");
        if (!(s.hi > s.lo)) fail("segment requires hi > lo");
        total += s.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << total << ", expected 1";
        fail(os.str());
    }

    auto segs = segments_;
    std::ranges::sort(segs, {}, &Segment::lo);
    for (std::size_t i = 1; i < segs.size(); ++i)
        if (segs[i].lo < segs[i - 1].hi) fail("segments overlap");
    for (const auto& a : atoms_)
        for (const auto& s : segs)
            if (a.location > s.lo + kSupportTolerance && a.location < s.hi - kSupportTolerance)
                fail("atom interior to a segment");

    if (segments_.empty() && std::ranges::all_of(atoms_, [](const Atom& a) { return a.location == 0.0; }))
        fail("point mass at zero is excluded");
}

void MeasureSpec::build_support()
{
    std::vector<Interval> raw;
    raw.reserve(atoms_.size() + segments_.size());
    for (const auto& a : atoms_) raw.push_back({a.location, a.location});
    for (const auto& s : segments_) raw.push_back({s.lo, s.hi});
    std::ranges::sort(raw, {}, &Interval::lo);

    std::vector<Interval> merged;
    for (const auto& iv : raw) {
        if (!merged.empty() && iv.lo <= merged.back().hi + kSupportTolerance)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    support_.intervals = std::move(merged);
}

void MeasureSpec::check_outside_support(double x) const
{
    if (support_.distance(x) <= kSupportTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "real argument " << x << " lies inside the support";
        throw DomainError(os.str());
    }
}

cplx MeasureSpec::stieltjes(cplx z) const
{
    if (z.imag() == 0.0) return stieltjes(z.real());
    cplx g = 0.0;
    for (const auto& a : atoms_) g += a.weight / (z - a.location);
    for (const auto& s : segments_) g += s.weight / (s.hi - s.lo) * (std::log(z - s.lo) - std::log(z - s.hi));
    return g;
}

double MeasureSpec::stieltjes(double x) const
{
    check_outside_support(x);
    double g = 0.0;
    for (const auto& a : atoms_) g += a.weight / (x - a.location);
    for (const auto& s : segments_) {
        const double len = s.hi - s.lo;
        g += s.weight / len * std::log1p(len / (x - s.hi));
    }
    return g;
}

cplx MeasureSpec::stieltjes_prime(cplx z) const
{
    if (z.imag() == 0.0) return stieltjes_prime(z.real());
    cplx d = 0.0;
    for (const auto& a : atoms_) d -= a.weight / ((z - a.location) * (z - a.location));
    for (const auto& s : segments_) d += s.weight / (s.hi - s.lo) * (1.0 / (z - s.lo) - 1.0 / (z - s.hi));
    return d;
}

double MeasureSpec::stieltjes_prime(double x) const
{
    check_outside_support(x);
    double d = 0.0;
    for (const auto& a : atoms_) d -= a.weight / ((x - a.location) * (x - a.location));
    // 1/(x-lo) - 1/(x-hi) = -(hi-lo) / ((x-lo)(x-hi))
    for (const auto& s : segments_) d -= s.weight / ((x - s.lo) * (x - s.hi));
    return d;
}

double MeasureSpec::cdf(double x) const
{
    double acc = 0.0;
    for (const auto& a : atoms_)
        if (a.location <= x) acc += a.weight;
    for (const auto& s : segments_) acc += s.weight * std::clamp((x - s.lo) / (s.hi - s.lo), 0.0, 1.0);
    return std::min(acc, 1.0);
}

double MeasureSpec::mass(double lo, double hi) const
{
    if (hi < lo) return 0.0;
    double acc = 0.0;
    for (const auto& a : atoms_)
        if (lo <= a.location && a.location <= hi) acc += a.weight;
    for (const auto& s : segments_) {
        const double a = std::max(lo, s.lo);
        const double b = std::min(hi, s.hi);
        if (b > a) acc += s.weight * (b - a) / (s.hi - s.lo);
    }
    return acc;
}

double MeasureSpec::quantile(double alpha) const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");

    // Walk the pieces in ascending order; atoms sitting on a segment's lower
    // endpoint are visited first so the generalized inverse lands on them.
    struct Piece {
        double lo, hi, weight;
    };
    std::vector<Piece> pieces;
    for (const auto& a : atoms_) pieces.push_back({a.location, a.location, a.weight});
    for (const auto& s : segments_) pieces.push_back({s.lo, s.hi, s.weight});
    std::ranges::sort(pieces, [](const Piece& p, const Piece& q) {
        return p.lo != q.lo ? p.lo < q.lo : p.hi < q.hi;
    });

    double cumulative = 0.0;
    for (const auto& p : pieces) {
        if (cumulative + p.weight >= alpha) {
            if (p.hi == p.lo) return p.lo;
            return p.lo + std::max(alpha - cumulative, 0.0) / p.weight * (p.hi - p.lo);
        }
        cumulative += p.weight;
    }
    return pieces.back().hi;
}

std::vector<double> MeasureSpec::quantile_grid(std::size_t count) const
{
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = quantile((static_cast<double>(i) + 0.5) / static_cast<double>(count));
    return out;
}

Interval MarchenkoPastur::edges() const
{
    const double s2 = sigma * sigma;
    const double rc = std::sqrt(c);
    return {s2 * (1.0 - rc) * (1.0 - rc), s2 * (1.0 + rc) * (1.0 + rc)};
}

double MarchenkoPastur::density(double x) const
{
    const double s2 = sigma * sigma;
    const double xt = x / s2;
    const double rc = std::sqrt(c);
    const double lo = (1.0 - rc) * (1.0 - rc);
    const double hi = (1.0 + rc) * (1.0 + rc);
    if (!(xt > lo && xt < hi) || xt <= 0.0) return 0.0;
    return std::sqrt((xt - lo) * (hi - xt)) / (2.0 * std::numbers::pi * c * xt) / s2;
}

}  // namespace ipn
