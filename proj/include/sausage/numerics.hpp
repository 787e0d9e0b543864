#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace sausage::numerics {

namespace detail {
template<class F>
double simpson_step(F const& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth)
{
    double const lm = 0.5 * (a + m);
    double const rm = 0.5 * (m + b);
    double const flm = f(lm);
    double const frm = f(rm);
    double const left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double const right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double const delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
           + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/*!
 * Adaptive Simpson quadrature of f on [a, b].
 *
 * The tolerance is max(rel_tol * |coarse estimate|, abs_floor). Recursion is
 * capped at `max_depth` levels.
 */
template<class F>
double integrate(F const& f, double a, double b, double rel_tol = 1e-10,
                 double abs_floor = 1e-14, int max_depth = 50)
{
    if (a == b)
        return 0.0;
    double const m = 0.5 * (a + b);
    double const fa = f(a);
    double const fb = f(b);
    double const fm = f(m);
    double const whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double const tol = std::max(rel_tol * std::abs(whole), abs_floor);
    return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Composite integration over consecutive breakpoints, each panel adaptive.
template<class F>
double integrate_panels(F const& f, std::span<double const> knots,
                        double rel_tol = 1e-10, double abs_floor = 1e-14)
{
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        sum += integrate(f, knots[i], knots[i + 1], rel_tol, abs_floor);
    return sum;
}

struct Extremum
{
    double x;
    double value;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
template<class F>
Extremum golden_max(F const& f, double lo, double hi, double width = 1e-10)
{
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > width)
    {
        if (fc > fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double const x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Welford accumulator. Order of `add` calls determines the bits of the result.
class RunningStats
{
  public:
    void add(double x) noexcept
    {
        ++n_;
        double const delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept
    {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    [[nodiscard]] double stddev() const noexcept { return std::sqrt(variance()); }
    [[nodiscard]] double stderr_mean() const noexcept
    {
        return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Result of a two-parameter weighted linear regression y = a + b x.
struct LineFit
{
    double a = 0.0;
    double b = 0.0;
    double cov_aa = 0.0;
    double cov_ab = 0.0;
    double cov_bb = 0.0;
    double residual_norm = 0.0;  // sqrt of the weighted residual sum of squares
};

/*!
 * Weighted least squares fit of y = a + b x.
 *
 * Weights are inverse variances; when `sigma` is empty every point gets
 * unit weight and the covariance is scaled by the residual variance.
 */
inline LineFit weighted_line_fit(std::span<double const> x,
                                 std::span<double const> y,
                                 std::span<double const> sigma)
{
    require(x.size() == y.size(), "x", "x and y lengths differ");
    require(sigma.empty() || sigma.size() == x.size(), "sigma",
            "sigma length differs from x");
    require(x.size() >= 2, "x", "need at least two points");

    bool const weighted = !sigma.empty();
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double w = 1.0;
        if (weighted)
        {
            require(sigma[i] > 0.0, "sigma", "standard errors must be positive");
            w = 1.0 / (sigma[i] * sigma[i]);
        }
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    double const det = s * sxx - sx * sx;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, s * sxx)))
        throw NumericError("singular design matrix in line fit");

    LineFit fit;
    fit.a = (sxx * sy - sx * sxy) / det;
    fit.b = (s * sxy - sx * sy) / det;

    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double const r = y[i] - fit.a - fit.b * x[i];
        double const w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
        rss += w * r * r;
    }
    fit.residual_norm = std::sqrt(rss);

    double scale = 1.0;
    if (!weighted)
        scale = x.size() > 2 ? rss / static_cast<double>(x.size() - 2) : 0.0;
    fit.cov_aa = scale * sxx / det;
    fit.cov_ab = -scale * sx / det;
    fit.cov_bb = scale * s / det;
    return fit;
}

}  // namespace sausage::numerics
