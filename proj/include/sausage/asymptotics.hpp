#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <utility>

#include "errors.hpp"
#include "numerics.hpp"
#include "space_model.hpp"

namespace sausage {

/// Fractal and walk dimensions of the pre-Sierpinski gasket.
inline double gasket_alpha() { return std::log(3.0) / std::log(2.0); }
inline double gasket_beta() { return std::log(5.0) / std::log(2.0); }

//---------------------------------------------------------------------------//
// Psi
//---------------------------------------------------------------------------//

/// sup_{s>0} (r/s - t/phi(s)) by golden section on log s in [1e-6, 1e6].
inline double psi_numeric(ScalingFunction const& phi, double r, double t)
{
    auto objective = [&](double u) {
        double const s = std::exp(u);
        return r / s - t / phi(s);
    };
    double const lo = std::log(1e-6);
    double const hi = std::log(1e6);
    auto const best = numerics::golden_max(objective, lo, hi, 1e-10);
    // The supremum approaches 0 from above as s -> inf.
    return std::max(best.value, 0.0);
}

/*!
 * Exponential rate of the sub-Gaussian heat kernel bounds.
 *
 * For a pure power phi(s) = c s^beta the optimum is
 * s* = (beta t / (c r))^(1/(beta-1)) and the value is (r / s*)(1 - 1/beta).
 */
inline double psi(ScalingFunction const& phi, double r, double t)
{
    require(t > 0.0, "t", "must be positive");
    require(r >= 0.0, "r", "must be non-negative");
    if (r == 0.0)
        return 0.0;
    if (phi.is_pure_power() && phi.exponent() > 1.0)
    {
        double const beta = phi.exponent();
        double const s_star
            = std::pow(beta * t / (phi.prefactor() * r), 1.0 / (beta - 1.0));
        return (r / s_star) * (1.0 - 1.0 / beta);
    }
    return psi_numeric(phi, r, t);
}

/// Lower and upper heat kernel bounds at distance r and time t.
inline std::pair<double, double>
heat_kernel_bounds(HeatKernelParams const& hk, ScalingFunction const& volume,
                   ScalingFunction const& phi, double r, double t)
{
    hk.validate();
    double const vol = volume(phi.inverse(t));
    return {hk.c5 * std::exp(-hk.c6 * psi(phi, r, t)) / vol,
            hk.c7 * std::exp(-hk.c8 * psi(phi, r, t)) / vol};
}

//---------------------------------------------------------------------------//
// f(t) = int_1^t ds / V(phi^{-1}(s))
//---------------------------------------------------------------------------//

/// Quadrature route for f; substitutes s = e^u and splits at the kink s = phi(1).
inline double f_integral_quadrature(ScalingFunction const& volume,
                                    ScalingFunction const& phi, double t)
{
    require(t >= 1.0, "t", "must be at least 1");
    if (t == 1.0)
        return 0.0;
    auto integrand = [&](double u) {
        double const s = std::exp(u);
        return s / volume(phi.inverse(s));
    };
    double const end = std::log(t);
    std::vector<double> knots{0.0};
    double const kink = std::log(phi(1.0));
    if (kink > 0.0 && kink < end)
        knots.push_back(kink);
    // Keep panels short so the adaptive rule sees the exponential growth.
    std::vector<double> fine;
    knots.push_back(end);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    {
        int const pieces = std::max(1, static_cast<int>(std::ceil((knots[i + 1] - knots[i]) / 0.5)));
        for (int p = 0; p < pieces; ++p)
            fine.push_back(knots[i] + (knots[i + 1] - knots[i]) * p / pieces);
    }
    fine.push_back(end);
    return numerics::integrate_panels(integrand, fine, 1e-10, 1e-14);
}

inline double f_integral(ScalingFunction const& volume,
                         ScalingFunction const& phi, double t)
{
    require(t >= 1.0, "t", "must be at least 1");
    if (t == 1.0)
        return 0.0;
    if (volume.is_pure_power() && phi.is_pure_power())
    {
        // V(phi^{-1}(s)) = cV (s / cphi)^(alpha/beta)
        double const ratio = volume.exponent() / phi.exponent();
        double const scale
            = std::pow(phi.prefactor(), ratio) / volume.prefactor();
        double const p = 1.0 - ratio;
        if (std::abs(p) < 1e-14)
            return scale * std::log(t);
        return scale * std::expm1(p * std::log(t)) / p;
    }
    return f_integral_quadrature(volume, phi, t);
}

//---------------------------------------------------------------------------//
// Green functions and capacities (generator 1/2 Laplacian)
//---------------------------------------------------------------------------//

/// Gamma(d/2 - 1) / (2 pi^(d/2)) r^(2-d).
inline double green_bm(int dim, double r)
{
    require(dim >= 3, "dim", "Green function diverges for dim <= 2");
    require(r > 0.0, "r", "must be positive");
    double const d = dim;
    return std::tgamma(0.5 * d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d))
           * std::pow(r, 2.0 - d);
}

/// Newtonian capacity of the closed eps-ball: 1 / green_bm(dim, eps).
inline double capacity_ball(int dim, double eps)
{
    require(dim >= 3, "dim", "capacity vanishes for dim <= 2");
    require(eps > 0.0, "eps", "must be positive");
    return 1.0 / green_bm(dim, eps);
}

/// Claimed ratio c(B, eps) / c(A, eps) between the G = 4 and G = 1 spaces.
inline double scaled_limit_ratio(int dim)
{
    require(dim >= 1, "dim", "must be positive");
    return std::pow(2.0, 0.5 * (dim - 2));
}

//---------------------------------------------------------------------------//
// Regimes
//---------------------------------------------------------------------------//

enum class Regime
{
    transient,
    weakly_recurrent,
    strongly_recurrent
};

enum class FGrowth
{
    constant,
    logarithmic,
    power
};

inline std::string_view to_string(Regime r)
{
    switch (r)
    {
        case Regime::transient:
            return "transient";
        case Regime::weakly_recurrent:
            return "weakly-recurrent";
        case Regime::strongly_recurrent:
            return "strongly-recurrent";
    }
    return "?";
}

inline std::string_view to_string(FGrowth g)
{
    switch (g)
    {
        case FGrowth::constant:
            return "1";
        case FGrowth::logarithmic:
            return "log t";
        case FGrowth::power:
            return "t^(1-alpha/beta)";
    }
    return "?";
}

struct RegimeClassification
{
    Regime regime;
    FGrowth f_growth;
    double alpha;
    double beta;
};

inline RegimeClassification classify_regime(double alpha, double beta)
{
    require(alpha > 0.0, "alpha", "must be positive");
    require(beta > 1.0, "beta", "must exceed 1");
    double const tol = 1e-12 * std::max(alpha, beta);
    if (std::abs(alpha - beta) <= tol)
        return {Regime::weakly_recurrent, FGrowth::logarithmic, alpha, beta};
    if (alpha > beta)
        return {Regime::transient, FGrowth::constant, alpha, beta};
    return {Regime::strongly_recurrent, FGrowth::power, alpha, beta};
}

enum class SmallRadiusLimit
{
    zero,
    positive
};

/*!
 * Limit of V_eps(t) as eps -> 0.
 *
 * Zero iff int_0^1 ds / V(phi^{-1}(s)) diverges. Near s = 0 only the inner
 * regimes matter, where the integrand is a power s^(-alpha/beta).
 */
inline SmallRadiusLimit radial_limit(ScalingFunction const& volume,
                                     ScalingFunction const& phi)
{
    double const ratio = volume.inner_exponent() / phi.inner_exponent();
    return ratio >= 1.0 - 1e-12 ? SmallRadiusLimit::zero
                                : SmallRadiusLimit::positive;
}

//---------------------------------------------------------------------------//
// LIL normalizers
//---------------------------------------------------------------------------//

/// How f is evaluated inside the normalizers.
enum class FForm
{
    integral,   ///< exact f_integral
    canonical,  ///< the regime representative 1, log t, or t^(1 - alpha/beta)
};

inline double f_canonical(ScalingFunction const& volume,
                          ScalingFunction const& phi, double t)
{
    auto const c = classify_regime(volume.outer_exponent(),
                                   phi.outer_exponent());
    switch (c.f_growth)
    {
        case FGrowth::constant:
            return 1.0;
        case FGrowth::logarithmic:
            return std::log(t);
        case FGrowth::power:
            return std::pow(t, 1.0 - c.alpha / c.beta);
    }
    return 1.0;
}

struct LilNormalizers
{
    double sup_normalizer;
    double inf_normalizer;
};

/// (t / f(u), min{V(phi^{-1}(u)), t / f(u)}) with u = t / log log t.
inline LilNormalizers lil_normalizers(ScalingFunction const& volume,
                                      ScalingFunction const& phi, double t,
                                      FForm form = FForm::integral)
{
    require(t > M_E, "t", "log log t must be positive (t > e)");
    double const u = t / std::log(std::log(t));
    double const f = form == FForm::integral ? f_integral(volume, phi, u)
                                             : f_canonical(volume, phi, u);
    double const sup = t / f;
    double const vol = volume(phi.inverse(u));
    return {sup, std::min(vol, sup)};
}

//---------------------------------------------------------------------------//
// Limit constants
//---------------------------------------------------------------------------//

enum class LimitOrigin
{
    capacity,
    green_reciprocal,
    sandwich_interval
};

struct LimitConstant
{
    double value;
    LimitOrigin origin;
    double lower;
    double upper;

    static LimitConstant from_capacity(double cap)
    {
        return {cap, LimitOrigin::capacity, cap, cap};
    }
};

/// [c0 / c2, c0 / c1]: the range of lim E[V_eps(t)] / (t / f(t)).
inline LimitConstant sandwich_interval(double c0, double c1, double c2)
{
    require(c0 > 0.0, "c0", "must be positive");
    require(c1 > 0.0, "c1", "must be positive");
    require(c2 > 0.0, "c2", "must be positive");
    require(c1 <= c2, "c1", "must not exceed c2");
    double const lower = c0 / c2;
    double const upper = c0 / c1;
    return {0.5 * (lower + upper), LimitOrigin::sandwich_interval, lower, upper};
}

}  // namespace sausage
