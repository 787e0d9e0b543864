#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace sausage {

template<int Dim>
using Point = std::array<double, Dim>;

template<int Dim>
constexpr double norm_sq(Point<Dim> const& x) noexcept
{
    double s = 0.0;
    for (int k = 0; k < Dim; ++k)
        s += x[k] * x[k];
    return s;
}

template<int Dim>
constexpr double dist_sq(Point<Dim> const& x, Point<Dim> const& y) noexcept
{
    double s = 0.0;
    for (int k = 0; k < Dim; ++k)
    {
        double const d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

/// Lebesgue volume of the unit ball in R^dim.
inline double unit_ball_volume(int dim)
{
    return std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

//---------------------------------------------------------------------------//
// Scaling functions
//---------------------------------------------------------------------------//

/*!
 * Volume-growth or time-scale function r -> V(r) / phi(r).
 *
 * A pure power is `prefactor * r^exponent`. A two-regime function uses
 * `inner_exponent` on (0, 1] and `outer_exponent` on (1, inf) with a shared
 * prefactor, so it is continuous at r = 1.
 */
class ScalingFunction
{
  public:
    enum class Kind
    {
        pure_power,
        two_regime
    };

    static ScalingFunction power(double exponent, double prefactor = 1.0)
    {
        require(exponent > 0.0, "exponent", "must be positive");
        require(prefactor > 0.0, "prefactor", "must be positive");
        return ScalingFunction(Kind::pure_power, exponent, exponent, prefactor);
    }

    static ScalingFunction two_regime(double inner_exponent,
                                      double outer_exponent,
                                      double prefactor = 1.0)
    {
        require(inner_exponent > 0.0, "inner_exponent", "must be positive");
        require(outer_exponent > 0.0, "outer_exponent", "must be positive");
        require(prefactor > 0.0, "prefactor", "must be positive");
        return ScalingFunction(Kind::two_regime, inner_exponent, outer_exponent,
                               prefactor);
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_pure_power() const noexcept
    {
        return kind_ == Kind::pure_power;
    }
    [[nodiscard]] double inner_exponent() const noexcept { return inner_; }
    [[nodiscard]] double outer_exponent() const noexcept { return outer_; }
    [[nodiscard]] double exponent() const noexcept { return outer_; }
    [[nodiscard]] double prefactor() const noexcept { return prefactor_; }

    /// Envelope exponents: min and max of the two regimes.
    [[nodiscard]] double lower_exponent() const noexcept
    {
        return std::min(inner_, outer_);
    }
    [[nodiscard]] double upper_exponent() const noexcept
    {
        return std::max(inner_, outer_);
    }

    [[nodiscard]] double operator()(double r) const noexcept
    {
        if (r <= 0.0)
            return 0.0;
        return prefactor_ * std::pow(r, r <= 1.0 ? inner_ : outer_);
    }

    [[nodiscard]] double inverse(double v) const noexcept
    {
        if (v <= 0.0)
            return 0.0;
        double const u = v / prefactor_;
        return std::pow(u, 1.0 / (u <= 1.0 ? inner_ : outer_));
    }

  private:
    ScalingFunction(Kind kind, double inner, double outer, double prefactor)
        : kind_(kind), inner_(inner), outer_(outer), prefactor_(prefactor)
    {
    }

    Kind kind_;
    double inner_;
    double outer_;
    double prefactor_;
};

/// Constants of the two-sided sub-Gaussian heat kernel bounds.
struct HeatKernelParams
{
    double c5 = 1.0;
    double c6 = 1.0;
    double c7 = 1.0;
    double c8 = 1.0;

    void validate() const
    {
        require(c5 > 0.0, "c5", "must be positive");
        require(c6 > 0.0, "c6", "must be positive");
        require(c7 > 0.0, "c7", "must be positive");
        require(c8 > 0.0, "c8", "must be positive");
    }
};

//---------------------------------------------------------------------------//
// Radial metric profile
//---------------------------------------------------------------------------//

/// C2 smoothstep 6u^5 - 15u^4 + 10u^3 on [0, 1].
constexpr double smoothstep(double u) noexcept
{
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

constexpr double smoothstep_derivative(double u) noexcept
{
    double const v = u * (1.0 - u);
    return 30.0 * v * v;
}

/*!
 * Radial conformal factor G(r) built from alternating plateaus.
 *
 * Breakpoints R_1 < R_2 < ... split [0, inf) into plateaus. The plateau
 * before R_1 has the `low` value (or `high` when `starts_high`), and each
 * breakpoint flips the level. The flip happens on the width-1 connector
 * [R_j - 1, R_j) through the smoothstep, so G' = 0 on every plateau and at
 * r = 0.
 */
class RadialMetricProfile
{
  public:
    static constexpr double low_value = 1.0;
    static constexpr double connector_width = 1.0;

    RadialMetricProfile() = default;

    explicit RadialMetricProfile(std::vector<double> breakpoints,
                                 double high = 4.0, bool starts_high = false)
        : breakpoints_(std::move(breakpoints)), high_(high),
          starts_high_(starts_high)
    {
        require(high_ >= low_value, "plateau_high", "must be at least 1");
        double prev = 0.0;
        for (double r : breakpoints_)
        {
            require(std::isfinite(r), "breakpoints", "must be finite");
            require(r - prev >= connector_width, "breakpoints",
                    "consecutive breakpoints (and R_1 from 0) must be at "
                    "least one connector width apart");
            prev = r;
        }
    }

    /// G identically equal to `value` (1 for the space A, 4 for B).
    static RadialMetricProfile constant(double value)
    {
        if (value == low_value)
            return RadialMetricProfile({}, 4.0, false);
        return RadialMetricProfile({}, value, true);
    }

    [[nodiscard]] std::span<double const> breakpoints() const noexcept
    {
        return breakpoints_;
    }
    [[nodiscard]] double high() const noexcept { return high_; }
    [[nodiscard]] bool starts_high() const noexcept { return starts_high_; }

    [[nodiscard]] bool is_constant() const noexcept
    {
        return breakpoints_.empty();
    }

    /// Radius beyond which G is constant (0 for a constant profile).
    [[nodiscard]] double support_radius() const noexcept
    {
        return breakpoints_.empty() ? 0.0 : breakpoints_.back();
    }

    [[nodiscard]] double level(std::size_t plateau) const noexcept
    {
        bool const high = (plateau % 2 == 1) != starts_high_;
        return high ? high_ : low_value;
    }

    [[nodiscard]] double value(double r) const noexcept
    {
        auto [j, u] = locate(r);
        if (u < 0.0)
            return level(j);
        double const from = level(j);
        double const to = level(j + 1);
        double const g = from + (to - from) * smoothstep(u);
        // rounding must not leave the plateau range
        return std::clamp(g, std::min(from, to), std::max(from, to));
    }

    [[nodiscard]] double derivative(double r) const noexcept
    {
        auto [j, u] = locate(r);
        if (u < 0.0)
            return 0.0;
        return (level(j + 1) - level(j)) * smoothstep_derivative(u);
    }

    friend bool operator==(RadialMetricProfile const&,
                           RadialMetricProfile const&) = default;

  private:
    struct Location
    {
        std::size_t plateau;
        double connector_u;  // negative when on a plateau
    };

    [[nodiscard]] Location locate(double r) const noexcept
    {
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
        auto const j = static_cast<std::size_t>(it - breakpoints_.begin());
        if (it != breakpoints_.end() && r >= *it - connector_width)
            return {j, r - (*it - connector_width)};
        return {j, -1.0};
    }

    std::vector<double> breakpoints_;
    double high_ = 4.0;
    bool starts_high_ = false;
};

/// G(r) of the profile.
inline double metric_factor(RadialMetricProfile const& profile, double r)
{
    return profile.value(r);
}

/// Density of the Riemannian volume w.r.t. Lebesgue measure: G(|x|)^(dim/2).
template<int Dim>
double measure_density(RadialMetricProfile const& profile, Point<Dim> const& x)
{
    static_assert(Dim >= 2, "radial metric spaces need dim >= 2");
    double const g = profile.value(std::sqrt(norm_sq<Dim>(x)));
    return std::pow(g, 0.5 * Dim);
}

namespace detail {

template<int Dim>
std::vector<std::array<int, Dim>> lattice_stencil()
{
    std::vector<std::array<int, Dim>> out;
    std::array<int, Dim> off{};
    int total = 1;
    for (int k = 0; k < Dim; ++k)
        total *= 3;
    for (int code = 0; code < total; ++code)
    {
        int c = code;
        bool zero = true;
        for (int k = 0; k < Dim; ++k)
        {
            off[k] = c % 3 - 1;
            c /= 3;
            zero = zero && off[k] == 0;
        }
        if (!zero)
            out.push_back(off);
    }
    return out;
}

}  // namespace detail

/*!
 * Approximate Riemannian distance by Dijkstra on a (3^dim - 1)-connected
 * lattice with spacing `mesh`, anchored at x.
 *
 * Edge weight is sqrt(G(midpoint)) times the Euclidean edge length. The
 * lattice covers the box around x and y padded by |x - y| on every side,
 * which contains every path of Euclidean length at most 2|x - y|. The
 * target y joins the lattice through straight edges to the corners of its
 * containing cell.
 */
template<int Dim>
double riemannian_distance_bound(RadialMetricProfile const& profile,
                                 Point<Dim> const& x, Point<Dim> const& y,
                                 double mesh)
{
    double const sep = std::sqrt(dist_sq<Dim>(x, y));
    require(sep > 0.0, "y", "endpoints must differ");
    require(mesh > 0.0, "mesh", "must be positive");
    require(mesh < sep / 4.0, "mesh", "too coarse to resolve |x - y| / 4");

    std::array<long, Dim> lo{};
    std::array<long, Dim> extent{};
    long total = 1;
    for (int k = 0; k < Dim; ++k)
    {
        double const a = std::min(x[k], y[k]) - sep;
        double const b = std::max(x[k], y[k]) + sep;
        lo[k] = static_cast<long>(std::floor((a - x[k]) / mesh));
        long const hi = static_cast<long>(std::ceil((b - x[k]) / mesh));
        extent[k] = hi - lo[k] + 1;
        total *= extent[k];
    }
    require(total < 20'000'000, "mesh", "lattice too large");

    auto coords = [&](long id) {
        Point<Dim> p{};
        for (int k = 0; k < Dim; ++k)
        {
            long const i = id % extent[k] + lo[k];
            id /= extent[k];
            p[k] = x[k] + static_cast<double>(i) * mesh;
        }
        return p;
    };
    auto index_of = [&](std::array<long, Dim> const& cell) {
        long id = 0;
        for (int k = Dim - 1; k >= 0; --k)
            id = id * extent[k] + (cell[k] - lo[k]);
        return id;
    };
    auto weight = [&](Point<Dim> const& p, Point<Dim> const& q) {
        Point<Dim> mid{};
        for (int k = 0; k < Dim; ++k)
            mid[k] = 0.5 * (p[k] + q[k]);
        double const g = profile.value(std::sqrt(norm_sq<Dim>(mid)));
        return std::sqrt(g) * std::sqrt(dist_sq<Dim>(p, q));
    };

    // Corners of the cell containing y connect to the virtual target node.
    long const target = total;
    std::vector<std::vector<std::pair<long, double>>> to_target(1);
    std::vector<long> corner_ids;
    std::vector<double> corner_w;
    {
        std::array<long, Dim> base{};
        for (int k = 0; k < Dim; ++k)
            base[k] = static_cast<long>(std::floor((y[k] - x[k]) / mesh));
        for (int mask = 0; mask < (1 << Dim); ++mask)
        {
            std::array<long, Dim> c = base;
            for (int k = 0; k < Dim; ++k)
                c[k] += (mask >> k) & 1;
            long const id = index_of(c);
            corner_ids.push_back(id);
            corner_w.push_back(weight(coords(id), y));
        }
    }

    auto const stencil = detail::lattice_stencil<Dim>();
    std::vector<double> dist(static_cast<std::size_t>(total + 1),
                             std::numeric_limits<double>::infinity());
    using Item = std::pair<double, long>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::array<long, Dim> origin_cell{};
    long const source = index_of(origin_cell);
    dist[source] = 0.0;
    heap.emplace(0.0, source);

    while (!heap.empty())
    {
        auto [d, id] = heap.top();
        heap.pop();
        if (d > dist[id])
            continue;
        if (id == target)
            return d;
        Point<Dim> const p = coords(id);
        std::array<long, Dim> cell{};
        {
            long rem = id;
            for (int k = 0; k < Dim; ++k)
            {
                cell[k] = rem % extent[k] + lo[k];
                rem /= extent[k];
            }
        }
        for (auto const& off : stencil)
        {
            std::array<long, Dim> nb{};
            bool inside = true;
            for (int k = 0; k < Dim; ++k)
            {
                nb[k] = cell[k] + off[k];
                inside = inside && nb[k] >= lo[k] && nb[k] < lo[k] + extent[k];
            }
            if (!inside)
                continue;
            long const nid = index_of(nb);
            double const nd = d + weight(p, coords(nid));
            if (nd < dist[nid])
            {
                dist[nid] = nd;
                heap.emplace(nd, nid);
            }
        }
        for (std::size_t c = 0; c < corner_ids.size(); ++c)
        {
            if (corner_ids[c] != id)
                continue;
            double const nd = d + corner_w[c];
            if (nd < dist[target])
            {
                dist[target] = nd;
                heap.emplace(nd, target);
            }
        }
    }
    throw NumericError("lattice search did not reach the target");
}

//---------------------------------------------------------------------------//
// Space descriptors
//---------------------------------------------------------------------------//

struct EuclideanSpace
{
    int dim = 3;
};

struct RadialMetricSpace
{
    int dim = 3;
    RadialMetricProfile profile;
};

struct GasketSpace
{
    int depth = 40;
};

/// Which space/diffusion a run uses.
class SpaceDescriptor
{
  public:
    using Variant = std::variant<EuclideanSpace, RadialMetricSpace, GasketSpace>;

    static SpaceDescriptor euclidean(int dim)
    {
        require(dim >= 1 && dim <= 6, "dim", "supported dimensions are 1..6");
        return SpaceDescriptor(EuclideanSpace{dim});
    }

    static SpaceDescriptor radial(int dim, RadialMetricProfile profile)
    {
        require(dim >= 2 && dim <= 6, "dim",
                "radial metric spaces need dim in 2..6");
        return SpaceDescriptor(RadialMetricSpace{dim, std::move(profile)});
    }

    static SpaceDescriptor gasket(int depth = 40)
    {
        require(depth >= 1 && depth <= 60, "depth", "must be in 1..60");
        return SpaceDescriptor(GasketSpace{depth});
    }

    [[nodiscard]] Variant const& variant() const noexcept { return v_; }

    [[nodiscard]] int dim() const noexcept
    {
        return std::visit(
            [](auto const& s) -> int {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, GasketSpace>)
                    return 2;
                else
                    return s.dim;
            },
            v_);
    }

    [[nodiscard]] bool is_gasket() const noexcept
    {
        return std::holds_alternative<GasketSpace>(v_);
    }

    [[nodiscard]] RadialMetricProfile const* profile() const noexcept
    {
        if (auto const* r = std::get_if<RadialMetricSpace>(&v_))
            return &r->profile;
        return nullptr;
    }

    [[nodiscard]] std::string name() const
    {
        return std::visit(
            [](auto const& s) -> std::string {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, EuclideanSpace>)
                    return "euclid";
                else if constexpr (std::is_same_v<T, RadialMetricSpace>)
                    return "radial";
                else
                    return "gasket";
            },
            v_);
    }

  private:
    explicit SpaceDescriptor(Variant v) : v_(std::move(v)) {}

    Variant v_;
};

}  // namespace sausage
