#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "gasket.hpp"
#include "rng.hpp"
#include "space_model.hpp"

namespace sausage {

/// A time-discretized trajectory in R^Dim with uniform step.
template<int Dim>
struct SampledPath
{
    SpaceDescriptor space = SpaceDescriptor::euclidean(Dim);
    double step = 0.0;
    std::vector<Point<Dim>> points;

    [[nodiscard]] double total_time() const noexcept
    {
        return points.empty() ? 0.0
                              : static_cast<double>(points.size() - 1) * step;
    }
};

/// A simple random walk trajectory on the gasket; one point per unit step.
struct GraphPath
{
    std::vector<GasketVertex> vertices;

    [[nodiscard]] std::size_t steps() const noexcept
    {
        return vertices.empty() ? 0 : vertices.size() - 1;
    }
};

/// Number of whole steps of size dt that fit in [0, t].
inline std::size_t step_count(double t, double dt)
{
    require(dt > 0.0, "dt", "must be positive");
    require(t >= dt * (1.0 - 1e-12), "t", "horizon must be at least one step");
    return static_cast<std::size_t>(std::floor(t / dt * (1.0 + 1e-12)));
}

/// Exact Gaussian increments: per-coordinate variance dt (generator 1/2 Laplacian).
template<int Dim>
class BrownianStepper
{
  public:
    explicit BrownianStepper(double dt) : dt_(dt), sqrt_dt_(std::sqrt(dt))
    {
        require(dt > 0.0, "dt", "must be positive");
    }

    void advance(Point<Dim>& x, Rng& rng) const
    {
        for (int k = 0; k < Dim; ++k)
            x[k] += sqrt_dt_ * rng.normal();
    }

    [[nodiscard]] double step() const noexcept { return dt_; }

  private:
    double dt_;
    double sqrt_dt_;
};

/*!
 * Euler-Maruyama step for 1/2 Laplace-Beltrami of g = G(|x|) I.
 *
 * Delta_g f = G^-1 Delta f + (d/2 - 1) G^-2 grad G . grad f, so the drift is
 * (d - 2) G'(r) / (4 G^2) in the radial direction and the diffusion
 * coefficient is G^(-1/2) per coordinate.
 */
template<int Dim>
class RadialStepper
{
  public:
    RadialStepper(RadialMetricProfile const& profile, double dt)
        : profile_(&profile), dt_(dt), sqrt_dt_(std::sqrt(dt))
    {
        require(dt > 0.0, "dt", "must be positive");
    }

    /// Radial drift magnitude at distance r from the origin.
    [[nodiscard]] double drift(double r) const noexcept
    {
        if (r <= 0.0)
            return 0.0;
        double const g = profile_->value(r);
        return (Dim - 2) * profile_->derivative(r) / (4.0 * g * g);
    }

    void advance(Point<Dim>& x, Rng& rng) const
    {
        double const r = std::sqrt(norm_sq<Dim>(x));
        double const g = profile_->value(r);
        double const sigma = 1.0 / std::sqrt(g);
        double const b = drift(r);
        if (b != 0.0)
        {
            double const scale = b * dt_ / r;
            for (int k = 0; k < Dim; ++k)
                x[k] += scale * x[k] + sigma * (sqrt_dt_ * rng.normal());
        }
        else
        {
            for (int k = 0; k < Dim; ++k)
                x[k] += sigma * (sqrt_dt_ * rng.normal());
        }
    }

    [[nodiscard]] double step() const noexcept { return dt_; }

  private:
    RadialMetricProfile const* profile_;
    double dt_;
    double sqrt_dt_;
};

namespace detail {
template<int Dim, class Stepper>
SampledPath<Dim> sample_with(Stepper const& stepper, SpaceDescriptor space,
                             double t, double dt, RngSpec const& spec,
                             Point<Dim> start)
{
    std::size_t const n = step_count(t, dt);
    SampledPath<Dim> path{std::move(space), dt, {}};
    path.points.reserve(n + 1);
    Rng rng(spec);
    Point<Dim> x = start;
    path.points.push_back(x);
    for (std::size_t i = 0; i < n; ++i)
    {
        stepper.advance(x, rng);
        path.points.push_back(x);
    }
    return path;
}
}  // namespace detail

template<int Dim>
SampledPath<Dim> sample_bm_path(double t, double dt, RngSpec const& spec,
                                Point<Dim> start = {})
{
    require(dt > 0.0, "dt", "must be positive");
    return detail::sample_with<Dim>(BrownianStepper<Dim>(dt),
                                    SpaceDescriptor::euclidean(Dim), t, dt,
                                    spec, start);
}

template<int Dim>
SampledPath<Dim> sample_radial_path(RadialMetricProfile const& profile,
                                    double t, double dt, RngSpec const& spec,
                                    Point<Dim> start = {})
{
    require(dt > 0.0, "dt", "must be positive");
    return detail::sample_with<Dim>(RadialStepper<Dim>(profile, dt),
                                    SpaceDescriptor::radial(Dim, profile), t,
                                    dt, spec, start);
}

/// One uniform step of the simple random walk.
inline GasketVertex gasket_step(GasketGraph const& graph, GasketVertex v, Rng& rng)
{
    auto const nb = graph.neighbors(v);
    return nb.items[rng.below(static_cast<std::size_t>(nb.count))];
}

inline GraphPath sample_gasket_walk(GasketGraph const& graph, std::size_t steps,
                                    RngSpec const& spec)
{
    require(steps >= 1, "steps", "must be at least 1");
    Rng rng(spec);
    GraphPath path;
    path.vertices.reserve(steps + 1);
    GasketVertex v = GasketGraph::origin();
    path.vertices.push_back(v);
    for (std::size_t i = 0; i < steps; ++i)
    {
        v = gasket_step(graph, v, rng);
        path.vertices.push_back(v);
    }
    return path;
}

enum class HittingMode
{
    inclusive,  ///< a start inside the ball hits at time 0
    strict,     ///< only positive grid times count
};

/// First grid time with |X - center| < eps, if any.
template<int Dim>
std::optional<double> hitting_time(SampledPath<Dim> const& path,
                                   Point<Dim> const& center, double eps,
                                   HittingMode mode = HittingMode::inclusive)
{
    require(eps > 0.0, "eps", "must be positive");
    double const eps2 = eps * eps;
    std::size_t const first = mode == HittingMode::inclusive ? 0 : 1;
    for (std::size_t i = first; i < path.points.size(); ++i)
    {
        if (dist_sq<Dim>(path.points[i], center) < eps2)
            return static_cast<double>(i) * path.step;
    }
    return std::nullopt;
}

/// First grid time with |X| >= radius, if any.
template<int Dim>
std::optional<double> exit_time(SampledPath<Dim> const& path, double radius)
{
    require(radius > 0.0, "R", "must be positive");
    double const r2 = radius * radius;
    for (std::size_t i = 0; i < path.points.size(); ++i)
    {
        if (norm_sq<Dim>(path.points[i]) >= r2)
            return static_cast<double>(i) * path.step;
    }
    return std::nullopt;
}

}  // namespace sausage
