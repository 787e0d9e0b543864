#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "asymptotics.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "numerics.hpp"
#include "occupancy.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "space_model.hpp"

namespace sausage {

/// Calls f(std::integral_constant<int, D>) for the runtime dimension.
template<class F>
decltype(auto) dispatch_dim(int dim, F&& f)
{
    switch (dim)
    {
        case 1:
            return f(std::integral_constant<int, 1>{});
        case 2:
            return f(std::integral_constant<int, 2>{});
        case 3:
            return f(std::integral_constant<int, 3>{});
        case 4:
            return f(std::integral_constant<int, 4>{});
        case 5:
            return f(std::integral_constant<int, 5>{});
        case 6:
            return f(std::integral_constant<int, 6>{});
        default:
            throw PreconditionError("dim", "supported dimensions are 1..6");
    }
}

template<int Dim>
Point<Dim> to_point(std::vector<double> const& v, char const* key)
{
    Point<Dim> p{};
    if (v.empty())
        return p;
    require(static_cast<int>(v.size()) == Dim, key,
            "needs exactly " + std::to_string(Dim) + " coordinates");
    std::copy(v.begin(), v.end(), p.begin());
    return p;
}

/// Grid indices of the requested times; times must be ascending and >= 0.
inline std::vector<std::size_t> checkpoint_indices(std::vector<double> const& times,
                                                   double dt)
{
    require(dt > 0.0, "dt", "must be positive");
    require(!times.empty(), "times", "must not be empty");
    std::vector<std::size_t> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        require(times[i] >= 0.0, "times", "must be non-negative");
        require(i == 0 || times[i] > times[i - 1], "times",
                "must be strictly ascending");
        out.push_back(static_cast<std::size_t>(std::floor(times[i] / dt + 1e-9)));
    }
    return out;
}

//---------------------------------------------------------------------------//
// Per-path kernels
//---------------------------------------------------------------------------//

/*!
 * Streams one path through a stepper and records the sausage measure at
 * each checkpoint index. Bitwise equal to sampling the path and calling
 * sausage_volume with the same checkpoints.
 */
template<int Dim, class Stepper>
std::vector<double> stream_sausage(Stepper const& stepper, Point<Dim> x,
                                   std::vector<std::size_t> const& checkpoints,
                                   double eps, double h,
                                   Density<Dim> const& density,
                                   RngSpec const& spec)
{
    OccupancyGrid<Dim> grid(h, density);
    SausageStamper<Dim> stamper(grid, eps);
    Rng rng(spec);
    std::vector<double> out;
    out.reserve(checkpoints.size());
    std::size_t next = 0;
    stamper.visit(x, true);
    while (next < checkpoints.size() && checkpoints[next] == 0)
    {
        out.push_back(grid.measure());
        ++next;
    }
    for (std::size_t i = 1; next < checkpoints.size(); ++i)
    {
        stepper.advance(x, rng);
        bool const cp = checkpoints[next] == i;
        stamper.visit(x, cp);
        while (next < checkpoints.size() && checkpoints[next] == i)
        {
            out.push_back(grid.measure());
            ++next;
        }
    }
    return out;
}

/// Range and maximal visit count of a gasket walk at the given step counts.
struct GasketWalkSeries
{
    std::vector<double> range;
    std::vector<double> max_visits;
};

inline GasketWalkSeries stream_gasket_walk(GasketGraph const& graph,
                                           std::vector<std::size_t> const& steps,
                                           RngSpec const& spec)
{
    Rng rng(spec);
    std::unordered_map<GasketVertex, std::uint32_t, GasketVertexHash> visits;
    visits.reserve(1024);
    GasketVertex v = GasketGraph::origin();
    std::uint32_t best = 1;
    visits.emplace(v, 1);
    GasketWalkSeries out;
    std::size_t next = 0;
    auto record = [&](std::size_t i) {
        while (next < steps.size() && steps[next] == i)
        {
            out.range.push_back(static_cast<double>(visits.size()));
            out.max_visits.push_back(best);
            ++next;
        }
    };
    record(0);
    for (std::size_t i = 1; next < steps.size(); ++i)
    {
        v = gasket_step(graph, v, rng);
        best = std::max(best, ++visits[v]);
        record(i);
    }
    return out;
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

struct EnsembleConfig
{
    SpaceDescriptor space = SpaceDescriptor::euclidean(3);
    double eps = 1.0;
    std::vector<double> times;  ///< time units; step counts on the gasket
    std::size_t paths = 2;
    double dt = 1e-3;
    double h = 0.125;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::vector<double> start;  ///< empty means the origin
};

inline void validate(EnsembleConfig const& c)
{
    require(c.paths >= 2, "paths", "need at least 2 paths");
    require(!c.times.empty(), "times", "must not be empty");
    if (c.space.is_gasket())
        return;
    detail::check_sausage_args<1>(c.eps, c.h);
    require(c.dt > 0.0, "dt", "must be positive");
}

/// Per-path sausage volumes, indexed [path][time].
inline std::vector<std::vector<double>> ensemble_samples(EnsembleConfig const& c)
{
    validate(c);
    if (c.space.is_gasket())
    {
        GasketGraph const graph(std::get<GasketSpace>(c.space.variant()).depth);
        auto const steps = checkpoint_indices(c.times, 1.0);
        return parallel_map(c.paths, c.workers, [&](std::size_t i) {
            return stream_gasket_walk(graph, steps, RngSpec{c.seed, i}).range;
        });
    }
    auto const cps = checkpoint_indices(c.times, c.dt);
    return dispatch_dim(c.space.dim(), [&](auto dim_tag) {
        constexpr int Dim = decltype(dim_tag)::value;
        Point<Dim> const start = to_point<Dim>(c.start, "start");
        auto const density = Density<Dim>::for_space(c.space);
        if (auto const* profile = c.space.profile())
        {
            RadialStepper<Dim> const stepper(*profile, c.dt);
            return parallel_map(c.paths, c.workers, [&](std::size_t i) {
                return stream_sausage<Dim>(stepper, start, cps, c.eps, c.h,
                                           density, RngSpec{c.seed, i});
            });
        }
        BrownianStepper<Dim> const stepper(c.dt);
        return parallel_map(c.paths, c.workers, [&](std::size_t i) {
            return stream_sausage<Dim>(stepper, start, cps, c.eps, c.h, density,
                                       RngSpec{c.seed, i});
        });
    });
}

/// Mean and standard error over paths, accumulated in index order.
inline void summarize(std::vector<std::vector<double>> const& samples,
                      EnsembleResult& r)
{
    std::size_t const k = r.times.size();
    std::vector<numerics::RunningStats> stats(k);
    for (auto const& row : samples)
        for (std::size_t j = 0; j < k; ++j)
            stats[j].add(row[j]);
    r.mean.resize(k);
    r.stderr_mean.resize(k);
    for (std::size_t j = 0; j < k; ++j)
    {
        r.mean[j] = stats[j].mean();
        r.stderr_mean[j] = stats[j].stderr_mean();
    }
    r.paths = samples.size();
}

inline EnsembleResult make_result(EnsembleConfig const& c)
{
    EnsembleResult r;
    r.space = c.space.name();
    r.dim = c.space.dim();
    r.eps = c.eps;
    r.times = c.times;
    r.seed = c.seed;
    r.dt = c.space.is_gasket() ? 1.0 : c.dt;
    r.h = c.space.is_gasket() ? 0.0 : c.h;
    return r;
}

/// Monte Carlo estimate of E[V_eps(t)] on a grid of times, one pass per path.
inline EnsembleResult run_ensemble(EnsembleConfig const& c)
{
    auto const t0 = std::chrono::steady_clock::now();
    EnsembleResult r = make_result(c);
    summarize(ensemble_samples(c), r);
    r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Range and maximal visit count ensembles of the gasket walk.
struct GasketStatistics
{
    EnsembleResult range;
    EnsembleResult max_visits;
};

inline GasketStatistics gasket_statistics(int depth, std::vector<double> const& steps,
                                          std::size_t walks, std::uint64_t seed,
                                          unsigned workers)
{
    EnsembleConfig c;
    c.space = SpaceDescriptor::gasket(depth);
    c.times = steps;
    c.paths = walks;
    c.seed = seed;
    validate(c);
    auto const t0 = std::chrono::steady_clock::now();
    GasketGraph const graph(depth);
    auto const cps = checkpoint_indices(steps, 1.0);
    auto const series = parallel_map(walks, workers, [&](std::size_t i) {
        return stream_gasket_walk(graph, cps, RngSpec{seed, i});
    });
    GasketStatistics out{make_result(c), make_result(c)};
    out.range.experiment = "gasket-range";
    out.max_visits.experiment = "gasket-max-visits";
    std::vector<std::vector<double>> range, visits;
    for (auto const& s : series)
    {
        range.push_back(s.range);
        visits.push_back(s.max_visits);
    }
    summarize(range, out.range);
    summarize(visits, out.max_visits);
    double const wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.range.wall_clock = out.max_visits.wall_clock = wall;
    return out;
}

//---------------------------------------------------------------------------//
// Hitting-time sandwich
//---------------------------------------------------------------------------//

/// About n quasi-uniform unit vectors in R^Dim.
template<int Dim>
std::vector<Point<Dim>> sphere_design(std::size_t n, std::uint64_t seed = 0x5eed)
{
    std::vector<Point<Dim>> out;
    if constexpr (Dim == 1)
    {
        out.push_back({1.0});
        out.push_back({-1.0});
    }
    else if constexpr (Dim == 2)
    {
        for (std::size_t k = 0; k < n; ++k)
        {
            double const a = 2.0 * M_PI * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            out.push_back({std::cos(a), std::sin(a)});
        }
    }
    else if constexpr (Dim == 3)
    {
        // icosahedron vertices plus face centers: 12 + 20 = 32 points
        double const g = 0.5 * (1.0 + std::sqrt(5.0));
        std::vector<Point<3>> ico;
        for (double s1 : {-1.0, 1.0})
            for (double s2 : {-1.0, 1.0})
            {
                ico.push_back({0.0, s1, s2 * g});
                ico.push_back({s1, s2 * g, 0.0});
                ico.push_back({s2 * g, 0.0, s1});
            }
        double const edge2 = 4.0;
        std::vector<Point<3>> pts = ico;
        for (std::size_t i = 0; i < ico.size(); ++i)
            for (std::size_t j = i + 1; j < ico.size(); ++j)
                for (std::size_t k = j + 1; k < ico.size(); ++k)
                {
                    auto close = [&](Point<3> const& p, Point<3> const& q) {
                        return std::abs(dist_sq<3>(p, q) - edge2) < 1e-9;
                    };
                    if (close(ico[i], ico[j]) && close(ico[j], ico[k])
                        && close(ico[i], ico[k]))
                    {
                        Point<3> c{};
                        for (int a = 0; a < 3; ++a)
                            c[a] = ico[i][a] + ico[j][a] + ico[k][a];
                        pts.push_back(c);
                    }
                }
        for (auto& p : pts)
        {
            double const r = std::sqrt(norm_sq<3>(p));
            for (auto& v : p)
                v /= r;
            out.push_back(p);
        }
        (void)n;
    }
    else
    {
        Rng rng(RngSpec{seed, static_cast<std::uint64_t>(Dim)});
        for (std::size_t k = 0; k < n; ++k)
        {
            Point<Dim> p{};
            for (auto& v : p)
                v = rng.normal();
            double const r = std::sqrt(norm_sq<Dim>(p));
            for (auto& v : p)
                v /= r;
            out.push_back(p);
        }
    }
    return out;
}

struct SandwichConfig
{
    SpaceDescriptor space = SpaceDescriptor::euclidean(3);
    std::vector<double> x;  ///< start; origin when empty
    std::vector<double> y;  ///< ball center
    double eps = 1.0;
    double a = 0.5;
    double t = 5.0;
    double T = 5.0;
    std::size_t paths = 5000;
    double dt = 0.01;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::size_t sphere_points = 32;
    HittingMode mode = HittingMode::inclusive;
};

struct SandwichReport
{
    double hit_probability = 0.0;
    double hit_stderr = 0.0;
    // (i): int_0^{t+T} P^x(X in B(y, a eps)) >= P^x(T_B <= t) inf_w int_0^T ...
    double upper_lhs = 0.0;
    double upper_rhs = 0.0;
    double upper_margin = 0.0;
    double upper_sigma = 0.0;
    // (ii): int_0^t P^x(X in B(y, a eps)) <= P^x(T_B <= t) sup_w int_0^t ...
    double lower_lhs = 0.0;
    double lower_rhs = 0.0;
    double lower_margin = 0.0;
    double lower_sigma = 0.0;
    double inf_occupation = 0.0;
    double sup_occupation = 0.0;
    std::size_t sphere_points = 0;
    double step_bias = 0.0;  ///< overshoot scale 0.5826 sqrt(dt) of grid hitting
    /// Finite sphere sampling: the inf side is conservative, the sup side is not.
    std::string upper_label = "conservative";
    std::string lower_label = "anti-conservative";

    [[nodiscard]] bool holds(double k = 2.0) const
    {
        return upper_margin >= -k * upper_sigma && lower_margin >= -k * lower_sigma;
    }
};

namespace detail {

struct SandwichPathStats
{
    double occ_long = 0.0;   // [0, t + T]
    double occ_short = 0.0;  // [0, t]
    double hit = 0.0;        // 1{T_B(y, eps) <= t}
};

template<int Dim, class Stepper>
SandwichPathStats sandwich_path(Stepper const& stepper, Point<Dim> x,
                                Point<Dim> const& y, double eps, double eta,
                                std::size_t n_short, std::size_t n_long,
                                HittingMode mode, RngSpec const& spec)
{
    Rng rng(spec);
    SandwichPathStats s;
    double const eps2 = eps * eps;
    double const eta2 = eta * eta;
    std::size_t in_short = 0, in_long = 0;
    bool hit = false;
    for (std::size_t i = 0;; ++i)
    {
        double const d2 = dist_sq<Dim>(x, y);
        if (i <= n_short && d2 < eps2 && (i > 0 || mode == HittingMode::inclusive))
            hit = true;
        if (i < n_long && d2 < eta2)
        {
            ++in_long;
            if (i < n_short)
                ++in_short;
        }
        if (i >= n_long)
            break;
        stepper.advance(x, rng);
    }
    double const dt = stepper.step();
    s.occ_long = static_cast<double>(in_long) * dt;
    s.occ_short = static_cast<double>(in_short) * dt;
    s.hit = hit ? 1.0 : 0.0;
    return s;
}

template<int Dim, class F>
decltype(auto) with_stepper(SpaceDescriptor const& space, double dt, F&& f)
{
    if (auto const* profile = space.profile())
        return f(RadialStepper<Dim>(*profile, dt));
    require(!space.is_gasket(), "space", "needs a continuous space");
    return f(BrownianStepper<Dim>(dt));
}

}  // namespace detail

/// Estimates both sides of the hitting-time sandwich inequalities.
inline SandwichReport verify_sandwich(SandwichConfig const& c)
{
    require(!c.space.is_gasket(), "space", "needs a continuous space");
    require(c.a > 0.0 && c.a < 1.0, "a", "must lie in (0, 1)");
    require(c.eps > 0.0, "eps", "must be positive");
    require(c.t > 0.0 && c.T > 0.0, "t", "times must be positive");
    require(c.paths >= 2, "paths", "need at least 2 paths");
    require(c.dt > 0.0, "dt", "must be positive");
    return dispatch_dim(c.space.dim(), [&](auto dim_tag) {
        constexpr int Dim = decltype(dim_tag)::value;
        Point<Dim> const x = to_point<Dim>(c.x, "x");
        Point<Dim> const y = to_point<Dim>(c.y, "y");
        require(std::sqrt(dist_sq<Dim>(x, y)) > c.eps, "y",
                "needs d(x, y) > eps");
        double const eta = c.a * c.eps;
        auto const n_t = checkpoint_indices({c.t}, c.dt)[0];
        auto const n_T = checkpoint_indices({c.T}, c.dt)[0];
        auto const n_tT = checkpoint_indices({c.t + c.T}, c.dt)[0];
        return detail::with_stepper<Dim>(c.space, c.dt, [&](auto const& stepper) {
            SandwichReport rep;
            auto const from_x = parallel_map(c.paths, c.workers, [&](std::size_t i) {
                return detail::sandwich_path<Dim>(stepper, x, y, c.eps, eta, n_t,
                                                  n_tT, c.mode, RngSpec{c.seed, i});
            });
            // common random numbers across the sphere points
            auto const sphere = sphere_design<Dim>(c.sphere_points);
            rep.sphere_points = sphere.size();
            std::size_t const n_w = std::max(n_T, n_t);
            struct WStats
            {
                double occ_T_mean, occ_T_se, occ_t_mean, occ_t_se;
            };
            std::vector<WStats> wstats;
            for (auto const& u : sphere)
            {
                Point<Dim> w = y;
                for (int k = 0; k < Dim; ++k)
                    w[k] += c.eps * u[k];
                auto const occ = parallel_map(c.paths, c.workers, [&](std::size_t i) {
                    auto s = detail::sandwich_path<Dim>(stepper, w, y, c.eps, eta,
                                                        std::min(n_T, n_t), n_w,
                                                        c.mode, RngSpec{c.seed, i}.child(1));
                    return std::array<double, 2>{
                        n_T >= n_t ? s.occ_long : s.occ_short,
                        n_t >= n_T ? s.occ_long : s.occ_short};
                });
                numerics::RunningStats sT, st;
                for (auto const& o : occ)
                {
                    sT.add(o[0]);
                    st.add(o[1]);
                }
                wstats.push_back({sT.mean(), sT.stderr_mean(), st.mean(), st.stderr_mean()});
            }
            auto const inf_it = std::min_element(wstats.begin(), wstats.end(),
                [](auto const& p, auto const& q) { return p.occ_T_mean < q.occ_T_mean; });
            auto const sup_it = std::max_element(wstats.begin(), wstats.end(),
                [](auto const& p, auto const& q) { return p.occ_t_mean < q.occ_t_mean; });
            rep.inf_occupation = inf_it->occ_T_mean;
            rep.sup_occupation = sup_it->occ_t_mean;

            numerics::RunningStats hit, lhs_u, lhs_l, q_u, q_l;
            for (auto const& s : from_x)
            {
                hit.add(s.hit);
                lhs_u.add(s.occ_long);
                lhs_l.add(s.occ_short);
                q_u.add(s.occ_long - s.hit * rep.inf_occupation);
                q_l.add(s.hit * rep.sup_occupation - s.occ_short);
            }
            double const p = hit.mean();
            rep.hit_probability = p;
            rep.hit_stderr = hit.stderr_mean();
            rep.upper_lhs = lhs_u.mean();
            rep.upper_rhs = p * rep.inf_occupation;
            rep.upper_margin = q_u.mean();
            rep.upper_sigma = std::hypot(q_u.stderr_mean(), p * inf_it->occ_T_se);
            rep.lower_lhs = lhs_l.mean();
            rep.lower_rhs = p * rep.sup_occupation;
            rep.lower_margin = q_l.mean();
            rep.lower_sigma = std::hypot(q_l.stderr_mean(), p * sup_it->occ_t_se);
            rep.step_bias = 0.5826 * std::sqrt(c.dt);
            return rep;
        });
    });
}

struct Estimate
{
    double value = 0.0;
    double stderr_mean = 0.0;
};

/// P^x(T_{B(y, eps)} <= t) at grid resolution.
inline Estimate hitting_probability(SpaceDescriptor const& space,
                                    std::vector<double> const& x,
                                    std::vector<double> const& y, double eps,
                                    double t, std::size_t paths, double dt,
                                    std::uint64_t seed, unsigned workers = 1,
                                    HittingMode mode = HittingMode::inclusive)
{
    require(eps > 0.0, "eps", "must be positive");
    require(paths >= 2, "paths", "need at least 2 paths");
    return dispatch_dim(space.dim(), [&](auto dim_tag) {
        constexpr int Dim = decltype(dim_tag)::value;
        Point<Dim> const px = to_point<Dim>(x, "x");
        Point<Dim> const py = to_point<Dim>(y, "y");
        auto const n = checkpoint_indices({t}, dt)[0];
        return detail::with_stepper<Dim>(space, dt, [&](auto const& stepper) {
            auto const hits = parallel_map(paths, workers, [&](std::size_t i) {
                return detail::sandwich_path<Dim>(stepper, px, py, eps, eps, n, n,
                                                  mode, RngSpec{seed, i})
                    .hit;
            });
            numerics::RunningStats s;
            for (double h : hits)
                s.add(h);
            return Estimate{s.mean(), s.stderr_mean()};
        });
    });
}

//---------------------------------------------------------------------------//
// Fluctuation between the homogeneous spaces A (G = 1) and B (G = high)
//---------------------------------------------------------------------------//

struct FluctuationConfig
{
    int dim = 3;
    RadialMetricProfile shell = RadialMetricProfile({10.0});
    double eps = 1.0;
    std::vector<double> times{10.0, 20.0, 40.0, 80.0};
    std::size_t paths = 1000;
    double dt = 1e-3;
    double h = 0.125;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct FluctuationCurve
{
    std::string label;
    EnsembleResult result;
    FitResult fit;
};

struct FluctuationReport
{
    FluctuationCurve a;
    FluctuationCurve b;
    FluctuationCurve shell;
    double ratio = 0.0;           ///< fitted c(B) / c(A)
    double ratio_sigma = 0.0;
    double claimed_ratio = 0.0;   ///< 2^((d-2)/2)
    std::vector<double> shell_over_a;  ///< mean ratio at each time
    bool crossover_toward_b = false;
};

inline FluctuationReport fluctuation_experiment(FluctuationConfig const& c)
{
    require(c.dim >= 3, "dim", "fluctuation needs dim >= 3");
    require(c.times.size() >= 4, "times", "fit needs at least 4 time points");
    auto run = [&](std::string label, RadialMetricProfile profile) {
        EnsembleConfig e;
        e.space = SpaceDescriptor::radial(c.dim, std::move(profile));
        e.eps = c.eps;
        e.times = c.times;
        e.paths = c.paths;
        e.dt = c.dt;
        e.h = c.h;
        e.seed = c.seed;
        e.workers = c.workers;
        FluctuationCurve curve{label, run_ensemble(e), {}};
        curve.result.experiment = "fluctuation-" + label;
        curve.fit = fit_limit(curve.result, FitModel::inverse_sqrt);
        return curve;
    };
    FluctuationReport rep;
    rep.a = run("A", RadialMetricProfile::constant(1.0));
    rep.b = run("B", RadialMetricProfile::constant(c.shell.high()));
    rep.shell = run("shell", c.shell);
    rep.ratio = rep.b.fit.a / rep.a.fit.a;
    rep.ratio_sigma = rep.ratio * std::hypot(rep.b.fit.sigma_a() / rep.b.fit.a,
                                             rep.a.fit.sigma_a() / rep.a.fit.a);
    rep.claimed_ratio = scaled_limit_ratio(c.dim);
    for (std::size_t i = 0; i < c.times.size(); ++i)
        rep.shell_over_a.push_back(rep.shell.result.mean[i] / rep.a.result.mean[i]);
    bool const b_above = rep.b.fit.a > rep.a.fit.a;
    double const first = rep.shell_over_a.front();
    double const last = rep.shell_over_a.back();
    rep.crossover_toward_b = b_above ? (last > first && last > 1.0)
                                     : (last < first && last < 1.0);
    return rep;
}

//---------------------------------------------------------------------------//
// Green function under a bounded modification
//---------------------------------------------------------------------------//

struct GreenConfig
{
    int dim = 3;
    RadialMetricProfile profile = RadialMetricProfile({2.0}, 4.0, true);
    std::vector<double> distances{5.0, 10.0, 20.0};
    double separation = 1.0;    ///< |z - y|, z on the segment toward the origin
    double probe_radius = 0.5;  ///< occupation ball around z
    double horizon = 200.0;
    std::size_t paths = 20000;
    double dt = 0.01;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct GreenRow
{
    double distance = 0.0;
    double g_model = 0.0;
    double g_model_se = 0.0;
    double g_bm = 0.0;  ///< same estimator, same seeds, unmodified space
    double g_bm_se = 0.0;
    double g_closed = 0.0;
    double diff = 0.0;
    double diff_se = 0.0;
};

struct GreenReport
{
    std::vector<GreenRow> rows;
    double tail_correction = 0.0;
    bool decreasing = false;       ///< |diff| strictly decreasing beyond 2 sigma
    bool final_near_zero = false;  ///< last |diff| within 3 sigma of 0
    bool far_matches_closed_form = false;
};

inline GreenReport green_comparison(GreenConfig const& c)
{
    require(c.dim >= 3, "dim", "Green function diverges for dim <= 2");
    require(c.probe_radius > 0.0 && c.probe_radius < c.separation, "probe_radius",
            "must lie in (0, separation)");
    require(c.paths >= 2, "paths", "need at least 2 paths");
    for (double r : c.distances)
        require(r - c.separation - c.probe_radius > c.profile.support_radius(),
                "distances", "probe ball must lie outside the modification");
    return dispatch_dim(c.dim, [&](auto dim_tag) -> GreenReport {
        constexpr int Dim = decltype(dim_tag)::value;
        if constexpr (Dim < 3)
        {
            throw PreconditionError("dim", "Green function diverges for dim <= 2");
        }
        else
        {
            GreenReport rep;
            double const d = Dim;
            double const vol = unit_ball_volume(Dim) * std::pow(c.probe_radius, d);
            // int_T^inf (2 pi s)^(-d/2) ds times the probe volume
            rep.tail_correction = vol * std::pow(2.0 * M_PI, -0.5 * d)
                                  * std::pow(c.horizon, 1.0 - 0.5 * d) / (0.5 * d - 1.0);
            auto const n = checkpoint_indices({c.horizon}, c.dt)[0];
            RadialStepper<Dim> const model(c.profile, c.dt);
            BrownianStepper<Dim> const bm(c.dt);
            for (std::size_t k = 0; k < c.distances.size(); ++k)
            {
                Point<Dim> y{}, z{};
                y[0] = c.distances[k];
                z[0] = c.distances[k] - c.separation;
                auto const occ = parallel_map(c.paths, c.workers, [&](std::size_t i) {
                    RngSpec const spec = RngSpec{c.seed, i}.child(k);
                    auto const m = detail::sandwich_path<Dim>(
                        model, y, z, c.probe_radius, c.probe_radius, n, n,
                        HittingMode::inclusive, spec);
                    auto const b = detail::sandwich_path<Dim>(
                        bm, y, z, c.probe_radius, c.probe_radius, n, n,
                        HittingMode::inclusive, spec);
                    return std::array<double, 2>{m.occ_long, b.occ_long};
                });
                numerics::RunningStats sm, sb, sd;
                for (auto const& o : occ)
                {
                    sm.add(o[0]);
                    sb.add(o[1]);
                    sd.add(o[0] - o[1]);
                }
                GreenRow row;
                row.distance = c.distances[k];
                row.g_model = (sm.mean() + rep.tail_correction) / vol;
                row.g_model_se = sm.stderr_mean() / vol;
                row.g_bm = (sb.mean() + rep.tail_correction) / vol;
                row.g_bm_se = sb.stderr_mean() / vol;
                // mean value property: the ball average of the harmonic G equals its center value
                row.g_closed = green_bm(Dim, c.separation);
                row.diff = sd.mean() / vol;
                row.diff_se = sd.stderr_mean() / vol;
                rep.rows.push_back(row);
            }
            rep.decreasing = true;
            for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
            {
                auto const& p = rep.rows[k];
                auto const& q = rep.rows[k + 1];
                if (std::abs(p.diff) - std::abs(q.diff)
                    <= 2.0 * std::hypot(p.diff_se, q.diff_se))
                    rep.decreasing = false;
            }
            auto const& last = rep.rows.back();
            rep.final_near_zero = std::abs(last.diff) <= 3.0 * last.diff_se;
            rep.far_matches_closed_form
                = std::abs(last.g_model - last.g_closed) <= 3.0 * last.g_model_se;
            return rep;
        }
    });
}

//---------------------------------------------------------------------------//
// Excess over the capacity growth
//---------------------------------------------------------------------------//

struct ExcessConfig
{
    int dim = 6;
    RadialMetricProfile profile = RadialMetricProfile::constant(1.0);
    double eps = 1.0;
    std::vector<double> times{0.0, 2.0, 4.0, 8.0, 16.0};
    std::size_t paths = 200;
    double dt = 0.01;
    double h = 0.25;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct ExcessReport
{
    EnsembleResult ensemble;
    double capacity = 0.0;
    std::vector<double> excess;
    std::vector<double> excess_se;
    bool stabilized = false;  ///< last three values pairwise within 3 sigma
};

inline ExcessReport convergence_excess(ExcessConfig const& c)
{
    require(c.dim >= 6, "dim", "excess convergence needs dim >= 6");
    require(c.times.size() >= 3, "times", "need at least 3 times");
    EnsembleConfig e;
    e.space = SpaceDescriptor::radial(c.dim, c.profile);
    e.eps = c.eps;
    e.times = c.times;
    e.paths = c.paths;
    e.dt = c.dt;
    e.h = c.h;
    e.seed = c.seed;
    e.workers = c.workers;
    ExcessReport rep;
    rep.ensemble = run_ensemble(e);
    rep.ensemble.experiment = "excess";
    rep.capacity = capacity_ball(c.dim, c.eps);
    for (std::size_t i = 0; i < c.times.size(); ++i)
    {
        rep.excess.push_back(rep.ensemble.mean[i] - c.times[i] * rep.capacity);
        rep.excess_se.push_back(rep.ensemble.stderr_mean[i]);
    }
    std::size_t const n = rep.excess.size();
    rep.stabilized = true;
    for (std::size_t i = n - 3; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(rep.excess[i] - rep.excess[j])
                >= 3.0 * std::hypot(rep.excess_se[i], rep.excess_se[j]))
                rep.stabilized = false;
    return rep;
}

//---------------------------------------------------------------------------//
// LIL trace
//---------------------------------------------------------------------------//

struct LilConfig
{
    SpaceDescriptor space = SpaceDescriptor::gasket();
    double eps = 1.0;
    double horizon = 1e6;  ///< steps on the gasket, time otherwise
    std::size_t grid_points = 64;
    double dt = 0.01;
    double h = 0.125;
    std::uint64_t seed = 0;
    FForm form = FForm::integral;
};

struct LilPoint
{
    double t;
    double volume;
    double sup_scaled;  ///< V / (t / f(t / log log t))
    double inf_scaled;  ///< V / min{V(phi^-1(u)), t / f(u)}
};

struct LilTrace
{
    ScalingFunction volume_fn = ScalingFunction::power(1.0);
    ScalingFunction phi = ScalingFunction::power(2.0);
    std::vector<LilPoint> points;
    bool monotone = false;
    bool within_band = false;  ///< every scaled value in [0.05, 20]
    bool tail_band = false;    ///< last two dyadic decades within a factor 10
};

/// Volume and time scaling presets of a space for the LIL normalizers.
inline std::pair<ScalingFunction, ScalingFunction> scaling_presets(SpaceDescriptor const& s)
{
    if (s.is_gasket())
        return {ScalingFunction::power(gasket_alpha()),
                ScalingFunction::power(gasket_beta())};
    return {ScalingFunction::power(s.dim()), ScalingFunction::power(2.0)};
}

inline LilTrace lil_trace(LilConfig const& c)
{
    double const floor_t = std::exp(2.0);
    require(c.horizon >= floor_t, "horizon", "must be at least e^2");
    require(c.grid_points >= 4, "grid_points", "need at least 4 points");
    LilTrace out;
    std::tie(out.volume_fn, out.phi) = scaling_presets(c.space);
    std::vector<double> times;
    double const l0 = std::log(floor_t);
    double const l1 = std::log(c.horizon);
    for (std::size_t k = 0; k < c.grid_points; ++k)
    {
        double t = std::exp(l0 + (l1 - l0) * static_cast<double>(k)
                                     / static_cast<double>(c.grid_points - 1));
        if (c.space.is_gasket())
            t = std::ceil(t - 1e-9);
        else
            t = std::ceil(t / c.dt - 1e-9) * c.dt;
        if (times.empty() || t > times.back())
            times.push_back(t);
    }
    std::vector<double> volumes;
    if (c.space.is_gasket())
    {
        GasketGraph const graph(std::get<GasketSpace>(c.space.variant()).depth);
        volumes = stream_gasket_walk(graph, checkpoint_indices(times, 1.0),
                                     RngSpec{c.seed, 0})
                      .range;
    }
    else
    {
        EnsembleConfig e;
        e.space = c.space;
        e.eps = c.eps;
        e.times = times;
        e.dt = c.dt;
        e.h = c.h;
        e.seed = c.seed;
        e.paths = 2;
        validate(e);
        auto const cps = checkpoint_indices(times, c.dt);
        volumes = dispatch_dim(c.space.dim(), [&](auto dim_tag) {
            constexpr int Dim = decltype(dim_tag)::value;
            auto const density = Density<Dim>::for_space(c.space);
            return detail::with_stepper<Dim>(c.space, c.dt, [&](auto const& st) {
                return stream_sausage<Dim>(st, Point<Dim>{}, cps, c.eps, c.h,
                                           density, RngSpec{c.seed, 0});
            });
        });
    }
    for (std::size_t k = 0; k < times.size(); ++k)
    {
        auto const n = lil_normalizers(out.volume_fn, out.phi, times[k], c.form);
        out.points.push_back({times[k], volumes[k], volumes[k] / n.sup_normalizer,
                              volumes[k] / n.inf_normalizer});
    }
    out.monotone = std::is_sorted(volumes.begin(), volumes.end());
    out.within_band = std::all_of(out.points.begin(), out.points.end(), [](auto const& p) {
        return p.sup_scaled >= 0.05 && p.sup_scaled <= 20.0 && p.inf_scaled >= 0.05
               && p.inf_scaled <= 20.0;
    });
    double lo = INFINITY, hi = 0.0;
    for (auto const& p : out.points)
    {
        if (p.t < c.horizon / 4.0)
            continue;
        lo = std::min({lo, p.sup_scaled, p.inf_scaled});
        hi = std::max({hi, p.sup_scaled, p.inf_scaled});
    }
    out.tail_band = hi > 0.0 && hi <= 10.0 * lo;
    return out;
}

}  // namespace sausage
