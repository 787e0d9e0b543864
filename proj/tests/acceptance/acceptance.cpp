// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: acceptance [C1 ... C11]; no argument runs everything.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sausage/sausage.hpp>

using namespace sausage;

namespace {

constexpr std::uint64_t seed = 42;

unsigned workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

struct Verdict
{
    bool pass = false;
    std::string detail;
};

std::string fmt_num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n)
{
    std::vector<double> out;
    for (int k = 0; k < n; ++k)
        out.push_back(std::round(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1))));
    return out;
}

/// Grid band and step bias of one path at the last time, divided by t.
std::string budget(EnsembleConfig const& c)
{
    double const t = c.times.back();
    SausageEstimate est;
    dispatch_dim(c.space.dim(), [&](auto tag) {
        constexpr int Dim = decltype(tag)::value;
        auto const* profile = c.space.profile();
        auto const path = profile ? sample_radial_path<Dim>(*profile, t, c.dt, RngSpec{c.seed, 0})
                                  : sample_bm_path<Dim>(t, c.dt, RngSpec{c.seed, 0});
        est = sausage_volume<Dim>(path, c.eps, c.h, Density<Dim>::for_space(c.space));
        return 0;
    });
    return "grid_band/t=" + fmt_num(est.grid_band / t) + " step_bias/t=" + fmt_num(est.step_bias / t);
}

EnsembleConfig spitzer3(std::size_t paths)
{
    EnsembleConfig c;
    c.space = SpaceDescriptor::euclidean(3);
    c.eps = 1.0;
    c.times = {10, 20, 40, 80};
    c.paths = paths;
    c.dt = 1e-3;
    c.h = 0.125;
    c.seed = seed;
    c.workers = workers();
    return c;
}

Verdict c1()
{
    auto const c = spitzer3(4000);
    auto const r = run_ensemble(c);
    auto const fit = fit_limit(r, FitModel::inverse_sqrt);
    double const target = capacity_ball(3, 1.0);
    double const rel = std::abs(fit.a - target) / target;
    std::ostringstream os;
    os << "a=" << fmt_num(fit.a) << " +- " << fmt_num(fit.sigma_a()) << " target=" << fmt_num(target)
       << " rel=" << fmt_num(rel) << " tol=0.05 " << budget(c);
    return {rel <= 0.05, os.str()};
}

Verdict c2()
{
    EnsembleConfig c;
    c.space = SpaceDescriptor::euclidean(2);
    c.eps = 1.0;
    c.times = log_spaced(1e2, 1e4, 9);
    c.paths = 1000;
    c.dt = 0.01;
    c.h = 0.125;
    c.seed = seed;
    c.workers = workers();
    auto const r = run_ensemble(c);
    auto const fit = fit_limit(r, FitModel::inverse_log);
    double const target = 2.0 * M_PI;
    double const rel = std::abs(fit.a - target) / target;
    std::ostringstream os;
    os << "a=" << fmt_num(fit.a) << " +- " << fmt_num(fit.sigma_a()) << " target=" << fmt_num(target)
       << " rel=" << fmt_num(rel) << " tol=0.10 " << budget(c);
    return {rel <= 0.10, os.str()};
}

Verdict c3()
{
    EnsembleConfig c;
    c.space = SpaceDescriptor::euclidean(1);
    c.eps = 0.1;
    c.times = {1e4};
    c.paths = 10000;
    c.dt = 0.01;
    c.h = 0.025;
    c.seed = seed;
    c.workers = workers();
    auto const r = run_ensemble(c);
    double const t = c.times[0];
    double const got = r.mean[0] / std::sqrt(t);
    double const oracle = std::sqrt(8.0 / M_PI) + 2.0 * c.eps / std::sqrt(t);
    double const rel = std::abs(got - oracle) / oracle;
    std::ostringstream os;
    os << "mean/sqrt(t)=" << fmt_num(got) << " +- " << fmt_num(r.stderr_mean[0] / std::sqrt(t))
       << " oracle=" << fmt_num(oracle) << " rel=" << fmt_num(rel) << " tol=0.03 (sqrt(2pi)="
       << fmt_num(std::sqrt(2 * M_PI)) << ")";
    return {rel <= 0.03, os.str()};
}

Verdict c4()
{
    FluctuationConfig c;
    c.dim = 3;
    c.paths = 1000;
    c.seed = seed;
    c.workers = workers();
    auto const rep = fluctuation_experiment(c);
    double const rel = std::abs(rep.ratio - rep.claimed_ratio) / rep.claimed_ratio;
    // plateau 2 for comparison
    FluctuationConfig two = c;
    two.shell = RadialMetricProfile({10.0}, 2.0);
    auto const alt = fluctuation_experiment(two);
    std::ostringstream os;
    os << "ratio=" << fmt_num(rep.ratio) << " +- " << fmt_num(rep.ratio_sigma)
       << " claimed=" << fmt_num(rep.claimed_ratio) << " rel=" << fmt_num(rel) << " tol=0.08"
       << " c(A)=" << fmt_num(rep.a.fit.a) << " c(B)=" << fmt_num(rep.b.fit.a)
       << " crossover_toward_B=" << (rep.crossover_toward_b ? "yes" : "no")
       << " | plateau 2: ratio=" << fmt_num(alt.ratio) << " +- " << fmt_num(alt.ratio_sigma);
    return {rel <= 0.08 && rep.crossover_toward_b, os.str()};
}

Verdict c5()
{
    // the plateau adds a bounded volume offset, an O(1/t) term in mean/t the
    // two-parameter model cannot absorb, so the window starts later
    auto plain = spitzer3(2000);
    plain.times = {40, 80, 160, 320};
    plain.dt = 4e-3;
    plain.h = 0.25;
    auto modified = plain;
    modified.space = SpaceDescriptor::radial(3, RadialMetricProfile({2.0}, 4.0, true));
    auto const rp = run_ensemble(plain);
    auto const rm = run_ensemble(modified);
    auto const fp = fit_limit(rp, FitModel::inverse_sqrt);
    auto const fm = fit_limit(rm, FitModel::inverse_sqrt);
    double const t_last = plain.times.back();
    double const sigma = std::hypot(fp.sigma_a(), fm.sigma_a());
    double const gap = std::abs(fm.a - fp.a);
    std::ostringstream os;
    os << "a(unmodified)=" << fmt_num(fp.a) << " +- " << fmt_num(fp.sigma_a()) << " a(modified)=" << fmt_num(fm.a)
       << " +- " << fmt_num(fm.sigma_a()) << " gap=" << fmt_num(gap) << " 3sigma=" << fmt_num(3 * sigma)
       << " capacity=" << fmt_num(capacity_ball(3, 1.0)) << " mean/t at t=" << t_last << ": "
       << fmt_num(rp.mean.back() / t_last) << " vs " << fmt_num(rm.mean.back() / t_last);
    return {gap <= 3 * sigma, os.str()};
}

Verdict c6()
{
    GreenConfig c;
    c.seed = seed;
    c.workers = workers();
    auto const rep = green_comparison(c);
    std::ostringstream os;
    for (auto const& row : rep.rows)
        os << "|y|=" << row.distance << ": diff=" << fmt_num(row.diff) << " +- " << fmt_num(row.diff_se)
           << " G_M=" << fmt_num(row.g_model) << " G_BM=" << fmt_num(row.g_bm) << "; ";
    os << "decreasing=" << (rep.decreasing ? "yes" : "no")
       << " final_near_zero=" << (rep.final_near_zero ? "yes" : "no");
    return {rep.decreasing && rep.final_near_zero, os.str()};
}

Verdict c7()
{
    std::vector<double> steps;
    for (int k = 10; k <= 20; ++k)
        steps.push_back(std::ldexp(1.0, k));
    auto const stats = gasket_statistics(40, steps, 200, seed, workers());
    auto const fit = fit_limit(stats.range, FitModel::power_law);
    double const target = std::log(3.0) / std::log(5.0);
    LilConfig lc;
    lc.seed = seed;
    auto const lil = lil_trace(lc);
    std::ostringstream os;
    os << "exponent=" << fmt_num(fit.b) << " +- " << fmt_num(fit.sigma_b()) << " target=" << fmt_num(target)
       << " tol=0.03 lil_tail_band=" << (lil.tail_band ? "yes" : "no");
    return {std::abs(fit.b - target) <= 0.03 && lil.tail_band, os.str()};
}

Verdict c8()
{
    bool all = true;
    std::ostringstream os;
    for (int dim : {2, 3})
        for (double a : {0.25, 0.5})
            for (double sep : {1.5, 3.0})
            {
                SandwichConfig c;
                c.space = SpaceDescriptor::euclidean(dim);
                c.x.assign(dim, 0.0);
                c.y.assign(dim, 0.0);
                c.y[0] = sep * c.eps;
                c.a = a;
                c.seed = seed;
                c.workers = workers();
                auto const rep = verify_sandwich(c);
                all = all && rep.holds(2.0);
                os << "[d=" << dim << " a=" << a << " r=" << sep << " upper " << fmt_num(rep.upper_margin)
                   << "/" << fmt_num(rep.upper_sigma) << " lower " << fmt_num(rep.lower_margin) << "/"
                   << fmt_num(rep.lower_sigma) << (rep.holds(2.0) ? "" : " VIOLATED") << "] ";
            }
    return {all, os.str()};
}

/// int_0^inf p_t(r) dt by log-grid trapezoid with an analytic tail.
double green_oracle(int d, double r)
{
    double const la = std::log(1e-6), lb = std::log(1e4);
    int const n = 400000;
    double const step = (lb - la) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i)
    {
        double const t = std::exp(la + i * step);
        double const w = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += w * std::pow(2 * M_PI * t, -0.5 * d) * std::exp(-r * r / (2 * t)) * t;
    }
    double const tail = std::pow(2 * M_PI, -0.5 * d) * std::pow(1e4, 1.0 - 0.5 * d) / (0.5 * d - 1.0);
    return sum * step + tail;
}

Verdict c9()
{
    double worst = 0.0;
    auto track = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    };
    for (double beta : {1.5, 2.0, 2.3219, 3.0})
        for (double r : {0.5, 1.0, 4.0})
            for (double t : {0.3, 1.0, 5.0})
            {
                auto const phi = ScalingFunction::power(beta, 1.3);
                track(psi(phi, r, t), psi_numeric(phi, r, t));
            }
    double worst_f = 0.0;
    for (double alpha : {1.0, 1.585, 2.0, 3.0})
        for (double beta : {2.0, 2.3219})
            for (double t : {2.0, 50.0, 1e5})
            {
                auto const v = ScalingFunction::power(alpha, 1.7);
                auto const phi = ScalingFunction::power(beta, 0.6);
                double const a = f_integral(v, phi, t);
                worst_f = std::max(worst_f, std::abs(a - f_integral_quadrature(v, phi, t)) / a);
            }
    double worst_g = 0.0, worst_cap = 0.0;
    for (int d = 3; d <= 6; ++d)
        for (double r : {0.5, 1.0, 2.0})
        {
            double const g = green_bm(d, r);
            worst_g = std::max(worst_g, std::abs(g - green_oracle(d, r)) / g);
            worst_cap = std::max(worst_cap, std::abs(capacity_ball(d, r) * g - 1.0));
        }
    bool consistent = true;
    for (double alpha : {1.0, 1.585, 2.0, 2.5, 3.0, 4.0})
        for (double beta : {2.0, 2.3219, 3.0})
        {
            auto const rc = classify_regime(alpha, beta);
            auto const lim = radial_limit(ScalingFunction::power(alpha), ScalingFunction::power(beta));
            consistent = consistent
                         && ((rc.regime == Regime::strongly_recurrent) == (lim == SmallRadiusLimit::positive));
        }
    RadialMetricProfile const p({1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-5, 5);
    int pairs = 0, bad = 0;
    while (pairs < 100)
    {
        Point<2> x{u(gen), u(gen)}, y{u(gen), u(gen)};
        double const sep = std::sqrt(dist_sq<2>(x, y));
        if (sep < 0.5)
            continue;
        ++pairs;
        double const mesh = sep / 24.0;
        double const d = riemannian_distance_bound<2>(p, x, y, mesh);
        // sqrt G lies in [1, 2]; slack for the mesh
        if (d < sep - 2.0 * mesh || d > 2.0 * sep * 1.1)
            ++bad;
    }
    std::ostringstream os;
    os << "psi=" << fmt_num(worst) << " f=" << fmt_num(worst_f) << " green=" << fmt_num(worst_g)
       << " cap*green-1=" << fmt_num(worst_cap) << " tol=1e-05 regime/limit=" << (consistent ? "ok" : "mismatch")
       << " distance bound violations=" << bad << "/100";
    bool const pass = worst <= 1e-5 && worst_f <= 1e-5 && worst_g <= 1e-5 && worst_cap <= 1e-12 && consistent
                      && bad == 0;
    return {pass, os.str()};
}

Verdict c10()
{
    ExcessConfig c;
    c.times = {0, 2, 4, 8, 16, 32};
    c.paths = 200;
    c.seed = seed;
    c.workers = workers();
    auto const rep = convergence_excess(c);
    std::ostringstream os;
    os << "excess:";
    for (std::size_t i = 0; i < rep.excess.size(); ++i)
        os << " t=" << c.times[i] << ":" << fmt_num(rep.excess[i]) << "+-" << fmt_num(rep.excess_se[i]);
    os << " stabilized=" << (rep.stabilized ? "yes" : "no");
    return {rep.stabilized, os.str()};
}

template<class T>
bool same_bits(std::vector<T> const& a, std::vector<T> const& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

Verdict c11()
{
    std::vector<std::string> broken;
    auto check = [&](std::string const& name, auto const& run) {
        auto const first = run(1u);
        auto const again = run(1u);
        auto const spread = run(3u);
        if (!same_bits(first, again) || !same_bits(first, spread))
            broken.push_back(name);
    };
    auto concat = [](EnsembleResult const& r) {
        auto v = r.mean;
        v.insert(v.end(), r.stderr_mean.begin(), r.stderr_mean.end());
        return v;
    };
    check("ensemble", [&](unsigned w) {
        EnsembleConfig c;
        c.space = SpaceDescriptor::radial(3, RadialMetricProfile({2.0, 3.0}));
        c.times = {1, 2, 3};
        c.paths = 24;
        c.dt = 0.01;
        c.seed = seed;
        c.workers = w;
        return concat(run_ensemble(c));
    });
    check("gasket", [&](unsigned w) {
        auto const s = gasket_statistics(40, {100, 1000}, 24, seed, w);
        auto v = concat(s.range);
        auto const m = concat(s.max_visits);
        v.insert(v.end(), m.begin(), m.end());
        return v;
    });
    check("sandwich", [&](unsigned w) {
        SandwichConfig c;
        c.y = {2.0, 0.0, 0.0};
        c.paths = 200;
        c.sphere_points = 8;
        c.seed = seed;
        c.workers = w;
        auto const r = verify_sandwich(c);
        return std::vector<double>{r.upper_margin, r.upper_sigma, r.lower_margin, r.lower_sigma, r.hit_probability};
    });
    check("green", [&](unsigned w) {
        GreenConfig c;
        c.paths = 100;
        c.horizon = 10;
        c.seed = seed;
        c.workers = w;
        std::vector<double> v;
        for (auto const& row : green_comparison(c).rows)
            v.insert(v.end(), {row.g_model, row.g_bm, row.diff, row.diff_se});
        return v;
    });
    check("excess", [&](unsigned w) {
        ExcessConfig c;
        c.times = {0, 1, 2};
        c.paths = 4;
        c.seed = seed;
        c.workers = w;
        auto const r = convergence_excess(c);
        auto v = r.excess;
        v.insert(v.end(), r.excess_se.begin(), r.excess_se.end());
        return v;
    });
    check("fluctuation", [&](unsigned w) {
        FluctuationConfig c;
        c.times = {1, 2, 3, 4};
        c.paths = 8;
        c.dt = 0.01;
        c.shell = RadialMetricProfile({2.0});
        c.seed = seed;
        c.workers = w;
        auto const r = fluctuation_experiment(c);
        return std::vector<double>{r.ratio, r.ratio_sigma, r.a.fit.a, r.b.fit.a, r.shell.fit.a};
    });
    check("lil", [&](unsigned) {
        LilConfig c;
        c.horizon = 1e4;
        c.seed = seed;
        std::vector<double> v;
        for (auto const& p : lil_trace(c).points)
            v.insert(v.end(), {p.volume, p.sup_scaled, p.inf_scaled});
        return v;
    });
    std::string detail = "ensemble, gasket, sandwich, green, excess, fluctuation, lil rerun with 1 and 3 workers";
    for (auto const& b : broken)
        detail += "; differs: " + b;
    return {broken.empty(), detail};
}

}  // namespace

int main(int argc, char** argv)
{
    std::map<std::string, std::function<Verdict()>> const criteria{
        {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4},  {"C5", c5},  {"C6", c6},
        {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10}, {"C11", c11},
    };
    std::vector<std::string> selected(argv + 1, argv + argc);
    if (selected.empty())
        for (int k = 1; k <= 11; ++k)
            selected.push_back("C" + std::to_string(k));
    int failures = 0;
    for (auto const& name : selected)
    {
        auto const it = criteria.find(name);
        if (it == criteria.end())
        {
            std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
            return 2;
        }
        Verdict v;
        try
        {
            v = it->second();
        }
        catch (std::exception const& e)
        {
            v = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %s %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
