#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <sausage/io.hpp>
#include <sausage/sausage.hpp>

namespace fs = std::filesystem;
using namespace sausage;
using io::json;

namespace {

char const* describe(std::string_view command)
{
    if (command == "constants")
        return "Print capacity, Green value and scaled ratio as CSV";
    if (command == "simulate")
        return "Ensemble of sausage volumes on a time grid";
    if (command == "fit")
        return "Extrapolate the limit of ensemble records";
    if (command == "verify-sandwich")
        return "Monte Carlo check of the hitting-time sandwich inequalities";
    if (command == "fluctuation")
        return "Per-time constants of G=1, G=high and a shell profile";
    if (command == "lil")
        return "Single long path scaled by the LIL normalizers";
    if (command == "green-compare")
        return "Green function of a bounded modification against Brownian motion";
    if (command == "excess")
        return "Excess of the mean volume over t times the capacity (dim >= 6)";
    return "Plot ensemble records as an SVG chart";
}

std::string option_help(FlagSpec const& f)
{
    return std::string(f.help) + " [" + std::string(f.unit) + "] (default: "
           + std::string(f.default_text) + ")";
}

struct Outputs
{
    fs::path dir;
    std::string stem;

    [[nodiscard]] std::string path(char const* ext) const
    {
        return (dir / (stem + ext)).string();
    }
};

Outputs prepare(RunConfig const& c)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec)
        throw std::runtime_error("cannot create '" + c.out + "': " + ec.message());
    return {c.out, c.command};
}

void write_ensembles(Outputs const& out, std::vector<EnsembleResult> const& runs,
                     std::string const& digest, std::vector<json> const& extra,
                     std::string const& title)
{
    std::vector<io::Record> records;
    for (auto const& r : runs)
    {
        auto rec = io::to_records(r, digest);
        records.insert(records.end(), rec.begin(), rec.end());
    }
    std::string body = io::jsonl(records);
    for (auto const& j : extra)
        body += j.dump() + "\n";
    io::write_file(out.path(".jsonl"), body);
    io::write_file(out.path(".csv"), io::csv(records));
    io::write_file(out.path(".svg"), io::svg(io::rate_chart(runs, title)));
}

void print_ensemble(EnsembleResult const& r)
{
    std::printf("%-14s %-18s %-14s %s\n", "t", "mean", "stderr", "mean/t");
    for (std::size_t i = 0; i < r.times.size(); ++i)
        std::printf("%-14.6g %-18.10g %-14.6g %.8g\n", r.times[i], r.mean[i],
                    r.stderr_mean[i], r.times[i] > 0 ? r.mean[i] / r.times[i] : 0.0);
}

template<int Dim>
void dump_path_csv(std::string const& file, SampledPath<Dim> const& p)
{
    std::ostringstream os;
    os.precision(17);
    os << "t";
    for (int k = 0; k < Dim; ++k)
        os << ",x" << k + 1;
    os << "\n";
    for (std::size_t i = 0; i < p.points.size(); ++i)
    {
        os << static_cast<double>(i) * p.step;
        for (double v : p.points[i])
            os << "," << v;
        os << "\n";
    }
    io::write_file(file, os.str());
}

void dump_paths(RunConfig const& c, Outputs const& out)
{
    auto const space = c.space_descriptor();
    double const horizon = c.times.back();
    for (std::size_t i = 0; i < c.dump_paths; ++i)
    {
        std::string const file = (out.dir / ("path_" + std::to_string(i) + ".csv")).string();
        RngSpec const spec{c.seed, i};
        if (space.is_gasket())
        {
            GasketGraph const graph(c.depth);
            auto const walk = sample_gasket_walk(
                graph, static_cast<std::size_t>(std::max(1.0, horizon)), spec);
            std::ostringstream os;
            os.precision(17);
            os << "t,x1,x2\n";
            for (std::size_t k = 0; k < walk.vertices.size(); ++k)
                os << k << "," << walk.vertices[k].x() << "," << walk.vertices[k].y() << "\n";
            io::write_file(file, os.str());
            continue;
        }
        dispatch_dim(c.dim, [&](auto tag) {
            constexpr int Dim = decltype(tag)::value;
            if (auto const* profile = space.profile())
            {
                if constexpr (Dim >= 2)
                    dump_path_csv<Dim>(file, sample_radial_path<Dim>(*profile, horizon,
                                                                     c.resolved_dt(), spec));
            }
            else
            {
                dump_path_csv<Dim>(file, sample_bm_path<Dim>(horizon, c.resolved_dt(), spec));
            }
        });
    }
}

int run_constants(RunConfig const& c, bool dim_given)
{
    auto const out = prepare(c);
    std::string text = "dim,eps,capacity,green,scaled_ratio\n";
    int const lo = dim_given ? c.dim : 3;
    int const hi = dim_given ? c.dim : 6;
    for (int d = lo; d <= hi; ++d)
        text += std::to_string(d) + "," + io::fmt(c.eps) + "," + io::fmt(capacity_ball(d, c.eps))
                + "," + io::fmt(green_bm(d, c.eps)) + "," + io::fmt(scaled_limit_ratio(d)) + "\n";
    std::fputs(text.c_str(), stdout);
    io::write_file(out.path(".csv"), text);
    return 0;
}

int run_simulate(RunConfig const& c)
{
    auto const out = prepare(c);
    EnsembleConfig e;
    e.space = c.space_descriptor();
    e.eps = c.eps;
    e.times = c.times;
    e.paths = c.paths;
    e.dt = c.resolved_dt();
    e.h = c.resolved_h();
    e.seed = c.seed;
    e.workers = resolve_workers(c.workers);
    auto const r = run_ensemble(e);
    write_ensembles(out, {r}, io::digest(c.canonical()), {}, "Sausage growth rate");
    if (c.dump_paths > 0)
        dump_paths(c, out);
    print_ensemble(r);
    return 0;
}

int run_fit(RunConfig const& c)
{
    auto const model = parse_fit_model(c.model);
    auto const runs = io::to_results(io::read_jsonl(c.input));
    require(!runs.empty(), "input", "contains no ensemble records");
    std::string appended;
    for (auto const& r : runs)
    {
        auto const f = fit_limit(r, model);
        std::printf("%s %s d=%d: a=%.10g +- %.3g, b=%.6g, residual=%.3g\n",
                    r.experiment.c_str(), r.space.c_str(), r.dim, f.a, f.sigma_a(), f.b,
                    f.residual_norm);
        appended += io::to_json(f, r.experiment + ":" + r.space).dump() + "\n";
    }
    io::write_file(c.input, appended, true);
    return 0;
}

int run_sandwich(RunConfig const& c)
{
    auto const out = prepare(c);
    SandwichConfig s;
    s.space = c.space == "euclid" && !c.breakpoints.empty()
                  ? SpaceDescriptor::radial(c.dim, c.profile())
                  : (c.space == "radial" ? SpaceDescriptor::radial(c.dim, c.profile())
                                         : SpaceDescriptor::euclidean(c.dim));
    s.x = c.x;
    s.y = c.y;
    if (s.y.empty())
    {
        s.y.assign(static_cast<std::size_t>(c.dim), 0.0);
        s.y[0] = 2.0 * c.eps;
    }
    s.eps = c.eps;
    s.a = c.a;
    s.t = c.t;
    s.T = c.T;
    s.paths = c.paths;
    s.dt = c.resolved_dt();
    s.seed = c.seed;
    s.workers = resolve_workers(c.workers);
    s.sphere_points = c.sphere_points;
    s.mode = c.strict_hitting ? HittingMode::strict : HittingMode::inclusive;
    auto const r = verify_sandwich(s);
    json j{{"record", "sandwich"},
           {"config", io::digest(c.canonical())},
           {"hit_probability", r.hit_probability},
           {"hit_stderr", r.hit_stderr},
           {"upper_lhs", r.upper_lhs},
           {"upper_rhs", r.upper_rhs},
           {"upper_margin", r.upper_margin},
           {"upper_sigma", r.upper_sigma},
           {"upper_label", r.upper_label},
           {"lower_lhs", r.lower_lhs},
           {"lower_rhs", r.lower_rhs},
           {"lower_margin", r.lower_margin},
           {"lower_sigma", r.lower_sigma},
           {"lower_label", r.lower_label},
           {"sphere_points", r.sphere_points},
           {"step_bias", r.step_bias},
           {"holds", r.holds()}};
    io::write_file(out.path(".jsonl"), j.dump() + "\n");
    io::write_file(out.path(".csv"),
                   "inequality,lhs,rhs,margin,sigma,label\nupper," + io::fmt(r.upper_lhs) + ","
                       + io::fmt(r.upper_rhs) + "," + io::fmt(r.upper_margin) + ","
                       + io::fmt(r.upper_sigma) + "," + r.upper_label + "\nlower,"
                       + io::fmt(r.lower_lhs) + "," + io::fmt(r.lower_rhs) + ","
                       + io::fmt(r.lower_margin) + "," + io::fmt(r.lower_sigma) + ","
                       + r.lower_label + "\n");
    io::Chart chart{"Sandwich margins", "inequality [1 = upper, 2 = lower]",
                    "margin [time units]", false, false, {}};
    chart.series.push_back({"margin", {1.0, 2.0}, {r.upper_margin, r.lower_margin},
                            {2 * r.upper_sigma, 2 * r.lower_sigma}});
    io::write_file(out.path(".svg"), io::svg(chart));
    std::printf("P(T<=t) = %.6g +- %.3g\n", r.hit_probability, r.hit_stderr);
    std::printf("upper: margin %.6g sigma %.3g (%s)\n", r.upper_margin, r.upper_sigma,
                r.upper_label.c_str());
    std::printf("lower: margin %.6g sigma %.3g (%s)\n", r.lower_margin, r.lower_sigma,
                r.lower_label.c_str());
    std::printf("%s\n", r.holds() ? "both margins >= -2 sigma" : "margin below -2 sigma");
    return 0;
}

int run_fluctuation(RunConfig const& c)
{
    auto const out = prepare(c);
    FluctuationConfig f;
    f.dim = c.dim;
    f.shell = c.breakpoints.empty()
                  ? RadialMetricProfile({10.0}, c.plateau_high, c.starts_high)
                  : c.profile();
    f.eps = c.eps;
    f.times = c.times;
    f.paths = c.paths;
    f.dt = c.resolved_dt();
    f.h = c.resolved_h();
    f.seed = c.seed;
    f.workers = resolve_workers(c.workers);
    auto const r = fluctuation_experiment(f);
    std::vector<json> extra;
    for (auto const* curve : {&r.a, &r.b, &r.shell})
        extra.push_back(io::to_json(curve->fit, curve->result.experiment));
    extra.push_back(json{{"record", "fluctuation"},
                         {"ratio", r.ratio},
                         {"ratio_sigma", r.ratio_sigma},
                         {"claimed_ratio", r.claimed_ratio},
                         {"shell_over_a", r.shell_over_a},
                         {"crossover_toward_b", r.crossover_toward_b}});
    write_ensembles(out, {r.a.result, r.b.result, r.shell.result}, io::digest(c.canonical()),
                    extra, "Per-time sausage constants");
    std::printf("c(A) = %.6g +- %.3g\nc(B) = %.6g +- %.3g\n", r.a.fit.a, r.a.fit.sigma_a(),
                r.b.fit.a, r.b.fit.sigma_a());
    std::printf("ratio %.6g +- %.3g (2^((d-2)/2) = %.6g)\n", r.ratio, r.ratio_sigma,
                r.claimed_ratio);
    std::printf("shell/A:");
    for (double v : r.shell_over_a)
        std::printf(" %.4f", v);
    std::printf("\ncrossover toward B: %s\n", r.crossover_toward_b ? "yes" : "no");
    return 0;
}

int run_lil(RunConfig const& c)
{
    auto const out = prepare(c);
    LilConfig l;
    l.space = c.space_descriptor();
    l.eps = c.eps;
    l.horizon = c.resolved_horizon();
    l.grid_points = c.grid_points;
    l.dt = c.resolved_dt();
    l.h = c.resolved_h();
    l.seed = c.seed;
    l.form = c.f_form == "canonical" ? FForm::canonical : FForm::integral;
    auto const tr = lil_trace(l);
    std::string body;
    std::string text = "t,volume,sup_scaled,inf_scaled\n";
    io::Series sup{"V / sup normalizer", {}, {}, {}};
    io::Series inf{"V / inf normalizer", {}, {}, {}};
    for (auto const& p : tr.points)
    {
        body += json{{"record", "lil"}, {"config", io::digest(c.canonical())}, {"t", p.t},
                     {"volume", p.volume}, {"sup_scaled", p.sup_scaled},
                     {"inf_scaled", p.inf_scaled}}
                    .dump()
                + "\n";
        text += io::fmt(p.t) + "," + io::fmt(p.volume) + "," + io::fmt(p.sup_scaled) + ","
                + io::fmt(p.inf_scaled) + "\n";
        sup.x.push_back(p.t);
        sup.y.push_back(p.sup_scaled);
        inf.x.push_back(p.t);
        inf.y.push_back(p.inf_scaled);
    }
    io::write_file(out.path(".jsonl"), body);
    io::write_file(out.path(".csv"), text);
    io::write_file(out.path(".svg"),
                   io::svg({"Scaled sausage volume", "t [time units; steps on the gasket]",
                            "scaled volume [dimensionless]", true, true, {sup, inf}}));
    std::printf("monotone %s, band [0.05, 20] %s, tail factor-10 band %s\n",
                tr.monotone ? "yes" : "no", tr.within_band ? "yes" : "no",
                tr.tail_band ? "yes" : "no");
    return 0;
}

int run_green(RunConfig const& c)
{
    auto const out = prepare(c);
    GreenConfig g;
    g.dim = c.dim;
    g.profile = c.breakpoints.empty() ? RadialMetricProfile({2.0}, c.plateau_high, true)
                                      : c.profile();
    g.distances = c.distances;
    g.separation = c.separation;
    g.probe_radius = c.probe_radius;
    g.horizon = c.resolved_horizon();
    g.paths = c.paths;
    g.dt = c.dt.value_or(0.01);
    g.seed = c.seed;
    g.workers = resolve_workers(c.workers);
    auto const rep = green_comparison(g);
    std::string body;
    std::string text = "distance,g_model,g_model_se,g_bm,g_bm_se,g_closed,diff,diff_se\n";
    io::Series diff{"|G_M - G_BM|", {}, {}, {}};
    for (auto const& r : rep.rows)
    {
        body += json{{"record", "green"}, {"config", io::digest(c.canonical())},
                     {"distance", r.distance}, {"g_model", r.g_model},
                     {"g_model_se", r.g_model_se}, {"g_bm", r.g_bm}, {"g_bm_se", r.g_bm_se},
                     {"g_closed", r.g_closed}, {"diff", r.diff}, {"diff_se", r.diff_se}}
                    .dump()
                + "\n";
        text += io::fmt(r.distance) + "," + io::fmt(r.g_model) + "," + io::fmt(r.g_model_se)
                + "," + io::fmt(r.g_bm) + "," + io::fmt(r.g_bm_se) + "," + io::fmt(r.g_closed)
                + "," + io::fmt(r.diff) + "," + io::fmt(r.diff_se) + "\n";
        diff.x.push_back(r.distance);
        diff.y.push_back(std::abs(r.diff));
        diff.err.push_back(r.diff_se);
        std::printf("|y|=%-6g G_M=%.6g G_BM=%.6g closed=%.6g diff=%.3g +- %.3g\n", r.distance,
                    r.g_model, r.g_bm, r.g_closed, r.diff, r.diff_se);
    }
    io::write_file(out.path(".jsonl"), body);
    io::write_file(out.path(".csv"), text);
    io::write_file(out.path(".svg"),
                   io::svg({"Green function difference", "|y| [length]",
                            "|G_M - G_BM| [time per volume]", false, false, {diff}}));
    std::printf("decreasing %s, final near zero %s\n", rep.decreasing ? "yes" : "no",
                rep.final_near_zero ? "yes" : "no");
    return 0;
}

int run_excess(RunConfig const& c)
{
    auto const out = prepare(c);
    ExcessConfig e;
    e.dim = c.dim;
    e.profile = c.breakpoints.empty() ? RadialMetricProfile::constant(1.0) : c.profile();
    e.eps = c.eps;
    e.times = c.times;
    e.paths = c.paths;
    e.dt = c.resolved_dt();
    e.h = c.resolved_h();
    e.seed = c.seed;
    e.workers = resolve_workers(c.workers);
    auto const rep = convergence_excess(e);
    std::vector<json> extra;
    io::Series s{"excess", {}, {}, {}};
    for (std::size_t i = 0; i < rep.excess.size(); ++i)
    {
        extra.push_back(json{{"record", "excess"}, {"t", e.times[i]},
                             {"excess", rep.excess[i]}, {"stderr", rep.excess_se[i]}});
        s.x.push_back(e.times[i]);
        s.y.push_back(rep.excess[i]);
        s.err.push_back(rep.excess_se[i]);
        std::printf("t=%-8g excess %.6g +- %.3g\n", e.times[i], rep.excess[i], rep.excess_se[i]);
    }
    write_ensembles(out, {rep.ensemble}, io::digest(c.canonical()), extra, "Sausage growth rate");
    io::write_file((out.dir / "excess_series.svg").string(),
                   io::svg({"Excess over capacity growth", "t [time units]",
                            "mean V - t Cap [volume]", false, false, {s}}));
    std::printf("stabilized %s\n", rep.stabilized ? "yes" : "no");
    return 0;
}

int run_plot(RunConfig const& c)
{
    auto const out = prepare(c);
    auto const runs = io::to_results(io::read_jsonl(c.input));
    require(!runs.empty(), "input", "contains no ensemble records");
    io::write_file(out.path(".svg"), io::svg(io::rate_chart(runs, "Sausage growth rate")));
    std::printf("wrote %s\n", out.path(".svg").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sausagelab: Wiener sausage simulation laboratory"};
    app.require_subcommand(1);
    // "-h" would collide with the cell size option --h
    app.set_help_flag("--help", "Print this help message and exit");
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> switches;
    std::map<std::string, CLI::App*> subs;
    for (auto const cmd_view : commands)
    {
        std::string const cmd(cmd_view);
        auto* sub = app.add_subcommand(cmd, describe(cmd));
        subs[cmd] = sub;
        sub->set_help_flag("--help", "Print this help message and exit");
        for (auto const& f : flag_table)
        {
            if (!f.applies_to(cmd))
                continue;
            std::string const name = "--" + std::string(f.name);
            if (f.is_switch)
                sub->add_flag(name, switches[cmd][std::string(f.name)], option_help(f));
            else
                sub->add_option(name, values[cmd][std::string(f.name)], option_help(f));
        }
    }
    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string command;
    for (auto const& [name, sub] : subs)
        if (sub->parsed())
            command = name;

    try
    {
        auto* sub = subs.at(command);
        RawConfig raw;
        if (sub->count("--config") > 0)
            raw = read_config_file(values[command]["config"], command);
        for (auto const& f : flag_table)
        {
            if (!f.applies_to(command) || f.name == "config")
                continue;
            std::string const key(f.name);
            if (sub->count("--" + key) == 0)
                continue;
            raw[key] = f.is_switch ? (switches[command][key] ? "true" : "false")
                                   : values[command][key];
        }
        RunConfig const cfg = build_config(command, raw);
        if (command == "constants")
            return run_constants(cfg, raw.count("dim") > 0);
        if (command == "simulate")
            return run_simulate(cfg);
        if (command == "fit")
            return run_fit(cfg);
        if (command == "verify-sandwich")
            return run_sandwich(cfg);
        if (command == "fluctuation")
            return run_fluctuation(cfg);
        if (command == "lil")
            return run_lil(cfg);
        if (command == "green-compare")
            return run_green(cfg);
        if (command == "excess")
            return run_excess(cfg);
        return run_plot(cfg);
    }
    catch (PreconditionError const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
