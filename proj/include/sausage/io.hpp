#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "fit.hpp"

namespace sausage::io {

using nlohmann::json;

/// FNV-1a digest of a canonical config text, as 16 hex digits.
inline std::string digest(std::string const& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// One JSONL line per (experiment, time point).
struct Record
{
    std::string experiment;
    std::string space;
    int dim = 0;
    double eps = 0.0;
    double t = 0.0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t n = 0;
    double dt = 0.0;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::string config;  ///< digest of the run configuration
    double wall_clock_s = 0.0;
};

inline json to_json(Record const& r)
{
    return json{{"experiment", r.experiment}, {"space", r.space}, {"dim", r.dim},
                {"eps", r.eps},   {"t", r.t},         {"mean", r.mean},
                {"stderr", r.stderr_mean},            {"n", r.n},
                {"dt", r.dt},     {"h", r.h},         {"seed", r.seed},
                {"config", r.config},                 {"wall_clock_s", r.wall_clock_s}};
}

inline Record record_from_json(json const& j)
{
    Record r;
    try
    {
        j.at("experiment").get_to(r.experiment);
        j.at("space").get_to(r.space);
        j.at("dim").get_to(r.dim);
        j.at("eps").get_to(r.eps);
        j.at("t").get_to(r.t);
        j.at("mean").get_to(r.mean);
        j.at("stderr").get_to(r.stderr_mean);
        j.at("n").get_to(r.n);
        j.at("dt").get_to(r.dt);
        j.at("h").get_to(r.h);
        j.at("seed").get_to(r.seed);
        j.at("config").get_to(r.config);
        j.at("wall_clock_s").get_to(r.wall_clock_s);
    }
    catch (json::exception const& e)
    {
        throw PreconditionError("input", std::string("malformed record: ") + e.what());
    }
    return r;
}

inline std::vector<Record> to_records(EnsembleResult const& r, std::string const& config)
{
    std::vector<Record> out;
    for (std::size_t i = 0; i < r.times.size(); ++i)
        out.push_back({r.experiment, r.space, r.dim, r.eps, r.times[i], r.mean[i],
                       r.stderr_mean[i], r.paths, r.dt, r.h, r.seed, config,
                       r.wall_clock});
    return out;
}

/// Groups consecutive records of one run back into ensemble results.
inline std::vector<EnsembleResult> to_results(std::vector<Record> const& records)
{
    std::vector<EnsembleResult> out;
    auto same_run = [](EnsembleResult const& e, Record const& r) {
        return e.experiment == r.experiment && e.space == r.space && e.dim == r.dim
               && e.eps == r.eps && e.paths == r.n && e.dt == r.dt && e.h == r.h
               && e.seed == r.seed && !e.times.empty() && r.t > e.times.back();
    };
    for (auto const& r : records)
    {
        if (out.empty() || !same_run(out.back(), r))
        {
            EnsembleResult e;
            e.experiment = r.experiment;
            e.space = r.space;
            e.dim = r.dim;
            e.eps = r.eps;
            e.paths = r.n;
            e.dt = r.dt;
            e.h = r.h;
            e.seed = r.seed;
            e.wall_clock = r.wall_clock_s;
            out.push_back(std::move(e));
        }
        out.back().times.push_back(r.t);
        out.back().mean.push_back(r.mean);
        out.back().stderr_mean.push_back(r.stderr_mean);
    }
    return out;
}

inline json to_json(FitResult const& f, std::string const& source)
{
    return json{{"record", "fit"},
                {"source", source},
                {"model", std::string(to_string(f.model))},
                {"a", f.a},
                {"b", f.b},
                {"residual_norm", f.residual_norm},
                {"cov_aa", f.cov_aa},
                {"cov_ab", f.cov_ab},
                {"cov_bb", f.cov_bb}};
}

inline std::string jsonl(std::vector<Record> const& records)
{
    std::string out;
    for (auto const& r : records)
        out += to_json(r).dump() + "\n";
    return out;
}

/// Reads ensemble records; lines carrying a "record" tag (fits, reports) are skipped.
inline std::vector<Record> read_jsonl(std::string const& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "input", "cannot open '" + path + "'");
    std::vector<Record> out;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j;
        try
        {
            j = json::parse(line);
        }
        catch (json::parse_error const& e)
        {
            throw PreconditionError("input", std::string("invalid JSON: ") + e.what());
        }
        if (j.contains("record"))
            continue;
        out.push_back(record_from_json(j));
    }
    return out;
}

/// Shortest decimal form that parses back to the same double.
inline std::string fmt(double v)
{
    return json(v).dump();
}

inline std::string csv(std::vector<Record> const& records)
{
    std::string out = "experiment,space,dim,eps,t,mean,stderr,n,dt,h,seed,config,wall_clock_s\n";
    for (auto const& r : records)
    {
        out += r.experiment + "," + r.space + "," + std::to_string(r.dim) + ","
               + fmt(r.eps) + "," + fmt(r.t) + "," + fmt(r.mean) + ","
               + fmt(r.stderr_mean) + "," + std::to_string(r.n) + "," + fmt(r.dt)
               + "," + fmt(r.h) + "," + std::to_string(r.seed) + "," + r.config
               + "," + fmt(r.wall_clock_s) + "\n";
    }
    return out;
}

inline void write_file(std::string const& path, std::string const& content,
                       bool append = false)
{
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

//---------------------------------------------------------------------------//
// SVG line charts
//---------------------------------------------------------------------------//

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  ///< optional error bars
};

struct Chart
{
    std::string title;
    std::string x_label;  ///< include units
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

namespace detail {

inline std::string escape(std::string const& s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

inline std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

}  // namespace detail

inline std::string svg(Chart const& chart)
{
    double const width = 640, height = 420, left = 80, right = 20, top = 40, bottom = 60;
    auto tx = [&](double v) { return chart.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (auto const& s : chart.series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
        {
            if ((chart.log_x && s.x[i] <= 0) || (chart.log_y && s.y[i] <= 0))
                continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x0 < x1))
    {
        x0 = std::isfinite(x0) ? x0 - 1 : 0;
        x1 = x0 + 2;
    }
    if (!(y0 < y1))
    {
        y0 = std::isfinite(y0) ? y0 - 1 : 0;
        y1 = y0 + 2;
    }
    double const pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (ty(v) - y0) / (y1 - y0) * (height - top - bottom); };

    std::ostringstream os;
    os << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")"
       << height << R"(" font-family="sans-serif" font-size="12">)" << "\n";
    os << R"(<rect width="100%" height="100%" fill="white"/>)" << "\n";
    os << R"(<text x=")" << width / 2 << R"(" y="22" text-anchor="middle" font-size="15">)"
       << detail::escape(chart.title) << "</text>\n";
    os << R"(<line x1=")" << left << R"(" y1=")" << height - bottom << R"(" x2=")"
       << width - right << R"(" y2=")" << height - bottom << R"(" stroke="black"/>)" << "\n";
    os << R"(<line x1=")" << left << R"(" y1=")" << top << R"(" x2=")" << left
       << R"(" y2=")" << height - bottom << R"(" stroke="black"/>)" << "\n";
    for (int k = 0; k <= 4; ++k)
    {
        double const fx = x0 + (x1 - x0) * k / 4.0;
        double const fy = y0 + (y1 - y0) * k / 4.0;
        double const vx = chart.log_x ? std::pow(10.0, fx) : fx;
        double const vy = chart.log_y ? std::pow(10.0, fy) : fy;
        os << R"(<text x=")" << px(vx) << R"(" y=")" << height - bottom + 16
           << R"(" text-anchor="middle">)" << detail::num(vx) << "</text>\n";
        os << R"(<text x=")" << left - 6 << R"(" y=")" << py(vy) + 4
           << R"(" text-anchor="end">)" << detail::num(vy) << "</text>\n";
    }
    os << R"(<text x=")" << (left + width - right) / 2 << R"(" y=")" << height - 18
       << R"(" text-anchor="middle">)" << detail::escape(chart.x_label) << "</text>\n";
    os << R"(<text transform="translate(18,)" << (top + height - bottom) / 2
       << R"x() rotate(-90)" text-anchor="middle">)x" << detail::escape(chart.y_label)
       << "</text>\n";
    static char const* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t s = 0; s < chart.series.size(); ++s)
    {
        auto const& ser = chart.series[s];
        char const* color = colors[s % 6];
        os << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="1.5" points=")";
        for (std::size_t i = 0; i < ser.x.size(); ++i)
        {
            if ((chart.log_x && ser.x[i] <= 0) || (chart.log_y && ser.y[i] <= 0))
                continue;
            os << px(ser.x[i]) << "," << py(ser.y[i]) << " ";
        }
        os << R"("/>)" << "\n";
        for (std::size_t i = 0; i < ser.err.size() && i < ser.x.size(); ++i)
        {
            double const lo = ser.y[i] - ser.err[i];
            double const hi = ser.y[i] + ser.err[i];
            if (chart.log_y && lo <= 0)
                continue;
            os << R"(<line x1=")" << px(ser.x[i]) << R"(" y1=")" << py(lo) << R"(" x2=")"
               << px(ser.x[i]) << R"(" y2=")" << py(hi) << R"(" stroke=")" << color
               << R"("/>)" << "\n";
        }
        os << R"(<text x=")" << width - right - 150 << R"(" y=")" << top + 16 * (s + 1)
           << R"(" fill=")" << color << R"(">)" << detail::escape(ser.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// mean / t against t for each run.
inline Chart rate_chart(std::vector<EnsembleResult> const& runs, std::string title)
{
    Chart c;
    c.title = std::move(title);
    c.x_label = "t [time units; steps on the gasket]";
    c.y_label = "mean V / t [volume per time unit]";
    c.log_x = true;
    for (auto const& r : runs)
    {
        Series s;
        s.label = r.experiment + " " + r.space + " d=" + std::to_string(r.dim);
        for (std::size_t i = 0; i < r.times.size(); ++i)
        {
            if (r.times[i] <= 0)
                continue;
            s.x.push_back(r.times[i]);
            s.y.push_back(r.mean[i] / r.times[i]);
            s.err.push_back(r.stderr_mean[i] / r.times[i]);
        }
        c.series.push_back(std::move(s));
    }
    return c;
}

}  // namespace sausage::io
