#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "space_model.hpp"

namespace sausage {

inline constexpr std::string_view commands[] = {
    "constants", "simulate", "fit", "verify-sandwich", "fluctuation",
    "lil",       "green-compare",   "excess",          "plot"};

/// One documented option: the CLI flag and config-file key share the name.
struct FlagSpec
{
    std::string_view name;
    std::string_view unit;
    std::string_view help;
    std::string_view default_text;
    std::string_view applies;  ///< space-separated commands, or "*"
    bool is_switch = false;

    [[nodiscard]] bool applies_to(std::string_view command) const
    {
        if (applies == "*")
            return true;
        std::string_view rest = applies;
        while (!rest.empty())
        {
            auto const sp = rest.find(' ');
            auto const word = rest.substr(0, sp);
            if (word == command)
                return true;
            if (sp == std::string_view::npos)
                break;
            rest.remove_prefix(sp + 1);
        }
        return false;
    }
};

// clang-format off
inline constexpr FlagSpec flag_table[] = {
    {"config", "path", "flat key=value file with optional [command] sections; flags override it", "none", "*"},
    {"space", "name", "euclid, radial or gasket", "euclid", "simulate verify-sandwich lil"},
    {"dim", "count", "spatial dimension", "3", "constants simulate verify-sandwich fluctuation lil green-compare excess"},
    {"depth", "levels", "gasket depth (graph has side 2^depth)", "40", "simulate lil"},
    {"breakpoints", "length list", "radial profile breakpoints R1<R2<..., comma separated", "none", "simulate verify-sandwich fluctuation green-compare excess"},
    {"plateau-high", "metric factor", "value of G on the high plateaus", "4", "simulate verify-sandwich fluctuation green-compare excess"},
    {"starts-high", "switch", "radial profile starts on a high plateau at r=0", "off", "simulate verify-sandwich fluctuation green-compare excess", true},
    {"eps", "length", "sausage radius", "1", "constants simulate verify-sandwich fluctuation lil excess"},
    {"times", "time list", "ascending evaluation times (steps on the gasket), comma separated", "10,20,40,80", "simulate fluctuation excess"},
    {"paths", "count", "number of independent paths", "100", "simulate verify-sandwich fluctuation green-compare excess"},
    {"dt", "time", "path time step", "1e-3*eps^2", "simulate verify-sandwich fluctuation lil green-compare excess"},
    {"h", "length", "occupancy grid cell size", "eps/8", "simulate fluctuation lil excess"},
    {"seed", "integer", "master seed of the per-path streams", "0", "simulate verify-sandwich fluctuation lil green-compare excess"},
    {"workers", "count", "worker threads (fallback SAUSAGELAB_WORKERS, then hardware)", "auto", "simulate verify-sandwich fluctuation lil green-compare excess"},
    {"out", "directory", "output directory for JSONL, CSV and SVG files", "results", "*"},
    {"strict-hitting", "switch", "hitting times count only t>0 (default counts a start inside the ball)", "off", "verify-sandwich", true},
    {"dump-paths", "count", "also write the first N sampled paths as CSV (t,x1..xd)", "0", "simulate"},
    {"input", "path", "JSONL file of ensemble records", "none", "fit plot"},
    {"model", "name", "inverse-sqrt, inverse-log or power-law", "inverse-sqrt", "fit"},
    {"x", "length list", "start point", "origin", "verify-sandwich"},
    {"y", "length list", "ball center", "2,0,...", "verify-sandwich"},
    {"a", "ratio", "inner ball radius factor in (0,1)", "0.5", "verify-sandwich"},
    {"t", "time", "hitting window", "5", "verify-sandwich"},
    {"T", "time", "occupation window after hitting", "5", "verify-sandwich"},
    {"sphere-points", "count", "points approximating the sphere inf/sup", "32", "verify-sandwich"},
    {"distances", "length list", "start distances |y| of the sweep", "5,10,20", "green-compare"},
    {"separation", "length", "distance |z-y| of the probe ball center", "1", "green-compare"},
    {"probe-radius", "length", "radius of the probe ball", "0.5", "green-compare"},
    {"horizon", "time", "path length (steps on the gasket)", "200 (green-compare), 1e6 (lil)", "lil green-compare"},
    {"grid-points", "count", "log-spaced evaluation times", "64", "lil"},
    {"f-form", "name", "integral or canonical form of f in the normalizers", "integral", "lil"},
};
// clang-format on

inline FlagSpec const* find_flag(std::string_view name)
{
    for (auto const& f : flag_table)
        if (f.name == name)
            return &f;
    return nullptr;
}

inline bool is_command(std::string_view c)
{
    return std::find(std::begin(commands), std::end(commands), c) != std::end(commands);
}

/// Raw string values keyed by flag name.
using RawConfig = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string s)
{
    auto const b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    auto const e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string normalize_key(std::string k)
{
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

}  // namespace detail

/*!
 * Parses a flat key=value text. Keys before any section header or in the
 * [common] section apply to every command; [name] sections apply only to
 * that command.
 */
inline RawConfig parse_config_text(std::string const& text, std::string_view command)
{
    RawConfig out;
    std::istringstream in(text);
    std::string line;
    std::string section = "common";
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (auto const hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            require(line.back() == ']', "config",
                    "line " + std::to_string(lineno) + ": unterminated section");
            section = detail::trim(line.substr(1, line.size() - 2));
            require(section == "common" || is_command(section), "config",
                    "line " + std::to_string(lineno) + ": unknown section '" + section + "'");
            continue;
        }
        auto const eq = line.find('=');
        require(eq != std::string::npos, "config",
                "line " + std::to_string(lineno) + ": expected key = value");
        std::string const key = detail::normalize_key(detail::trim(line.substr(0, eq)));
        std::string const value = detail::trim(line.substr(eq + 1));
        auto const* spec = find_flag(key);
        if (spec == nullptr || key == "config")
            throw PreconditionError(key, "unknown configuration key");
        if (section == "common" || section == command)
            out[key] = value;
    }
    return out;
}

inline RawConfig read_config_file(std::string const& path, std::string_view command)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "config", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), command);
}

struct RunConfig
{
    std::string command = "simulate";
    std::string space = "euclid";
    int dim = 3;
    int depth = 40;
    std::vector<double> breakpoints;
    double plateau_high = 4.0;
    bool starts_high = false;
    double eps = 1.0;
    std::vector<double> times{10.0, 20.0, 40.0, 80.0};
    std::size_t paths = 100;
    std::optional<double> dt;
    std::optional<double> h;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out = "results";
    bool strict_hitting = false;
    std::size_t dump_paths = 0;
    std::string input;
    std::string model = "inverse-sqrt";
    std::vector<double> x;
    std::vector<double> y;
    double a = 0.5;
    double t = 5.0;
    double T = 5.0;
    std::size_t sphere_points = 32;
    std::vector<double> distances{5.0, 10.0, 20.0};
    double separation = 1.0;
    double probe_radius = 0.5;
    std::optional<double> horizon;
    std::size_t grid_points = 64;
    std::string f_form = "integral";

    [[nodiscard]] double resolved_dt() const { return dt.value_or(1e-3 * eps * eps); }
    [[nodiscard]] double resolved_h() const { return h.value_or(eps / 8.0); }
    [[nodiscard]] double resolved_horizon() const
    {
        return horizon.value_or(command == "lil" ? 1e6 : 200.0);
    }

    [[nodiscard]] RadialMetricProfile profile() const
    {
        return RadialMetricProfile(breakpoints, plateau_high, starts_high);
    }

    [[nodiscard]] SpaceDescriptor space_descriptor() const
    {
        if (space == "euclid")
            return SpaceDescriptor::euclidean(dim);
        if (space == "radial")
            return SpaceDescriptor::radial(dim, profile());
        if (space == "gasket")
            return SpaceDescriptor::gasket(depth);
        throw PreconditionError("space", "must be euclid, radial or gasket");
    }

    /// Canonical text of every numeric field; its digest tags output records.
    [[nodiscard]] std::string canonical() const
    {
        std::ostringstream os;
        os.precision(17);
        auto list = [&](std::vector<double> const& v) {
            for (double d : v)
                os << d << ",";
            os << ";";
        };
        os << command << ";" << space << ";" << dim << ";" << depth << ";";
        list(breakpoints);
        os << plateau_high << ";" << starts_high << ";" << eps << ";";
        list(times);
        os << paths << ";" << resolved_dt() << ";" << resolved_h() << ";" << seed << ";"
           << strict_hitting << ";" << model << ";";
        list(x);
        list(y);
        os << a << ";" << t << ";" << T << ";" << sphere_points << ";";
        list(distances);
        os << separation << ";" << probe_radius << ";" << resolved_horizon() << ";"
           << grid_points << ";" << f_form;
        return os.str();
    }
};

namespace detail {

inline double to_double(std::string const& key, std::string const& v)
{
    try
    {
        std::size_t pos = 0;
        double const d = std::stod(v, &pos);
        if (pos == v.size() && std::isfinite(d))
            return d;
    }
    catch (std::exception const&)
    {
    }
    throw PreconditionError(key, "expected a number, got '" + v + "'");
}

inline long long to_integer(std::string const& key, std::string const& v)
{
    try
    {
        std::size_t pos = 0;
        long long const i = std::stoll(v, &pos);
        if (pos == v.size())
            return i;
    }
    catch (std::exception const&)
    {
    }
    throw PreconditionError(key, "expected an integer, got '" + v + "'");
}

inline std::uint64_t to_unsigned(std::string const& key, std::string const& v)
{
    try
    {
        std::size_t pos = 0;
        if (!v.empty() && v.front() != '-')
        {
            auto const u = std::stoull(v, &pos);
            if (pos == v.size())
                return u;
        }
    }
    catch (std::exception const&)
    {
    }
    throw PreconditionError(key, "expected a non-negative integer, got '" + v + "'");
}

inline bool to_bool(std::string const& key, std::string const& v)
{
    if (v == "true" || v == "1" || v == "on" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "off" || v == "no")
        return false;
    throw PreconditionError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<double> to_list(std::string const& key, std::string const& v)
{
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(to_double(key, item));
    }
    return out;
}

}  // namespace detail

/// Converts raw values and validates them against module preconditions.
inline RunConfig build_config(std::string const& command, RawConfig const& raw)
{
    require(is_command(command), "command", "unknown command '" + command + "'");
    RunConfig c;
    c.command = command;
    for (auto const& [key, value] : raw)
    {
        auto const* spec = find_flag(key);
        if (spec == nullptr)
            throw PreconditionError(key, "unknown configuration key");
        using namespace detail;
        if (key == "config")
            continue;
        else if (key == "space")
            c.space = value;
        else if (key == "dim")
            c.dim = static_cast<int>(to_integer(key, value));
        else if (key == "depth")
            c.depth = static_cast<int>(to_integer(key, value));
        else if (key == "breakpoints")
            c.breakpoints = to_list(key, value);
        else if (key == "plateau-high")
            c.plateau_high = to_double(key, value);
        else if (key == "starts-high")
            c.starts_high = to_bool(key, value);
        else if (key == "eps")
            c.eps = to_double(key, value);
        else if (key == "times")
            c.times = to_list(key, value);
        else if (key == "paths")
            c.paths = to_unsigned(key, value);
        else if (key == "dt")
            c.dt = to_double(key, value);
        else if (key == "h")
            c.h = to_double(key, value);
        else if (key == "seed")
            c.seed = to_unsigned(key, value);
        else if (key == "workers")
            c.workers = static_cast<int>(to_integer(key, value));
        else if (key == "out")
            c.out = value;
        else if (key == "strict-hitting")
            c.strict_hitting = to_bool(key, value);
        else if (key == "dump-paths")
            c.dump_paths = to_unsigned(key, value);
        else if (key == "input")
            c.input = value;
        else if (key == "model")
            c.model = value;
        else if (key == "x")
            c.x = to_list(key, value);
        else if (key == "y")
            c.y = to_list(key, value);
        else if (key == "a")
            c.a = to_double(key, value);
        else if (key == "t")
            c.t = to_double(key, value);
        else if (key == "T")
            c.T = to_double(key, value);
        else if (key == "sphere-points")
            c.sphere_points = to_unsigned(key, value);
        else if (key == "distances")
            c.distances = to_list(key, value);
        else if (key == "separation")
            c.separation = to_double(key, value);
        else if (key == "probe-radius")
            c.probe_radius = to_double(key, value);
        else if (key == "horizon")
            c.horizon = to_double(key, value);
        else if (key == "grid-points")
            c.grid_points = to_unsigned(key, value);
        else if (key == "f-form")
            c.f_form = value;
        else
            throw PreconditionError(key, "unhandled configuration key");
    }

    require(c.eps > 0.0, "eps", "must be positive");
    require(c.dim >= 1 && c.dim <= 6, "dim", "supported dimensions are 1..6");
    require(c.resolved_dt() > 0.0, "dt", "must be positive");
    require(c.resolved_h() > 0.0, "h", "must be positive");
    require(c.workers >= 0, "workers", "must be non-negative");
    require(c.space == "euclid" || c.space == "radial" || c.space == "gasket", "space",
            "must be euclid, radial or gasket");
    (void)c.profile();
    if (command == "simulate" || command == "fluctuation" || command == "excess"
        || command == "lil")
    {
        if (c.space != "gasket")
            require(c.resolved_h() <= c.eps / 4.0 * (1.0 + 1e-12), "h",
                    "cell size must be at most eps/4");
    }
    if (command == "simulate" || command == "fluctuation" || command == "excess")
    {
        require(!c.times.empty(), "times", "must not be empty");
        for (std::size_t i = 0; i < c.times.size(); ++i)
        {
            require(c.times[i] >= 0.0, "times", "must be non-negative");
            require(i == 0 || c.times[i] > c.times[i - 1], "times",
                    "must be strictly ascending");
        }
        require(c.paths >= 2, "paths", "need at least 2 paths");
    }
    if (command == "fit" || command == "plot")
        require(!c.input.empty(), "input", "is required");
    if (command == "fit")
        (void)parse_fit_model(c.model);
    if (command == "verify-sandwich")
    {
        require(c.a > 0.0 && c.a < 1.0, "a", "must lie in (0, 1)");
        require(c.t > 0.0, "t", "must be positive");
        require(c.T > 0.0, "T", "must be positive");
        require(c.paths >= 2, "paths", "need at least 2 paths");
    }
    if (command == "fluctuation")
        require(c.dim >= 3, "dim", "fluctuation needs dim >= 3");
    if (command == "excess")
        require(c.dim >= 6, "dim", "excess convergence needs dim >= 6");
    if (command == "green-compare")
        require(c.dim >= 3, "dim", "Green function diverges for dim <= 2");
    if (command == "constants")
        require(c.dim >= 3, "dim", "capacity vanishes for dim <= 2");
    if (command == "lil")
    {
        require(c.resolved_horizon() >= std::exp(2.0), "horizon", "must be at least e^2");
        require(c.f_form == "integral" || c.f_form == "canonical", "f-form",
                "must be integral or canonical");
    }
    return c;
}

}  // namespace sausage
