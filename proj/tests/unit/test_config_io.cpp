#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include <sausage/config.hpp>
#include <sausage/io.hpp>

using namespace sausage;

namespace {

std::string key_of(std::string const& command, RawConfig const& raw)
{
    try
    {
        build_config(command, raw);
    }
    catch (PreconditionError const& e)
    {
        return e.key();
    }
    return "";
}

}  // namespace

TEST(Config, DefaultsDeriveFromEps)
{
    auto const c = build_config("simulate", {{"eps", "0.5"}, {"times", "1,2"}});
    EXPECT_DOUBLE_EQ(c.resolved_dt(), 1e-3 * 0.25);
    EXPECT_DOUBLE_EQ(c.resolved_h(), 0.5 / 8);
    EXPECT_EQ(c.dim, 3);
    EXPECT_EQ(c.space, "euclid");
    EXPECT_EQ(build_config("lil", {}).resolved_horizon(), 1e6);
    EXPECT_EQ(build_config("green-compare", {}).resolved_horizon(), 200.0);
}

TEST(Config, ErrorsNameTheKey)
{
    EXPECT_EQ(key_of("simulate", {{"eps", "-1"}}), "eps");
    EXPECT_EQ(key_of("simulate", {{"eps", "abc"}}), "eps");
    EXPECT_EQ(key_of("simulate", {{"paths", "1"}}), "paths");
    EXPECT_EQ(key_of("simulate", {{"h", "0.5"}}), "h");
    EXPECT_EQ(key_of("simulate", {{"times", "2,1"}}), "times");
    EXPECT_EQ(key_of("simulate", {{"bogus", "1"}}), "bogus");
    EXPECT_EQ(key_of("simulate", {{"breakpoints", "0.5"}}), "breakpoints");
    EXPECT_EQ(key_of("fit", {}), "input");
    EXPECT_EQ(key_of("fit", {{"input", "x"}, {"model", "cubic"}}), "model");
    EXPECT_EQ(key_of("excess", {{"dim", "5"}}), "dim");
    EXPECT_EQ(key_of("verify-sandwich", {{"a", "1"}}), "a");
    EXPECT_EQ(key_of("lil", {{"f-form", "other"}}), "f-form");
}

TEST(Config, FileSectionsAndOverride)
{
    std::string const text = "# comment\n"
                             "eps = 2\n"
                             "paths=50\n"
                             "[simulate]\n"
                             "grid_points = 7\n"
                             "dt = 0.01\n"
                             "[lil]\n"
                             "horizon = 100\n";
    auto raw = parse_config_text(text, "simulate");
    EXPECT_EQ(raw.at("eps"), "2");
    EXPECT_EQ(raw.at("grid-points"), "7");
    EXPECT_EQ(raw.count("horizon"), 0u);
    raw["eps"] = "1.5";  // a flag given on the command line
    auto const c = build_config("simulate", raw);
    EXPECT_EQ(c.eps, 1.5);
    EXPECT_EQ(c.paths, 50u);
    EXPECT_EQ(c.resolved_dt(), 0.01);
}

TEST(Config, RejectsMalformedFiles)
{
    EXPECT_THROW(parse_config_text("eps\n", "simulate"), PreconditionError);
    try
    {
        parse_config_text("mystery = 3\n", "simulate");
        FAIL();
    }
    catch (PreconditionError const& e)
    {
        EXPECT_EQ(e.key(), "mystery");
    }
}

TEST(Config, FlagTableIsWellFormed)
{
    for (auto const& f : flag_table)
    {
        EXPECT_FALSE(f.unit.empty()) << f.name;
        EXPECT_FALSE(f.help.empty()) << f.name;
        EXPECT_FALSE(f.default_text.empty()) << f.name;
        bool any = false;
        for (auto cmd : commands)
            any = any || f.applies_to(cmd);
        EXPECT_TRUE(any) << f.name;
        EXPECT_EQ(find_flag(f.name), &f);
    }
}

TEST(Config, CanonicalTextDistinguishesRuns)
{
    auto const a = build_config("simulate", {{"seed", "1"}});
    auto const b = build_config("simulate", {{"seed", "2"}});
    EXPECT_NE(io::digest(a.canonical()), io::digest(b.canonical()));
    EXPECT_EQ(io::digest(a.canonical()), io::digest(build_config("simulate", {{"seed", "1"}}).canonical()));
    EXPECT_EQ(io::digest("").size(), 16u);
}

TEST(Io, JsonlRoundTripIsLossless)
{
    EnsembleResult r;
    r.space = "radial";
    r.dim = 3;
    r.eps = 0.1;
    r.times = {1.0 / 3.0, 2.0, 1e7};
    r.mean = {std::nextafter(1.0, 2.0), 2.718281828459045, 1e300};
    r.stderr_mean = {0.1, std::numeric_limits<double>::denorm_min(), 3.0};
    r.paths = 17;
    r.seed = std::numeric_limits<std::uint64_t>::max();
    r.dt = 1e-3;
    r.h = 0.0125;
    r.wall_clock = 1.25;
    auto const recs = io::to_records(r, "abc");
    auto const path = std::filesystem::temp_directory_path() / "sausage_roundtrip.jsonl";
    io::write_file(path.string(), io::jsonl(recs));
    io::write_file(path.string(), io::to_json(FitResult{}, "x").dump() + "\n", true);
    auto const back = io::read_jsonl(path.string());
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i)
    {
        EXPECT_EQ(back[i].mean, recs[i].mean);
        EXPECT_EQ(back[i].stderr_mean, recs[i].stderr_mean);
        EXPECT_EQ(back[i].t, recs[i].t);
        EXPECT_EQ(back[i].seed, recs[i].seed);
    }
    auto const results = io::to_results(back);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_EQ(results[0].times, r.times);
    EXPECT_EQ(results[0].mean, r.mean);
    EXPECT_EQ(results[0].stderr_mean, r.stderr_mean);
    EXPECT_EQ(results[0].paths, r.paths);
    std::filesystem::remove(path);
}

TEST(Io, ReadRejectsBadInput)
{
    EXPECT_THROW(io::read_jsonl("/nonexistent/file.jsonl"), PreconditionError);
    auto const path = std::filesystem::temp_directory_path() / "sausage_bad.jsonl";
    io::write_file(path.string(), "{not json\n");
    EXPECT_THROW(io::read_jsonl(path.string()), PreconditionError);
    io::write_file(path.string(), "{\"mean\": 1}\n");
    EXPECT_THROW(io::read_jsonl(path.string()), PreconditionError);
    std::filesystem::remove(path);
}

TEST(Io, CsvAndSvg)
{
    EnsembleResult r;
    r.space = "euclid";
    r.dim = 3;
    r.times = {0.0, 1.0, 10.0};
    r.mean = {4.0, 10.0, 70.0};
    r.stderr_mean = {0.0, 0.5, 1.0};
    r.paths = 2;
    auto const text = io::csv(io::to_records(r, "d"));
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "experiment,space,dim,eps,t,mean,stderr,n,dt,h,seed,config,wall_clock_s");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    auto const svg = io::svg(io::rate_chart({r}, "rate & <test>"));
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("mean V / t"), std::string::npos);
    EXPECT_NE(svg.find("&amp;"), std::string::npos);
    EXPECT_EQ(svg.find("<test>"), std::string::npos);
    EXPECT_EQ(io::fmt(0.1), "0.1");
}
