#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace sausage {

/// Ensemble means of V_eps at a grid of times, from one set of paths.
struct EnsembleResult
{
    std::string experiment = "simulate";
    std::string space;
    int dim = 0;
    double eps = 0.0;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_mean;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double h = 0.0;
    double wall_clock = 0.0;
};

enum class FitModel
{
    inverse_sqrt,  ///< mean/t = a + b t^(-1/2)
    inverse_log,   ///< mean log t / t = a + b / log t
    power_law,     ///< log mean = a + b log t
};

inline std::string_view to_string(FitModel m)
{
    switch (m)
    {
        case FitModel::inverse_sqrt:
            return "inverse-sqrt";
        case FitModel::inverse_log:
            return "inverse-log";
        case FitModel::power_law:
            return "power-law";
    }
    return "?";
}

inline FitModel parse_fit_model(std::string_view s)
{
    if (s == "inverse-sqrt")
        return FitModel::inverse_sqrt;
    if (s == "inverse-log")
        return FitModel::inverse_log;
    if (s == "power-law" || s == "power")
        return FitModel::power_law;
    throw PreconditionError("model", "unknown fit model '" + std::string(s) + "'");
}

struct FitResult
{
    FitModel model = FitModel::inverse_sqrt;
    double a = 0.0;  ///< extrapolated limit (or intercept for power-law)
    double b = 0.0;  ///< correction coefficient (or slope)
    double residual_norm = 0.0;
    double cov_aa = 0.0;
    double cov_ab = 0.0;
    double cov_bb = 0.0;

    [[nodiscard]] double sigma_a() const { return std::sqrt(cov_aa); }
    [[nodiscard]] double sigma_b() const { return std::sqrt(cov_bb); }
};

/// Transformed regression data (x, y, sigma_y) for a model.
struct FitData
{
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;
};

inline FitData transform_for_fit(std::vector<double> const& times,
                                 std::vector<double> const& mean,
                                 std::vector<double> const& stderr_mean,
                                 FitModel model)
{
    FitData d;
    bool weighted = !stderr_mean.empty();
    for (double s : stderr_mean)
        weighted = weighted && s > 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        double const t = times[i];
        double const se = weighted ? stderr_mean[i] : 0.0;
        switch (model)
        {
            case FitModel::inverse_sqrt:
                require(t > 0.0, "times", "must be positive");
                d.x.push_back(1.0 / std::sqrt(t));
                d.y.push_back(mean[i] / t);
                d.sigma.push_back(se / t);
                break;
            case FitModel::inverse_log:
                require(t > 1.0, "times", "must exceed 1 for the log model");
                d.x.push_back(1.0 / std::log(t));
                d.y.push_back(mean[i] * std::log(t) / t);
                d.sigma.push_back(se * std::log(t) / t);
                break;
            case FitModel::power_law:
                require(t > 0.0 && mean[i] > 0.0, "times",
                        "power-law fit needs positive times and means");
                d.x.push_back(std::log(t));
                d.y.push_back(std::log(mean[i]));
                d.sigma.push_back(se / mean[i]);
                break;
        }
    }
    if (!weighted)
        d.sigma.clear();
    return d;
}

/// Weighted least squares extrapolation of the ensemble means.
inline FitResult fit_limit(std::vector<double> const& times,
                           std::vector<double> const& mean,
                           std::vector<double> const& stderr_mean,
                           FitModel model)
{
    require(times.size() == mean.size(), "mean", "length differs from times");
    require(stderr_mean.empty() || stderr_mean.size() == times.size(),
            "stderr", "length differs from times");
    require(times.size() >= 4, "times", "fit needs at least 4 time points");
    auto const data = transform_for_fit(times, mean, stderr_mean, model);
    auto const line = numerics::weighted_line_fit(data.x, data.y, data.sigma);
    FitResult r;
    r.model = model;
    r.a = line.a;
    r.b = line.b;
    r.residual_norm = line.residual_norm;
    r.cov_aa = line.cov_aa;
    r.cov_ab = line.cov_ab;
    r.cov_bb = line.cov_bb;
    return r;
}

inline FitResult fit_limit(EnsembleResult const& result, FitModel model)
{
    return fit_limit(result.times, result.mean, result.stderr_mean, model);
}

}  // namespace sausage
