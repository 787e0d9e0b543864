#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "diffusion.hpp"
#include "errors.hpp"
#include "space_model.hpp"

namespace sausage {

/// mu-density with respect to Lebesgue measure, evaluated at cell centers.
template<int Dim>
class Density
{
  public:
    static Density lebesgue() { return uniform(1.0); }

    static Density uniform(double value)
    {
        Density d;
        d.constant_ = value;
        return d;
    }

    static Density radial(RadialMetricProfile const& profile)
        requires(Dim >= 2)
    {
        if (profile.is_constant())
            return uniform(std::pow(profile.value(0.0), 0.5 * Dim));
        Density d;
        d.fn_ = [profile](Point<Dim> const& x) {
            return measure_density<Dim>(profile, x);
        };
        return d;
    }

    static Density custom(std::function<double(Point<Dim> const&)> fn)
    {
        Density d;
        d.fn_ = std::move(fn);
        return d;
    }

    /// Density for the space a path lives on.
    static Density for_space(SpaceDescriptor const& space)
    {
        if constexpr (Dim >= 2)
        {
            if (auto const* profile = space.profile())
                return radial(*profile);
        }
        return lebesgue();
    }

    [[nodiscard]] std::optional<double> constant() const noexcept
    {
        return constant_;
    }

    [[nodiscard]] double operator()(Point<Dim> const& x) const
    {
        return constant_ ? *constant_ : fn_(x);
    }

  private:
    std::optional<double> constant_;
    std::function<double(Point<Dim> const&)> fn_;
};

/*!
 * Sparse occupancy grid with cell size h.
 *
 * Cells along axis 0 are packed 64 to a word; a word is addressed by its
 * transverse cell coordinates and its word index, packed into one 64-bit key
 * of an open-addressing table. A ball stamp ORs one interval mask per
 * transverse row, so re-stamping occupied cells leaves the accumulator
 * unchanged.
 */
template<int Dim>
class OccupancyGrid
{
    static_assert(Dim >= 1 && Dim <= 6);

  public:
    static constexpr int field_bits = Dim == 1 ? 62 : 64 / Dim;

    OccupancyGrid(double h, Density<Dim> density)
        : h_(h), inv_h_(1.0 / h), cell_volume_(std::pow(h, Dim)),
          density_(std::move(density))
    {
        require(h > 0.0, "h", "must be positive");
        keys_.assign(initial_capacity, empty_key);
        bits_.assign(initial_capacity, 0);
    }

    [[nodiscard]] double cell_size() const noexcept { return h_; }
    [[nodiscard]] std::uint64_t occupied_cells() const noexcept { return cells_; }

    /// mu-volume of the occupied cells.
    [[nodiscard]] double measure() const noexcept
    {
        if (auto c = density_.constant())
            return static_cast<double>(cells_) * *c * cell_volume_;
        return weight_;
    }

    /// Marks every cell whose center lies within `radius` of `center`.
    void stamp_ball(Point<Dim> const& center, double radius)
    {
        if constexpr (Dim == 1)
        {
            add_row(0, center[0], radius * radius);
        }
        else
        {
            std::array<std::int64_t, Dim> cell{};
            stamp_transverse<1>(cell, center, radius * radius, 0.0);
        }
    }

    /// Number of maximal runs of occupied cells along axis 0.
    [[nodiscard]] std::uint64_t run_count() const
    {
        std::uint64_t runs = 0;
        for (std::size_t s = 0; s < keys_.size(); ++s)
        {
            if (keys_[s] == empty_key)
                continue;
            std::uint64_t const w = bits_[s];
            std::uint64_t starts = w & ~(w << 1);
            // bit 0 continues a run only if bit 63 of the previous word is set
            if ((w & 1u) != 0 && word_of(keys_[s]) != min_field
                && (lookup(keys_[s] - 1) >> 63) != 0)
                starts &= ~std::uint64_t{1};
            runs += static_cast<std::uint64_t>(std::popcount(starts));
        }
        return runs;
    }

    [[nodiscard]] double cell_volume() const noexcept { return cell_volume_; }

    /// Number of faces shared by an occupied and an empty cell, over all axes.
    [[nodiscard]] std::uint64_t exposed_faces() const
    {
        std::uint64_t faces = 0;
        for (std::size_t s = 0; s < keys_.size(); ++s)
        {
            std::uint64_t const key = keys_[s];
            if (key == empty_key)
                continue;
            std::uint64_t const w = bits_[s];
            std::int64_t const word = word_of(key);
            std::uint64_t const prev = word != min_field ? lookup(key - 1) : 0;
            std::uint64_t const next = word != max_field ? lookup(key + 1) : 0;
            std::uint64_t const left = (w << 1) | (prev >> 63);
            std::uint64_t const right = (w >> 1) | (next << 63);
            faces += static_cast<std::uint64_t>(std::popcount(w & ~left)
                                                + std::popcount(w & ~right));
            for (int axis = 1; axis < Dim; ++axis)
            {
                int const shift = field_bits * (Dim - axis);
                constexpr std::uint64_t mask = field_bits >= 64
                                                   ? ~std::uint64_t{0}
                                                   : (std::uint64_t{1} << field_bits) - 1;
                std::uint64_t const step = std::uint64_t{1} << shift;
                std::uint64_t const field = (key >> shift) & mask;
                std::uint64_t const below = field > 0 ? lookup(key - step) : 0;
                std::uint64_t const above = lookup(key + step);
                faces += static_cast<std::uint64_t>(std::popcount(w & ~below)
                                                    + std::popcount(w & ~above));
            }
        }
        return faces;
    }


  private:
    static constexpr std::uint64_t empty_key = ~std::uint64_t{0};
    static constexpr std::size_t initial_capacity = 1024;
    static constexpr std::int64_t field_bias = std::int64_t{1}
                                               << (field_bits - 1);
    static constexpr std::int64_t min_field = -field_bias;
    static constexpr std::int64_t max_field = field_bias - 2;

    template<int Axis>
    void stamp_transverse(std::array<std::int64_t, Dim>& cell,
                          Point<Dim> const& center, double r2, double used)
    {
        double const rem = r2 - used;
        double const reach = std::sqrt(rem);
        auto const lo = static_cast<std::int64_t>(
            std::ceil((center[Axis] - reach) * inv_h_ - 0.5));
        auto const hi = static_cast<std::int64_t>(
            std::floor((center[Axis] + reach) * inv_h_ - 0.5));
        for (std::int64_t j = lo; j <= hi; ++j)
        {
            double const c = (static_cast<double>(j) + 0.5) * h_ - center[Axis];
            double const u = used + c * c;
            if (u > r2)
                continue;
            cell[Axis] = j;
            if constexpr (Axis + 1 < Dim)
                stamp_transverse<Axis + 1>(cell, center, r2, u);
            else
                add_row(row_key(cell), center[0], r2 - u);
        }
    }

    std::uint64_t row_key(std::array<std::int64_t, Dim> const& cell) const
    {
        if constexpr (Dim == 1)
            return 0;
        std::uint64_t key = 0;
        for (int k = 1; k < Dim; ++k)
        {
            check_field(cell[k]);
            key = (key << field_bits)
                  | static_cast<std::uint64_t>(cell[k] + field_bias);
        }
        return key << field_bits;
    }

    static void check_field(std::int64_t v)
    {
        if (v < min_field || v > max_field)
            throw NumericError("occupancy grid coordinate out of range");
    }

    static std::int64_t word_of(std::uint64_t key) noexcept
    {
        constexpr std::uint64_t mask = field_bits == 64
                                           ? ~std::uint64_t{0}
                                           : (std::uint64_t{1} << field_bits) - 1;
        return static_cast<std::int64_t>(key & mask) - field_bias;
    }

    void add_row(std::uint64_t row, double x0, double rem)
    {
        double const w = std::sqrt(rem);
        auto const lo = static_cast<std::int64_t>(
            std::ceil((x0 - w) * inv_h_ - 0.5));
        auto const hi = static_cast<std::int64_t>(
            std::floor((x0 + w) * inv_h_ - 0.5));
        if (lo > hi)
            return;
        // Bits are never cleared, so an interval already known to be full
        // needs no table access.
        RowMemo& memo = memo_[memo_slot(row)];
        if (memo.row == row && memo.lo <= lo && hi <= memo.hi)
            return;
        if (memo.row == row && lo <= memo.hi + 1 && memo.lo <= hi + 1)
        {
            memo.lo = std::min(memo.lo, lo);
            memo.hi = std::max(memo.hi, hi);
        }
        else
        {
            memo = {row, lo, hi};
        }
        std::int64_t const wlo = lo >> 6;
        std::int64_t const whi = hi >> 6;
        check_field(wlo);
        check_field(whi);
        for (std::int64_t word = wlo; word <= whi; ++word)
        {
            int const b0 = word == wlo ? static_cast<int>(lo & 63) : 0;
            int const b1 = word == whi ? static_cast<int>(hi & 63) : 63;
            std::uint64_t const mask
                = (b1 == 63 ? ~std::uint64_t{0}
                            : ((std::uint64_t{1} << (b1 + 1)) - 1))
                  & ~((std::uint64_t{1} << b0) - 1);
            std::uint64_t const key
                = row | static_cast<std::uint64_t>(word + field_bias);
            std::uint64_t& slot = find_or_insert(key);
            std::uint64_t const fresh = mask & ~slot;
            if (fresh != 0)
            {
                slot |= fresh;
                cells_ += static_cast<std::uint64_t>(std::popcount(fresh));
                if (!density_.constant())
                    weight_ += weight_of_bits(key, fresh);
            }
        }
    }

    /// Density-weighted measure of the given bits of one word.
    [[nodiscard]] double weight_of_bits(std::uint64_t key, std::uint64_t bits) const
    {
        if (bits == 0)
            return 0.0;
        if (auto c = density_.constant())
            return static_cast<double>(std::popcount(bits)) * *c * cell_volume_;
        Point<Dim> p{};
        std::uint64_t k = key >> field_bits;
        for (int axis = Dim - 1; axis >= 1; --axis)
        {
            constexpr std::uint64_t mask = (std::uint64_t{1} << field_bits) - 1;
            auto const j = static_cast<std::int64_t>(k & mask) - field_bias;
            p[axis] = (static_cast<double>(j) + 0.5) * h_;
            k >>= field_bits;
        }
        std::int64_t const word = word_of(key);
        double total = 0.0;
        while (bits != 0)
        {
            int const b = std::countr_zero(bits);
            bits &= bits - 1;
            p[0] = (static_cast<double>(word * 64 + b) + 0.5) * h_;
            total += density_(p) * cell_volume_;
        }
        return total;
    }

    struct RowMemo
    {
        std::uint64_t row = empty_key;
        std::int64_t lo = 0;
        std::int64_t hi = -1;
    };
    // enough slots for every row of one ball at h = eps/8 (d <= 3) or eps/4
    static constexpr int memo_bits = Dim <= 3 ? 12 : (Dim == 4 ? 14 : 16);
    static constexpr std::size_t memo_size = std::size_t{1} << memo_bits;

    static std::size_t memo_slot(std::uint64_t row) noexcept
    {
        return (row * 0x9e3779b97f4a7c15ULL) >> (64 - memo_bits);
    }

    static std::size_t hash(std::uint64_t key) noexcept
    {
        key ^= key >> 33;
        key *= 0xff51afd7ed558ccdULL;
        key ^= key >> 33;
        return static_cast<std::size_t>(key);
    }

    [[nodiscard]] std::uint64_t lookup(std::uint64_t key) const noexcept
    {
        std::size_t const mask = keys_.size() - 1;
        for (std::size_t s = hash(key) & mask;; s = (s + 1) & mask)
        {
            if (keys_[s] == key)
                return bits_[s];
            if (keys_[s] == empty_key)
                return 0;
        }
    }

    std::uint64_t& find_or_insert(std::uint64_t key)
    {
        std::size_t mask = keys_.size() - 1;
        std::size_t s = hash(key) & mask;
        for (;; s = (s + 1) & mask)
        {
            if (keys_[s] == key)
                return bits_[s];
            if (keys_[s] == empty_key)
                break;
        }
        if (2 * (used_ + 1) > keys_.size())
        {
            grow();
            mask = keys_.size() - 1;
            for (s = hash(key) & mask; keys_[s] != empty_key; s = (s + 1) & mask)
            {
            }
        }
        keys_[s] = key;
        bits_[s] = 0;
        ++used_;
        return bits_[s];
    }

    void grow()
    {
        std::vector<std::uint64_t> old_keys(keys_.size() * 2, empty_key);
        std::vector<std::uint64_t> old_bits(bits_.size() * 2, 0);
        old_keys.swap(keys_);
        old_bits.swap(bits_);
        std::size_t const mask = keys_.size() - 1;
        for (std::size_t i = 0; i < old_keys.size(); ++i)
        {
            if (old_keys[i] == empty_key)
                continue;
            std::size_t s = hash(old_keys[i]) & mask;
            while (keys_[s] != empty_key)
                s = (s + 1) & mask;
            keys_[s] = old_keys[i];
            bits_[s] = old_bits[i];
        }
    }

    double h_;
    double inv_h_;
    double cell_volume_;
    Density<Dim> density_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint64_t> bits_;
    std::vector<RowMemo> memo_ = std::vector<RowMemo>(memo_size);
    std::size_t used_ = 0;
    std::uint64_t cells_ = 0;
    double weight_ = 0.0;
};

//---------------------------------------------------------------------------//
// Path stamping
//---------------------------------------------------------------------------//

/*!
 * Feeds path points to a grid, skipping points closer than h/2 to the last
 * stamped point. `force` stamps regardless (checkpoints and endpoints).
 */
template<int Dim>
class SausageStamper
{
  public:
    SausageStamper(OccupancyGrid<Dim>& grid, double eps)
        : grid_(&grid), eps_(eps),
          skip2_(0.25 * grid.cell_size() * grid.cell_size())
    {
    }

    void visit(Point<Dim> const& x, bool force = false)
    {
        if (!has_last_ || force || dist_sq<Dim>(x, last_) >= skip2_)
        {
            if (has_last_ && x == last_)
                return;
            grid_->stamp_ball(x, eps_);
            last_ = x;
            has_last_ = true;
            ++stamps_;
        }
    }

    /// Forget the last stamp so the next point is stamped.
    void reset() noexcept { has_last_ = false; }

    [[nodiscard]] std::size_t stamps() const noexcept { return stamps_; }

  private:
    OccupancyGrid<Dim>* grid_;
    double eps_;
    double skip2_;
    Point<Dim> last_{};
    bool has_last_ = false;
    std::size_t stamps_ = 0;
};

/// Estimated mu-volume of an eps-sausage plus its error budget.
struct SausageEstimate
{
    double value = 0.0;
    double eps = 0.0;
    double horizon = 0.0;
    double h = 0.0;
    double dt = 0.0;
    double grid_band = 0.0;  ///< half a cell per exposed face
    double step_bias = 0.0;  ///< 0.5826 sqrt(dt) times the surface proxy
    double stderr_mean = 0.0;
};

namespace detail {

template<int Dim>
void check_sausage_args(double eps, double h)
{
    require(eps > 0.0, "eps", "must be positive");
    require(h > 0.0, "h", "must be positive");
    require(h <= eps / 4.0 * (1.0 + 1e-12), "h", "cell size must be at most eps/4");
}

template<int Dim>
SausageEstimate finish_estimate(OccupancyGrid<Dim> const& grid, double eps,
                                double horizon, double dt, double density_scale)
{
    SausageEstimate est;
    est.value = grid.measure();
    est.eps = eps;
    est.horizon = horizon;
    est.h = grid.cell_size();
    est.dt = dt;
    double const faces = static_cast<double>(grid.exposed_faces());
    double const h = grid.cell_size();
    // each boundary cell is uncertain by about half its volume
    est.grid_band = 0.5 * faces * grid.cell_volume() * density_scale;
    double const surface = faces * grid.cell_volume() / h * density_scale;
    est.step_bias = 0.5826 * std::sqrt(dt) * surface;
    return est;
}

template<int Dim>
double density_scale_for(Density<Dim> const& density)
{
    return density.constant() ? *density.constant() : 1.0;
}

}  // namespace detail

/*!
 * mu-volume of the cells whose center lies within eps of a path point in
 * [first, last] (inclusive indices). Checkpoint indices are always stamped.
 */
template<int Dim>
void stamp_path_range(OccupancyGrid<Dim>& grid, SampledPath<Dim> const& path,
                      double eps, std::size_t first, std::size_t last,
                      std::vector<std::size_t> const& checkpoints = {})
{
    SausageStamper<Dim> stamper(grid, eps);
    auto cp = std::lower_bound(checkpoints.begin(), checkpoints.end(), first);
    for (std::size_t i = first; i <= last; ++i)
    {
        bool force = i == first || i == last;
        if (cp != checkpoints.end() && *cp == i)
        {
            force = true;
            ++cp;
        }
        stamper.visit(path.points[i], force);
    }
}

template<int Dim>
SausageEstimate sausage_volume(SampledPath<Dim> const& path, double eps,
                               double h, Density<Dim> const& density,
                               std::vector<std::size_t> const& checkpoints = {})
{
    detail::check_sausage_args<Dim>(eps, h);
    require(!path.points.empty(), "path", "must not be empty");
    OccupancyGrid<Dim> grid(h, density);
    stamp_path_range(grid, path, eps, 0, path.points.size() - 1, checkpoints);
    return detail::finish_estimate(grid, eps, path.total_time(), path.step,
                                   detail::density_scale_for(density));
}

template<int Dim>
SausageEstimate sausage_volume(SampledPath<Dim> const& path, double eps, double h)
{
    return sausage_volume(path, eps, h, Density<Dim>::for_space(path.space));
}

/// Sausage restricted to the time window [s, t].
template<int Dim>
SausageEstimate sausage_window(SampledPath<Dim> const& path, double s, double t,
                               double eps, double h, Density<Dim> const& density)
{
    detail::check_sausage_args<Dim>(eps, h);
    require(!path.points.empty(), "path", "must not be empty");
    require(s <= t, "s", "window start must not exceed its end");
    require(s >= 0.0 && t <= path.total_time() * (1.0 + 1e-12), "t",
            "window must lie inside the horizon");
    auto const first = static_cast<std::size_t>(std::ceil(s / path.step - 1e-9));
    auto const last = std::min(
        path.points.size() - 1,
        static_cast<std::size_t>(std::floor(t / path.step + 1e-9)));
    OccupancyGrid<Dim> grid(h, density);
    stamp_path_range(grid, path, eps, first, std::max(first, last));
    auto est = detail::finish_estimate(grid, eps, t - s, path.step,
                                       detail::density_scale_for(density));
    return est;
}

/*!
 * mu(W_{nL,(n+1)L} \ W_{0,nL}) for consecutive windows of `window_steps`
 * steps. The windows are stamped into one growing grid, so the increments
 * telescope to the volume of the whole sausage with the window boundaries
 * as checkpoints.
 */
template<int Dim>
std::vector<double> window_increments(SampledPath<Dim> const& path,
                                      std::size_t window_steps, double eps,
                                      double h, Density<Dim> const& density)
{
    detail::check_sausage_args<Dim>(eps, h);
    require(window_steps >= 1, "window_steps", "must be at least 1");
    require(path.points.size() >= 2, "path", "needs at least one step");
    OccupancyGrid<Dim> grid(h, density);
    std::vector<double> out;
    std::size_t const last = path.points.size() - 1;
    double before = 0.0;
    for (std::size_t start = 0; start < last; start += window_steps)
    {
        std::size_t const end = std::min(last, start + window_steps);
        stamp_path_range(grid, path, eps, start, end);
        double const now = grid.measure();
        out.push_back(now - before);
        before = now;
    }
    return out;
}

/// Checkpoint indices matching `window_increments`' window boundaries.
inline std::vector<std::size_t> window_checkpoints(std::size_t point_count,
                                                   std::size_t window_steps)
{
    std::vector<std::size_t> cps;
    for (std::size_t i = 0; i < point_count; i += window_steps)
        cps.push_back(i);
    return cps;
}

/// Left Riemann sum of the time spent in B(center, radius).
template<int Dim>
double occupation_time(SampledPath<Dim> const& path, Point<Dim> const& center,
                       double radius)
{
    require(radius > 0.0, "radius", "must be positive");
    double const r2 = radius * radius;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i)
    {
        if (dist_sq<Dim>(path.points[i], center) < r2)
            ++count;
    }
    return static_cast<double>(count) * path.step;
}

/// Number of distinct vertices visited.
inline std::size_t graph_range(GraphPath const& path)
{
    require(!path.vertices.empty(), "path", "must not be empty");
    std::unordered_map<GasketVertex, int, GasketVertexHash> seen;
    seen.reserve(path.vertices.size() / 4 + 16);
    for (auto const& v : path.vertices)
        seen.emplace(v, 0);
    return seen.size();
}

/// Largest number of visits to one vertex (the start counts as a visit).
inline std::size_t max_visit_count(GraphPath const& path)
{
    require(!path.vertices.empty(), "path", "must not be empty");
    std::unordered_map<GasketVertex, std::size_t, GasketVertexHash> visits;
    visits.reserve(path.vertices.size() / 4 + 16);
    std::size_t best = 0;
    for (auto const& v : path.vertices)
        best = std::max(best, ++visits[v]);
    return best;
}

}  // namespace sausage
