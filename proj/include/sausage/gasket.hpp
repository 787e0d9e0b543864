#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace sausage {

/*!
 * Vertex of the one-sided infinite pre-Sierpinski gasket.
 *
 * Coordinates are in the triangular lattice basis: (a, b) sits at
 * a * (1, 0) + b * (1/2, sqrt(3)/2). The wedge has its corner at the origin.
 */
struct GasketVertex
{
    std::int64_t a = 0;
    std::int64_t b = 0;

    friend bool operator==(GasketVertex const&, GasketVertex const&) = default;
    friend auto operator<=>(GasketVertex const&, GasketVertex const&) = default;

    [[nodiscard]] double x() const noexcept
    {
        return static_cast<double>(a) + 0.5 * static_cast<double>(b);
    }
    [[nodiscard]] double y() const noexcept
    {
        return 0.8660254037844386 * static_cast<double>(b);
    }
    [[nodiscard]] double euclidean_norm() const noexcept
    {
        return std::hypot(x(), y());
    }
    [[nodiscard]] std::uint64_t packed() const noexcept
    {
        return (static_cast<std::uint64_t>(a) << 32)
               ^ static_cast<std::uint64_t>(b);
    }
};

struct GasketVertexHash
{
    std::size_t operator()(GasketVertex const& v) const noexcept
    {
        std::uint64_t z = v.packed() * 0x9e3779b97f4a7c15ULL;
        return static_cast<std::size_t>(z ^ (z >> 29));
    }
};

/// Up to four neighbors, in lexicographic order.
struct GasketNeighbors
{
    std::array<GasketVertex, 4> items{};
    int count = 0;

    [[nodiscard]] GasketVertex const* begin() const noexcept
    {
        return items.data();
    }
    [[nodiscard]] GasketVertex const* end() const noexcept
    {
        return items.data() + count;
    }
};

/*!
 * The pre-gasket graph with unit edges.
 *
 * The upward unit triangles of the gasket are exactly those whose lower-left
 * corner (a, b) has no common binary digit (a & b == 0, Pascal's triangle
 * mod 2). Vertices are triangle corners and edges are triangle sides, so
 * adjacency is computed from the address alone and nothing is stored: the
 * "lazy growth" is implicit and the graph is safe to share across threads.
 * Every vertex except the origin lies in exactly two unit triangles
 * (degree 4); the origin lies in one (degree 2). Addresses are confined to
 * the level-`depth` triangle a + b <= 2^depth.
 */
class GasketGraph
{
  public:
    explicit GasketGraph(int depth = 40) : depth_(depth)
    {
        require(depth >= 1 && depth <= 60, "depth", "must be in 1..60");
        side_ = std::int64_t{1} << depth;
    }

    [[nodiscard]] int depth() const noexcept { return depth_; }

    [[nodiscard]] static constexpr GasketVertex origin() noexcept
    {
        return {0, 0};
    }

    [[nodiscard]] bool is_vertex(GasketVertex v) const noexcept
    {
        if (v.a < 0 || v.b < 0 || v.a + v.b > side_)
            return false;
        return has_triangle(v.a, v.b) || has_triangle(v.a - 1, v.b)
               || has_triangle(v.a, v.b - 1);
    }

    [[nodiscard]] GasketNeighbors neighbors(GasketVertex v) const
    {
        require(is_vertex(v), "vertex", "not a vertex of the pre-gasket");
        GasketNeighbors out;
        auto push = [&](std::int64_t a, std::int64_t b) {
            out.items[static_cast<std::size_t>(out.count++)] = {a, b};
        };
        // v as lower-left, lower-right, and top corner of an upward triangle
        if (has_triangle(v.a, v.b))
        {
            push(v.a + 1, v.b);
            push(v.a, v.b + 1);
        }
        if (has_triangle(v.a - 1, v.b))
        {
            push(v.a - 1, v.b);
            push(v.a - 1, v.b + 1);
        }
        if (has_triangle(v.a, v.b - 1))
        {
            push(v.a, v.b - 1);
            push(v.a + 1, v.b - 1);
        }
        std::sort(out.items.begin(), out.items.begin() + out.count);
        return out;
    }

    /// Number of vertices within graph distance `radius` of the origin.
    [[nodiscard]] std::size_t ball_count(std::int64_t radius) const
    {
        std::unordered_map<GasketVertex, std::int64_t, GasketVertexHash> seen;
        std::deque<GasketVertex> queue{origin()};
        seen.emplace(origin(), 0);
        while (!queue.empty())
        {
            GasketVertex const v = queue.front();
            queue.pop_front();
            std::int64_t const d = seen[v];
            if (d == radius)
                continue;
            for (GasketVertex const& w : neighbors(v))
            {
                if (seen.emplace(w, d + 1).second)
                    queue.push_back(w);
            }
        }
        return seen.size();
    }

  private:
    [[nodiscard]] bool has_triangle(std::int64_t a, std::int64_t b) const noexcept
    {
        return a >= 0 && b >= 0 && (a & b) == 0 && a + b + 1 <= side_;
    }

    int depth_;
    std::int64_t side_;
};

/// Adjacent vertices of v in deterministic order.
inline GasketNeighbors gasket_neighbors(GasketGraph const& graph, GasketVertex v)
{
    return graph.neighbors(v);
}

}  // namespace sausage
