#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "qnoc/errors.hpp"

namespace qnoc {

struct CoreId {
    std::uint32_t index = 0;

    constexpr CoreId() = default;
    constexpr explicit CoreId(std::uint32_t i) : index(i) {}

    friend constexpr auto operator<=>(CoreId, CoreId) = default;
    friend std::ostream& operator<<(std::ostream& os, CoreId c) { return os << "core " << c.index; }
};

struct Coord {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(Coord, Coord) = default;
    friend std::ostream& operator<<(std::ostream& os, Coord c) { return os << '(' << c.x << ',' << c.y << ')'; }
};

// A BSM node sits between every adjacent core pair; lo < hi always.
struct BsmLinkId {
    CoreId lo;
    CoreId hi;

    friend constexpr auto operator<=>(const BsmLinkId&, const BsmLinkId&) = default;
    friend std::ostream& operator<<(std::ostream& os, const BsmLinkId& l) {
        return os << "link(" << l.lo.index << ',' << l.hi.index << ')';
    }
};

/**
 * 2D mesh of quantum cores, numbered row-major from the corner:
 *
 *     0 --- 1 --- 2 --- 3
 *     |     |     |     |
 *     4 --- 5 --- 6 --- 7
 *     ...
 *
 * Each adjacent pair shares one BSM link. Immutable after construction.
 */
class MeshTopology {
public:
    MeshTopology(int width, int height) : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw ValidationError("mesh dimensions must be positive, got " + std::to_string(width) + "x" +
                                  std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t core_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    std::size_t link_count() const noexcept {
        return static_cast<std::size_t>(height_) * (width_ - 1) + static_cast<std::size_t>(width_) * (height_ - 1);
    }
    int diameter() const noexcept { return (width_ - 1) + (height_ - 1); }

    bool contains(Coord c) const noexcept { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }
    bool contains(CoreId c) const noexcept { return c.index < core_count(); }

    CoreId core_at(Coord c) const {
        if (!contains(c)) {
            throw BoundsError("coordinate (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                              ") outside mesh");
        }
        return CoreId(static_cast<std::uint32_t>(c.y * width_ + c.x));
    }

    Coord coord_of(CoreId c) const {
        check(c);
        const int i = static_cast<int>(c.index);
        return {i % width_, i / width_};
    }

    int hop_distance(CoreId a, CoreId b) const {
        const Coord ca = coord_of(a);
        const Coord cb = coord_of(b);
        return std::abs(ca.x - cb.x) + std::abs(ca.y - cb.y);
    }

    bool adjacent(CoreId a, CoreId b) const { return hop_distance(a, b) == 1; }

    // Deterministic XY route: correct x first, then y. Includes both endpoints.
    std::vector<CoreId> xy_route(CoreId src, CoreId dst) const {
        Coord cur = coord_of(src);
        const Coord end = coord_of(dst);
        std::vector<CoreId> path;
        path.reserve(static_cast<std::size_t>(hop_distance(src, dst)) + 1);
        path.push_back(src);
        while (cur.x != end.x) {
            cur.x += cur.x < end.x ? 1 : -1;
            path.push_back(core_at(cur));
        }
        while (cur.y != end.y) {
            cur.y += cur.y < end.y ? 1 : -1;
            path.push_back(core_at(cur));
        }
        return path;
    }

    BsmLinkId bsm_link_between(CoreId a, CoreId b) const {
        if (!adjacent(a, b)) {
            throw NoLinkError("no BSM link between core " + std::to_string(a.index) + " and core " +
                              std::to_string(b.index));
        }
        return a < b ? BsmLinkId{a, b} : BsmLinkId{b, a};
    }

    // Dense index in [0, link_count()): horizontal links first, then vertical.
    std::size_t link_index(const BsmLinkId& link) const {
        const Coord lo = coord_of(link.lo);
        const Coord hi = coord_of(link.hi);
        if (lo.y == hi.y && hi.x == lo.x + 1) {
            return static_cast<std::size_t>(lo.y) * (width_ - 1) + lo.x;
        }
        if (lo.x == hi.x && hi.y == lo.y + 1) {
            return static_cast<std::size_t>(height_) * (width_ - 1) + static_cast<std::size_t>(lo.y) * width_ + lo.x;
        }
        throw NoLinkError("not a canonical BSM link");
    }

    std::vector<CoreId> neighbors(CoreId c) const {
        const Coord p = coord_of(c);
        std::vector<CoreId> out;
        for (const Coord d : {Coord{0, -1}, Coord{-1, 0}, Coord{1, 0}, Coord{0, 1}}) {
            const Coord q{p.x + d.x, p.y + d.y};
            if (contains(q)) out.push_back(core_at(q));
        }
        return out;
    }

private:
    void check(CoreId c) const {
        if (!contains(c)) {
            throw BoundsError("core " + std::to_string(c.index) + " outside " + std::to_string(width_) + "x" +
                              std::to_string(height_) + " mesh");
        }
    }

    int width_;
    int height_;
};

}  // namespace qnoc

template <>
struct std::hash<qnoc::CoreId> {
    std::size_t operator()(qnoc::CoreId c) const noexcept { return std::hash<std::uint32_t>{}(c.index); }
};
