#pragma once

#include <algorithm>
#include <cmath>

namespace railsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    Vec2 normalized() const {
        double n = norm();
        return n > 1e-12 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    Vec2 rotated(double rad) const {
        double c = std::cos(rad), s = std::sin(rad);
        return {c * x - s * y, s * x + c * y};
    }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Segment {
    Vec2 a;
    Vec2 b;

    double length() const { return distance(a, b); }
    Vec2 closest_point(Vec2 p) const {
        Vec2 d = b - a;
        double l2 = d.norm2();
        if (l2 < 1e-18) return a;
        double t = std::clamp((p - a).dot(d) / l2, 0.0, 1.0);
        return a + d * t;
    }
    double distance_to(Vec2 p) const { return distance(p, closest_point(p)); }
};

// Proper or touching intersection of two segments.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    double d1 = cross(q1, q2, p1);
    double d2 = cross(q1, q2, p2);
    double d3 = cross(p1, p2, q1);
    double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [&](Vec2 a, Vec2 b, Vec2 c, double d) {
        return d == 0.0 && std::min(a.x, b.x) - 1e-12 <= c.x && c.x <= std::max(a.x, b.x) + 1e-12 &&
               std::min(a.y, b.y) - 1e-12 <= c.y && c.y <= std::max(a.y, b.y) + 1e-12;
    };
    return on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4);
}

// Axis-aligned rectangle, [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool contains(Vec2 p, double eps = 1e-9) const {
        return p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Vec2 center() const { return {(x0 + x1) * 0.5, (y0 + y1) * 0.5}; }
};

}  // namespace railsim
