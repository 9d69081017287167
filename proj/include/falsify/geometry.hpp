#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace falsify {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        double n = norm();
        return n > 1e-12 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    Vec2 rotated(double angle) const {
        double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
};

// Normalizes an angle into (-pi, pi].
inline double normalize_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // radians, (-pi, pi]

    Vec2 position() const { return {x, y}; }
    Vec2 heading_vec() const { return {std::cos(heading), std::sin(heading)}; }
};

// Axis-aligned rectangle given by its corners.
struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    bool contains(const Vec2& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    Vec2 clamp(const Vec2& p) const {
        return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
    }
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

inline double point_segment_distance(const Vec2& p, const Segment& s) {
    Vec2 d = s.b - s.a;
    double len2 = d.dot(d);
    if (len2 < 1e-18) return (p - s.a).norm();
    double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
    return (p - (s.a + d * t)).norm();
}

// Closest point on a centered axis-aligned box of half extents (hx, hy)
// to a point given in the box frame.
inline Vec2 closest_point_on_box(const Vec2& p, double hx, double hy) {
    return {std::clamp(p.x, -hx, hx), std::clamp(p.y, -hy, hy)};
}

// Distance from a point (in box frame) to the box boundary/interior; 0 inside.
inline double point_box_distance(const Vec2& p, double hx, double hy) {
    return (p - closest_point_on_box(p, hx, hy)).norm();
}

}  // namespace falsify
