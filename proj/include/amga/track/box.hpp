#pragma once

#include <cmath>

namespace amga::track {

/// Axis-aligned box: top-left corner plus size, in pixels. Pixel i covers [i, i+1).
struct Box {
    double x = 0, y = 0, w = 0, h = 0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    double diagonal() const { return std::hypot(w, h); }

    static Box centered(double cx, double cy, double w, double h) { return {cx - w / 2.0, cy - h / 2.0, w, h}; }
    bool operator==(const Box&) const = default;
};

inline double iou(const Box& a, const Box& b)
{
    const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double center_error(const Box& a, const Box& b) { return std::hypot(a.cx() - b.cx(), a.cy() - b.cy()); }

} // namespace amga::track
