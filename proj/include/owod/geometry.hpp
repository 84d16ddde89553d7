#pragma once

#include <algorithm>

namespace owod {

/// Axis-aligned box in continuous pixel coordinates, corner convention
/// (x_min, y_min, x_max, y_max).  area = (x_max-x_min)*(y_max-y_min); there
/// is no legacy "+1" pixel correction.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool valid() const { return x_max >= x_min && y_max >= y_min; }

    BBox translated(double dx, double dy) const {
        return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
    }

    /// Builds a box from COCO [x, y, w, h] encoding.
    static BBox from_xywh(double x, double y, double w, double h) {
        return {x, y, x + w, y + h};
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

inline double intersection_area(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

/// Intersection-over-union (Jaccard index).  Zero-area union yields 0.
inline double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace owod
