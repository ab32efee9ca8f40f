#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ocpsps/errors.hpp"

namespace ocpsps {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box. Dataset coordinates are normalized to [0,1]; the
/// geometric operations only require x_min < x_max and y_min < y_max.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

    /// Corner order: (x_min,y_min), (x_max,y_min), (x_max,y_max), (x_min,y_max).
    std::array<Point, 4> corners() const;

    /// Positive width and height.
    bool well_formed() const { return x_min < x_max && y_min < y_max; }
    /// Well formed and inside the unit image.
    bool normalized() const;
};

/// Total order used wherever slots have to be listed deterministically.
bool bbox_less(const BBox& a, const BBox& b);

/// Parking-slot annotation: four ordered keypoints.
struct Quad {
    std::array<Point, 4> keypoints{};

    BBox wrapping_box() const;
    /// True when no two non-adjacent edges cross.
    bool is_simple() const;
    bool contains(const Point& p) const;
};

/// Row-major activation grid with values in [0,1]. Cell (r,c) covers the
/// normalized rectangle [c/w,(c+1)/w] x [r/h,(r+1)/h].
struct GridMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    GridMap() = default;
    GridMap(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}

    double at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
    double& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
    bool well_formed() const;
};

enum class SlotClass { Available, Occupied, Illegal, Restricted };

const char* to_string(SlotClass c);
SlotClass slot_class_from_string(const std::string& s);

/// Intersection area over union area of two well-formed boxes. Symmetric.
double iou(const BBox& a, const BBox& b);

/// Ray-crossing point-in-polygon test for a simple polygon.
bool point_in_polygon(const Point& p, const std::vector<Point>& polygon);

/// Keypoint coverage loss: sum over matched (corner, keypoint) pairs of
/// D(corner, keypoint) / D(corner, center). `matching[i]` is the corner index
/// (see BBox::corners) pulled toward keypoint i; indices must be injective.
/// Throws DegenerateBox when a matched corner coincides with the center.
double size_loss(const BBox& box, const std::vector<Point>& keypoints,
                 const std::vector<int>& matching);

/// Minimal-total-distance injective matching of up to four keypoints onto box
/// corners, brute force over all corner arrangements. Ties break toward the
/// lexicographically lowest corner-index sequence.
std::vector<int> best_corner_matching(const BBox& box, const std::vector<Point>& keypoints);

/// size_loss under best_corner_matching.
double size_loss(const BBox& box, const std::vector<Point>& keypoints);

/// Binary target map: cell = 1 iff the cell center lies inside at least one
/// ground-truth quad.
GridMap mask_target(int height, int width, const std::vector<Quad>& truths);

/// Mean over cells of max(0, |m - c| - eps). Throws ShapeMismatch.
double epsilon_diff(const GridMap& m, const GridMap& c, double eps);

/// Nearest-neighbor upsample of every level to (height, width), then the
/// per-cell maximum across levels. Throws EmptyLevels.
GridMap fuse_levels(const std::vector<GridMap>& levels, int height, int width);

/// Fraction of the box area covered by grid cells with activation
/// >= bin_thresh. Partial cells contribute their exact clipped area.
double box_mask_overlap(const BBox& box, const GridMap& mask, double bin_thresh);

}  // namespace ocpsps
