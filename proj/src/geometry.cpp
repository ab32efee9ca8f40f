#include "ocpsps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ocpsps {

std::array<Point, 4> BBox::corners() const {
    return {Point{x_min, y_min}, Point{x_max, y_min}, Point{x_max, y_max}, Point{x_min, y_max}};
}

bool BBox::normalized() const {
    return well_formed() && x_min >= 0.0 && y_min >= 0.0 && x_max <= 1.0 && y_max <= 1.0;
}

bool bbox_less(const BBox& a, const BBox& b) {
    return std::tie(a.x_min, a.y_min, a.x_max, a.y_max) <
           std::tie(b.x_min, b.y_min, b.x_max, b.y_max);
}

BBox Quad::wrapping_box() const {
    BBox box{keypoints[0].x, keypoints[0].y, keypoints[0].x, keypoints[0].y};
    for (const Point& p : keypoints) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    return box;
}

namespace {

// Proper segment crossing (shared endpoints do not count).
bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto orient = [](const Point& p, const Point& q, const Point& r) {
        double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        if (v > 0) return 1;
        if (v < 0) return -1;
        return 0;
    };
    int o1 = orient(a, b, c);
    int o2 = orient(a, b, d);
    int o3 = orient(c, d, a);
    int o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

bool Quad::is_simple() const {
    // Opposite edge pairs of the 4-gon: (0-1, 2-3) and (1-2, 3-0).
    const auto& k = keypoints;
    if (segments_cross(k[0], k[1], k[2], k[3])) return false;
    if (segments_cross(k[1], k[2], k[3], k[0])) return false;
    return true;
}

bool Quad::contains(const Point& p) const {
    return point_in_polygon(p, {keypoints.begin(), keypoints.end()});
}

bool GridMap::well_formed() const {
    if (height < 1 || width < 1) return false;
    if (values.size() != static_cast<size_t>(height) * width) return false;
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

const char* to_string(SlotClass c) {
    switch (c) {
        case SlotClass::Available: return "available";
        case SlotClass::Occupied: return "occupied";
        case SlotClass::Illegal: return "illegal";
        case SlotClass::Restricted: return "restricted";
    }
    return "available";
}

SlotClass slot_class_from_string(const std::string& s) {
    if (s == "available") return SlotClass::Available;
    if (s == "occupied") return SlotClass::Occupied;
    if (s == "illegal") return SlotClass::Illegal;
    if (s == "restricted") return SlotClass::Restricted;
    throw ParseError("unknown slot class '" + s + "'");
}

double iou(const BBox& a, const BBox& b) {
    double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

bool point_in_polygon(const Point& p, const std::vector<Point>& polygon) {
    bool inside = false;
    size_t n = polygon.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = polygon[i];
        const Point& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

double dist(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

double size_loss(const BBox& box, const std::vector<Point>& keypoints,
                 const std::vector<int>& matching) {
    if (keypoints.empty() || keypoints.size() > 4)
        throw Error("size_loss expects 1..4 keypoints, got " + std::to_string(keypoints.size()));
    if (matching.size() != keypoints.size())
        throw Error("matching size does not match keypoint count");
    std::array<bool, 4> used{};
    for (int idx : matching) {
        if (idx < 0 || idx > 3) throw Error("corner index out of range");
        if (used[idx]) throw Error("matching must be injective");
        used[idx] = true;
    }
    const auto corners = box.corners();
    const Point center = box.center();
    double total = 0.0;
    for (size_t i = 0; i < keypoints.size(); ++i) {
        const Point& corner = corners[static_cast<size_t>(matching[i])];
        double d_pc = dist(corner, center);
        if (d_pc == 0.0) throw DegenerateBox("box corner coincides with its center");
        total += dist(corner, keypoints[i]) / d_pc;
    }
    return total;
}

std::vector<int> best_corner_matching(const BBox& box, const std::vector<Point>& keypoints) {
    if (keypoints.empty() || keypoints.size() > 4)
        throw Error("size_loss expects 1..4 keypoints, got " + std::to_string(keypoints.size()));
    const auto corners = box.corners();
    const size_t n = keypoints.size();

    std::vector<int> best;
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<int> current(n, -1);
    std::array<bool, 4> used{};

    // <= 4!/(4-n)! arrangements; candidates are generated in lexicographic
    // order so the first minimum wins the tie-break.
    auto recurse = [&](auto&& self, size_t i, double total) -> void {
        if (total >= best_total) return;
        if (i == n) {
            best = current;
            best_total = total;
            return;
        }
        for (int c = 0; c < 4; ++c) {
            if (used[c]) continue;
            used[c] = true;
            current[i] = c;
            self(self, i + 1, total + dist(corners[static_cast<size_t>(c)], keypoints[i]));
            used[c] = false;
        }
    };
    recurse(recurse, 0, 0.0);
    return best;
}

double size_loss(const BBox& box, const std::vector<Point>& keypoints) {
    return size_loss(box, keypoints, best_corner_matching(box, keypoints));
}

GridMap mask_target(int height, int width, const std::vector<Quad>& truths) {
    if (height < 1 || width < 1) throw Error("mask_target needs a positive grid shape");
    GridMap map(height, width, 0.0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            Point center{(c + 0.5) / width, (r + 0.5) / height};
            for (const Quad& q : truths) {
                if (q.contains(center)) {
                    map.at(r, c) = 1.0;
                    break;
                }
            }
        }
    }
    return map;
}

double epsilon_diff(const GridMap& m, const GridMap& c, double eps) {
    if (m.height != c.height || m.width != c.width)
        throw ShapeMismatch("epsilon_diff requires equal-shape maps");
    if (m.values.empty()) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < m.values.size(); ++i) {
        total += std::max(0.0, std::abs(m.values[i] - c.values[i]) - eps);
    }
    return total / static_cast<double>(m.values.size());
}

GridMap fuse_levels(const std::vector<GridMap>& levels, int height, int width) {
    if (levels.empty()) throw EmptyLevels("fuse_levels requires at least one level");
    if (height < 1 || width < 1) throw Error("fuse_levels needs a positive resolution");
    GridMap fused(height, width, 0.0);
    for (const GridMap& level : levels) {
        for (int r = 0; r < height; ++r) {
            int sr = static_cast<int>(static_cast<long long>(r) * level.height / height);
            for (int c = 0; c < width; ++c) {
                int sc = static_cast<int>(static_cast<long long>(c) * level.width / width);
                fused.at(r, c) = std::max(fused.at(r, c), level.at(sr, sc));
            }
        }
    }
    return fused;
}

double box_mask_overlap(const BBox& box, const GridMap& mask, double bin_thresh) {
    double box_area = box.area();
    if (box_area <= 0.0) return 0.0;
    double cell_w = 1.0 / mask.width;
    double cell_h = 1.0 / mask.height;

    int r_lo = std::max(0, static_cast<int>(std::floor(box.y_min / cell_h)));
    int r_hi = std::min(mask.height - 1, static_cast<int>(std::floor(box.y_max / cell_h)));
    int c_lo = std::max(0, static_cast<int>(std::floor(box.x_min / cell_w)));
    int c_hi = std::min(mask.width - 1, static_cast<int>(std::floor(box.x_max / cell_w)));

    double covered = 0.0;
    for (int r = r_lo; r <= r_hi; ++r) {
        double cy0 = r * cell_h, cy1 = (r + 1) * cell_h;
        double iy = std::min(box.y_max, cy1) - std::max(box.y_min, cy0);
        if (iy <= 0.0) continue;
        for (int c = c_lo; c <= c_hi; ++c) {
            if (mask.at(r, c) < bin_thresh) continue;
            double cx0 = c * cell_w, cx1 = (c + 1) * cell_w;
            double ix = std::min(box.x_max, cx1) - std::max(box.x_min, cx0);
            if (ix > 0.0) covered += ix * iy;
        }
    }
    return std::clamp(covered / box_area, 0.0, 1.0);
}

}  // namespace ocpsps
