#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "ocpsps/geometry.hpp"

namespace ocpsps::test {

inline BBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double x0 = unit(rng) * 0.9;
    double y0 = unit(rng) * 0.9;
    double x1 = x0 + 0.01 + unit(rng) * (1.0 - x0 - 0.01);
    double y1 = y0 + 0.01 + unit(rng) * (1.0 - y0 - 0.01);
    return {x0, y0, x1, y1};
}

inline GridMap random_grid(std::mt19937_64& rng, int max_dim = 8) {
    std::uniform_int_distribution<int> dim(1, max_dim);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GridMap map(dim(rng), dim(rng));
    for (double& v : map.values) v = unit(rng);
    return map;
}

/// Axis-aligned rectangle as a quad.
inline Quad rect_quad(double x0, double y0, double x1, double y1) {
    Quad q;
    q.keypoints = {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}};
    return q;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ocpsps_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace ocpsps::test
