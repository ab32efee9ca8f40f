#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ocpsps/geometry.hpp"

namespace ocpsps {

struct Detection {
    BBox bbox;
    SlotClass slot_class = SlotClass::Available;
    double score = 0.0;
    std::optional<Quad> keypoints;
};

/// One camera frame as collected from a detector: detections, the per-level
/// soft-mask activations of the spatial head, and the raw predicted training
/// loss of the error head.
struct FrameInference {
    std::string frame_id;
    std::string lot_id;
    std::string sector_id;
    std::int64_t timestamp = 0;
    std::vector<Detection> detections;
    std::vector<GridMap> soft_mask_levels;
    double predicted_loss = 0.0;

    int hour_of_day() const { return static_cast<int>((timestamp % 86400) / 3600); }
    int day_index() const { return static_cast<int>(timestamp / 86400); }
};

using Polygon = std::vector<Point>;

struct GroundTruthFrame {
    std::string frame_id;
    std::string lot_id;
    std::string sector_id;
    std::vector<std::pair<Quad, SlotClass>> labels;
    std::optional<std::vector<Polygon>> overlap_mask;
};

struct ParkingLot {
    std::string lot_id;
    double gps_lat = 0.0;
    double gps_lon = 0.0;
    double price = 0.0;  // currency units per hour
    int capacity = 1;
    std::vector<std::string> sectors;
};

/// (day, hour, lot) -> travel-time factor. Missing entries read as 1.0.
struct TrafficFeed {
    std::map<std::tuple<int, int, std::string>, double> factors;

    double factor(int day, int hour, const std::string& lot_id) const;
};

struct Finding {
    std::string kind;     // "orphan_frame" | "unknown_lot" | "unknown_sector" | ...
    std::string subject;  // frame_id / lot_id / sector_id
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    std::map<SlotClass, std::int64_t> class_histogram;

    bool ok() const { return findings.empty(); }
};

// ---- file I/O (formats documented in the README) ----

std::vector<FrameInference> load_frames(const std::filesystem::path& path);
std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path);
std::vector<ParkingLot> load_lots(const std::filesystem::path& path);
TrafficFeed load_traffic(const std::filesystem::path& path);
std::vector<std::string> serialize_frames(const std::vector<FrameInference>& frames);
std::vector<std::string> serialize_ground_truth(const std::vector<GroundTruthFrame>& truths);
void write_frames(const std::vector<FrameInference>& frames, const std::filesystem::path& path);
void write_ground_truth(const std::vector<GroundTruthFrame>& truths, const std::filesystem::path& path);
void write_lots(const std::vector<ParkingLot>& lots, const std::filesystem::path& path);
void write_traffic(const TrafficFeed& traffic, const std::filesystem::path& path);

/// Removes every detection whose bbox center lies inside any overlap-mask
/// polygon of the matching ground-truth frame. No-op without a mask.
/// Throws FrameMismatch when frame ids differ.
FrameInference apply_overlap_mask(const FrameInference& frame, const GroundTruthFrame& gt);

/// Same rule applied to the ground-truth labels themselves (the label's
/// wrapping-box center decides).
GroundTruthFrame mask_ground_truth(const GroundTruthFrame& gt);

ValidationReport validate_dataset(const std::vector<FrameInference>& frames,
                                  const std::vector<GroundTruthFrame>& truths,
                                  const std::vector<ParkingLot>& lots);

}  // namespace ocpsps
