#include "ocpsps/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ocpsps {

namespace {

// Slot rectangles for one sector, laid out as a 2 x ceil(n/2) grid with
// margins. Areas stay well above the medium-size cutoff.
std::vector<Quad> sector_layout(int slots) {
    std::vector<Quad> quads;
    int cols = (slots + 1) / 2;
    int rows = slots <= 1 ? 1 : 2;
    double margin = 0.06;
    double cell_w = (1.0 - 2 * margin) / cols;
    double cell_h = (1.0 - 2 * margin) / rows;
    for (int k = 0; k < slots; ++k) {
        int r = k / cols, c = k % cols;
        double x0 = margin + c * cell_w + 0.1 * cell_w;
        double x1 = margin + (c + 1) * cell_w - 0.1 * cell_w;
        double y0 = margin + r * cell_h + 0.1 * cell_h;
        double y1 = margin + (r + 1) * cell_h - 0.1 * cell_h;
        Quad q;
        q.keypoints = {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}};
        quads.push_back(q);
    }
    return quads;
}

// Activation covers every cell touching a slot box, so a perfect detection
// overlaps the fused map completely.
GridMap dilated_mask(int height, int width, const std::vector<Quad>& quads) {
    GridMap map(height, width, 0.0);
    for (int r = 0; r < height; ++r) {
        double cy0 = static_cast<double>(r) / height, cy1 = static_cast<double>(r + 1) / height;
        for (int c = 0; c < width; ++c) {
            double cx0 = static_cast<double>(c) / width, cx1 = static_cast<double>(c + 1) / width;
            for (const Quad& q : quads) {
                BBox box = q.wrapping_box();
                if (cx1 > box.x_min && cx0 < box.x_max && cy1 > box.y_min && cy0 < box.y_max) {
                    map.at(r, c) = 1.0;
                    break;
                }
            }
        }
    }
    return map;
}

}  // namespace

SimDataset make_synthetic_dataset(const SyntheticConfig& cfg) {
    SimDataset dataset;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> occupied_fraction(cfg.occupied_fraction_lo,
                                                             cfg.occupied_fraction_hi);
    std::uniform_real_distribution<double> traffic(0.85, 1.2);

    // Lots on a ring around a city block, distinct prices.
    for (int i = 0; i < cfg.lots; ++i) {
        ParkingLot lot;
        lot.lot_id = "L" + std::to_string(i);
        double angle = 2.0 * 3.14159265358979323846 * i / std::max(1, cfg.lots);
        lot.gps_lat = 37.45 + 0.012 * std::sin(angle);
        lot.gps_lon = 126.95 + 0.012 * std::cos(angle);
        lot.price = 1.0 + 0.5 * i;
        lot.capacity = cfg.sectors_per_lot * cfg.slots_per_sector;
        for (int s = 0; s < cfg.sectors_per_lot; ++s)
            lot.sectors.push_back(lot.lot_id + "_s" + std::to_string(s));
        dataset.lots.push_back(std::move(lot));
    }

    const std::vector<Quad> layout = sector_layout(cfg.slots_per_sector);

    for (int day = 0; day < cfg.days; ++day) {
        for (int hour = cfg.start_hour; hour < cfg.end_hour; ++hour) {
            std::int64_t ts = static_cast<std::int64_t>(day) * 86400 +
                              static_cast<std::int64_t>(hour) * 3600;
            for (const ParkingLot& lot : dataset.lots) {
                dataset.traffic.factors[{day, hour, lot.lot_id}] = traffic(rng);
                for (const std::string& sector_id : lot.sectors) {
                    std::ostringstream frame_id;
                    frame_id << "d" << day << "h" << hour << "_" << sector_id;

                    GroundTruthFrame gt;
                    gt.frame_id = frame_id.str();
                    gt.lot_id = lot.lot_id;
                    gt.sector_id = sector_id;
                    double frac = occupied_fraction(rng);
                    int available = 0;
                    for (const Quad& quad : layout) {
                        bool occupied = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < frac;
                        SlotClass cls = occupied ? SlotClass::Occupied : SlotClass::Available;
                        if (!occupied) ++available;
                        gt.labels.emplace_back(quad, cls);
                    }
                    if (available == 0) {
                        // Keep at least one bookable slot per sector.
                        gt.labels.back().second = SlotClass::Available;
                    }
                    if (cfg.with_overlap_masks) {
                        // Left strip removing the first layout column.
                        Polygon strip{{0.0, 0.0}, {0.25, 0.0}, {0.25, 1.0}, {0.0, 1.0}};
                        gt.overlap_mask = std::vector<Polygon>{strip};
                    }

                    FrameInference pred;
                    pred.frame_id = gt.frame_id;
                    pred.lot_id = gt.lot_id;
                    pred.sector_id = gt.sector_id;
                    pred.timestamp = ts;
                    for (const auto& [quad, cls] : gt.labels) {
                        Detection det;
                        det.bbox = quad.wrapping_box();
                        det.slot_class = cls;
                        det.score = cfg.detection_score;
                        det.keypoints = quad;
                        pred.detections.push_back(std::move(det));
                    }
                    std::vector<Quad> quads;
                    for (const auto& [quad, cls] : gt.labels) quads.push_back(quad);
                    pred.soft_mask_levels.push_back(dilated_mask(cfg.mask_height, cfg.mask_width, quads));
                    pred.soft_mask_levels.push_back(
                        dilated_mask(cfg.mask_height / 2, cfg.mask_width / 2, quads));
                    pred.predicted_loss = cfg.predicted_loss;

                    dataset.truths.push_back(std::move(gt));
                    dataset.predictions.push_back(std::move(pred));
                }
            }
        }
    }
    return dataset;
}

std::vector<FrameInference> corrupt_detections(const std::vector<FrameInference>& frames,
                                               double rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<FrameInference> out;
    out.reserve(frames.size());
    for (const FrameInference& frame : frames) {
        FrameInference corrupted = frame;
        corrupted.detections.clear();
        for (const Detection& det : frame.detections) {
            if (unit(rng) < rate) {
                if (unit(rng) < 0.5) continue;  // dropped
                Detection flipped = det;
                if (flipped.slot_class == SlotClass::Available)
                    flipped.slot_class = SlotClass::Occupied;
                else if (flipped.slot_class == SlotClass::Occupied)
                    flipped.slot_class = SlotClass::Available;
                corrupted.detections.push_back(std::move(flipped));
            } else {
                corrupted.detections.push_back(det);
            }
        }
        out.push_back(std::move(corrupted));
    }
    return out;
}

}  // namespace ocpsps
