#include "ocpsps/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

namespace {

std::string idx(const std::string& base, size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const json& require(const json& record, const std::string& key, int line) {
    auto it = record.find(key);
    if (it == record.end()) throw ParseError("missing field '" + key + "'", line);
    return *it;
}

double require_number(const json& record, const std::string& key, int line) {
    const json& v = require(record, key, line);
    if (!v.is_number()) throw ParseError("field '" + key + "' must be a number", line);
    return v.get<double>();
}

std::string require_string(const json& record, const std::string& key, int line) {
    const json& v = require(record, key, line);
    if (!v.is_string()) throw ParseError("field '" + key + "' must be a string", line);
    return v.get<std::string>();
}

BBox parse_bbox(const json& v, const std::string& path, int line) {
    if (!v.is_array() || v.size() != 4)
        throw ParseError("field '" + path + "' must be [x_min,y_min,x_max,y_max]", line);
    BBox box{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
    if (!box.normalized())
        throw InvariantViolation(path, "box must satisfy x_min<x_max, y_min<y_max within [0,1]");
    return box;
}

Quad parse_quad(const json& v, const std::string& path, int line) {
    if (!v.is_array() || v.size() != 4)
        throw ParseError("field '" + path + "' must hold 4 keypoints", line);
    Quad q;
    for (size_t i = 0; i < 4; ++i) {
        const json& p = v[i];
        if (!p.is_array() || p.size() != 2)
            throw ParseError("field '" + idx(path, i) + "' must be [x,y]", line);
        q.keypoints[i] = {p[0].get<double>(), p[1].get<double>()};
    }
    if (!q.is_simple()) throw InvariantViolation(path, "quad must be a simple polygon");
    if (!q.wrapping_box().normalized())
        throw InvariantViolation(path, "quad wrapping box must be a valid normalized box");
    return q;
}

GridMap parse_grid(const json& v, const std::string& path, int line) {
    GridMap map;
    map.height = static_cast<int>(require_number(v, "h", line));
    map.width = static_cast<int>(require_number(v, "w", line));
    const json& values = require(v, "values", line);
    if (!values.is_array()) throw ParseError("field '" + path + ".values' must be an array", line);
    map.values.reserve(values.size());
    for (const auto& x : values) map.values.push_back(x.get<double>());
    if (!map.well_formed())
        throw InvariantViolation(path, "grid must have h*w values, each within [0,1]");
    return map;
}

bool polygon_simple(const Polygon& poly) {
    if (poly.size() < 3) return false;
    auto orient = [](const Point& p, const Point& q, const Point& r) {
        double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (and the closing pair)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Point &a = poly[i], &b = poly[(i + 1) % n];
            const Point &c = poly[j], &d = poly[(j + 1) % n];
            int o1 = orient(a, b, c), o2 = orient(a, b, d);
            int o3 = orient(c, d, a), o4 = orient(c, d, b);
            if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return false;
        }
    }
    return true;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

json parse_line(const std::string& line, int line_no) {
    try {
        return json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
}

json bbox_json(const BBox& b) {
    return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

json quad_json(const Quad& q) {
    json arr = json::array();
    for (const Point& p : q.keypoints) arr.push_back(json::array({p.x, p.y}));
    return arr;
}

}  // namespace

double TrafficFeed::factor(int day, int hour, const std::string& lot_id) const {
    auto it = factors.find({day, hour, lot_id});
    return it == factors.end() ? 1.0 : it->second;
}

std::vector<FrameInference> load_frames(const std::filesystem::path& path) {
    std::vector<FrameInference> frames;
    auto lines = read_lines(path);
    for (size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        int line_no = static_cast<int>(li + 1);
        json record = parse_line(lines[li], line_no);

        FrameInference frame;
        frame.frame_id = require_string(record, "frame_id", line_no);
        if (frame.frame_id.empty()) throw InvariantViolation("frame_id", "must be non-empty");
        frame.lot_id = require_string(record, "lot_id", line_no);
        frame.sector_id = require_string(record, "sector_id", line_no);
        if (frame.sector_id.empty()) throw InvariantViolation("sector_id", "must be non-empty");
        frame.timestamp = static_cast<std::int64_t>(require_number(record, "timestamp", line_no));

        const json& dets = require(record, "detections", line_no);
        if (!dets.is_array()) throw ParseError("field 'detections' must be an array", line_no);
        for (size_t i = 0; i < dets.size(); ++i) {
            const json& d = dets[i];
            Detection det;
            det.bbox = parse_bbox(require(d, "bbox", line_no), idx("detections", i) + ".bbox", line_no);
            det.slot_class = slot_class_from_string(require_string(d, "class", line_no));
            det.score = require_number(d, "score", line_no);
            if (det.score < 0.0 || det.score > 1.0)
                throw InvariantViolation(idx("detections", i) + ".score", "score must be in [0,1]");
            if (d.contains("keypoints") && !d["keypoints"].is_null())
                det.keypoints = parse_quad(d["keypoints"], idx("detections", i) + ".keypoints", line_no);
            frame.detections.push_back(std::move(det));
        }

        if (record.contains("soft_mask")) {
            const json& levels = record["soft_mask"];
            if (!levels.is_array()) throw ParseError("field 'soft_mask' must be an array", line_no);
            for (size_t i = 0; i < levels.size(); ++i)
                frame.soft_mask_levels.push_back(parse_grid(levels[i], idx("soft_mask", i), line_no));
        }

        frame.predicted_loss = require_number(record, "predicted_loss", line_no);
        if (frame.predicted_loss < 0.0)
            throw InvariantViolation("predicted_loss", "must be nonnegative");

        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path) {
    std::vector<GroundTruthFrame> truths;
    auto lines = read_lines(path);
    for (size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        int line_no = static_cast<int>(li + 1);
        json record = parse_line(lines[li], line_no);

        GroundTruthFrame gt;
        gt.frame_id = require_string(record, "frame_id", line_no);
        if (gt.frame_id.empty()) throw InvariantViolation("frame_id", "must be non-empty");
        gt.lot_id = require_string(record, "lot_id", line_no);
        gt.sector_id = require_string(record, "sector_id", line_no);

        const json& labels = require(record, "labels", line_no);
        if (!labels.is_array()) throw ParseError("field 'labels' must be an array", line_no);
        for (size_t i = 0; i < labels.size(); ++i) {
            const json& l = labels[i];
            Quad q = parse_quad(require(l, "keypoints", line_no), idx("labels", i) + ".keypoints", line_no);
            SlotClass cls = slot_class_from_string(require_string(l, "class", line_no));
            gt.labels.emplace_back(q, cls);
        }

        if (record.contains("overlap_mask") && !record["overlap_mask"].is_null()) {
            const json& polys = record["overlap_mask"];
            if (!polys.is_array()) throw ParseError("field 'overlap_mask' must be an array", line_no);
            std::vector<Polygon> mask;
            for (size_t i = 0; i < polys.size(); ++i) {
                Polygon poly;
                for (const auto& p : polys[i]) poly.push_back({p[0].get<double>(), p[1].get<double>()});
                if (!polygon_simple(poly))
                    throw InvariantViolation(idx("overlap_mask", i), "mask polygon must be simple");
                mask.push_back(std::move(poly));
            }
            gt.overlap_mask = std::move(mask);
        }

        truths.push_back(std::move(gt));
    }
    return truths;
}

std::vector<ParkingLot> load_lots(const std::filesystem::path& path) {
    json arr = read_json_file(path);
    if (!arr.is_array()) throw ParseError("lots file must hold an array");
    std::vector<ParkingLot> lots;
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& l = arr[i];
        ParkingLot lot;
        lot.lot_id = require_string(l, "lot_id", 0);
        const json& gps = require(l, "gps", 0);
        if (!gps.is_array() || gps.size() != 2)
            throw ParseError("field '" + idx("lots", i) + ".gps' must be [lat,lon]");
        lot.gps_lat = gps[0].get<double>();
        lot.gps_lon = gps[1].get<double>();
        if (lot.gps_lat < -90.0 || lot.gps_lat > 90.0 || lot.gps_lon < -180.0 || lot.gps_lon > 180.0)
            throw InvariantViolation(idx("lots", i) + ".gps", "lat in [-90,90], lon in [-180,180]");
        lot.price = require_number(l, "price", 0);
        lot.capacity = static_cast<int>(require_number(l, "capacity", 0));
        if (lot.capacity < 1)
            throw InvariantViolation(idx("lots", i) + ".capacity", "capacity must be >= 1");
        if (l.contains("sectors"))
            for (const auto& s : l["sectors"]) lot.sectors.push_back(s.get<std::string>());
        lots.push_back(std::move(lot));
    }
    return lots;
}

TrafficFeed load_traffic(const std::filesystem::path& path) {
    json arr = read_json_file(path);
    if (!arr.is_array()) throw ParseError("traffic file must hold an array");
    TrafficFeed feed;
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& r = arr[i];
        int day = static_cast<int>(require_number(r, "day", 0));
        int hour = static_cast<int>(require_number(r, "hour", 0));
        std::string lot = require_string(r, "lot_id", 0);
        double factor = require_number(r, "factor", 0);
        if (factor < 0.0)
            throw InvariantViolation(idx("traffic", i) + ".factor", "factor must be >= 0");
        feed.factors[{day, hour, lot}] = factor;
    }
    return feed;
}

namespace {

json frame_json(const FrameInference& frame) {
    json record;
    record["frame_id"] = frame.frame_id;
    record["lot_id"] = frame.lot_id;
    record["sector_id"] = frame.sector_id;
    record["timestamp"] = frame.timestamp;
    json dets = json::array();
    for (const Detection& d : frame.detections) {
        json dj;
        dj["bbox"] = bbox_json(d.bbox);
        dj["class"] = to_string(d.slot_class);
        dj["score"] = d.score;
        if (d.keypoints) dj["keypoints"] = quad_json(*d.keypoints);
        dets.push_back(std::move(dj));
    }
    record["detections"] = std::move(dets);
    json levels = json::array();
    for (const GridMap& m : frame.soft_mask_levels) {
        json mj;
        mj["h"] = m.height;
        mj["w"] = m.width;
        mj["values"] = m.values;
        levels.push_back(std::move(mj));
    }
    record["soft_mask"] = std::move(levels);
    record["predicted_loss"] = frame.predicted_loss;
    return record;
}

json ground_truth_json(const GroundTruthFrame& gt) {
    json record;
    record["frame_id"] = gt.frame_id;
    record["lot_id"] = gt.lot_id;
    record["sector_id"] = gt.sector_id;
    json labels = json::array();
    for (const auto& [quad, cls] : gt.labels) {
        json lj;
        lj["keypoints"] = quad_json(quad);
        lj["class"] = to_string(cls);
        labels.push_back(std::move(lj));
    }
    record["labels"] = std::move(labels);
    if (gt.overlap_mask) {
        json polys = json::array();
        for (const Polygon& poly : *gt.overlap_mask) {
            json pj = json::array();
            for (const Point& p : poly) pj.push_back(json::array({p.x, p.y}));
            polys.push_back(std::move(pj));
        }
        record["overlap_mask"] = std::move(polys);
    }
    return record;
}

}  // namespace

std::vector<std::string> serialize_frames(const std::vector<FrameInference>& frames) {
    std::vector<std::string> lines;
    lines.reserve(frames.size());
    for (const FrameInference& f : frames) lines.push_back(dump_canonical(frame_json(f)));
    return lines;
}

std::vector<std::string> serialize_ground_truth(const std::vector<GroundTruthFrame>& truths) {
    std::vector<std::string> lines;
    lines.reserve(truths.size());
    for (const GroundTruthFrame& gt : truths) lines.push_back(dump_canonical(ground_truth_json(gt)));
    return lines;
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::ostringstream out;
    for (const std::string& line : lines) out << line << '\n';
    return out.str();
}

}  // namespace

void write_frames(const std::vector<FrameInference>& frames, const std::filesystem::path& path) {
    atomic_write(path, join_lines(serialize_frames(frames)));
}

void write_ground_truth(const std::vector<GroundTruthFrame>& truths,
                        const std::filesystem::path& path) {
    atomic_write(path, join_lines(serialize_ground_truth(truths)));
}

void write_lots(const std::vector<ParkingLot>& lots, const std::filesystem::path& path) {
    json arr = json::array();
    for (const ParkingLot& lot : lots) {
        json lj;
        lj["lot_id"] = lot.lot_id;
        lj["gps"] = json::array({lot.gps_lat, lot.gps_lon});
        lj["price"] = lot.price;
        lj["capacity"] = lot.capacity;
        lj["sectors"] = lot.sectors;
        arr.push_back(std::move(lj));
    }
    atomic_write(path, dump_canonical(arr, 2) + "\n");
}

void write_traffic(const TrafficFeed& traffic, const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& [key, factor] : traffic.factors) {
        json tj;
        tj["day"] = std::get<0>(key);
        tj["hour"] = std::get<1>(key);
        tj["lot_id"] = std::get<2>(key);
        tj["factor"] = factor;
        arr.push_back(std::move(tj));
    }
    atomic_write(path, dump_canonical(arr, 2) + "\n");
}

FrameInference apply_overlap_mask(const FrameInference& frame, const GroundTruthFrame& gt) {
    if (frame.frame_id != gt.frame_id)
        throw FrameMismatch("overlap mask for frame '" + gt.frame_id +
                            "' applied to frame '" + frame.frame_id + "'");
    if (!gt.overlap_mask) return frame;
    FrameInference out = frame;
    out.detections.clear();
    for (const Detection& d : frame.detections) {
        Point center = d.bbox.center();
        bool masked = false;
        for (const Polygon& poly : *gt.overlap_mask) {
            if (point_in_polygon(center, poly)) {
                masked = true;
                break;
            }
        }
        if (!masked) out.detections.push_back(d);
    }
    return out;
}

GroundTruthFrame mask_ground_truth(const GroundTruthFrame& gt) {
    if (!gt.overlap_mask) return gt;
    GroundTruthFrame out = gt;
    out.labels.clear();
    for (const auto& label : gt.labels) {
        Point center = label.first.wrapping_box().center();
        bool masked = false;
        for (const Polygon& poly : *gt.overlap_mask) {
            if (point_in_polygon(center, poly)) {
                masked = true;
                break;
            }
        }
        if (!masked) out.labels.push_back(label);
    }
    return out;
}

ValidationReport validate_dataset(const std::vector<FrameInference>& frames,
                                  const std::vector<GroundTruthFrame>& truths,
                                  const std::vector<ParkingLot>& lots) {
    ValidationReport report;
    report.class_histogram = {{SlotClass::Available, 0},
                              {SlotClass::Occupied, 0},
                              {SlotClass::Illegal, 0},
                              {SlotClass::Restricted, 0}};

    std::map<std::string, const ParkingLot*> lot_index;
    for (const ParkingLot& lot : lots) lot_index[lot.lot_id] = &lot;

    std::set<std::string> truth_ids;
    std::set<std::string> frame_ids;
    for (const GroundTruthFrame& gt : truths) {
        if (!truth_ids.insert(gt.frame_id).second)
            report.findings.push_back({"duplicate_frame", gt.frame_id, "duplicate ground-truth frame_id"});
        for (const auto& [quad, cls] : gt.labels) report.class_histogram[cls]++;
    }
    for (const FrameInference& f : frames) {
        if (!frame_ids.insert(f.frame_id).second)
            report.findings.push_back({"duplicate_frame", f.frame_id, "duplicate detection frame_id"});
    }

    auto check_location = [&](const std::string& frame_id, const std::string& lot_id,
                              const std::string& sector_id) {
        auto it = lot_index.find(lot_id);
        if (it == lot_index.end()) {
            report.findings.push_back({"unknown_lot", frame_id, "lot '" + lot_id + "' is not registered"});
            return;
        }
        const auto& sectors = it->second->sectors;
        if (!sectors.empty() &&
            std::find(sectors.begin(), sectors.end(), sector_id) == sectors.end()) {
            report.findings.push_back(
                {"unknown_sector", frame_id, "sector '" + sector_id + "' is not listed for lot '" + lot_id + "'"});
        }
    };

    for (const FrameInference& f : frames) {
        if (!truth_ids.count(f.frame_id))
            report.findings.push_back({"orphan_frame", f.frame_id, "detection frame has no ground truth"});
        check_location(f.frame_id, f.lot_id, f.sector_id);
    }
    for (const GroundTruthFrame& gt : truths) {
        if (!frames.empty() && !frame_ids.count(gt.frame_id))
            report.findings.push_back({"orphan_truth", gt.frame_id, "ground-truth frame has no detections record"});
        check_location(gt.frame_id, gt.lot_id, gt.sector_id);
    }
    return report;
}

}  // namespace ocpsps
