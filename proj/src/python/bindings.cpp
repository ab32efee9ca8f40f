#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ocpsps/json_io.hpp"
#include "ocpsps/metrics.hpp"
#include "ocpsps/sim.hpp"
#include "ocpsps/synthetic.hpp"

namespace py = pybind11;
using namespace ocpsps;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

}  // namespace

PYBIND11_MODULE(_ocpsps, m) {
    m.doc() = "Smart-camera parking pipeline: geometry and filter math, occupancy store, "
              "Hungarian assignment, detection metrics and the closed-loop simulation";

    py::register_exception<Error>(m, "OcpspsError");

    py::class_<Point>(m, "Point")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &Point::x)
        .def_readwrite("y", &Point::y);

    py::class_<BBox>(m, "BBox")
        .def(py::init<double, double, double, double>(), py::arg("x_min") = 0.0,
             py::arg("y_min") = 0.0, py::arg("x_max") = 0.0, py::arg("y_max") = 0.0)
        .def_readwrite("x_min", &BBox::x_min)
        .def_readwrite("y_min", &BBox::y_min)
        .def_readwrite("x_max", &BBox::x_max)
        .def_readwrite("y_max", &BBox::y_max)
        .def("area", &BBox::area)
        .def("well_formed", &BBox::well_formed)
        .def("normalized", &BBox::normalized);

    py::class_<Quad>(m, "Quad")
        .def(py::init([](const std::vector<std::pair<double, double>>& points) {
                 if (points.size() != 4) throw Error("Quad needs exactly 4 keypoints");
                 Quad q;
                 for (size_t i = 0; i < 4; ++i) q.keypoints[i] = {points[i].first, points[i].second};
                 return q;
             }),
             py::arg("keypoints"))
        .def("wrapping_box", &Quad::wrapping_box)
        .def("is_simple", &Quad::is_simple)
        .def("contains", [](const Quad& q, double x, double y) { return q.contains({x, y}); });

    py::class_<GridMap>(m, "GridMap")
        .def(py::init<int, int, double>(), py::arg("height"), py::arg("width"),
             py::arg("fill") = 0.0)
        .def_readwrite("height", &GridMap::height)
        .def_readwrite("width", &GridMap::width)
        .def_readwrite("values", &GridMap::values)
        .def("at", [](const GridMap& g, int r, int c) { return g.at(r, c); })
        .def("set", [](GridMap& g, int r, int c, double v) { g.at(r, c) = v; });

    py::enum_<SlotClass>(m, "SlotClass")
        .value("AVAILABLE", SlotClass::Available)
        .value("OCCUPIED", SlotClass::Occupied)
        .value("ILLEGAL", SlotClass::Illegal)
        .value("RESTRICTED", SlotClass::Restricted);

    py::class_<Detection>(m, "Detection")
        .def(py::init<>())
        .def_readwrite("bbox", &Detection::bbox)
        .def_readwrite("slot_class", &Detection::slot_class)
        .def_readwrite("score", &Detection::score)
        .def_readwrite("keypoints", &Detection::keypoints);

    py::class_<FrameInference>(m, "FrameInference")
        .def(py::init<>())
        .def_readwrite("frame_id", &FrameInference::frame_id)
        .def_readwrite("lot_id", &FrameInference::lot_id)
        .def_readwrite("sector_id", &FrameInference::sector_id)
        .def_readwrite("timestamp", &FrameInference::timestamp)
        .def_readwrite("detections", &FrameInference::detections)
        .def_readwrite("soft_mask_levels", &FrameInference::soft_mask_levels)
        .def_readwrite("predicted_loss", &FrameInference::predicted_loss);

    py::class_<FilterConfig>(m, "FilterConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &FilterConfig::gamma)
        .def_readwrite("alpha", &FilterConfig::alpha)
        .def_readwrite("bin_thresh", &FilterConfig::bin_thresh)
        .def_readwrite("fused_height", &FilterConfig::fused_height)
        .def_readwrite("fused_width", &FilterConfig::fused_width)
        .def_readwrite("trust_threshold", &FilterConfig::trust_threshold)
        .def_readwrite("max_removals", &FilterConfig::max_removals)
        .def_readwrite("max_removal_fraction", &FilterConfig::max_removal_fraction);

    py::class_<FrameError>(m, "FrameError")
        .def_readonly("frame_id", &FrameError::frame_id)
        .def_readonly("err_spatial", &FrameError::err_spatial)
        .def_readonly("err_training", &FrameError::err_training)
        .def_readonly("err_total", &FrameError::err_total)
        .def_readonly("trusted", &FrameError::trusted)
        .def_readonly("empty_frame", &FrameError::empty_frame);

    // geometry
    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("size_loss",
          py::overload_cast<const BBox&, const std::vector<Point>&, const std::vector<int>&>(
              &size_loss),
          py::arg("box"), py::arg("keypoints"), py::arg("matching"));
    m.def("size_loss", py::overload_cast<const BBox&, const std::vector<Point>&>(&size_loss),
          py::arg("box"), py::arg("keypoints"));
    m.def("best_corner_matching", &best_corner_matching, py::arg("box"), py::arg("keypoints"));
    m.def("mask_target", &mask_target, py::arg("height"), py::arg("width"), py::arg("truths"));
    m.def("epsilon_diff", &epsilon_diff, py::arg("m"), py::arg("c"), py::arg("eps"));
    m.def("fuse_levels", &fuse_levels, py::arg("levels"), py::arg("height"), py::arg("width"));
    m.def("box_mask_overlap", &box_mask_overlap, py::arg("box"), py::arg("mask"),
          py::arg("bin_thresh"));

    // filter
    m.def("spatial_error", &spatial_error, py::arg("frame"), py::arg("config"));
    m.def("normalize_training_error", &normalize_training_error, py::arg("raw_losses"));
    m.def("total_error", &total_error, py::arg("err_spatial"), py::arg("err_training"),
          py::arg("alpha"));
    m.def(
        "filter_batch",
        [](const std::vector<FrameInference>& frames, const FilterConfig& cfg) {
            FilterResult result = filter_batch(frames, cfg);
            return py::make_tuple(result.trusted, result.rejected, result.errors);
        },
        py::arg("frames"), py::arg("config"),
        "Returns (trusted_frames, rejected_frames, frame_errors)");

    // assignment
    m.def(
        "solve_assignment",
        [](const std::vector<std::vector<double>>& costs) {
            RawAssignment raw = solve_assignment(costs);
            return py::make_tuple(raw.pairs, raw.total_cost, raw.unassigned_rows);
        },
        py::arg("costs"),
        "Minimum-cost assignment; returns (pairs, total_cost, unassigned_rows)");

    // metrics
    m.def(
        "evaluate_detections",
        [](const std::filesystem::path& pred, const std::filesystem::path& gt, double min_area) {
            SizeFilter size_filter;
            size_filter.min_normalized_area = min_area;
            DetectionEvalReport report =
                evaluate_detections(load_frames(pred), load_ground_truth(gt), size_filter);
            return json_to_py(detection_report_to_json(report));
        },
        py::arg("pred_path"), py::arg("gt_path"), py::arg("min_area") = 0.005);
    m.def("err_cost", &err_cost, py::arg("gt_costs"), py::arg("pred_costs"));
    m.def("err_assign", &err_assign, py::arg("gt_counts"), py::arg("pred_counts"));

    // simulation
    m.def(
        "make_synthetic_dataset",
        [](const std::filesystem::path& dir, int lots, int sectors_per_lot, int slots_per_sector,
           int days, std::uint64_t seed, double corrupt_rate, std::uint64_t corrupt_seed) {
            SyntheticConfig cfg;
            cfg.lots = lots;
            cfg.sectors_per_lot = sectors_per_lot;
            cfg.slots_per_sector = slots_per_sector;
            cfg.days = days;
            cfg.seed = seed;
            SimDataset dataset = make_synthetic_dataset(cfg);
            if (corrupt_rate > 0.0)
                dataset.predictions = corrupt_detections(dataset.predictions, corrupt_rate, corrupt_seed);
            write_sim_dataset(dataset, dir);
        },
        py::arg("dir"), py::arg("lots") = 6, py::arg("sectors_per_lot") = 2,
        py::arg("slots_per_sector") = 8, py::arg("days") = 5, py::arg("seed") = 20220937,
        py::arg("corrupt_rate") = 0.0, py::arg("corrupt_seed") = 1);
    m.def(
        "run_simulation",
        [](const std::filesystem::path& dataset_dir, int days, int repeats,
           int requests_per_day, std::uint64_t seed, double filter_gamma, double filter_alpha,
           double weights_gamma, bool filter_enabled) {
            SimConfig cfg;
            cfg.days = days;
            cfg.repeats = repeats;
            cfg.requests_per_day = requests_per_day;
            cfg.rng_seed = seed;
            cfg.filter.gamma = filter_gamma;
            cfg.filter.alpha = filter_alpha;
            cfg.weights.gamma = weights_gamma;
            cfg.filter_enabled = filter_enabled;
            SimReport report = run_simulation(load_sim_dataset(dataset_dir), cfg);
            return json_to_py(canonicalize(sim_report_to_json(report)));
        },
        py::arg("dataset_dir"), py::arg("days") = 5, py::arg("repeats") = 10,
        py::arg("requests_per_day") = 100, py::arg("seed") = 42, py::arg("filter_gamma") = 0.7,
        py::arg("filter_alpha") = 0.4, py::arg("weights_gamma") = 0.5,
        py::arg("filter_enabled") = true);

    m.def(
        "validate_dataset",
        [](const std::filesystem::path& dir) {
            auto frames = load_frames(dir / "detections.jsonl");
            auto truths = load_ground_truth(dir / "groundtruth.jsonl");
            auto lots = load_lots(dir / "lots.json");
            ValidationReport report = validate_dataset(frames, truths, lots);
            py::dict out;
            py::list findings;
            for (const auto& f : report.findings) {
                py::dict fd;
                fd["kind"] = f.kind;
                fd["subject"] = f.subject;
                fd["message"] = f.message;
                findings.append(fd);
            }
            out["findings"] = findings;
            py::dict histogram;
            for (const auto& [cls, count] : report.class_histogram)
                histogram[py::str(to_string(cls))] = count;
            out["class_histogram"] = histogram;
            return out;
        },
        py::arg("dataset_dir"));

#ifdef OCPSPS_VERSION
#define OCPSPS_STR_INNER(x) #x
#define OCPSPS_STR(x) OCPSPS_STR_INNER(x)
    m.attr("__version__") = OCPSPS_STR(OCPSPS_VERSION);
#else
    m.attr("__version__") = "dev";
#endif
}
