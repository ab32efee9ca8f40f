#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "ocpsps/json_io.hpp"
#include "ocpsps/metrics.hpp"
#include "ocpsps/sim.hpp"
#include "ocpsps/synthetic.hpp"

namespace {

using ocpsps::json;

struct GlobalOptions {
    bool json_errors = false;
};

int fail(const GlobalOptions& global, const std::string& kind, const std::string& message,
         int code) {
    if (global.json_errors) {
        json j;
        j["error"] = {{"type", kind}, {"message", message}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error (" << kind << "): " << message << "\n";
    }
    return code;
}

std::vector<double> parse_numbers(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// ---- validate ----

struct ValidateArgs {
    std::string dataset;
    std::string out;
};

int run_validate(const ValidateArgs& args) {
    namespace fs = std::filesystem;
    auto frames = ocpsps::load_frames(fs::path(args.dataset) / "detections.jsonl");
    auto truths = ocpsps::load_ground_truth(fs::path(args.dataset) / "groundtruth.jsonl");
    auto lots = ocpsps::load_lots(fs::path(args.dataset) / "lots.json");
    if (fs::exists(fs::path(args.dataset) / "traffic.json"))
        ocpsps::load_traffic(fs::path(args.dataset) / "traffic.json");

    ocpsps::ValidationReport report = ocpsps::validate_dataset(frames, truths, lots);

    json j;
    json findings = json::array();
    for (const auto& f : report.findings)
        findings.push_back({{"kind", f.kind}, {"subject", f.subject}, {"message", f.message}});
    j["findings"] = std::move(findings);
    json histogram;
    for (const auto& [cls, count] : report.class_histogram) histogram[to_string(cls)] = count;
    j["class_histogram"] = std::move(histogram);
    j["frames"] = frames.size();
    j["ground_truth_frames"] = truths.size();

    std::string text = ocpsps::dump_canonical(j, 2) + "\n";
    if (!args.out.empty())
        ocpsps::atomic_write(args.out, text);
    else
        std::cout << text;
    return report.ok() ? 0 : 1;
}

// ---- filter ----

struct FilterArgs {
    std::string detections;
    std::string out;
    ocpsps::FilterConfig cfg;
};

int run_filter(const FilterArgs& args) {
    auto frames = ocpsps::load_frames(args.detections);
    ocpsps::FilterResult result = ocpsps::filter_batch(frames, args.cfg);

    std::ostringstream lines;
    for (const ocpsps::FrameError& err : result.errors) {
        json j;
        j["frame_id"] = err.frame_id;
        j["err_spatial"] = err.err_spatial;
        j["err_training"] = err.err_training;
        j["err_total"] = err.err_total;
        j["trusted"] = err.trusted;
        j["empty_frame"] = err.empty_frame;
        lines << ocpsps::dump_canonical(j) << '\n';
    }
    if (!args.out.empty())
        ocpsps::atomic_write(args.out, lines.str());
    else
        std::cout << lines.str();
    std::cerr << "kept " << result.trusted.size() << " frame(s), rejected "
              << result.rejected.size() << "\n";
    return 0;
}

// ---- eval-detection ----

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string out;
    double min_area = 0.005;
};

int run_eval(const EvalArgs& args) {
    auto preds = ocpsps::load_frames(args.pred);
    auto truths = ocpsps::load_ground_truth(args.gt);
    ocpsps::SizeFilter size_filter;
    size_filter.min_normalized_area = args.min_area;
    ocpsps::DetectionEvalReport report = ocpsps::evaluate_detections(preds, truths, size_filter);
    std::string text = ocpsps::dump_canonical(ocpsps::detection_report_to_json(report), 2) + "\n";
    if (!args.out.empty())
        ocpsps::atomic_write(args.out, text);
    else
        std::cout << text;
    return 0;
}

// ---- assign ----

struct AssignArgs {
    std::string snapshot;
    std::string requests;
    std::string lots;
    std::string routing;
    std::string routing_http;  // host:port alternative to the matrix file
    std::string out;
    double gamma = 0.5;
    bool no_prioritize = false;
};

int run_assign(const AssignArgs& args) {
    auto snapshots = ocpsps::load_snapshots(args.snapshot);
    auto requests = ocpsps::load_requests(args.requests);
    auto lots = ocpsps::load_lots(args.lots);

    std::unique_ptr<ocpsps::RoutingProvider> routing;
    if (!args.routing_http.empty()) {
        auto colon = args.routing_http.rfind(':');
        if (colon == std::string::npos)
            throw ocpsps::Error("--routing-http expects host:port");
        routing = std::make_unique<ocpsps::HttpRoutingProvider>(
            args.routing_http.substr(0, colon), std::stoi(args.routing_http.substr(colon + 1)));
    } else {
        routing = std::make_unique<ocpsps::StaticMatrixRoutingProvider>(
            ocpsps::StaticMatrixRoutingProvider::from_file(args.routing));
    }

    std::vector<ocpsps::SlotRef> slots = ocpsps::collect_available_slots(snapshots);
    if (!args.no_prioritize) {
        std::map<std::string, double> occupancy;
        for (const auto& snap : snapshots) occupancy[snap.lot_id] = snap.occupancy_rate;
        auto selected = ocpsps::prioritize(requests, slots, occupancy);
        requests = std::move(selected.first);
        slots = std::move(selected.second);
    }
    ocpsps::CostWeights weights;
    weights.gamma = args.gamma;
    ocpsps::CostMatrix matrix = ocpsps::build_cost_matrix(requests, slots, lots, *routing, weights);
    ocpsps::Assignment assignment = ocpsps::hungarian(matrix);

    if (!args.out.empty())
        ocpsps::write_assignment(assignment, args.out);
    else
        std::cout << ocpsps::dump_canonical(ocpsps::assignment_to_json(assignment), 2) << "\n";
    return 0;
}

// ---- simulate ----

struct SimulateArgs {
    std::string dataset;
    std::string config;
    std::string out;
    std::string csv;
};

void apply_sim_config_file(const std::string& path, ocpsps::SimConfig& cfg) {
    CLI::ConfigTOML reader;
    std::vector<CLI::ConfigItem> items = reader.from_file(path);
    auto as_double = [](const CLI::ConfigItem& item) { return std::stod(item.inputs.at(0)); };
    auto as_int = [](const CLI::ConfigItem& item) { return std::stoi(item.inputs.at(0)); };
    auto as_bool = [](const CLI::ConfigItem& item) {
        const std::string& v = item.inputs.at(0);
        return v == "true" || v == "1" || v == "yes";
    };
    for (const CLI::ConfigItem& item : items) {
        std::string key = item.fullname();
        if (key == "days") cfg.days = as_int(item);
        else if (key == "start_hour") cfg.start_hour = as_int(item);
        else if (key == "end_hour") cfg.end_hour = as_int(item);
        else if (key == "requests_per_day") cfg.requests_per_day = as_int(item);
        else if (key == "repeats") cfg.repeats = as_int(item);
        else if (key == "rng_seed") cfg.rng_seed = std::stoull(item.inputs.at(0));
        else if (key == "filter_enabled") cfg.filter_enabled = as_bool(item);
        else if (key == "road_speed_kmh") cfg.road_speed_kmh = as_double(item);
        else if (key == "lots") cfg.lots = item.inputs;
        else if (key == "filter.gamma") cfg.filter.gamma = as_double(item);
        else if (key == "filter.alpha") cfg.filter.alpha = as_double(item);
        else if (key == "filter.bin_thresh") cfg.filter.bin_thresh = as_double(item);
        else if (key == "filter.fused_height") cfg.filter.fused_height = as_int(item);
        else if (key == "filter.fused_width") cfg.filter.fused_width = as_int(item);
        else if (key == "filter.trust_threshold") cfg.filter.trust_threshold = as_double(item);
        else if (key == "filter.max_removals") cfg.filter.max_removals = as_int(item);
        else if (key == "filter.max_removal_fraction") cfg.filter.max_removal_fraction = as_double(item);
        else if (key == "weights.gamma") cfg.weights.gamma = as_double(item);
        else if (key == "origin_region.lat_min") cfg.origin_lat_min = as_double(item);
        else if (key == "origin_region.lat_max") cfg.origin_lat_max = as_double(item);
        else if (key == "origin_region.lon_min") cfg.origin_lon_min = as_double(item);
        else if (key == "origin_region.lon_max") cfg.origin_lon_max = as_double(item);
        else if (key == "origin_region.margin_deg") cfg.origin_margin_deg = as_double(item);
        else if (key == "traffic.perturb_lo") cfg.traffic_perturb_lo = as_double(item);
        else if (key == "traffic.perturb_hi") cfg.traffic_perturb_hi = as_double(item);
        else throw ocpsps::Error("unknown config key '" + key + "'");
    }
}

// ---- size-loss / mask-target ----

struct SizeLossArgs {
    std::string box;
    std::string keypoints;
    std::string matching;
};

int run_size_loss(const SizeLossArgs& args) {
    std::vector<double> b = parse_numbers(args.box, ',');
    if (b.size() != 4) throw ocpsps::Error("--box expects x_min,y_min,x_max,y_max");
    ocpsps::BBox box{b[0], b[1], b[2], b[3]};
    if (!box.well_formed()) throw ocpsps::Error("box must satisfy x_min<x_max and y_min<y_max");

    std::vector<ocpsps::Point> keypoints;
    std::stringstream stream(args.keypoints);
    std::string item;
    while (std::getline(stream, item, ';')) {
        std::vector<double> p = parse_numbers(item, ',');
        if (p.size() != 2) throw ocpsps::Error("--keypoints expects x,y pairs separated by ';'");
        keypoints.push_back({p[0], p[1]});
    }

    std::vector<int> matching;
    if (!args.matching.empty()) {
        for (double v : parse_numbers(args.matching, ',')) matching.push_back(static_cast<int>(v));
    } else {
        matching = ocpsps::best_corner_matching(box, keypoints);
    }
    double loss = ocpsps::size_loss(box, keypoints, matching);

    json j;
    j["loss"] = loss;
    j["matching"] = matching;
    std::cout << ocpsps::dump_canonical(j, 2) << "\n";
    return 0;
}

struct MaskTargetArgs {
    std::string gt;
    std::string frame_id;
    int height = 16;
    int width = 16;
    std::string out;
};

int run_mask_target(const MaskTargetArgs& args) {
    auto truths = ocpsps::load_ground_truth(args.gt);
    const ocpsps::GroundTruthFrame* frame = nullptr;
    for (const auto& gt : truths) {
        if (gt.frame_id == args.frame_id) {
            frame = &gt;
            break;
        }
    }
    if (!frame) throw ocpsps::Error("frame '" + args.frame_id + "' not found in " + args.gt);
    std::vector<ocpsps::Quad> quads;
    for (const auto& [quad, cls] : frame->labels) quads.push_back(quad);
    ocpsps::GridMap map = ocpsps::mask_target(args.height, args.width, quads);

    json j;
    j["h"] = map.height;
    j["w"] = map.width;
    j["values"] = map.values;
    std::string text = ocpsps::dump_canonical(j, 2) + "\n";
    if (!args.out.empty())
        ocpsps::atomic_write(args.out, text);
    else
        std::cout << text;
    return 0;
}

// ---- make-dataset ----

struct MakeDatasetArgs {
    std::string out;
    ocpsps::SyntheticConfig cfg;
    double corrupt_rate = 0.0;
    std::uint64_t corrupt_seed = 1;
    bool demo_assign = false;
};

int run_make_dataset(const MakeDatasetArgs& args) {
    ocpsps::SimDataset dataset = ocpsps::make_synthetic_dataset(args.cfg);
    if (args.corrupt_rate > 0.0)
        dataset.predictions =
            ocpsps::corrupt_detections(dataset.predictions, args.corrupt_rate, args.corrupt_seed);
    ocpsps::write_sim_dataset(dataset, args.out);

    if (args.demo_assign) {
        // Companion inputs for the assign subcommand, derived from the first
        // round of the dataset.
        namespace fs = std::filesystem;
        ocpsps::OccupancyStore store;
        for (const auto& lot : dataset.lots) store.register_lot(lot);
        std::int64_t first_ts = 0;
        for (const auto& frame : dataset.predictions)
            first_ts = first_ts == 0 ? frame.timestamp : std::min(first_ts, frame.timestamp);
        for (const auto& frame : dataset.predictions) {
            if (frame.timestamp != first_ts) continue;
            ocpsps::FrameError trusted;
            trusted.frame_id = frame.frame_id;
            store.commit(frame, trusted);
        }
        auto snapshots = store.snapshot_all();
        ocpsps::write_snapshots(snapshots, fs::path(args.out) / "snapshot.json");

        std::mt19937_64 rng(args.cfg.seed);
        ocpsps::SimConfig sim_cfg;
        sim_cfg.requests_per_day = 20;
        std::vector<ocpsps::Request> requests;
        {
            // Requests inside the lot region.
            double lat_lo = 1e9, lat_hi = -1e9, lon_lo = 1e9, lon_hi = -1e9;
            for (const auto& lot : dataset.lots) {
                lat_lo = std::min(lat_lo, lot.gps_lat);
                lat_hi = std::max(lat_hi, lot.gps_lat);
                lon_lo = std::min(lon_lo, lot.gps_lon);
                lon_hi = std::max(lon_hi, lot.gps_lon);
            }
            std::uniform_real_distribution<double> lat(lat_lo - 0.02, lat_hi + 0.02);
            std::uniform_real_distribution<double> lon(lon_lo - 0.02, lon_hi + 0.02);
            for (int k = 0; k < sim_cfg.requests_per_day; ++k) {
                ocpsps::Request r;
                r.request_id = "demo_r" + std::to_string(k);
                r.arrival_time = first_ts + k;
                r.origin = {lat(rng), lon(rng)};
                requests.push_back(std::move(r));
            }
        }
        ocpsps::write_requests(requests, fs::path(args.out) / "requests.jsonl");

        std::vector<ocpsps::GeoPoint> origins;
        for (const auto& r : requests) origins.push_back(r.origin);
        ocpsps::make_geodesic_matrix(origins, dataset.lots)
            .save(fs::path(args.out) / "routing_matrix.json");
    }
    std::cerr << "wrote dataset with " << dataset.predictions.size() << " frames to " << args.out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smart-camera parking pipeline: detection filtering, occupancy aggregation, "
                 "prioritized Hungarian assignment and closed-loop simulation"};
    app.require_subcommand(1);
    GlobalOptions global;
    app.add_flag("--json-errors", global.json_errors, "Emit errors as JSON on stderr");

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "Check a dataset directory for consistency");
    validate->add_option("--dataset", validate_args.dataset, "Dataset directory")->required();
    validate->add_option("--out", validate_args.out, "Write the validation report here");

    FilterArgs filter_args;
    auto* filter = app.add_subcommand("filter", "Score frames and reject untrustworthy ones");
    filter->add_option("--detections", filter_args.detections, "detections.jsonl input")->required();
    filter->add_option("--gamma", filter_args.cfg.gamma, "Overlap indicator threshold")
        ->envname("OCPSPS_GAMMA")->capture_default_str();
    filter->add_option("--alpha", filter_args.cfg.alpha, "Training-error mixing weight")
        ->envname("OCPSPS_ALPHA")->capture_default_str();
    filter->add_option("--bin-thresh", filter_args.cfg.bin_thresh, "Mask binarization threshold")
        ->capture_default_str();
    filter->add_option("--trust-threshold", filter_args.cfg.trust_threshold,
                       "Reject only frames above this total error")->capture_default_str();
    filter->add_option("--max-removals", filter_args.cfg.max_removals, "Absolute removal budget")
        ->envname("OCPSPS_MAX_REMOVALS")->capture_default_str();
    filter->add_option("--max-removal-fraction", filter_args.cfg.max_removal_fraction,
                       "Fractional removal budget")->capture_default_str();
    filter->add_option("--fused-height", filter_args.cfg.fused_height,
                       "Fused map height (0 = largest level)")->capture_default_str();
    filter->add_option("--fused-width", filter_args.cfg.fused_width,
                       "Fused map width (0 = largest level)")->capture_default_str();
    filter->add_option("--out", filter_args.out, "errors.jsonl output");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval-detection", "Detection metrics against ground truth");
    eval->add_option("--pred", eval_args.pred, "detections.jsonl input")->required();
    eval->add_option("--gt", eval_args.gt, "groundtruth.jsonl input")->required();
    eval->add_option("--min-area", eval_args.min_area,
                     "Medium/large ground-truth cutoff (normalized area)")->capture_default_str();
    eval->add_option("--out", eval_args.out, "report.json output");

    AssignArgs assign_args;
    auto* assign = app.add_subcommand("assign", "Prioritized Hungarian parking assignment");
    assign->add_option("--snapshot", assign_args.snapshot, "snapshot.json input")->required();
    assign->add_option("--requests", assign_args.requests, "requests.jsonl input")->required();
    assign->add_option("--lots", assign_args.lots, "lots.json input")->required();
    assign->add_option("--routing", assign_args.routing, "routing_matrix.json input");
    assign->add_option("--routing-http", assign_args.routing_http,
                       "host:port of an HTTP routing service (instead of --routing)");
    assign->add_option("--gamma", assign_args.gamma, "Price weight of the cost function")
        ->envname("OCPSPS_COST_GAMMA")->capture_default_str();
    assign->add_flag("--no-prioritize", assign_args.no_prioritize,
                     "Skip the request/slot reduction protocol");
    assign->add_option("--out", assign_args.out, "assignment.json output");

    SimulateArgs sim_args;
    ocpsps::SimConfig sim_cfg;
    auto* simulate = app.add_subcommand("simulate", "Closed-loop assignment simulation");
    simulate->add_option("--dataset", sim_args.dataset, "Dataset directory")->required();
    simulate->add_option("--config", sim_args.config, "sim.toml configuration file");
    simulate->add_option("--out", sim_args.out, "report.json output");
    simulate->add_option("--csv", sim_args.csv, "Per-repeat CSV output");
    auto* opt_days = simulate->add_option("--days", sim_cfg.days, "Days to simulate")
        ->envname("OCPSPS_DAYS")->capture_default_str();
    auto* opt_repeats = simulate->add_option("--repeats", sim_cfg.repeats, "Simulation repeats")
        ->envname("OCPSPS_REPEATS")->capture_default_str();
    auto* opt_seed = simulate->add_option("--seed", sim_cfg.rng_seed, "Base RNG seed")
        ->envname("OCPSPS_SEED")->capture_default_str();
    auto* opt_requests = simulate->add_option("--requests-per-day", sim_cfg.requests_per_day,
                                              "Booking requests per day")->capture_default_str();
    auto* opt_start = simulate->add_option("--start-hour", sim_cfg.start_hour, "Window start hour")
        ->capture_default_str();
    auto* opt_end = simulate->add_option("--end-hour", sim_cfg.end_hour, "Window end hour")
        ->capture_default_str();
    auto* opt_fgamma = simulate->add_option("--filter-gamma", sim_cfg.filter.gamma,
                                            "Filter overlap threshold")->capture_default_str();
    auto* opt_falpha = simulate->add_option("--alpha", sim_cfg.filter.alpha,
                                            "Filter mixing weight")->capture_default_str();
    auto* opt_wgamma = simulate->add_option("--weights-gamma", sim_cfg.weights.gamma,
                                            "Cost price weight")->capture_default_str();
    bool no_filter = false;
    auto* opt_nofilter = simulate->add_flag("--no-filter", no_filter, "Disable the result filter");

    SizeLossArgs size_loss_args;
    auto* size_loss_cmd = app.add_subcommand("size-loss", "Keypoint coverage loss for one box");
    size_loss_cmd->add_option("--box", size_loss_args.box, "x_min,y_min,x_max,y_max")->required();
    size_loss_cmd->add_option("--keypoints", size_loss_args.keypoints,
                              "Semicolon-separated x,y pairs")->required();
    size_loss_cmd->add_option("--matching", size_loss_args.matching,
                              "Comma-separated corner indices (default: minimal matching)");

    MaskTargetArgs mask_args;
    auto* mask_cmd = app.add_subcommand("mask-target", "Binary target map for a frame's labels");
    mask_cmd->add_option("--gt", mask_args.gt, "groundtruth.jsonl input")->required();
    mask_cmd->add_option("--frame", mask_args.frame_id, "Frame id")->required();
    mask_cmd->add_option("--height", mask_args.height, "Grid height")->capture_default_str();
    mask_cmd->add_option("--width", mask_args.width, "Grid width")->capture_default_str();
    mask_cmd->add_option("--out", mask_args.out, "map.json output");

    MakeDatasetArgs make_args;
    auto* make_cmd = app.add_subcommand("make-dataset", "Generate a synthetic dataset directory");
    make_cmd->add_option("--out", make_args.out, "Output directory")->required();
    make_cmd->add_option("--lots", make_args.cfg.lots, "Lot count")->capture_default_str();
    make_cmd->add_option("--sectors", make_args.cfg.sectors_per_lot, "Sectors per lot")
        ->capture_default_str();
    make_cmd->add_option("--slots", make_args.cfg.slots_per_sector, "Slots per sector")
        ->capture_default_str();
    make_cmd->add_option("--days", make_args.cfg.days, "Days of frames")->capture_default_str();
    make_cmd->add_option("--seed", make_args.cfg.seed, "Generator seed")->capture_default_str();
    make_cmd->add_option("--corrupt", make_args.corrupt_rate,
                         "Drop/flip each detection with this probability")->capture_default_str();
    make_cmd->add_option("--corrupt-seed", make_args.corrupt_seed, "Corruption seed")
        ->capture_default_str();
    make_cmd->add_flag("--overlap-masks", make_args.cfg.with_overlap_masks,
                       "Attach overlap masks to the ground truth");
    make_cmd->add_flag("--demo-assign", make_args.demo_assign,
                       "Also write snapshot/requests/routing files for the assign subcommand");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*validate) return run_validate(validate_args);
        if (*filter) return run_filter(filter_args);
        if (*eval) return run_eval(eval_args);
        if (*assign) {
            if (assign_args.routing.empty() && assign_args.routing_http.empty())
                throw ocpsps::Error("assign needs --routing or --routing-http");
            return run_assign(assign_args);
        }
        if (*simulate) {
            // Precedence: flags beat environment (CLI11), both beat the file.
            ocpsps::SimConfig file_cfg;
            if (!sim_args.config.empty()) apply_sim_config_file(sim_args.config, file_cfg);
            if (opt_days->count() == 0) sim_cfg.days = file_cfg.days;
            if (opt_repeats->count() == 0) sim_cfg.repeats = file_cfg.repeats;
            if (opt_seed->count() == 0) sim_cfg.rng_seed = file_cfg.rng_seed;
            if (opt_requests->count() == 0) sim_cfg.requests_per_day = file_cfg.requests_per_day;
            if (opt_start->count() == 0) sim_cfg.start_hour = file_cfg.start_hour;
            if (opt_end->count() == 0) sim_cfg.end_hour = file_cfg.end_hour;
            if (opt_fgamma->count() == 0) sim_cfg.filter.gamma = file_cfg.filter.gamma;
            if (opt_falpha->count() == 0) sim_cfg.filter.alpha = file_cfg.filter.alpha;
            if (opt_wgamma->count() == 0) sim_cfg.weights.gamma = file_cfg.weights.gamma;
            if (opt_nofilter->count() == 0) sim_cfg.filter_enabled = file_cfg.filter_enabled;
            else sim_cfg.filter_enabled = !no_filter;
            sim_cfg.filter.bin_thresh = file_cfg.filter.bin_thresh;
            sim_cfg.filter.fused_height = file_cfg.filter.fused_height;
            sim_cfg.filter.fused_width = file_cfg.filter.fused_width;
            sim_cfg.filter.trust_threshold = file_cfg.filter.trust_threshold;
            sim_cfg.filter.max_removals = file_cfg.filter.max_removals;
            sim_cfg.filter.max_removal_fraction = file_cfg.filter.max_removal_fraction;
            sim_cfg.lots = file_cfg.lots;
            sim_cfg.origin_lat_min = file_cfg.origin_lat_min;
            sim_cfg.origin_lat_max = file_cfg.origin_lat_max;
            sim_cfg.origin_lon_min = file_cfg.origin_lon_min;
            sim_cfg.origin_lon_max = file_cfg.origin_lon_max;
            sim_cfg.origin_margin_deg = file_cfg.origin_margin_deg;
            sim_cfg.traffic_perturb_lo = file_cfg.traffic_perturb_lo;
            sim_cfg.traffic_perturb_hi = file_cfg.traffic_perturb_hi;
            sim_cfg.road_speed_kmh = file_cfg.road_speed_kmh;

            ocpsps::SimDataset dataset = ocpsps::load_sim_dataset(sim_args.dataset);
            ocpsps::SimReport report = ocpsps::run_simulation(dataset, sim_cfg);
            std::string text = ocpsps::dump_canonical(ocpsps::sim_report_to_json(report), 2) + "\n";
            if (!sim_args.out.empty())
                ocpsps::atomic_write(sim_args.out, text);
            else
                std::cout << text;
            if (!sim_args.csv.empty()) ocpsps::atomic_write(sim_args.csv, ocpsps::sim_report_to_csv(report));
            return 0;
        }
        if (*size_loss_cmd) return run_size_loss(size_loss_args);
        if (*mask_cmd) return run_mask_target(mask_args);
        if (*make_cmd) return run_make_dataset(make_args);
    } catch (const ocpsps::ParseError& e) {
        return fail(global, "parse", e.what(), 1);
    } catch (const ocpsps::InvariantViolation& e) {
        return fail(global, "invariant", e.what(), 1);
    } catch (const ocpsps::Error& e) {
        return fail(global, "runtime", e.what(), 2);
    } catch (const std::exception& e) {
        return fail(global, "runtime", e.what(), 2);
    }
    return 0;
}
