#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "ocpsps/filter.hpp"

using namespace ocpsps;

namespace {

Detection det_at(double x0, double y0, double x1, double y1, SlotClass cls = SlotClass::Available,
                 double score = 0.9) {
    Detection d;
    d.bbox = {x0, y0, x1, y1};
    d.slot_class = cls;
    d.score = score;
    return d;
}

// Frame whose two detections overlap the mask by exactly 0.9 and 0.4: the
// mask activates columns 0..8 of a 1x10 grid.
FrameInference worked_example_frame() {
    FrameInference frame;
    frame.frame_id = "worked";
    frame.lot_id = "L0";
    frame.sector_id = "s0";
    GridMap mask(1, 10, 0.0);
    for (int c = 0; c < 9; ++c) mask.at(0, c) = 1.0;
    frame.soft_mask_levels.push_back(mask);
    frame.detections.push_back(det_at(0.0, 0.0, 1.0, 1.0));      // overlap 0.9
    frame.detections.push_back(det_at(0.86, 0.0, 0.96, 1.0));    // overlap 0.4
    return frame;
}

// Literal transcription of the error formulas, kept independent of the
// library path.
double reference_spatial_error(const FrameInference& frame, const FilterConfig& cfg) {
    int h = cfg.fused_height, w = cfg.fused_width;
    if (h <= 0 || w <= 0) {
        h = 0;
        w = 0;
        for (const GridMap& level : frame.soft_mask_levels) {
            h = std::max(h, level.height);
            w = std::max(w, level.width);
        }
    }
    GridMap fused = fuse_levels(frame.soft_mask_levels, h, w);
    double sum = 0.0;
    for (const Detection& det : frame.detections) {
        double r = box_mask_overlap(det.bbox, fused, cfg.bin_thresh);
        sum += (r > cfg.gamma) ? 1.0 : r;
    }
    return 1.0 - sum / static_cast<double>(frame.detections.size());
}

FrameInference random_frame(std::mt19937_64& rng, const std::string& id) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> det_count(1, 6);
    std::uniform_int_distribution<int> level_count(1, 3);
    FrameInference frame;
    frame.frame_id = id;
    frame.lot_id = "L0";
    frame.sector_id = "s_" + id;
    frame.timestamp = 15 * 3600;
    int n = det_count(rng);
    for (int i = 0; i < n; ++i) frame.detections.push_back(
        [&] {
            BBox b = test::random_box(rng);
            return det_at(b.x_min, b.y_min, b.x_max, b.y_max);
        }());
    int levels = level_count(rng);
    for (int l = 0; l < levels; ++l) frame.soft_mask_levels.push_back(test::random_grid(rng));
    frame.predicted_loss = unit(rng) * 10.0;
    return frame;
}

}  // namespace

TEST_SUITE_BEGIN("filter");

TEST_CASE("spatial error worked example: overlaps {0.9, 0.4} at gamma 0.7") {
    FrameInference frame = worked_example_frame();
    FilterConfig cfg;
    cfg.gamma = 0.7;
    // sanity on the constructed overlaps
    GridMap fused = fuse_levels(frame.soft_mask_levels, 1, 10);
    CHECK(box_mask_overlap(frame.detections[0].bbox, fused, cfg.bin_thresh) ==
          doctest::Approx(0.9).epsilon(1e-12));
    CHECK(box_mask_overlap(frame.detections[1].bbox, fused, cfg.bin_thresh) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(spatial_error(frame, cfg) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("spatial error saturations") {
    FilterConfig cfg;
    FrameInference frame;
    frame.frame_id = "f";
    frame.soft_mask_levels.push_back(GridMap(2, 2, 1.0));
    frame.detections.push_back(det_at(0.1, 0.1, 0.5, 0.5));
    frame.detections.push_back(det_at(0.5, 0.5, 0.9, 0.9));
    CHECK(spatial_error(frame, cfg) == 0.0);  // all overlaps 1 > gamma

    frame.soft_mask_levels[0] = GridMap(2, 2, 0.0);
    CHECK(spatial_error(frame, cfg) == 1.0);  // all overlaps 0

    frame.detections.clear();
    CHECK_THROWS_AS(spatial_error(frame, cfg), NoDetections);

    frame.detections.push_back(det_at(0.1, 0.1, 0.5, 0.5));
    frame.soft_mask_levels.clear();
    CHECK_THROWS_AS(spatial_error(frame, cfg), EmptyLevels);
}

TEST_CASE("spatial error matches a straight-line re-evaluation on random frames") {
    std::mt19937_64 rng(71);
    FilterConfig cfg;
    cfg.gamma = 0.7;
    for (int i = 0; i < 50; ++i) {
        FrameInference frame = random_frame(rng, "r" + std::to_string(i));
        CHECK(spatial_error(frame, cfg) ==
              doctest::Approx(reference_spatial_error(frame, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("spatial error is invariant to detection order") {
    std::mt19937_64 rng(73);
    FilterConfig cfg;
    for (int i = 0; i < 50; ++i) {
        FrameInference frame = random_frame(rng, "o" + std::to_string(i));
        double base = spatial_error(frame, cfg);
        FrameInference shuffled = frame;
        std::shuffle(shuffled.detections.begin(), shuffled.detections.end(), rng);
        CHECK(spatial_error(shuffled, cfg) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("enlarging the active mask region never increases spatial error") {
    std::mt19937_64 rng(79);
    FilterConfig cfg;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        FrameInference frame = random_frame(rng, "m" + std::to_string(i));
        frame.soft_mask_levels.resize(1);
        double before = spatial_error(frame, cfg);
        GridMap& mask = frame.soft_mask_levels[0];
        for (double& v : mask.values) {
            if (unit(rng) < 0.3) v = 1.0;  // activate more cells
        }
        CHECK(spatial_error(frame, cfg) <= before + 1e-12);
    }
}

TEST_CASE("normalize_training_error") {
    CHECK(normalize_training_error({5, 5, 5}) == std::vector<double>{0, 0, 0});
    CHECK(normalize_training_error({0, 10}) == std::vector<double>{0, 1});
    auto out = normalize_training_error({1, 2, 4});
    REQUIRE(out.size() == 3);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(out[2] == 1.0);
    CHECK(normalize_training_error({}).empty());
}

TEST_CASE("total_error is the stated convex combination") {
    CHECK(total_error(0.3, 0.5, 0.0) == 0.3);   // spatial-only configuration
    CHECK(total_error(0.3, 0.5, 1.0) == 0.5);   // training-only configuration
    CHECK(total_error(0.3, 0.5, 0.4) == doctest::Approx(0.38).epsilon(1e-12));

    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double es = unit(rng), et = unit(rng), alpha = unit(rng);
        double total = total_error(es, et, alpha);
        CHECK(total >= std::min(es, et) - 1e-12);
        CHECK(total <= std::max(es, et) + 1e-12);
    }
}

TEST_CASE("filter_batch rank-and-threshold behavior") {
    FilterConfig cfg;
    cfg.alpha = 0.0;
    cfg.trust_threshold = 0.5;
    cfg.max_removals = 1;

    FrameInference bad;  // overlap 0 -> spatial error 1
    bad.frame_id = "bad";
    bad.sector_id = "s_bad";
    bad.detections.push_back(det_at(0.1, 0.1, 0.4, 0.4));
    bad.soft_mask_levels.push_back(GridMap(2, 2, 0.0));

    FrameInference good = bad;  // overlap 1 -> spatial error 0
    good.frame_id = "good";
    good.sector_id = "s_good";
    good.soft_mask_levels[0] = GridMap(2, 2, 1.0);

    FilterResult result = filter_batch({good, bad}, cfg);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].frame_id == "bad");
    REQUIRE(result.trusted.size() == 1);
    CHECK(result.trusted[0].frame_id == "good");
    for (const FrameError& e : result.errors)
        CHECK(e.err_total == doctest::Approx(total_error(e.err_spatial, e.err_training, cfg.alpha))
                                 .epsilon(1e-9));

    SUBCASE("nothing rejected when every error is zero") {
        FilterResult clean = filter_batch({good, good, good}, cfg);
        CHECK(clean.rejected.empty());
        CHECK(clean.trusted.size() == 3);
    }
    SUBCASE("budget respected even with many bad frames") {
        std::vector<FrameInference> frames;
        for (int i = 0; i < 10; ++i) {
            FrameInference f = bad;
            f.frame_id = "bad" + std::to_string(i);
            frames.push_back(f);
        }
        cfg.max_removals = 3;
        FilterResult capped = filter_batch(frames, cfg);
        CHECK(capped.rejected.size() == 3);
    }
    SUBCASE("fraction cap applies") {
        std::vector<FrameInference> frames;
        for (int i = 0; i < 10; ++i) {
            FrameInference f = bad;
            f.frame_id = "bad" + std::to_string(i);
            frames.push_back(f);
        }
        cfg.max_removals = 100;
        cfg.max_removal_fraction = 0.2;
        CHECK(filter_batch(frames, cfg).rejected.size() == 2);
    }
    SUBCASE("survivor order is preserved") {
        std::vector<FrameInference> frames{good, bad, good, bad};
        frames[0].frame_id = "a";
        frames[2].frame_id = "c";
        frames[1].frame_id = "b";
        frames[3].frame_id = "d";
        cfg.max_removals = 10;
        FilterResult r = filter_batch(frames, cfg);
        REQUIRE(r.trusted.size() == 2);
        CHECK(r.trusted[0].frame_id == "a");
        CHECK(r.trusted[1].frame_id == "c");
    }
}

TEST_CASE("empty frames are trusted by default and flagged") {
    FilterConfig cfg;
    cfg.alpha = 0.0;
    FrameInference empty;
    empty.frame_id = "empty";
    empty.sector_id = "s0";
    FilterResult result = filter_batch({empty}, cfg);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].empty_frame);
    CHECK(result.errors[0].trusted);
    CHECK(result.errors[0].err_spatial == 0.0);
}

TEST_CASE("alpha extremes decouple the two signals") {
    std::mt19937_64 rng(89);
    std::vector<FrameInference> frames;
    for (int i = 0; i < 12; ++i) frames.push_back(random_frame(rng, "x" + std::to_string(i)));

    FilterConfig cfg;
    cfg.max_removals = 4;

    SUBCASE("alpha 0 ignores predicted losses") {
        cfg.alpha = 0.0;
        FilterResult base = filter_batch(frames, cfg);
        auto perturbed = frames;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& f : perturbed) f.predicted_loss = unit(rng) * 100.0;
        FilterResult moved = filter_batch(perturbed, cfg);
        for (size_t i = 0; i < frames.size(); ++i) {
            CHECK(base.errors[i].err_total == moved.errors[i].err_total);
            CHECK(base.errors[i].trusted == moved.errors[i].trusted);
        }
    }
    SUBCASE("alpha 1 ignores soft masks") {
        cfg.alpha = 1.0;
        FilterResult base = filter_batch(frames, cfg);
        auto perturbed = frames;
        for (auto& f : perturbed)
            for (auto& level : f.soft_mask_levels)
                for (double& v : level.values) v = 0.0;
        FilterResult moved = filter_batch(perturbed, cfg);
        for (size_t i = 0; i < frames.size(); ++i) {
            CHECK(base.errors[i].err_total == moved.errors[i].err_total);
            CHECK(base.errors[i].trusted == moved.errors[i].trusted);
        }
    }
}

TEST_CASE("rejected set dominates survivors above the threshold") {
    std::mt19937_64 rng(97);
    std::vector<FrameInference> frames;
    for (int i = 0; i < 30; ++i) frames.push_back(random_frame(rng, "y" + std::to_string(i)));
    FilterConfig cfg;
    cfg.alpha = 0.4;
    cfg.max_removals = 5;
    cfg.trust_threshold = 0.2;
    FilterResult result = filter_batch(frames, cfg);
    CHECK(result.rejected.size() <= 5);

    std::map<std::string, double> totals;
    for (const FrameError& e : result.errors) totals[e.frame_id] = e.err_total;
    double rejected_min = 2.0, survivor_max_above = -1.0;
    for (const auto& f : result.rejected) rejected_min = std::min(rejected_min, totals[f.frame_id]);
    if (result.rejected.size() == 5) {
        for (const auto& f : result.trusted) {
            if (totals[f.frame_id] > cfg.trust_threshold)
                survivor_max_above = std::max(survivor_max_above, totals[f.frame_id]);
        }
        if (survivor_max_above >= 0.0) CHECK(rejected_min >= survivor_max_above - 1e-12);
    }
    for (const auto& f : result.rejected) CHECK(totals[f.frame_id] > cfg.trust_threshold);
}

TEST_SUITE_END();
