#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "ocpsps/json_io.hpp"
#include "ocpsps/routing.hpp"

using namespace ocpsps;

namespace {

ParkingLot lot_at(const std::string& id, double lat, double lon) {
    ParkingLot lot;
    lot.lot_id = id;
    lot.gps_lat = lat;
    lot.gps_lon = lon;
    lot.price = 1.0;
    lot.capacity = 4;
    return lot;
}

}  // namespace

TEST_SUITE_BEGIN("routing");

TEST_CASE("static matrix provider lookups") {
    std::vector<GeoPoint> origins{{37.0, 127.0}, {37.1, 127.1}};
    StaticMatrixRoutingProvider provider(origins, {"A", "B"},
                                         {{1.0, 2.0}, {3.0, 4.0}},
                                         {{10.0, 20.0}, {30.0, 40.0}});
    ParkingLot a = lot_at("A", 37.05, 127.0);
    ParkingLot b = lot_at("B", 37.2, 127.3);

    RouteEstimate r = provider.route({37.1, 127.1}, b);
    CHECK(r.distance_km == 4.0);
    CHECK(r.travel_min == 40.0);

    CHECK_THROWS_AS(provider.route({0.0, 0.0}, a), RoutingUnavailable);
    CHECK_THROWS_AS(provider.route({37.0, 127.0}, lot_at("C", 0, 0)), RoutingUnavailable);
}

TEST_CASE("static matrix file round trip") {
    test::TempDir dir("routing");
    auto path = dir.path() / "routing_matrix.json";
    std::vector<GeoPoint> origins{{37.0, 127.0}};
    StaticMatrixRoutingProvider provider(origins, {"A"}, {{2.5}}, {{12.5}});
    provider.save(path);
    auto loaded = StaticMatrixRoutingProvider::from_file(path);
    RouteEstimate r = loaded.route({37.0, 127.0}, lot_at("A", 37.0, 127.0));
    CHECK(r.distance_km == doctest::Approx(2.5));
    CHECK(r.travel_min == doctest::Approx(12.5));
}

TEST_CASE("haversine sanity") {
    CHECK(haversine_km({37.0, 127.0}, {37.0, 127.0}) == 0.0);
    // one degree of latitude is about 111.2 km
    CHECK(haversine_km({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(111.19).epsilon(0.01));
    CHECK(haversine_km({10.0, 20.0}, {11.0, 21.0}) ==
          doctest::Approx(haversine_km({11.0, 21.0}, {10.0, 20.0})).epsilon(1e-12));
}

TEST_CASE("geodesic matrix provider") {
    std::vector<GeoPoint> origins{{37.0, 127.0}};
    std::vector<ParkingLot> lots{lot_at("A", 37.0, 127.0), lot_at("B", 38.0, 127.0)};
    StaticMatrixRoutingProvider provider = make_geodesic_matrix(origins, lots, 60.0);
    RouteEstimate same = provider.route({37.0, 127.0}, lots[0]);
    CHECK(same.distance_km == 0.0);
    CHECK(same.travel_min == 0.0);
    RouteEstimate far = provider.route({37.0, 127.0}, lots[1]);
    CHECK(far.distance_km == doctest::Approx(111.19).epsilon(0.01));
    CHECK(far.travel_min == doctest::Approx(far.distance_km).epsilon(1e-9));  // 60 km/h
}

TEST_CASE("http routing provider with a local server") {
    std::atomic<int> hits{0};
    httplib::Server server;
    server.Get("/route", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        double from_lat = std::stod(req.get_param_value("from_lat"));
        double to_lat = std::stod(req.get_param_value("to_lat"));
        json body;
        body["distance_km"] = std::abs(to_lat - from_lat) * 100.0;
        body["travel_min"] = std::abs(to_lat - from_lat) * 200.0;
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    if (port <= 0) {
        MESSAGE("cannot bind a loopback port in this environment; skipping");
        return;
    }
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpRoutingProvider provider("127.0.0.1", port);
    ParkingLot a = lot_at("A", 37.5, 127.0);
    ParkingLot b = lot_at("B", 38.0, 127.0);

    // concurrent queries across lots
    std::vector<std::thread> clients;
    std::atomic<int> failures{0};
    for (int i = 0; i < 4; ++i) {
        clients.emplace_back([&] {
            try {
                RouteEstimate ra = provider.route({37.0, 127.0}, a);
                RouteEstimate rb = provider.route({37.0, 127.0}, b);
                if (std::abs(ra.distance_km - 50.0) > 1e-9) ++failures;
                if (std::abs(rb.travel_min - 200.0) > 1e-9) ++failures;
            } catch (const Error&) {
                ++failures;
            }
        });
    }
    for (auto& c : clients) c.join();
    CHECK(failures == 0);

    // cache: repeated queries must not produce new requests
    int hits_after_first_wave = hits;
    for (int i = 0; i < 5; ++i) provider.route({37.0, 127.0}, a);
    CHECK(hits == hits_after_first_wave);

    CHECK_THROWS_AS(HttpRoutingProvider("127.0.0.1", port, "/missing").route({37.0, 127.0}, a),
                    RoutingUnavailable);

    server.stop();
    server_thread.join();
}

TEST_SUITE_END();
