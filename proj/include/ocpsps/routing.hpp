#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ocpsps/ingest.hpp"

namespace ocpsps {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

struct RouteEstimate {
    double distance_km = 0.0;
    double travel_min = 0.0;
};

/// Route source for the cost matrix. Implementations must be safe to query
/// from multiple threads.
class RoutingProvider {
public:
    virtual ~RoutingProvider() = default;
    /// Throws RoutingUnavailable when the (origin, lot) pair is not covered.
    virtual RouteEstimate route(const GeoPoint& origin, const ParkingLot& lot) const = 0;
};

/// Deterministic provider backed by a precomputed origin x lot matrix.
/// Origins are matched by coordinates within a small tolerance.
class StaticMatrixRoutingProvider : public RoutingProvider {
public:
    StaticMatrixRoutingProvider(std::vector<GeoPoint> origins, std::vector<std::string> lot_ids,
                                std::vector<std::vector<double>> distance_km,
                                std::vector<std::vector<double>> travel_min);

    static StaticMatrixRoutingProvider from_file(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    RouteEstimate route(const GeoPoint& origin, const ParkingLot& lot) const override;

private:
    std::vector<GeoPoint> origins_;
    std::map<std::string, size_t> lot_cols_;
    std::vector<std::string> lot_ids_;
    std::vector<std::vector<double>> distance_km_;
    std::vector<std::vector<double>> travel_min_;
};

/// Generic HTTP routing client: GET {base}/route?from_lat=..&from_lon=..
/// &to_lat=..&to_lon=.. expecting {"distance_km": .., "travel_min": ..}.
/// Responses are cached per (origin, lot); concurrent queries do not block
/// each other.
class HttpRoutingProvider : public RoutingProvider {
public:
    HttpRoutingProvider(std::string host, int port, std::string path = "/route",
                        int timeout_sec = 5);

    RouteEstimate route(const GeoPoint& origin, const ParkingLot& lot) const override;

private:
    std::string host_;
    int port_;
    std::string path_;
    int timeout_sec_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::map<std::tuple<double, double, std::string>, RouteEstimate> cache_;
};

/// Great-circle distance in kilometers.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Builds a static matrix for the given origins from great-circle distance
/// and a constant road speed. The simulation default.
StaticMatrixRoutingProvider make_geodesic_matrix(const std::vector<GeoPoint>& origins,
                                                 const std::vector<ParkingLot>& lots,
                                                 double road_speed_kmh = 40.0);

}  // namespace ocpsps
