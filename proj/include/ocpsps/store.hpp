#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ocpsps/filter.hpp"
#include "ocpsps/ingest.hpp"
#include "ocpsps/json_io.hpp"

namespace ocpsps {

struct SectorState {
    enum class Status { NoData, Trusted, Unusable };

    std::string sector_id;
    std::string lot_id;
    std::int64_t last_update = 0;
    Status status = Status::NoData;
    std::vector<Detection> detections;  // payload while Trusted
    double unusable_error = 0.0;        // triggering err_total while Unusable
    std::int64_t unusable_since = 0;
};

struct AvailableSlot {
    std::string sector_id;
    BBox bbox;
};

struct LotSnapshot {
    std::string lot_id;
    std::vector<AvailableSlot> available_slots;  // sorted by (sector_id, bbox)
    std::int64_t occupied_count = 0;
    std::int64_t unusable_sector_count = 0;
    /// occupied / (occupied + available) over trusted sectors; 0 when no
    /// trusted detections exist. Illegal/restricted detections are stored but
    /// excluded here.
    double occupancy_rate = 0.0;
};

/// Middleware registry of per-sector occupancy. Commits to different sectors
/// run concurrently; commits to one sector are serialized; a snapshot locks
/// all sectors of the lot so it never observes a torn multi-sector state.
class OccupancyStore {
public:
    void register_lot(const ParkingLot& lot);

    /// Applies one filtered frame. Trusted frames replace the sector state,
    /// rejected frames mark it unusable until a newer trusted frame arrives.
    /// Last-write-wins by frame timestamp; an older timestamp throws
    /// StaleFrame and leaves the state unchanged.
    SectorState commit(const FrameInference& frame, const FrameError& frame_error);

    /// Throws UnknownLot for unregistered lots.
    LotSnapshot snapshot(const std::string& lot_id) const;

    /// Snapshots of every registered lot, ordered by lot_id.
    std::vector<LotSnapshot> snapshot_all() const;

    std::vector<std::string> lot_ids() const;

private:
    struct SectorEntry {
        mutable std::mutex mutex;
        SectorState state;
    };

    LotSnapshot snapshot_locked(const std::string& lot_id) const;

    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, ParkingLot> lots_;
    std::map<std::string, std::shared_ptr<SectorEntry>> sectors_;
    std::map<std::string, std::vector<std::string>> lot_sectors_;  // lot -> sector ids, sorted
};

json snapshot_to_json(const LotSnapshot& snap);
LotSnapshot snapshot_from_json(const json& j);
void write_snapshots(const std::vector<LotSnapshot>& snaps, const std::filesystem::path& path);
std::vector<LotSnapshot> load_snapshots(const std::filesystem::path& path);

}  // namespace ocpsps
