#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tamed/integrator.hpp"

namespace tamed {

/// CSV header of write_csv, in column order.
const std::vector<std::string>& record_columns();

/// One row per record time. Numbers use the shortest round-trip decimal form,
/// so the text is a pure function of the record.
void write_csv(std::ostream& out, const TrajectoryRecord& rec);
void write_csv(const std::string& path, const TrajectoryRecord& rec);

/// Parses a CSV produced by write_csv (column order must match).
std::vector<RecordRow> read_csv(std::istream& in);

/// Little-endian snapshot file:
///   "TNSESNP1", u64 mode-set hash, u32 K_max, u32 reserved (0),
///   u64 mode count, u64 snapshot count,
///   then per snapshot: f64 t, mode count x (f64 re, f64 im).
void write_snapshots(std::ostream& out, const TrajectoryRecord& rec);
void write_snapshots(const std::string& path, const TrajectoryRecord& rec);

struct SnapshotFile {
    ModeSetPtr modes;
    std::vector<double> t;
    std::vector<SpectralField> fields;
};

/// Throws ModeSetMismatch when the stored hash differs from the rebuilt mode set.
SnapshotFile read_snapshots(std::istream& in);
SnapshotFile read_snapshots(const std::string& path);

}  // namespace tamed
