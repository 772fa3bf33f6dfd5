#include "tamed/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tamed/config.hpp"
#include "tamed/errors.hpp"

namespace tamed {
namespace {

constexpr char kMagic[8] = {'T', 'N', 'S', 'E', 'S', 'N', 'P', '1'};

template <class T>
void put_le(std::ostream& out, T v) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_f64(std::ostream& out, double x) { put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x)); }

template <class T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("snapshot file truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> cols{"t",        "h0",      "h1_full",         "h1_homog",
                                               "h2_full",  "h2_homog", "l4_pow4",         "au_u",
                                               "taming_fraction", "cn", "div_residual", "imag_residual"};
    return cols;
}

void write_csv(std::ostream& out, const TrajectoryRecord& rec) {
    const auto& cols = record_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const RecordRow& r : rec.rows) {
        const double v[] = {r.t,       r.h0,   r.h1_full, r.h1_homog,        r.h2_full, r.h2_homog,
                            r.l4_pow4, r.au_u, r.taming_fraction, r.cn, r.div_residual, r.imag_residual};
        for (std::size_t i = 0; i < std::size(v); ++i) out << (i ? "," : "") << format_double(v[i]);
        out << '\n';
    }
}

void write_csv(const std::string& path, const TrajectoryRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_csv(out, rec);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<RecordRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory CSV");
    std::string expected;
    for (std::size_t i = 0; i < record_columns().size(); ++i) expected += (i ? "," : "") + record_columns()[i];
    if (line != expected) throw IoError("unexpected CSV header: " + line);
    std::vector<RecordRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != record_columns().size()) throw IoError("CSV row has wrong column count");
        RecordRow r;
        r.t = v[0];
        r.h0 = v[1];
        r.h1_full = v[2];
        r.h1_homog = v[3];
        r.h2_full = v[4];
        r.h2_homog = v[5];
        r.l4_pow4 = v[6];
        r.au_u = v[7];
        r.taming_fraction = v[8];
        r.cn = v[9];
        r.div_residual = v[10];
        r.imag_residual = v[11];
        rows.push_back(r);
    }
    return rows;
}

void write_snapshots(std::ostream& out, const TrajectoryRecord& rec) {
    if (!rec.modes) throw InvalidArgument("record has no mode set");
    out.write(kMagic, sizeof kMagic);
    put_le<std::uint64_t>(out, rec.modes->hash());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.modes->k_max()));
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, rec.modes->size());
    put_le<std::uint64_t>(out, rec.snapshots.size());
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
        const double t = s < rec.rows.size() ? rec.rows[s].t : 0.0;
        put_f64(out, t);
        for (const Complex& a : rec.snapshots[s].amplitudes()) {
            put_f64(out, a.real());
            put_f64(out, a.imag());
        }
    }
}

void write_snapshots(const std::string& path, const TrajectoryRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_snapshots(out, rec);
    if (!out) throw IoError("write failed for '" + path + "'");
}

SnapshotFile read_snapshots(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IoError("not a snapshot file (bad magic)");
    const auto hash = get_le<std::uint64_t>(in);
    const auto kmax = get_le<std::uint32_t>(in);
    (void)get_le<std::uint32_t>(in);
    const auto count = get_le<std::uint64_t>(in);
    const auto snaps = get_le<std::uint64_t>(in);
    SnapshotFile out;
    out.modes = build_mode_set(static_cast<int>(kmax));
    if (out.modes->hash() != hash || out.modes->size() != count)
        throw ModeSetMismatch("snapshot mode-set hash does not match K_max = " + std::to_string(kmax));
    for (std::uint64_t s = 0; s < snaps; ++s) {
        out.t.push_back(get_f64(in));
        std::vector<Complex> amp(count);
        for (auto& a : amp) {
            const double re = get_f64(in);
            const double im = get_f64(in);
            a = Complex(re, im);
        }
        out.fields.emplace_back(out.modes, std::move(amp));
    }
    return out;
}

SnapshotFile read_snapshots(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_snapshots(in);
}

}  // namespace tamed
