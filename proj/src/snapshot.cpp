#include "kvn/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace kvn {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw ConfigError("snapshot: truncated file");
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const WaveField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("snapshot: cannot open '" + path + "' for writing");
    const Grid& g = *f.grid;
    os.write("KVNF", 4);
    put<std::uint32_t>(os, kSnapshotVersion);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(g.representation()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.config_dim()));
    for (std::size_t ax = 0; ax < g.n_axes(); ++ax)
        put<std::uint32_t>(os, static_cast<std::uint32_t>(g.axis(ax).n));
    for (std::size_t ax = 0; ax < g.n_axes(); ++ax) {
        put<double>(os, g.axis(ax).min);
        put<double>(os, g.axis(ax).max);
    }
    os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!os) throw NumericsError("snapshot: write failed for '" + path + "'");
}

WaveField read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("snapshot: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "KVNF", 4) != 0)
        throw ConfigError("snapshot: bad magic in '" + path + "'");
    const auto version = get<std::uint32_t>(is);
    if (version != kSnapshotVersion)
        throw ConfigError("snapshot: unsupported format version " + std::to_string(version));
    const auto rep = get<std::uint8_t>(is);
    const auto d = get<std::uint32_t>(is);
    if (d != 1 && d != 2) throw ConfigError("snapshot: config_dim must be 1 or 2");

    GridSpec spec;
    spec.config_dim = static_cast<int>(d);
    for (std::uint32_t ax = 0; ax < 2 * d; ++ax)
        spec.points_per_axis.push_back(get<std::uint32_t>(is));
    std::vector<Interval> ext(2 * d);
    for (auto& e : ext) {
        e.min = get<double>(is);
        e.max = get<double>(is);
    }
    spec.position_extent.assign(ext.begin(), ext.begin() + d);
    spec.velocity_extent.assign(ext.begin() + d, ext.end());
    GridPtr grid = build_grid(spec);
    if (rep == static_cast<std::uint8_t>(Representation::momentum))
        grid = grid->momentum_relabel(1.0);  // extents already in p units

    WaveField f(grid);
    is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!is) throw ConfigError("snapshot: truncated amplitude data in '" + path + "'");
    return f;
}

}  // namespace kvn
