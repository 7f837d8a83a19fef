#include "gpe/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "gpe/errors.hpp"

namespace gpe {

namespace {

constexpr char kMagic[4] = {'G', 'P', 'E', 'F'};
constexpr std::uint32_t kVersion = 1;

// Serialization is explicitly little-endian so files are portable.
void put_u32(std::string& buf, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

void write_snapshot(const ComplexField& field, const std::filesystem::path& path, int bytes_per_value) {
    field.require_conforming("write_snapshot");
    if (bytes_per_value != 8 && bytes_per_value != 16)
        throw FormatError("write_snapshot: bytes per value must be 8 or 16");
    const Grid& g = field.grid;

    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(g.dimension()));
    for (int a = 0; a < g.dimension(); ++a) put_u32(buf, static_cast<std::uint32_t>(g.points(a)));
    for (int a = 0; a < g.dimension(); ++a) put_f64(buf, g.half_extent(a));
    put_u32(buf, static_cast<std::uint32_t>(bytes_per_value));
    if (bytes_per_value == 16) {
        for (const Complex& z : field.values) {
            put_f64(buf, z.real());
            put_f64(buf, z.imag());
        }
    } else {
        for (const Complex& z : field.values) {
            const float re = static_cast<float>(z.real());
            const float im = static_cast<float>(z.imag());
            std::uint32_t bits;
            std::memcpy(&bits, &re, 4);
            put_u32(buf, bits);
            std::memcpy(&bits, &im, 4);
            put_u32(buf, bits);
        }
    }

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("write_snapshot: cannot open " + tmp.string());
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw IoError("write_snapshot: short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("write_snapshot: rename failed: " + ec.message());
}

ComplexField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_snapshot: cannot open " + path.string());
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (data.size() < 12 || std::memcmp(data.data(), kMagic, 4) != 0)
        throw FormatError("read_snapshot: bad magic in " + path.string());
    std::size_t off = 4;
    const std::uint32_t version = get_u32(data.data() + off);
    off += 4;
    if (version != kVersion)
        throw FormatError("read_snapshot: unsupported version " + std::to_string(version));
    const std::uint32_t dim = get_u32(data.data() + off);
    off += 4;
    if (dim != 2 && dim != 3) throw CorruptionError("read_snapshot: dimension must be 2 or 3");
    const std::size_t header_rest = dim * 4 + dim * 8 + 4;
    if (data.size() < off + header_rest) throw CorruptionError("read_snapshot: truncated header");

    GridSpec spec;
    spec.dimension = static_cast<int>(dim);
    std::size_t count = 1;
    for (std::uint32_t a = 0; a < dim; ++a) {
        spec.points[a] = static_cast<int>(get_u32(data.data() + off));
        off += 4;
        count *= static_cast<std::size_t>(spec.points[a]);
    }
    for (std::uint32_t a = 0; a < dim; ++a) {
        spec.half_extent[a] = get_f64(data.data() + off);
        off += 8;
    }
    const std::uint32_t width = get_u32(data.data() + off);
    off += 4;
    if (width != 8 && width != 16)
        throw CorruptionError("read_snapshot: bad complex width " + std::to_string(width));
    if (data.size() != off + count * width)
        throw CorruptionError("read_snapshot: header dimensions inconsistent with payload length");

    Grid grid;
    try {
        grid = Grid(spec);
    } catch (const InvalidGridError& e) {
        throw CorruptionError(std::string("read_snapshot: ") + e.what());
    }
    ComplexField field(grid);
    const unsigned char* p = data.data() + off;
    if (width == 16) {
        for (std::size_t i = 0; i < count; ++i, p += 16)
            field.values[i] = Complex(get_f64(p), get_f64(p + 8));
    } else {
        for (std::size_t i = 0; i < count; ++i, p += 8) {
            float re, im;
            std::uint32_t bits = get_u32(p);
            std::memcpy(&re, &bits, 4);
            bits = get_u32(p + 4);
            std::memcpy(&im, &bits, 4);
            field.values[i] = Complex(re, im);
        }
    }
    return field;
}

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("file_checksum: cannot open " + path.string());
    std::uint64_t hash = 1469598103934665603ull;
    char chunk[65536];
    while (in) {
        in.read(chunk, sizeof(chunk));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 1099511628211ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(out);
}

} // namespace gpe
