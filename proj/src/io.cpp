#include "obstlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace obstlab {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
}

template <typename T>
void put(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("field file truncated");
    return to_little(v);
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& field) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open field file for writing: " + path.string());
    const Grid& g = field.grid();
    os.write("PRFD", 4);
    put<std::uint32_t>(os, kFieldFormatVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nodes_per_axis()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.time_count()));
    put<double>(os, g.h());
    put<double>(os, g.dt());
    put<double>(os, g.spec().t_final);
    for (double v : field.values()) put<double>(os, v);
    if (!os) throw ConfigError("failed writing field file: " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open field file: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PRFD", 4) != 0) throw ConfigError("not a PRFD field file: " + path.string());
    const auto version = get<std::uint32_t>(is);
    if (version != kFieldFormatVersion) throw ConfigError("unsupported field file version");
    const auto n = get<std::uint32_t>(is);
    if (n < 1 || n > 3) throw ConfigError("field file: bad dimension");
    std::array<std::uint32_t, 4> dims{};
    for (std::uint32_t a = 0; a <= n; ++a) dims[a] = get<std::uint32_t>(is);
    for (std::uint32_t a = 1; a < n; ++a)
        if (dims[a] != dims[0]) throw ConfigError("field file: spatial axes must have equal node counts");
    if (dims[0] < 3 || dims[0] % 2 == 0 || dims[n] < 2) throw ConfigError("field file: bad axis sizes");
    GridSpec spec;
    spec.n = static_cast<int>(n);
    spec.h = get<double>(is);
    spec.dt = get<double>(is);
    spec.t_final = get<double>(is);
    spec.R = 0.5 * (dims[0] - 1) * spec.h;
    spec.T = (dims[n] - 1) * spec.dt;
    Grid grid(spec);
    std::vector<double> values(grid.size());
    for (double& v : values) v = get<double>(is);
    return ScalarField(grid, std::move(values));
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_curve_csv(const std::filesystem::path& path, const ModulusCurve& curve) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("cannot open curve file for writing: " + path.string());
    os << "r,value\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << format_double(curve.radii[i]) << ',' << format_double(curve.values[i]) << '\n';
}

ModulusCurve read_curve_csv(const std::filesystem::path& path, CurveKind kind) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open curve file: " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "r,value") throw ConfigError("curve file: missing `r,value` header");
    ModulusCurve c;
    c.kind = kind;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("curve file: malformed row '" + line + "'");
        double r = 0, v = 0;
        const auto r1 = std::from_chars(line.data(), line.data() + comma, r);
        const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v);
        if (r1.ec != std::errc() || r2.ec != std::errc()) throw ConfigError("curve file: malformed row '" + line + "'");
        if (!c.radii.empty() && !(r > c.radii.back())) throw ConfigError("curve file: radii must increase");
        c.radii.push_back(r);
        c.values.push_back(v);
    }
    return c;
}

}  // namespace obstlab
