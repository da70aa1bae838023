#include "expint/grid.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace expint {

Grid3D::Grid3D(int nx, int ny, int nz) : n_{nx, ny, nz} {
    for (int a = 0; a < 3; ++a) {
        if (n_[a] < 1) {
            throw DimensionError("grid extents must be positive, got " + std::to_string(nx) + "x" +
                                 std::to_string(ny) + "x" + std::to_string(nz));
        }
        h_[a] = 1.0 / (n_[a] + 1);
    }
}

std::size_t linear_index(const Grid3D& g, int ix, int iy, int iz) {
    if (ix < 0 || ix >= g.nx() || iy < 0 || iy >= g.ny() || iz < 0 || iz >= g.nz()) {
        throw IndexError("index (" + std::to_string(ix) + "," + std::to_string(iy) + "," +
                         std::to_string(iz) + ") outside grid " + std::to_string(g.nx()) + "x" +
                         std::to_string(g.ny()) + "x" + std::to_string(g.nz()));
    }
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(g.nx()) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(g.ny()) * iz);
}

std::array<int, 3> index_triple(const Grid3D& g, std::size_t i) {
    if (i >= g.size()) throw IndexError("linear index " + std::to_string(i) + " outside grid");
    const auto nx = static_cast<std::size_t>(g.nx());
    const auto ny = static_cast<std::size_t>(g.ny());
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
            static_cast<int>(i / (nx * ny))};
}

std::string to_string(ScalarKind k) {
    switch (k) {
    case ScalarKind::f32: return "f32";
    case ScalarKind::f64: return "f64";
    case ScalarKind::c128: return "c128";
    }
    return "unknown";
}

ScalarKind parse_scalar_kind(const std::string& s) {
    if (s == "f32") return ScalarKind::f32;
    if (s == "f64") return ScalarKind::f64;
    if (s == "c128") return ScalarKind::c128;
    throw ConfigError("unknown precision '" + s + "' (expected f32, f64 or c128)");
}

namespace detail {
void throw_nonfinite_eval(const Grid3D& g, std::size_t i) {
    const auto t = index_triple(g, i);
    std::ostringstream os;
    os << "non-finite value at point (" << t[0] << "," << t[1] << "," << t[2] << ") = ("
       << g.coord(0, t[0]) << "," << g.coord(1, t[1]) << "," << g.coord(2, t[2]) << ")";
    throw EvaluationError(os.str());
}
} // namespace detail

namespace {

template <class U>
void put_le(std::ostream& os, U v) {
    static_assert(std::is_trivially_copyable_v<U>);
    unsigned char bytes[sizeof(U)];
    std::memcpy(bytes, &v, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get_le(std::istream& is, const std::filesystem::path& path) {
    unsigned char bytes[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
        throw ParseError("truncated binary field file " + path.string(), 0);
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
    U v;
    std::memcpy(&v, bytes, sizeof(U));
    return v;
}

struct BinaryHeader {
    std::uint64_t n[3];
    ScalarKind kind;
};

BinaryHeader read_header(std::istream& is, const std::filesystem::path& path) {
    BinaryHeader h{};
    for (auto& d : h.n) d = get_le<std::uint64_t>(is, path);
    const auto k = get_le<std::uint8_t>(is, path);
    if (k < 1 || k > 3) throw ParseError("unknown scalar kind byte in " + path.string(), 0);
    h.kind = static_cast<ScalarKind>(k);
    for (auto d : h.n) {
        if (d == 0 || d > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
            throw ParseError("invalid grid extent in " + path.string(), 0);
        }
    }
    return h;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

} // namespace

template <class T>
void write_field_binary(const Field<T>& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    put_le<std::uint64_t>(os, f.grid().nx());
    put_le<std::uint64_t>(os, f.grid().ny());
    put_le<std::uint64_t>(os, f.grid().nz());
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(scalar_kind_of<T>()));
    for (const T& v : f.values()) {
        if constexpr (is_complex_v<T>) {
            put_le(os, v.real());
            put_le(os, v.imag());
        } else {
            put_le(os, v);
        }
    }
    if (!os) throw Error("write failed for " + path.string());
}

template <class T>
Field<T> read_field_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    const auto h = read_header(is, path);
    if (h.kind != scalar_kind_of<T>()) {
        throw DimensionError("field file " + path.string() + " holds " + to_string(h.kind) +
                             ", expected " + to_string(scalar_kind_of<T>()));
    }
    Grid3D g(static_cast<int>(h.n[0]), static_cast<int>(h.n[1]), static_cast<int>(h.n[2]));
    Field<T> f(g);
    for (auto& v : f.values()) {
        if constexpr (is_complex_v<T>) {
            const double re = get_le<double>(is, path);
            const double im = get_le<double>(is, path);
            v = T(re, im);
        } else {
            v = get_le<T>(is, path);
        }
    }
    return f;
}

ScalarKind peek_field_kind(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_header(is, path).kind;
}

template <class T>
void write_field_csv(const Field<T>& f, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << (is_complex_v<T> ? "index,re,im\n" : "index,value\n");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if constexpr (is_complex_v<T>) {
            os << i << ',' << format_double(f[i].real()) << ',' << format_double(f[i].imag())
               << '\n';
        } else {
            os << i << ',' << format_double(static_cast<double>(f[i])) << '\n';
        }
    }
}

template <class T>
std::vector<T> read_field_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line)) throw ParseError("empty CSV file", 1);
    std::vector<T> out;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string idx, a, b;
        if (!std::getline(ls, idx, ',') || !std::getline(ls, a, ',')) {
            throw ParseError("expected index,value", lineno);
        }
        if (std::stoull(idx) != out.size()) throw ParseError("indices must be consecutive", lineno);
        if constexpr (is_complex_v<T>) {
            if (!std::getline(ls, b, ',')) throw ParseError("expected index,re,im", lineno);
            out.emplace_back(std::stod(a), std::stod(b));
        } else {
            out.push_back(static_cast<T>(std::stod(a)));
        }
    }
    return out;
}

#define EXPINT_INSTANTIATE_IO(T)                                                   \
    template void write_field_binary<T>(const Field<T>&, const std::filesystem::path&); \
    template Field<T> read_field_binary<T>(const std::filesystem::path&);          \
    template void write_field_csv<T>(const Field<T>&, const std::filesystem::path&); \
    template std::vector<T> read_field_csv<T>(const std::filesystem::path&);

EXPINT_INSTANTIATE_IO(float)
EXPINT_INSTANTIATE_IO(double)
EXPINT_INSTANTIATE_IO(std::complex<double>)

#undef EXPINT_INSTANTIATE_IO

} // namespace expint
