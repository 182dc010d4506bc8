#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "nsk41/field.hpp"

namespace nsk41 {

/// Binary field snapshot.
///
/// Layout (all little-endian):
///   char[8]  "NSK41FLD"
///   u32      format version (1)
///   u32      N
///   f64      L_box
///   f64      ell0
///   then for k1, k2, k3 each ascending over [-N/2, N/2) (k1 slowest),
///   for each of the 3 components: f64 re, f64 im.
/// The dealiasing fraction is not stored; readers supply it.
namespace snapshot {

inline constexpr char magic[8] = {'N', 'S', 'K', '4', '1', 'F', 'L', 'D'};
inline constexpr std::uint32_t version = 1;

namespace detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}
inline void put_f64(std::ostream& os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("snapshot: truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}
inline double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("snapshot: truncated data");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}
}  // namespace detail

inline void write(std::ostream& os, const SpectralField& f, double ell0) {
    const GridSpec& g = f.grid();
    const int n = g.resolution();
    os.write(magic, 8);
    detail::put_u32(os, version);
    detail::put_u32(os, static_cast<std::uint32_t>(n));
    detail::put_f64(os, g.box_half_side());
    detail::put_f64(os, ell0);
    for (int k1 = -n / 2; k1 < n / 2; ++k1)
        for (int k2 = -n / 2; k2 < n / 2; ++k2)
            for (int k3 = -n / 2; k3 < n / 2; ++k3) {
                const std::size_t idx = g.flat_of_wavenumbers(k1, k2, k3);
                for (std::size_t c = 0; c < 3; ++c) {
                    detail::put_f64(os, f(c, idx).real());
                    detail::put_f64(os, f(c, idx).imag());
                }
            }
}

struct Loaded {
    SpectralField field;
    double ell0 = 0.0;
};

inline Loaded read(std::istream& is, double dealias_fraction = 2.0 / 3.0) {
    char m[8];
    if (!is.read(m, 8) || std::memcmp(m, magic, 8) != 0) throw std::runtime_error("snapshot: bad magic");
    const std::uint32_t ver = detail::get_u32(is);
    if (ver != version) throw std::runtime_error("snapshot: unsupported version " + std::to_string(ver));
    const auto n = static_cast<int>(detail::get_u32(is));
    const double lbox = detail::get_f64(is);
    const double ell0 = detail::get_f64(is);
    Loaded out{SpectralField(GridSpec(lbox, n, dealias_fraction)), ell0};
    const GridSpec& g = out.field.grid();
    for (int k1 = -n / 2; k1 < n / 2; ++k1)
        for (int k2 = -n / 2; k2 < n / 2; ++k2)
            for (int k3 = -n / 2; k3 < n / 2; ++k3) {
                const std::size_t idx = g.flat_of_wavenumbers(k1, k2, k3);
                for (std::size_t c = 0; c < 3; ++c) {
                    const double re = detail::get_f64(is);
                    const double im = detail::get_f64(is);
                    out.field(c, idx) = cplx(re, im);
                }
            }
    return out;
}

inline void write_file(const std::string& path, const SpectralField& f, double ell0) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    write(os, f, ell0);
}

inline Loaded read_file(const std::string& path, double dealias_fraction = 2.0 / 3.0) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    return read(is, dealias_fraction);
}

}  // namespace snapshot
}  // namespace nsk41
