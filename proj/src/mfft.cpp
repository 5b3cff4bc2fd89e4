#include "mff/mfft.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mff {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'F', 'T'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& ctx) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("MFFT: truncated header" + ctx);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

// payload is little-endian; this code assumes a little-endian host
template <typename T>
void write_payload(std::ostream& out, const std::vector<double>& data) {
    std::vector<T> buf(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(T)));
}

template <typename T>
std::vector<double> read_payload(std::istream& in, std::size_t count, const std::string& ctx) {
    std::vector<T> buf(count);
    if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(count * sizeof(T))))
        throw DataError("MFFT: truncated payload" + ctx);
    return std::vector<double>(buf.begin(), buf.end());
}

} // namespace

void write_mfft(std::ostream& out, const Tensor& t, MfftDtype dtype) {
    out.write(kMagic, 4);
    const std::uint8_t header[2] = {kVersion, std::uint8_t(dtype)};
    out.write(reinterpret_cast<const char*>(header), 2);
    const std::uint8_t rank = std::uint8_t(t.rank());
    out.write(reinterpret_cast<const char*>(&rank), 1);
    for (std::size_t i = 0; i < t.rank(); ++i) put_u32(out, std::uint32_t(t.dim(i)));
    if (dtype == MfftDtype::f64)
        write_payload<double>(out, t.data());
    else
        write_payload<float>(out, t.data());
    if (!out) throw DataError("MFFT: write failed");
}

Tensor read_mfft(std::istream& in, const std::string& context) {
    const std::string ctx = context.empty() ? "" : (" (" + context + ")");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("MFFT: bad magic bytes" + ctx);
    std::uint8_t version, dtype, rank;
    if (!in.read(reinterpret_cast<char*>(&version), 1) ||
        !in.read(reinterpret_cast<char*>(&dtype), 1) ||
        !in.read(reinterpret_cast<char*>(&rank), 1))
        throw DataError("MFFT: truncated header" + ctx);
    if (version != kVersion)
        throw DataError("MFFT: unsupported version " + std::to_string(version) + ctx);
    if (dtype != 1 && dtype != 2)
        throw DataError("MFFT: unknown dtype code " + std::to_string(dtype) + ctx);
    Shape shape(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        shape[i] = get_u32(in, ctx);
        count *= shape[i];
    }
    std::vector<double> data = dtype == 2 ? read_payload<double>(in, count, ctx)
                                          : read_payload<float>(in, count, ctx);
    return Tensor(std::move(shape), std::move(data));
}

void write_mfft_file(const std::string& path, const Tensor& t, MfftDtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("MFFT: cannot open for writing: " + path);
    write_mfft(out, t, dtype);
}

Tensor read_mfft_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("MFFT: cannot open: " + path);
    return read_mfft(in, path);
}

} // namespace mff
