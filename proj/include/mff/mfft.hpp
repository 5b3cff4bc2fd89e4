#ifndef MFF_MFFT_HPP
#define MFF_MFFT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mff/tensor.hpp"

namespace mff {

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Binary tensor container:
///   magic "MFFT", version byte (1), dtype byte (1 = f32 LE, 2 = f64 LE),
///   rank byte, rank x u32 LE dims, row-major payload.
enum class MfftDtype : std::uint8_t { f32 = 1, f64 = 2 };

void write_mfft(std::ostream& out, const Tensor& t, MfftDtype dtype = MfftDtype::f64);
Tensor read_mfft(std::istream& in, const std::string& context = "");

void write_mfft_file(const std::string& path, const Tensor& t,
                     MfftDtype dtype = MfftDtype::f64);
Tensor read_mfft_file(const std::string& path);

} // namespace mff

#endif
