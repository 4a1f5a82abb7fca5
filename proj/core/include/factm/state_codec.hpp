#ifndef FACTM_STATE_CODEC_HPP
#define FACTM_STATE_CODEC_HPP

#include "factm/types.hpp"

#include <cstdint>
#include <string>

namespace factm {

/// Current version written into the state header.
inline constexpr std::uint32_t kStateFormatVersion = 1;

/// Encodes the full variational state as a versioned, self-describing byte
/// string: an 8-byte magic "FACTMST\0", a little-endian u32 version, u32
/// counts of simple and structured views, then named blocks of little-endian
/// float64 values (see docs/state_format.md).
[[nodiscard]] std::string encode_state(const VariationalState& state);

/// Inverse of encode_state. Throws std::runtime_error on malformed input or
/// an unsupported version.
[[nodiscard]] VariationalState decode_state(const std::string& bytes);

}  // namespace factm

#endif  // FACTM_STATE_CODEC_HPP
