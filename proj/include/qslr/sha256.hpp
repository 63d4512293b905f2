#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace qslr {

/// SHA-256 of a byte buffer, lowercase hex.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);

/// SHA-256 of a file's contents; throws IoError if unreadable.
std::string sha256_file(const std::string& path);

} // namespace qslr
