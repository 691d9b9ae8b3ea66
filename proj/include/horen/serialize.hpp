#pragma once

#include <filesystem>
#include <iosfwd>

#include "horen/codebook.hpp"

namespace horen {

// Codebook file format, version 1, all integers and floats little-endian:
//   magic   8 bytes  "HORENCBK"
//   version u32      1
//   dim     u32
//   count   u64
//   then per entry:
//     key          dim x f64
//     payload      dim x f64
//     trained      u8 (0 or 1)
//     final_loss   f64
//     steps_used   u32
//     label_len    u32, followed by label_len bytes of UTF-8
//     created_at   u64
// No trailing bytes are allowed.

/// Writes the book. Throws IoError when the sink cannot be written.
void save_codebook(const Codebook& book, std::ostream& out);
void save_codebook(const Codebook& book, const std::filesystem::path& path);

/// Reads a book back, validating structure as it goes: bad magic, bad
/// version, truncation, trailing bytes, non-unit keys, or non-monotone
/// creation indices raise FormatError; an unreadable file raises IoError.
Codebook load_codebook(std::istream& in);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace horen
