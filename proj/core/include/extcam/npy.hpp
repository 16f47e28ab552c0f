#pragma once

#include <filesystem>
#include <string>

#include "extcam/tensor.hpp"

namespace extcam {

enum class ElementType { f4, f8 };

/// Reads a version 1.0 (or 2.0) `.npy` container holding little-endian
/// "<f4" or "<f8" values in C order. Values stored as f4 are widened.
///
/// Throws FormatError carrying the byte offset of the first problem
/// (bad magic, malformed header dict, unsupported dtype, Fortran order,
/// truncated or oversized payload, non-finite value) and IoError when the
/// file cannot be opened.
Tensor read_tensor(const std::filesystem::path& path);

/// Parses an in-memory container; `read_tensor` is a thin wrapper.
Tensor parse_tensor(std::string_view bytes);

/// Writes a version 1.0 container. The header is padded so that the
/// payload starts on a 64-byte boundary.
void write_tensor(const Tensor& t, const std::filesystem::path& path,
                  ElementType type = ElementType::f8);

std::string serialize_tensor(const Tensor& t, ElementType type = ElementType::f8);

}  // namespace extcam
