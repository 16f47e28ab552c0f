#include "extcam/npy.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "extcam/error.hpp"

namespace extcam {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

struct Header {
  ElementType type = ElementType::f8;
  Shape shape;
};

// Parser for the Python-literal dict in the header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (3, 14, 14), }
class HeaderParser {
 public:
  HeaderParser(std::string_view text, std::uint64_t base) : text_(text), base_(base) {}

  Header parse() {
    std::optional<std::string> descr;
    std::optional<bool> fortran;
    std::optional<Shape> shape;

    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::uint64_t key_at = here();
      std::string key = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        descr = parse_string();
      } else if (key == "fortran_order") {
        fortran = parse_bool();
      } else if (key == "shape") {
        shape = parse_tuple();
      } else {
        throw FormatError("unknown header key '" + key + "'", key_at);
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}' in header dict");
      }
    }

    if (!descr) fail("header is missing 'descr'");
    if (!fortran) fail("header is missing 'fortran_order'");
    if (!shape) fail("header is missing 'shape'");

    Header h;
    if (*descr == "<f8") {
      h.type = ElementType::f8;
    } else if (*descr == "<f4") {
      h.type = ElementType::f4;
    } else {
      throw FormatError("unsupported element type '" + *descr + "'", base_);
    }
    if (*fortran) throw FormatError("Fortran-ordered arrays are not supported", base_);
    if (shape->empty()) throw FormatError("zero-rank arrays are not supported", base_);
    for (std::size_t d : *shape) {
      if (d == 0) throw FormatError("shape has a zero dimension", base_);
    }
    h.shape = std::move(*shape);
    return h;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, here()); }

  std::uint64_t here() const { return base_ + pos_; }

  char peek() const {
    if (pos_ >= text_.size()) fail("unexpected end of header");
    return text_[pos_];
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "' in header");
    ++pos_;
  }

  std::string parse_string() {
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected quoted string in header");
    ++pos_;
    const std::size_t start = pos_;
    while (peek() != quote) ++pos_;
    std::string s(text_.substr(start, pos_ - start));
    ++pos_;
    return s;
  }

  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False in header");
  }

  Shape parse_tuple() {
    expect('(');
    Shape shape;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return shape;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected integer in shape tuple");
      std::uint64_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
        if (v > (std::uint64_t{1} << 40)) fail("shape dimension too large");
        ++pos_;
      }
      shape.push_back(static_cast<std::size_t>(v));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("expected ',' or ')' in shape tuple");
      }
    }
  }

  std::string_view text_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

std::uint32_t read_le(std::string_view bytes, std::size_t at, std::size_t width) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

Tensor parse_tensor(std::string_view bytes) {
  if (bytes.size() < kMagicLen + 2) throw FormatError("file too short for magic and version", bytes.size());
  if (bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen)) {
    throw FormatError("bad magic string", 0);
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  std::size_t len_width = 0;
  if (major == 1 && minor == 0) {
    len_width = 2;
  } else if (major == 2 && minor == 0) {
    len_width = 4;
  } else {
    throw FormatError("unsupported format version " + std::to_string(major) + "." +
                          std::to_string(minor),
                      6);
  }
  const std::size_t len_at = kMagicLen + 2;
  if (bytes.size() < len_at + len_width) throw FormatError("truncated header length", bytes.size());
  const std::size_t header_len = read_le(bytes, len_at, len_width);
  const std::size_t header_at = len_at + len_width;
  if (bytes.size() < header_at + header_len) {
    throw FormatError("truncated header: declared " + std::to_string(header_len) + " bytes",
                      bytes.size());
  }

  HeaderParser parser(bytes.substr(header_at, header_len), header_at);
  const Header header = parser.parse();

  const std::size_t count = element_count(header.shape);
  const std::size_t width = header.type == ElementType::f8 ? 8 : 4;
  const std::size_t payload_at = header_at + header_len;
  const std::size_t available = bytes.size() - payload_at;
  if (available < count * width) {
    throw FormatError("truncated payload: expected " + std::to_string(count * width) +
                          " bytes, found " + std::to_string(available),
                      bytes.size());
  }
  if (available > count * width) {
    throw FormatError("trailing bytes after payload", payload_at + count * width);
  }

  std::vector<double> data(count);
  const char* src = bytes.data() + payload_at;
  for (std::size_t i = 0; i < count; ++i) {
    double v;
    if (header.type == ElementType::f8) {
      std::memcpy(&v, src + i * 8, 8);
    } else {
      float f;
      std::memcpy(&f, src + i * 4, 4);
      v = static_cast<double>(f);
    }
    if (!std::isfinite(v)) throw FormatError("non-finite value", payload_at + i * width);
    data[i] = v;
  }
  return Tensor(header.shape, std::move(data));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

std::string serialize_tensor(const Tensor& t, ElementType type) {
  if (t.empty()) throw ArgumentError("cannot serialize an empty tensor");
  std::string dict = "{'descr': '";
  dict += type == ElementType::f8 ? "<f8" : "<f4";
  dict += "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < t.rank(); ++i) {
    dict += std::to_string(t.dim(i));
    if (t.rank() == 1 || i + 1 < t.rank()) dict += ",";
    if (i + 1 < t.rank()) dict += " ";
  }
  dict += "), }";

  const std::size_t preamble = kMagicLen + 2 + 2;
  std::size_t total = preamble + dict.size() + 1;
  const std::size_t padding = (64 - total % 64) % 64;
  dict.append(padding, ' ');
  dict += '\n';
  if (dict.size() > 0xffff) throw ArgumentError("tensor header too long for format version 1.0");

  std::string out(kMagic, kMagicLen);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(dict.size() & 0xff);
  out += static_cast<char>((dict.size() >> 8) & 0xff);
  out += dict;

  const std::size_t width = type == ElementType::f8 ? 8 : 4;
  const std::size_t payload_at = out.size();
  out.resize(payload_at + t.size() * width);
  char* dst = out.data() + payload_at;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (type == ElementType::f8) {
      const double v = t[i];
      std::memcpy(dst + i * 8, &v, 8);
    } else {
      const float f = static_cast<float>(t[i]);
      std::memcpy(dst + i * 4, &f, 4);
    }
  }
  return out;
}

void write_tensor(const Tensor& t, const std::filesystem::path& path, ElementType type) {
  const std::string bytes = serialize_tensor(t, type);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace extcam
