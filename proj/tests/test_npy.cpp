#include "doctest.h"

#include <cstring>

#include "extcam/error.hpp"
#include "extcam/npy.hpp"
#include "extcam/random.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace extcam;

namespace {

// Builds a version 1.0 file by hand so the reader is not checked against
// its own writer.
std::string handmade(const std::string& dict, const std::string& payload) {
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string out = "\x93NUMPY";
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>(header.size() >> 8);
  return out + header + payload;
}

std::string doubles(std::initializer_list<double> v) {
  std::string s(v.size() * 8, '\0');
  std::size_t i = 0;
  for (double d : v) std::memcpy(s.data() + 8 * i++, &d, 8);
  return s;
}

std::uint64_t offset_of(const std::string& bytes) {
  try {
    parse_tensor(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("expected a FormatError");
  return 0;
}

}  // namespace

TEST_CASE("reads a hand-built [2,2] file") {
  const auto bytes = handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }", doubles({1, 2, 3, 4}));
  CHECK(parse_tensor(bytes) == Tensor({2, 2}, {1, 2, 3, 4}));
}

TEST_CASE("widens <f4 payloads") {
  std::string payload(8, '\0');
  const float a = 0.25f, b = -3.5f;
  std::memcpy(payload.data(), &a, 4);
  std::memcpy(payload.data() + 4, &b, 4);
  const auto t = parse_tensor(handmade("{'descr': '<f4', 'fortran_order': False, 'shape': (2,), }", payload));
  CHECK(t == Tensor({2}, {0.25, -3.5}));
}

TEST_CASE("writer output matches the reference layout") {
  const std::string bytes = serialize_tensor(Tensor({3}, {1, 2, 3}));
  CHECK(bytes.substr(0, 8) == std::string("\x93NUMPY\x01\x00", 8));
  const std::size_t hlen = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  CHECK((10 + hlen) % 64 == 0);
  const std::string header = bytes.substr(10, hlen);
  CHECK(header.rfind("{'descr': '<f8', 'fortran_order': False, 'shape': (3,), }", 0) == 0);
  CHECK(header.back() == '\n');
}

TEST_CASE("round trip is bitwise for random shapes up to rank 4") {
  Xorshift64Star rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rank = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    Shape shape;
    for (std::size_t r = 0; r < rank; ++r) shape.push_back(1 + static_cast<std::size_t>(rng.uniform() * 6));
    Tensor t = oracle::random_tensor(shape, rng, -1e6, 1e6);
    t[0] = -0.0;
    CHECK(bitwise_equal(parse_tensor(serialize_tensor(t)), t));
  }
}

TEST_CASE("file round trips") {
  ScratchDir dir("npy");
  Xorshift64Star rng(5);
  for (const Shape& shape : {Shape{1}, Shape{3, 14, 14}, Shape{512, 14, 14}}) {
    Tensor t = shape == Shape{1} ? Tensor({1}, {0.0}) : oracle::random_tensor(shape, rng);
    write_tensor(t, dir / "t.npy");
    CHECK(bitwise_equal(read_tensor(dir / "t.npy"), t));
  }
  const Tensor t = oracle::random_tensor({4, 5}, rng);
  write_tensor(t, dir / "f4.npy", ElementType::f4);
  const Tensor back = read_tensor(dir / "f4.npy");
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(t[i])));
}

TEST_CASE("truncated payload reports the file size as offset") {
  const auto bytes = handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", doubles({1}));
  CHECK_THROWS_AS(parse_tensor(bytes), FormatError);
  CHECK(offset_of(bytes) == bytes.size());
}

TEST_CASE("malformed inputs carry byte offsets") {
  const std::string good = handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (1,), }", doubles({1}));

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(offset_of(bad_magic) == 0);

  std::string bad_version = good;
  bad_version[6] = '\x03';
  CHECK(offset_of(bad_version) == 6);

  CHECK(offset_of(handmade("{'descr': '<i4', 'fortran_order': False, 'shape': (1,), }", doubles({1}))) >= 10);
  CHECK_THROWS_AS(parse_tensor(handmade("{'descr': '<f8', 'fortran_order': True, 'shape': (1,), }", doubles({1}))),
                  FormatError);
  CHECK_THROWS_AS(parse_tensor(handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (), }", doubles({1}))),
                  FormatError);
  CHECK_THROWS_AS(parse_tensor(handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (1, }", doubles({1}))),
                  FormatError);
  CHECK_THROWS_AS(parse_tensor(good + "x"), FormatError);
  CHECK_THROWS_AS(parse_tensor(good.substr(0, 5)), FormatError);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string nan_file = handmade("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", doubles({1, nan}));
  CHECK(offset_of(nan_file) == nan_file.size() - 8);
}

TEST_CASE("I/O failures") {
  CHECK_THROWS_AS(read_tensor("/nonexistent/dir/t.npy"), IoError);
  CHECK_THROWS_AS(write_tensor(Tensor({1}, {0.0}), "/nonexistent/dir/t.npy"), IoError);
}
