#include "flowmap/npy.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flowmap/error.hpp"

static_assert(std::endian::native == std::endian::little, "NPY payloads are written as host order");

namespace flowmap::npy {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::size_t itemsize(Dtype d) {
  switch (d) {
    case Dtype::Float64: return 8;
    case Dtype::Float32: return 4;
    case Dtype::Bool: return 1;
  }
  return 0;
}

const char* descr_of(Dtype d) {
  switch (d) {
    case Dtype::Float64: return "<f8";
    case Dtype::Float32: return "<f4";
    case Dtype::Bool: return "|b1";
  }
  return "";
}

Dtype dtype_of(const std::string& descr) {
  if (descr == "<f8") return Dtype::Float64;
  if (descr == "<f4") return Dtype::Float32;
  if (descr == "|b1" || descr == "|u1") return Dtype::Bool;
  throw ParseError("npy: unsupported dtype '" + descr + "'");
}

std::size_t product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

// Cursor over the Python-literal header dict.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view s) : s_(s) {}

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c)
      throw ParseError(std::string("npy: malformed header, expected '") + c + "'");
    ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  std::string quoted() {
    skip_ws();
    if (pos_ >= s_.size() || (s_[pos_] != '\'' && s_[pos_] != '"'))
      throw ParseError("npy: malformed header, expected string");
    const char q = s_[pos_++];
    auto end = s_.find(q, pos_);
    if (end == std::string_view::npos) throw ParseError("npy: unterminated string in header");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }
  std::string word() {
    skip_ws();
    std::size_t b = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (b == pos_) throw ParseError("npy: malformed header value");
    return std::string(s_.substr(b, pos_ - b));
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Header {
  std::string descr;
  bool fortran = false;
  std::vector<std::size_t> shape;
};

Header parse_dict(std::string_view text) {
  Header h;
  bool have_descr = false, have_order = false, have_shape = false;
  HeaderParser p(text);
  p.expect('{');
  while (!p.peek('}')) {
    const std::string key = p.quoted();
    p.expect(':');
    if (key == "descr") {
      h.descr = p.quoted();
      have_descr = true;
    } else if (key == "fortran_order") {
      const std::string v = p.word();
      if (v != "True" && v != "False") throw ParseError("npy: bad fortran_order");
      h.fortran = v == "True";
      have_order = true;
    } else if (key == "shape") {
      p.expect('(');
      while (!p.peek(')')) {
        const std::string v = p.word();
        std::size_t dimlen = 0;
        for (char c : v) {
          if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("npy: bad shape entry");
          dimlen = dimlen * 10 + static_cast<std::size_t>(c - '0');
        }
        h.shape.push_back(dimlen);
        if (p.peek(',')) p.expect(',');
      }
      p.expect(')');
      have_shape = true;
    } else {
      throw ParseError("npy: unexpected header key '" + key + "'");
    }
    if (p.peek(',')) p.expect(',');
  }
  p.expect('}');
  if (!have_descr || !have_order || !have_shape) throw ParseError("npy: header missing keys");
  return h;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::string encode_raw(Dtype dtype, std::span<const std::size_t> shape, const void* data,
                       std::size_t bytes) {
  std::string out = encode_header(dtype, shape);
  out.append(static_cast<const char*>(data), bytes);
  return out;
}

}  // namespace

std::size_t Array::size() const { return product(shape); }

std::vector<double> Array::to_doubles() const {
  std::vector<double> out(size());
  if (dtype == Dtype::Float64) {
    std::memcpy(out.data(), raw.data(), out.size() * 8);
  } else if (dtype == Dtype::Float32) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      float f;
      std::memcpy(&f, raw.data() + 4 * i, 4);
      out[i] = f;
    }
  } else {
    throw ParseError("npy: expected a floating-point array");
  }
  return out;
}

std::vector<std::uint8_t> Array::to_bools() const {
  if (dtype != Dtype::Bool) throw ParseError("npy: expected a bool array");
  std::vector<std::uint8_t> out(raw.begin(), raw.end());
  for (auto& b : out) b = b ? 1 : 0;
  return out;
}

std::string encode_header(Dtype dtype, std::span<const std::size_t> shape) {
  std::ostringstream dict;
  dict << "{'descr': '" << descr_of(dtype) << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ',';
    if (i + 1 < shape.size()) dict << ' ';
  }
  dict << "), }";
  std::string text = dict.str();
  // magic(6) + version(2) + u16 length(2) + dict + '\n' padded to 64 bytes.
  const std::size_t unpadded = kMagicLen + 2 + 2 + text.size() + 1;
  const std::size_t total = (unpadded + 63) / 64 * 64;
  text.append(total - unpadded, ' ');
  text.push_back('\n');

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(text.size()));
  out += text;
  return out;
}

std::string encode(std::span<const std::size_t> shape, std::span<const double> values) {
  if (product(shape) != values.size()) throw InvalidArgument("npy: shape does not match data");
  return encode_raw(Dtype::Float64, shape, values.data(), values.size_bytes());
}

std::string encode(std::span<const std::size_t> shape, std::span<const std::uint8_t> flags) {
  if (product(shape) != flags.size()) throw InvalidArgument("npy: shape does not match data");
  std::vector<std::uint8_t> norm(flags.begin(), flags.end());
  for (auto& b : norm) b = b ? 1 : 0;
  return encode_raw(Dtype::Bool, shape, norm.data(), norm.size());
}

Array decode(std::string_view bytes) {
  if (bytes.size() < kMagicLen + 4 || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen))
    throw ParseError("npy: bad magic bytes");
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    std::uint16_t len;
    std::memcpy(&len, bytes.data() + 8, 2);
    header_len = len;
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw ParseError("npy: truncated preamble");
    std::uint32_t len;
    std::memcpy(&len, bytes.data() + 8, 4);
    header_len = len;
    offset = 12;
  } else {
    throw ParseError("npy: unsupported format version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw ParseError("npy: truncated header");
  const Header h = parse_dict(bytes.substr(offset, header_len));
  if (h.fortran) throw ParseError("npy: fortran-order arrays are not supported");

  Array a;
  a.dtype = dtype_of(h.descr);
  a.shape = h.shape;
  const std::size_t need = a.size() * itemsize(a.dtype);
  const std::size_t data_at = offset + header_len;
  if (bytes.size() - data_at != need)
    throw ParseError("npy: payload is " + std::to_string(bytes.size() - data_at) +
                     " bytes, header implies " + std::to_string(need));
  a.raw.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + data_at),
               reinterpret_cast<const std::uint8_t*>(bytes.data() + bytes.size()));
  return a;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const double> values) {
  dump(path, encode(shape, values));
}

void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const std::uint8_t> flags) {
  dump(path, encode(shape, flags));
}

Array read(const std::filesystem::path& path) {
  try {
    return decode(slurp(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace flowmap::npy
