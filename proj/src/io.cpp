#include "inpaintopt/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

namespace {

// Cursor over a netpbm header: whitespace and '#' comments are skipped
// between tokens.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') throw ValidationError("netpbm: bad magic number");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  long integer() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ValidationError("netpbm: malformed header");
    long value = 0;
    auto [ptr, ec] = std::from_chars(bytes_.data() + start, bytes_.data() + pos_, value);
    if (ec != std::errc()) throw ValidationError("netpbm: malformed header");
    return value;
  }

  // Binary payloads start after exactly one whitespace byte.
  std::size_t binary_payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ValidationError("netpbm: malformed header");
    }
    return pos_ + 1;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void check_dimensions(long w, long h) {
  if (w <= 0 || h <= 0 || w > (1L << 20) || h > (1L << 20)) {
    throw ValidationError("netpbm: invalid dimensions");
  }
}

std::uint8_t quantise(double v) {
  const double r = std::round(std::clamp(v, 0.0, 255.0));
  return static_cast<std::uint8_t>(r);
}

}  // namespace

Image decode_pgm(std::string_view bytes) {
  HeaderReader header(bytes);
  const std::string_view magic = header.magic();
  if (magic != "P2" && magic != "P5") throw ValidationError("pgm: expected P2 or P5");
  const long w = header.integer();
  const long h = header.integer();
  check_dimensions(w, h);
  const long maxval = header.integer();
  if (maxval > 255) throw ValidationError("pgm: maxval > 255 is not supported");
  if (maxval <= 0) throw ValidationError("pgm: maxval must be positive");

  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const double scale = 255.0 / static_cast<double>(maxval);
  std::vector<double> values(n);
  if (magic == "P5") {
    const std::size_t start = header.binary_payload_start();
    if (bytes.size() < start + n) throw ValidationError("pgm: truncated payload");
    for (std::size_t i = 0; i < n; ++i) {
      const auto raw = static_cast<unsigned char>(bytes[start + i]);
      if (raw > maxval) throw ValidationError("pgm: sample exceeds maxval");
      values[i] = raw * scale;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      long raw = 0;
      try {
        raw = header.integer();
      } catch (const ValidationError&) {
        throw ValidationError("pgm: truncated payload");
      }
      if (raw > maxval) throw ValidationError("pgm: sample exceeds maxval");
      values[i] = static_cast<double>(raw) * scale;
    }
  }
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

std::string encode_pgm(const Image& img, bool ascii) {
  std::ostringstream out;
  out << (ascii ? "P2\n" : "P5\n") << img.width() << ' ' << img.height() << "\n255\n";
  if (ascii) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        out << static_cast<int>(quantise(img.at(x, y))) << (x + 1 == img.width() ? '\n' : ' ');
      }
    }
  } else {
    for (double v : img.values()) out.put(static_cast<char>(quantise(v)));
  }
  return out.str();
}

Mask decode_pbm(std::string_view bytes) {
  HeaderReader header(bytes);
  const std::string_view magic = header.magic();
  if (magic != "P1" && magic != "P4") throw ValidationError("pbm: expected P1 or P4");
  const long w = header.integer();
  const long h = header.integer();
  check_dimensions(w, h);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  if (magic == "P4") {
    const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
    const std::size_t start = header.binary_payload_start();
    if (bytes.size() < start + row_bytes * static_cast<std::size_t>(h)) {
      throw ValidationError("pbm: truncated payload");
    }
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const auto byte = static_cast<unsigned char>(bytes[start + y * row_bytes + x / 8]);
        bits[y * w + x] = (byte >> (7 - x % 8)) & 1U;
      }
    }
  } else {
    std::size_t pos = header.position();
    for (auto& b : bits) {
      while (pos < bytes.size() && (std::isspace(static_cast<unsigned char>(bytes[pos])) ||
                                    bytes[pos] == '#')) {
        if (bytes[pos] == '#') {
          while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else {
          ++pos;
        }
      }
      if (pos >= bytes.size()) throw ValidationError("pbm: truncated payload");
      if (bytes[pos] != '0' && bytes[pos] != '1') throw ValidationError("pbm: malformed payload");
      b = bytes[pos] == '1' ? 1 : 0;
      ++pos;
    }
  }
  return Mask(static_cast<int>(w), static_cast<int>(h), std::move(bits));
}

std::string encode_pbm(const Mask& mask) {
  std::string out = "P4\n" + std::to_string(mask.width()) + ' ' + std::to_string(mask.height()) + '\n';
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width()) + 7) / 8;
  for (int y = 0; y < mask.height(); ++y) {
    std::string row(row_bytes, '\0');
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) row[x / 8] = static_cast<char>(row[x / 8] | (0x80 >> (x % 8)));
    }
    out += row;
  }
  return out;
}

std::string encode_tonal_csv(const Image& values, const Mask& mask) {
  if (!mask.same_shape(values)) throw ValidationError("tonal csv: dimension mismatch");
  std::ostringstream out;
  out.precision(17);
  out << "index,value\n";
  for (std::size_t i : mask.indices()) out << i << ',' << values[i] << '\n';
  return out.str();
}

Image decode_tonal_csv(std::string_view text, int width, int height) {
  Image out(width, height, 0.0);
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line == "index,value") {
      first = false;
      continue;
    }
    first = false;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("tonal csv: malformed line '" + line + "'");
    std::size_t index = 0;
    double value = 0.0;
    try {
      std::size_t used = 0;
      index = std::stoull(line.substr(0, comma), &used);
      if (used != comma) throw ValidationError("tonal csv: malformed index");
      value = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw ValidationError("tonal csv: malformed line '" + line + "'");
    }
    if (index >= out.size()) throw ValidationError("tonal csv: index out of range");
    out[index] = value;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

Image read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

void write_pgm(const Image& img, const std::filesystem::path& path, bool ascii) {
  write_file(path, encode_pgm(img, ascii));
}

Mask read_pbm(const std::filesystem::path& path) { return decode_pbm(read_file(path)); }

void write_pbm(const Mask& mask, const std::filesystem::path& path) {
  write_file(path, encode_pbm(mask));
}

void write_tonal_csv(const Image& values, const Mask& mask, const std::filesystem::path& path) {
  write_file(path, encode_tonal_csv(values, mask));
}

Image read_tonal_csv(const std::filesystem::path& path, int width, int height) {
  return decode_tonal_csv(read_file(path), width, height);
}

}  // namespace inpaintopt
