#include "vtv/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace vtv {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  long number() {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) throw IoError("pgm: header value out of range");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw IoError("pgm: malformed header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw IoError("pgm: missing whitespace before raster");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint8_t quantize_pixel(double value) {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  if (value >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::round(value));
}

Imaged decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw IoError("pgm: not a binary (P5) PGM");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.number();
  const long height = reader.number();
  const long maxval = reader.number();
  reader.single_whitespace();
  if (width < 1 || height < 1) throw IoError("pgm: empty image");
  if (maxval < 1 || maxval > 255) {
    throw IoError("pgm: only 8-bit maxval (1..255) is supported, got " + std::to_string(maxval));
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - reader.pos() < count) throw IoError("pgm: truncated raster");

  Imaged image(height, width);
  const std::uint8_t* raster = bytes.data() + reader.pos();
  const double scale = 255.0 / static_cast<double>(maxval);
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    image.data()[i] = maxval == 255 ? raster[i] : std::round(raster[i] * scale);
  }
  return image;
}

std::vector<std::uint8_t> encode_pgm(const Imaged& image) {
  const std::string header =
      "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) bytes.push_back(quantize_pixel(image.data()[i]));
  return bytes;
}

Imaged read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Imaged& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Imaged rescale_to_display(const Imaged& image) {
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  if (!(hi > lo)) return Imaged::Zero(image.rows(), image.cols());
  return ((image.array() - lo) * (255.0 / (hi - lo))).matrix();
}

}  // namespace vtv
