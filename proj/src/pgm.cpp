#include "otq/pgm.hpp"

#include "otq/errors.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

namespace otq {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long integer(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw ParseError(std::string("pgm: ") + what + " out of range");
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("pgm: expected ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::string_view bytes() const { return bytes_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("pgm: missing P2/P5 magic number");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader in(bytes);
  in.advance(2);
  const long width = in.integer("width");
  const long height = in.integer("height");
  const long maxval = in.integer("maxval");
  if (width < 1 || height < 1) throw ParseError("pgm: empty image");
  if (width * height > 100'000'000L) throw ParseError("pgm: image too large");
  if (maxval != 255) throw ParseError("pgm: only 8-bit images with maxval 255 are supported");

  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  const std::size_t count = static_cast<std::size_t>(width * height);
  img.pixels.resize(count);

  if (binary) {
    // exactly one whitespace byte separates maxval from the raster
    if (in.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[in.pos()]))) {
      throw ParseError("pgm: malformed header");
    }
    in.advance(1);
    if (bytes.size() - in.pos() < count) throw ParseError("pgm: truncated raster");
    for (std::size_t k = 0; k < count; ++k) {
      img.pixels[k] = static_cast<std::uint8_t>(bytes[in.pos() + k]);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const long v = in.integer("pixel value");
      if (v > maxval) throw ParseError("pgm: pixel value exceeds maxval");
      img.pixels[k] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_pgm(data);
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (!f) throw Error("write failed: " + path);
}

}  // namespace otq
