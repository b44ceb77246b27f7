#include "segclass/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace segclass {
namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_throw(png_structp, png_const_charp msg) { throw FormatError(std::string("libpng: ") + msg); }
void png_ignore_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  int height = 0;
  int width = 0;
  int channels = 0;
  int depth = 0;  // 8 or 16; 16-bit samples are big-endian
  std::vector<std::uint8_t> bytes;
};

DecodedPng read_png(const fs::path& path) {
  FilePtr fp = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_ignore_warning);
  if (!png) throw FormatError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw FormatError("libpng: out of memory");

  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  } else if (depth != 8 && depth != 16) {
    throw FormatError("'" + path.string() + "': unsupported bit depth " + std::to_string(depth));
  }
  png_read_update_info(png, info);

  DecodedPng out;
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.channels = png_get_channels(png, info);
  out.depth = depth;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(row_bytes * static_cast<std::size_t>(out.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
  for (int r = 0; r < out.height; ++r) rows[static_cast<std::size_t>(r)] = out.bytes.data() + row_bytes * static_cast<std::size_t>(r);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return out;
}

void write_png(const fs::path& path, int height, int width, int channels, int depth,
               const std::vector<std::uint8_t>& bytes) {
  static constexpr std::array<int, 5> kColorTypes = {0, PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA,
                                                     PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGB_ALPHA};
  if (channels < 1 || channels > 4) throw FormatError("PNG supports 1 to 4 channels, got " + std::to_string(channels));
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_ignore_warning);
  if (!png) throw FormatError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw FormatError("libpng: out of memory");

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
               kColorTypes[static_cast<std::size_t>(channels)], PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) *
                                static_cast<std::size_t>(depth / 8);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + row_bytes * static_cast<std::size_t>(r)));
  }
  png_write_end(png, nullptr);
}

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

// Reads the next header token of a PNM file, skipping whitespace and comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int pnm_int(std::istream& in, const fs::path& path) {
  const std::string tok = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError("'" + path.string() + "': malformed PNM header");
  }
}

RasterImage load_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string magic = pnm_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("'" + path.string() + "': unsupported image format (expected PNG, P5 or P6)");
  }
  const int width = pnm_int(in, path);
  const int height = pnm_int(in, path);
  const int maxval = pnm_int(in, path);
  if (maxval < 1 || maxval > 255)
    throw FormatError("'" + path.string() + "': unsupported bit depth (maxval " + std::to_string(maxval) + ")");
  // pnm_token consumed exactly one whitespace byte after maxval.
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                                 static_cast<std::size_t>(channels));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError("'" + path.string() + "': truncated pixel data");
  std::vector<float> data(raw.size());
  const float scale = static_cast<float>(maxval);
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [scale](unsigned char v) { return std::min(1.0f, static_cast<float>(v) / scale); });
  return RasterImage(height, width, channels, std::move(data));
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Rgb pixel_rgb(const DecodedPng& img, std::size_t index) {
  const std::uint8_t* p = img.bytes.data() + index * static_cast<std::size_t>(img.channels);
  if (img.channels >= 3) return {p[0], p[1], p[2]};
  return {p[0], p[0], p[0]};
}

fs::path sidecar_path(const fs::path& path) { return fs::path(path.string() + ".hdr"); }

}  // namespace

RasterImage load_image(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("image file '" + path.string() + "' does not exist");
  if (!has_png_signature(path)) return load_pnm(path);
  DecodedPng png = read_png(path);
  if (png.depth != 8)
    throw FormatError("'" + path.string() + "': unsupported bit depth " + std::to_string(png.depth));
  std::vector<float> data(png.bytes.size());
  std::transform(png.bytes.begin(), png.bytes.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return RasterImage(png.height, png.width, png.channels, std::move(data));
}

void save_png(const RasterImage& img, const fs::path& path) {
  std::vector<std::uint8_t> bytes(img.data().size());
  std::transform(img.data().begin(), img.data().end(), bytes.begin(), to_byte);
  write_png(path, img.height(), img.width(), img.channels(), 8, bytes);
}

void save_pnm(const RasterImage& img, const fs::path& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw FormatError("PNM output needs 1 or 3 channels, got " + std::to_string(img.channels()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  for (float v : img.data()) out.put(static_cast<char>(to_byte(v)));
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

Palette load_palette(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open palette '" + path.string() + "'");
  std::vector<PaletteEntry> entries;
  std::optional<Rgb> unlabeled;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    int r = -1, g = -1, b = -1;
    std::string extra;
    if (!(fields >> name >> r >> g >> b) || (fields >> extra) || r < 0 || r > 255 || g < 0 || g > 255 ||
        b < 0 || b > 255) {
      throw FormatError("palette '" + path.string() + "' line " + std::to_string(line_no) +
                        ": expected `name r g b` with components in [0,255]");
    }
    const Rgb color{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
    if (name == "unlabeled") {
      unlabeled = color;
    } else {
      entries.push_back({name, color});
    }
  }
  if (entries.empty()) throw FormatError("palette '" + path.string() + "' declares no classes");
  Palette palette(std::move(entries));
  if (unlabeled) palette.set_unlabeled_color(*unlabeled);
  return palette;
}

void save_palette(const Palette& palette, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << "# name r g b\n";
  for (const auto& e : palette.entries()) {
    out << e.name << ' ' << int(e.color.r) << ' ' << int(e.color.g) << ' ' << int(e.color.b) << '\n';
  }
  if (const Rgb* u = palette.unlabeled_color()) {
    out << "unlabeled " << int(u->r) << ' ' << int(u->g) << ' ' << int(u->b) << '\n';
  }
}

LabelMap load_labels(const fs::path& path, const Palette& palette, bool unknown_as_unlabeled) {
  if (!fs::exists(path)) throw FormatError("label file '" + path.string() + "' does not exist");
  DecodedPng png = read_png(path);
  if (png.depth != 8)
    throw FormatError("'" + path.string() + "': unsupported bit depth " + std::to_string(png.depth));
  LabelMap labels(png.height, png.width);
  const Rgb* unlabeled = palette.unlabeled_color();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Rgb color = pixel_rgb(png, i);
    ClassId id = palette.find(color);
    if (id == kUnlabeled && !(unlabeled && *unlabeled == color) && !unknown_as_unlabeled) {
      const auto w = static_cast<std::size_t>(png.width);
      throw FormatError("'" + path.string() + "': color (" + std::to_string(color.r) + "," +
                        std::to_string(color.g) + "," + std::to_string(color.b) + ") at row " +
                        std::to_string(i / w) + ", col " + std::to_string(i % w) + " is not in the palette");
    }
    labels[i] = id;
  }
  return labels;
}

RasterImage render_labels(const Grid<std::int32_t>& labels, const Palette& palette) {
  RasterImage out(labels.height(), labels.width(), 3);
  auto data = out.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Rgb color;
    if (labels[i] == kUnlabeled && palette.unlabeled_color()) {
      color = *palette.unlabeled_color();
    } else if (labels[i] >= 0 && labels[i] < palette.size()) {
      color = palette[labels[i]].color;
    } else {
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " has no palette entry");
    }
    data[3 * i] = color.r / 255.0f;
    data[3 * i + 1] = color.g / 255.0f;
    data[3 * i + 2] = color.b / 255.0f;
  }
  return out;
}

void overlay_boundaries(RasterImage& img, const BoundaryMask& mask, Rgb color) {
  if (img.channels() != 3 || img.height() != mask.height() || img.width() != mask.width())
    throw std::invalid_argument("boundary overlay needs a 3-channel image of the mask's size");
  auto data = img.data();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    data[3 * i] = color.r / 255.0f;
    data[3 * i + 1] = color.g / 255.0f;
    data[3 * i + 2] = color.b / 255.0f;
  }
}

void save_labels(const LabelMap& labels, const Palette& palette, const fs::path& path) {
  save_png(render_labels(labels, palette), path);
}

void save_segmentation(const Segmentation& seg, const fs::path& path) {
  if (path.extension() == ".png") {
    if (seg.region_count() > 65536)
      throw FormatError("16-bit PNG cannot hold " + std::to_string(seg.region_count()) + " regions; use a text grid");
    std::vector<std::uint8_t> bytes(seg.size() * 2);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto v = static_cast<std::uint16_t>(seg[i]);
      bytes[2 * i] = static_cast<std::uint8_t>(v >> 8);
      bytes[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
    write_png(path, seg.height(), seg.width(), 1, 16, bytes);
    std::ofstream hdr(sidecar_path(path));
    if (!hdr) throw FormatError("cannot write '" + sidecar_path(path).string() + "'");
    hdr << "height " << seg.height() << "\nwidth " << seg.width() << "\nregion_count " << seg.region_count() << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << seg.height() << ' ' << seg.width() << ' ' << seg.region_count() << '\n';
  for (int r = 0; r < seg.height(); ++r) {
    for (int c = 0; c < seg.width(); ++c) {
      if (c) out << ' ';
      out << seg(r, c);
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

Segmentation load_segmentation(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("segmentation file '" + path.string() + "' does not exist");
  if (path.extension() == ".png") {
    std::ifstream hdr(sidecar_path(path));
    if (!hdr) throw FormatError("missing segmentation header '" + sidecar_path(path).string() + "'");
    int height = -1, width = -1, count = -1;
    std::string key;
    int value;
    while (hdr >> key >> value) {
      if (key == "height") height = value;
      else if (key == "width") width = value;
      else if (key == "region_count") count = value;
    }
    DecodedPng png = read_png(path);
    if (png.depth != 16 || png.channels != 1)
      throw FormatError("'" + path.string() + "': segmentation PNG must be 16-bit single channel");
    if (png.height != height || png.width != width || count < 0)
      throw FormatError("'" + path.string() + "': header does not match the image");
    Grid<RegionId> ids(height, width);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ids[i] = static_cast<RegionId>((png.bytes[2 * i] << 8) | png.bytes[2 * i + 1]);
    }
    try {
      return Segmentation(std::move(ids), count);
    } catch (const std::invalid_argument& e) {
      throw FormatError("'" + path.string() + "': " + e.what());
    }
  }
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  int height = -1, width = -1, count = -1;
  if (!(in >> height >> width >> count) || height < 0 || width < 0 || count < 0)
    throw FormatError("'" + path.string() + "': malformed segmentation header");
  Grid<RegionId> ids(height, width);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!(in >> ids[i])) throw FormatError("'" + path.string() + "': truncated id grid");
  }
  try {
    return Segmentation(std::move(ids), count);
  } catch (const std::invalid_argument& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace segclass
