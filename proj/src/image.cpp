// Copyright 2026 The evgassom authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evgassom/image.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include "evgassom/errors.hpp"

#ifdef EVGASSOM_HAVE_PNG
#include <png.h>
#include <cstdio>
#endif

namespace evgassom {

GrayImage make_image(int width, int height, float fill) {
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

namespace {

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer.
  while (true) {
    int c = in.peek();
    if (c == EOF) fail(errc::io_error, "truncated pnm header");
    if (c == '#') {
      std::string junk;
      std::getline(in, junk);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) fail(errc::io_error, "bad pnm header field");
  return value;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  char p = 0, kind = 0;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '5' && kind != '2')) {
    fail(errc::io_error, path + " is not a P2/P5 pgm file");
  }
  const int width = next_pnm_token(in);
  const int height = next_pnm_token(in);
  const int maxval = next_pnm_token(in);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    fail(errc::io_error, path + " has a malformed pgm header");
  }
  GrayImage img = make_image(width, height);
  const float scale = 1.0f / static_cast<float>(maxval);
  if (kind == '2') {
    for (float& px : img.pixels) {
      int v = 0;
      if (!(in >> v)) fail(errc::io_error, path + " truncated pixel data");
      px = static_cast<float>(v) * scale;
    }
    return img;
  }
  in.get();  // single whitespace after maxval
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<std::uint8_t> raw(img.pixels.size() * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    fail(errc::io_error, path + " truncated pixel data");
  }
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const int v = bytes_per == 1
                      ? raw[i]
                      : (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian
    img.pixels[i] = static_cast<float>(v) * scale;
  }
  return img;
}

#ifdef EVGASSOM_HAVE_PNG
GrayImage read_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) fail(errc::io_error, "cannot open " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(errc::io_error, "png decode failed for " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  GrayImage img = make_image(width, height);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      img.at(x, y) = static_cast<float>(row[x]) / 255.0f;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}
#endif

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

GrayImage read_image(const std::string& path) {
  if (has_suffix(path, ".png")) {
#ifdef EVGASSOM_HAVE_PNG
    return read_png(path);
#else
    fail(errc::io_error, "built without png support: " + path);
#endif
  }
  return read_pgm(path);
}

void write_pgm(const std::string& path, const GrayImage8& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) fail(errc::io_error, "write failed for " + path);
}

std::vector<GrayImage> load_image_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    fail(errc::io_error, dir + " is not a directory");
  }
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string p = entry.path().string();
    if (has_suffix(p, ".pgm") || has_suffix(p, ".png")) paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  std::vector<GrayImage> images;
  images.reserve(paths.size());
  for (const std::string& p : paths) images.push_back(read_image(p));
  return images;
}

}  // namespace evgassom
