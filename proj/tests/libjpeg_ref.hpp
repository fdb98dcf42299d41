// Copyright 2026 The wmark Authors. All Rights Reserved.
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
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "wmark/image.hpp"

#include <jpeglib.h>

namespace wmark::testing {

// Baseline libjpeg round trip at the given quality with 4:4:4 sampling.
inline Image libjpeg_roundtrip(const Image& img, int quality) {
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<unsigned char>(std::floor(255.0 * img.at(c, y, x) + 0.5));

  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  for (int i = 0; i < 3; ++i) cinfo.comp_info[i].h_samp_factor = cinfo.comp_info[i].v_samp_factor = 1;
  cinfo.dct_method = JDCT_FLOAT;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = &rgb[static_cast<std::size_t>(cinfo.next_scanline) * w * 3];
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  jpeg_decompress_struct dinfo;
  dinfo.err = jpeg_std_error(&jerr);
  jpeg_create_decompress(&dinfo);
  jpeg_mem_src(&dinfo, buf, size);
  jpeg_read_header(&dinfo, TRUE);
  dinfo.dct_method = JDCT_FLOAT;
  jpeg_start_decompress(&dinfo);
  Image out(3, img.height(), img.width());
  std::vector<unsigned char> line(static_cast<std::size_t>(w) * 3);
  while (dinfo.output_scanline < dinfo.output_height) {
    const int y = static_cast<int>(dinfo.output_scanline);
    JSAMPROW row = line.data();
    jpeg_read_scanlines(&dinfo, &row, 1);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = line[static_cast<std::size_t>(x) * 3 + c] / 255.0;
  }
  jpeg_finish_decompress(&dinfo);
  jpeg_destroy_decompress(&dinfo);
  std::free(buf);
  return out;
}

}  // namespace wmark::testing
