// src/wav.cc

// Copyright 2026  Rattle Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rattle/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rattle/error.h"

namespace rattle {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(const std::uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

std::int16_t amplitude_to_pcm16(double a) {
  double scaled = std::round(a * 32768.0);
  scaled = std::clamp(scaled, -32768.0, 32767.0);
  return static_cast<std::int16_t>(scaled);
}

}  // namespace

AudioClip decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") ||
      !tag_is(bytes.data() + 8, "WAVE"))
    throw MalformedWav("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size())
      throw MalformedWav("chunk extends past end of file");
    if (tag_is(hdr, "fmt ")) {
      if (chunk_size < 16) throw MalformedWav("fmt chunk too small");
      const std::uint8_t* f = bytes.data() + body;
      format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (tag_is(hdr, "data")) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw MalformedWav("missing fmt chunk");
  if (data == nullptr) throw MalformedWav("missing data chunk");
  if (channels < 1 || channels > 2)
    throw UnsupportedEncoding("expected 1 or 2 channels, got " +
                              std::to_string(channels));
  if (rate == 0) throw MalformedWav("zero sample rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatIeeeFloat && bits == 32;
  if (!pcm16 && !float32)
    throw UnsupportedEncoding("only 16-bit PCM and 32-bit float supported "
                              "(format " + std::to_string(format) + ", " +
                              std::to_string(bits) + " bits)");

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  if (data_size % frame_bytes != 0)
    throw MalformedWav("data chunk size is not a whole number of frames");
  const std::size_t n_frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.channels.assign(channels, std::vector<double>(n_frames));
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const std::uint8_t* s = data + (i * channels + c) * bytes_per_sample;
      if (pcm16) {
        auto code = static_cast<std::int16_t>(read_u16(s));
        clip.channels[c][i] = static_cast<double>(code) / 32768.0;
      } else {
        float v;
        std::uint32_t raw = read_u32(s);
        std::memcpy(&v, &raw, sizeof v);
        clip.channels[c][i] = static_cast<double>(v);
      }
    }
  }
  return clip;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  clip.validate();
  const auto channels = static_cast<std::uint16_t>(clip.num_channels());
  const auto n = static_cast<std::uint32_t>(clip.num_samples());
  const std::uint32_t data_size = n * channels * 2;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * channels * 2);
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int c = 0; c < channels; ++c)
      put_u16(out, static_cast<std::uint16_t>(
                       amplitude_to_pcm16(clip.channels[c][i])));
  return out;
}

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void save_wav(const AudioClip& clip, const std::string& path) {
  std::vector<std::uint8_t> bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write to " + path);
}

}  // namespace rattle
