#include "fxlearn/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace fxlearn {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 24));
}

void wr_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
  throw WavError(what + " (byte offset " + std::to_string(offset) + ")");
}

}  // namespace

AudioClip wav_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw WavError("cannot open '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());

  if (buf.size() < 12) fail("truncated file: missing RIFF header", buf.size());
  if (std::memcmp(buf.data(), "RIFF", 4) != 0) fail("missing RIFF tag", 0);
  if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0) fail("missing WAVE tag", 8);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    char id[5] = {0};
    std::memcpy(id, buf.data() + pos, 4);
    std::uint32_t size = rd_u32(buf.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + size > buf.size()) {
      fail(std::string("truncated '") + id + "' chunk", pos);
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) fail("fmt chunk too small", pos);
      format = rd_u16(buf.data() + body);
      channels = rd_u16(buf.data() + body + 2);
      rate = rd_u32(buf.data() + body + 4);
      bits = rd_u16(buf.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) fail("missing fmt chunk", buf.size());
  if (!data) fail("missing data chunk", buf.size());
  if (channels < 1 || channels > 2) {
    throw WavError("unsupported channel count " + std::to_string(channels));
  }

  AudioClip clip;
  clip.sample_rate = static_cast<double>(rate);
  clip.source_id = path;

  if (format == 1 && bits == 16) {
    std::size_t n = data_len / 2 / channels;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        auto v = static_cast<std::int16_t>(rd_u16(data + (i * channels + c) * 2));
        acc += static_cast<double>(v) / 32768.0;
      }
      clip.samples[i] = acc / channels;
    }
  } else if (format == 3 && bits == 32) {
    std::size_t n = data_len / 4 / channels;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        std::uint32_t u = rd_u32(data + (i * channels + c) * 4);
        float f;
        std::memcpy(&f, &u, 4);
        acc += static_cast<double>(f);
      }
      clip.samples[i] = acc / channels;
    }
  } else {
    throw WavError("unsupported codec: format " + std::to_string(format) + ", " +
                   std::to_string(bits) + " bits");
  }
  return clip;
}

void wav_write(const std::string& path, const AudioClip& clip, WavFormat format) {
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t fmt_code = format == WavFormat::pcm16 ? 1 : 3;
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_size = n * bytes_per_sample;

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  wr_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  wr_u32(out, 16);
  wr_u16(out, fmt_code);
  wr_u16(out, 1);  // mono
  wr_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  wr_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * bytes_per_sample);
  wr_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  wr_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  wr_u32(out, data_size);

  if (format == WavFormat::pcm16) {
    for (double s : clip.samples) {
      double v = std::clamp(s, -1.0, 1.0);
      long q = std::lrint(v * 32768.0);  // symmetric with the 1/32768 read scale
      q = std::clamp(q, -32768L, 32767L);
      wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  } else {
    for (double s : clip.samples) {
      float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      wr_u32(out, u);
    }
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw WavError("cannot write '" + path + "'");
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<long>(out.size()));
  if (!os) throw WavError("write failed for '" + path + "'");
}

}  // namespace fxlearn
