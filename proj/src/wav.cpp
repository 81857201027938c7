#include "universa/audio/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace universa {

namespace {

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open wav file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ValidationError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    uint32_t chunk_size = read_u32(hdr + 4);
    size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      throw ValidationError("truncated wav chunk in " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw ValidationError("malformed fmt chunk: " + path);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw ValidationError("wav file missing fmt/data chunk: " + path);
  }
  if (channels != 1) {
    throw ValidationError("channel count " + std::to_string(channels) +
                          " unsupported (mono only): " + path);
  }
  if (rate == 0) throw ValidationError("zero sample rate: " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    size_t n = data_size / 2;
    if (n == 0) throw ValidationError("empty wav data: " + path);
    w.samples.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      int16_t s = static_cast<int16_t>(read_u16(data + 2 * i));
      w.samples[static_cast<Eigen::Index>(i)] = s / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    size_t n = data_size / 4;
    if (n == 0) throw ValidationError("empty wav data: " + path);
    w.samples.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      float f = std::bit_cast<float>(read_u32(data + 4 * i));
      if (!std::isfinite(f)) {
        throw ValidationError("non-finite sample in wav file: " + path);
      }
      w.samples[static_cast<Eigen::Index>(i)] =
          std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
  } else {
    throw ValidationError("unsupported wav codec (format " +
                          std::to_string(format) + ", " + std::to_string(bits) +
                          " bits): " + path);
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.samples.size() < 1) throw ValidationError("refusing to write empty waveform");
  if (w.sample_rate <= 0) throw ValidationError("invalid sample rate");
  double peak = w.samples.abs().maxCoeff();
  if (!std::isfinite(peak) || peak > 1.0) {
    throw ValidationError("sample out of [-1, 1] (peak " + std::to_string(peak) +
                          "); normalize before writing");
  }

  size_t n = static_cast<size_t>(w.samples.size());
  std::vector<uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, static_cast<uint32_t>(36 + 2 * n));
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16(out, 2);                                         // block align
  put_u16(out, 16);                                        // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, static_cast<uint32_t>(2 * n));
  for (size_t i = 0; i < n; ++i) {
    // Scale by 32768 with saturation at +32767 so that +1.0 stays legal
    // and the round trip stays within 1/32768 per sample.
    double v = std::round(w.samples[static_cast<Eigen::Index>(i)] * 32768.0);
    int32_t q = static_cast<int32_t>(v);
    q = std::clamp(q, -32768, 32767);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

}  // namespace universa
