#include "universa/data/features_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace universa {

namespace {

void put_f32_le(std::vector<uint8_t>& out, float v) {
  const uint32_t u = std::bit_cast<uint32_t>(v);
  out.push_back(u & 0xff);
  out.push_back((u >> 8) & 0xff);
  out.push_back((u >> 16) & 0xff);
  out.push_back((u >> 24) & 0xff);
}

float get_f32_le(const uint8_t* p) {
  const uint32_t u = static_cast<uint32_t>(p[0]) |
                     static_cast<uint32_t>(p[1]) << 8 |
                     static_cast<uint32_t>(p[2]) << 16 |
                     static_cast<uint32_t>(p[3]) << 24;
  return std::bit_cast<float>(u);
}

}  // namespace

void write_features(const std::string& path, const FeatureMatrix& feat) {
  std::ostringstream header;
  header << "UNIVERSA-FEAT 1\n"
         << feat.frames() << ' ' << feat.dims() << ' ' << feat.frame_shift_s
         << ' ' << feat.frame_length_s << '\n';
  std::vector<uint8_t> body;
  body.reserve(static_cast<size_t>(feat.frames()) * feat.dims() * 4);
  for (int r = 0; r < feat.frames(); ++r) {
    for (int c = 0; c < feat.dims(); ++c) {
      put_f32_le(body, static_cast<float>(feat.values(r, c)));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write features: " + path);
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open features: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "UNIVERSA-FEAT" || version != 1) {
    throw ValidationError("bad feature file header: " + path);
  }
  int frames = 0, dims = 0;
  double shift = 0.0, length = 0.0;
  in >> frames >> dims >> shift >> length;
  if (!in || frames < 1 || dims < 1) {
    throw ValidationError("bad feature file dimensions: " + path);
  }
  in.ignore(1, '\n');

  const size_t want = static_cast<size_t>(frames) * static_cast<size_t>(dims) * 4;
  std::vector<uint8_t> body(want);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(want));
  if (static_cast<size_t>(in.gcount()) != want) {
    throw ValidationError("truncated feature file: " + path);
  }

  FeatureMatrix feat;
  feat.frame_shift_s = shift;
  feat.frame_length_s = length;
  feat.values.resize(frames, dims);
  for (int r = 0; r < frames; ++r) {
    for (int c = 0; c < dims; ++c) {
      const float v = get_f32_le(body.data() + (static_cast<size_t>(r) * dims + c) * 4);
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite value in feature file: " + path);
      }
      feat.values(r, c) = v;
    }
  }
  return feat;
}

}  // namespace universa
