#include "universa/model/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace universa {

namespace {

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ValidationError("checkpoint: bad number '" + s + "'");
  return v;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(std::string("checkpoint: truncated before ") + what);
  }
  return line;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream iss(line);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Checkpoint Checkpoint::from_net(const UniversaNet<float>& net,
                                const MetricRegistry& registry,
                                const NormalizationStats& stats,
                                const std::optional<BpeModel>& bpe) {
  Checkpoint ckpt;
  ckpt.config = net.config();
  ckpt.registry = registry;
  ckpt.stats = stats;
  ckpt.bpe = bpe;
  for (const Param<float>* p : net.params()) {
    ckpt.tensors.emplace_back(p->name, p->value);
  }
  return ckpt;
}

void Checkpoint::save(const std::string& path) const {
  std::ostringstream out;
  out << "UNIVERSA-CKPT 1\n";
  out << "config d_model " << config.d_model << '\n';
  out << "config heads " << config.heads << '\n';
  out << "config layers " << config.layers << '\n';
  out << "config ffn_dim " << config.ffn_dim << '\n';
  out << "config dropout " << hex_double(config.dropout) << '\n';
  out << "config use_ref_audio " << (config.use_ref_audio ? 1 : 0) << '\n';
  out << "config use_ref_text " << (config.use_ref_text ? 1 : 0) << '\n';
  out << "config feature_dim " << config.feature_dim << '\n';
  out << "config text_vocab_size " << config.text_vocab_size << '\n';
  for (size_t i = 0; i < registry.size(); ++i) {
    const MetricInfo& m = registry.at(i);
    out << "metric " << m.id << ' ' << m.domain << ' ' << hex_double(m.range_lo)
        << ' ' << hex_double(m.range_hi) << ' ' << hex_double(m.clamp_lo) << ' '
        << hex_double(m.clamp_hi) << ' ' << ref_type_name(m.ref_type) << '\n';
  }
  for (size_t i = 0; i < registry.size(); ++i) {
    out << "norm " << registry.at(i).id << ' '
        << hex_double(stats.mean[static_cast<Eigen::Index>(i)]) << ' '
        << hex_double(stats.stddev[static_cast<Eigen::Index>(i)]) << '\n';
  }
  std::string bpe_text = bpe ? bpe->serialize() : std::string();
  size_t bpe_lines = 0;
  for (char c : bpe_text) bpe_lines += (c == '\n');
  out << "bpe_lines " << bpe_lines << '\n' << bpe_text;
  out << "tensors " << tensors.size() << '\n';
  for (const auto& [name, value] : tensors) {
    out << name << ' ' << value.rows() << ' ' << value.cols() << '\n';
    for (Eigen::Index r = 0; r < value.rows(); ++r) {
      for (Eigen::Index c = 0; c < value.cols(); ++c) {
        const uint32_t u = std::bit_cast<uint32_t>(value(r, c));
        const char bytes[4] = {static_cast<char>(u & 0xff),
                               static_cast<char>((u >> 8) & 0xff),
                               static_cast<char>((u >> 16) & 0xff),
                               static_cast<char>((u >> 24) & 0xff)};
        out.write(bytes, 4);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  if (next_line(in, "header") != "UNIVERSA-CKPT 1") {
    throw ValidationError("not a universa checkpoint: " + path);
  }

  Checkpoint ckpt;
  std::vector<MetricInfo> metrics;
  std::vector<std::pair<double, double>> norms;
  std::string line;
  for (;;) {
    line = next_line(in, "metadata");
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "config" && tok.size() == 3) {
      const std::string& key = tok[1];
      const std::string& val = tok[2];
      if (key == "d_model") ckpt.config.d_model = std::stoi(val);
      else if (key == "heads") ckpt.config.heads = std::stoi(val);
      else if (key == "layers") ckpt.config.layers = std::stoi(val);
      else if (key == "ffn_dim") ckpt.config.ffn_dim = std::stoi(val);
      else if (key == "dropout") ckpt.config.dropout = parse_double(val);
      else if (key == "use_ref_audio") ckpt.config.use_ref_audio = val == "1";
      else if (key == "use_ref_text") ckpt.config.use_ref_text = val == "1";
      else if (key == "feature_dim") ckpt.config.feature_dim = std::stoi(val);
      else if (key == "text_vocab_size") ckpt.config.text_vocab_size = std::stoi(val);
      else throw ValidationError("checkpoint: unknown config key " + key);
    } else if (tok[0] == "metric" && tok.size() == 8) {
      metrics.push_back({tok[1], tok[2], parse_double(tok[3]), parse_double(tok[4]),
                         parse_double(tok[5]), parse_double(tok[6]),
                         ref_type_from_name(tok[7])});
    } else if (tok[0] == "norm" && tok.size() == 4) {
      norms.emplace_back(parse_double(tok[2]), parse_double(tok[3]));
    } else if (tok[0] == "bpe_lines" && tok.size() == 2) {
      const size_t n = std::stoul(tok[1]);
      std::string bpe_text;
      for (size_t i = 0; i < n; ++i) bpe_text += next_line(in, "bpe model") + '\n';
      if (n > 0) ckpt.bpe = BpeModel::deserialize(bpe_text);
    } else if (tok[0] == "tensors" && tok.size() == 2) {
      break;
    } else {
      throw ValidationError("checkpoint: unexpected metadata line '" + line + "'");
    }
  }

  if (metrics.empty()) throw ValidationError("checkpoint: no metric rows");
  if (norms.size() != metrics.size()) {
    throw ValidationError("checkpoint: norm rows do not match metric rows");
  }
  ckpt.registry = MetricRegistry::defaults().restrict([&] {
    std::vector<std::string> ids;
    for (const auto& m : metrics) ids.push_back(m.id);
    return ids;
  }());
  ckpt.config.metric_ids = ckpt.registry.ids();
  ckpt.stats.mean = Vec(static_cast<Eigen::Index>(norms.size()));
  ckpt.stats.stddev = Vec(static_cast<Eigen::Index>(norms.size()));
  for (size_t i = 0; i < norms.size(); ++i) {
    ckpt.stats.mean[static_cast<Eigen::Index>(i)] = norms[i].first;
    ckpt.stats.stddev[static_cast<Eigen::Index>(i)] = norms[i].second;
  }

  const size_t n_tensors = std::stoul(split_ws(line)[1]);
  for (size_t t = 0; t < n_tensors; ++t) {
    const auto hdr = split_ws(next_line(in, "tensor header"));
    if (hdr.size() != 3) throw ValidationError("checkpoint: bad tensor header");
    const auto rows = static_cast<Eigen::Index>(std::stol(hdr[1]));
    const auto cols = static_cast<Eigen::Index>(std::stol(hdr[2]));
    MatX<float> m(rows, cols);
    std::vector<char> buf(static_cast<size_t>(rows) * static_cast<size_t>(cols) * 4);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size()) {
      throw ValidationError("checkpoint: truncated tensor " + hdr[0]);
    }
    size_t off = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data()) + off;
        const uint32_t u = static_cast<uint32_t>(p[0]) |
                           static_cast<uint32_t>(p[1]) << 8 |
                           static_cast<uint32_t>(p[2]) << 16 |
                           static_cast<uint32_t>(p[3]) << 24;
        off += 4;
        m(r, c) = std::bit_cast<float>(u);
      }
    }
    ckpt.tensors.emplace_back(hdr[0], std::move(m));
  }
  return ckpt;
}

void Checkpoint::load_into(UniversaNet<float>& net) const {
  if (net.params().size() != tensors.size()) {
    throw ValidationError("checkpoint: tensor count " +
                          std::to_string(tensors.size()) + " != net parameters " +
                          std::to_string(net.params().size()));
  }
  for (const auto& [name, value] : tensors) {
    Param<float>* p = net.find_param(name);
    if (p == nullptr) throw ValidationError("checkpoint: unknown tensor " + name);
    if (p->value.rows() != value.rows() || p->value.cols() != value.cols()) {
      throw ValidationError("checkpoint: shape mismatch for " + name);
    }
    p->value = value;
  }
}

std::vector<std::string> Checkpoint::tensor_names() const {
  std::vector<std::string> names;
  names.reserve(tensors.size());
  for (const auto& [name, _] : tensors) names.push_back(name);
  return names;
}

}  // namespace universa
