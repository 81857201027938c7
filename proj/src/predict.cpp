#include "universa/train/predict.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "universa/train/placeholders.hpp"

namespace universa {

Manifest predict_manifest(const Checkpoint& ckpt, const Manifest& input,
                          int threads) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  UniversaNet<float> net(ckpt.config);
  ckpt.load_into(net);
  const BpeModel* bpe = ckpt.bpe ? &*ckpt.bpe : nullptr;
  if (ckpt.config.use_ref_text && bpe == nullptr) {
    throw ValidationError("checkpoint has a text encoder but no tokenizer");
  }

  Manifest out;
  out.split_tag = input.split_tag;
  out.records.resize(input.records.size());
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= input.records.size()) return;
      try {
        const auto& rec = input.records[i];
        PreparedExample ex =
            make_placeholders(rec, ckpt.config, ckpt.registry, bpe, nullptr);
        typename UniversaNet<float>::Input in;
        in.target_features = &ex.target_features;
        if (ckpt.config.use_ref_audio) in.ref_audio_features = &ex.ref_audio_features;
        if (ckpt.config.use_ref_text) in.ref_text_tokens = &ex.text_tokens;
        typename UniversaNet<float>::Trace trace;
        const VecX<float> raw = net.forward(in, trace, nullptr);

        UtteranceRecord pred = rec;
        pred.metrics.clear();
        for (size_t m = 0; m < ckpt.registry.size(); ++m) {
          const double value =
              ckpt.stats.denormalize(m, raw[static_cast<Eigen::Index>(m)]);
          pred.metrics[ckpt.registry.at(m).id] = ckpt.registry.clamp(m, value);
        }
        out.records[i] = std::move(pred);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw ValidationError(first_error);
  return out;
}

}  // namespace universa
