#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xmodal/core.hpp"

namespace xmodal {

struct TextPart {
  std::string text;
};
struct ImagePart {
  std::string png_bytes;  // raw bytes; base64 data URL at wire time
};
using Part = std::variant<TextPart, ImagePart>;

struct Message {
  std::string role;  // "user" / "assistant" / "system"
  std::vector<Part> parts;
};

struct ModelRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct ModelResponse {
  std::string text;
  std::string finish_reason;
  long latency_ms = 0;
  bool cached = false;
  std::string backend;
};

struct AuthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RateLimited : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Transport : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedResponse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool has_image_part(const ModelRequest& r);
bool has_text_part(const ModelRequest& r);

// Collision-resistant digest over (backend, model_id, temperature,
// max_tokens, messages). Image parts contribute their byte digest, so a
// one-pixel change changes the key.
std::string cache_key(const std::string& backend, const ModelRequest& r);

std::string base64_encode(const std::string& bytes);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual ModelResponse complete(const ModelRequest& request) = 0;
};

// --- deterministic mock -------------------------------------------------------

struct MockBehavior {
  enum class Mode { Oracle, BiasedOracle, Echo, Fixed };
  Mode mode = Mode::Oracle;
  double p_image_wrong = 0.0;  // BiasedOracle only
  std::uint64_t seed = 0;      // BiasedOracle only
  std::string fixed_text;      // Fixed only
};

// Answers from the gold labels of registered datasets. Text requests are
// matched by text-side content, image requests by image byte digest.
// Recognizes the OCR-probe instruction (answers from the image's sidecar)
// and the VDP describe step (returns the sidecar transcription).
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockBehavior behavior) : behavior_(behavior) {}

  // manifest_dir resolves the dataset's relative image paths.
  void register_dataset(const Dataset& ds, const std::string& manifest_dir);

  std::string name() const override { return "mock"; }
  ModelResponse complete(const ModelRequest& request) override;

  long call_count() const { return calls_.load(); }
  std::vector<ModelRequest> seen_requests() const;

 private:
  struct Entry {
    GoldLabel gold;
    std::string image_path;  // absolute; empty for text sides
  };
  std::optional<Entry> resolve(const ModelRequest& request) const;

  MockBehavior behavior_;
  std::atomic<long> calls_{0};
  mutable std::mutex mu_;
  std::vector<ModelRequest> requests_;
  std::vector<std::pair<std::string, Entry>> by_text_;  // content -> entry
  std::vector<std::pair<std::string, Entry>> by_image_sha_;
};

// Deterministically wrong-but-well-formed answer for a gold label.
std::string wrong_answer(const GoldLabel& gold);

// --- HTTP backend -------------------------------------------------------------

struct HttpBackendConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  int backoff_base_ms = 1000;  // doubles per attempt
  int max_attempts = 5;
};

// Chat-completions JSON wire protocol with image content parts as
// data:image/png;base64 URLs.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string name() const override { return "http"; }
  ModelResponse complete(const ModelRequest& request) override;

 private:
  HttpBackendConfig config_;
};

// Reads XMODAL_API_BASE / XMODAL_API_KEY.
HttpBackendConfig http_config_from_env();

// --- client (cache + limiter + retries live behind this) ------------------------

class ModelClient {
 public:
  // cache_dir empty disables caching; rpm_limit 0 disables rate limiting.
  ModelClient(std::shared_ptr<Backend> backend, std::string cache_dir,
              int rpm_limit = 0);

  ModelResponse complete(const ModelRequest& request);
  std::string backend_name() const { return backend_->name(); }

 private:
  void throttle();

  std::shared_ptr<Backend> backend_;
  std::string cache_dir_;
  int rpm_limit_;
  std::mutex mu_;
  std::deque<std::chrono::steady_clock::time_point> recent_;
};

}  // namespace xmodal
