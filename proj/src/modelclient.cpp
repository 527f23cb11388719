#include "xmodal/modelclient.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "xmodal/render.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace xmodal {

bool has_image_part(const ModelRequest& r) {
  for (const auto& m : r.messages)
    for (const auto& p : m.parts)
      if (std::holds_alternative<ImagePart>(p)) return true;
  return false;
}

bool has_text_part(const ModelRequest& r) {
  for (const auto& m : r.messages)
    for (const auto& p : m.parts)
      if (std::holds_alternative<TextPart>(p)) return true;
  return false;
}

std::string base64_encode(const std::string& bytes) {
  static const char* tbl =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out.push_back(tbl[v & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

namespace {

ordered_json canonical_request(const std::string& backend,
                               const ModelRequest& r) {
  ordered_json j;
  j["backend"] = backend;
  j["model_id"] = r.model_id;
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  ordered_json msgs = ordered_json::array();
  for (const auto& m : r.messages) {
    ordered_json parts = ordered_json::array();
    for (const auto& p : m.parts) {
      if (const auto* t = std::get_if<TextPart>(&p)) {
        parts.push_back({{"type", "text"}, {"text", t->text}});
      } else {
        const auto& img = std::get<ImagePart>(p);
        parts.push_back({{"type", "image"}, {"sha256", sha256_hex(img.png_bytes)}});
      }
    }
    msgs.push_back({{"role", m.role}, {"parts", parts}});
  }
  j["messages"] = msgs;
  return j;
}

}  // namespace

std::string cache_key(const std::string& backend, const ModelRequest& r) {
  return sha256_hex(canonical_request(backend, r).dump());
}

// --- mock ------------------------------------------------------------------------

void MockBackend::register_dataset(const Dataset& ds,
                                   const std::string& manifest_dir) {
  std::lock_guard lock(mu_);
  for (const auto& pair : ds.pairs) {
    const std::string img_abs =
        (fs::path(manifest_dir) / *pair.image_side.element.image_path)
            .string();
    by_text_.emplace_back(*pair.text_side.element.text_content,
                          Entry{pair.gold, img_abs});
    by_image_sha_.emplace_back(pair.image_side.element.sha256,
                               Entry{pair.gold, img_abs});
  }
}

std::vector<ModelRequest> MockBackend::seen_requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::optional<MockBackend::Entry> MockBackend::resolve(
    const ModelRequest& request) const {
  std::lock_guard lock(mu_);
  for (const auto& m : request.messages)
    for (const auto& p : m.parts)
      if (const auto* img = std::get_if<ImagePart>(&p)) {
        const std::string sha = sha256_hex(img->png_bytes);
        for (const auto& [key, entry] : by_image_sha_)
          if (key == sha) return entry;
      }
  for (const auto& m : request.messages)
    for (const auto& p : m.parts)
      if (const auto* t = std::get_if<TextPart>(&p)) {
        for (const auto& [content, entry] : by_text_)
          if (t->text.find(content) != std::string::npos) return entry;
      }
  return std::nullopt;
}

std::string wrong_answer(const GoldLabel& gold) {
  switch (gold.kind) {
    case AnswerKind::Numeric: {
      double v = std::strtod(gold.value.c_str(), nullptr);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", v + 1.0);
      return buf;
    }
    case AnswerKind::MultipleChoice:
      return gold.value == "A" ? "B" : "A";
    case AnswerKind::FreeText:
      return gold.value == "purple" ? "orange" : "purple";
  }
  return "wrong";
}

ModelResponse MockBackend::complete(const ModelRequest& request) {
  calls_.fetch_add(1);
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  ModelResponse resp;
  resp.backend = name();
  resp.finish_reason = "stop";

  std::string joined_text;
  for (const auto& m : request.messages)
    for (const auto& p : m.parts)
      if (const auto* t = std::get_if<TextPart>(&p))
        joined_text += t->text + "\n";

  if (behavior_.mode == MockBehavior::Mode::Fixed) {
    resp.text = behavior_.fixed_text;
    return resp;
  }
  if (behavior_.mode == MockBehavior::Mode::Echo) {
    resp.text = joined_text;
    return resp;
  }

  const bool is_ocr_probe =
      joined_text.find("extract the exact content in the image") !=
      std::string::npos;
  const bool is_vdp_describe =
      joined_text.find("Do not answer the task") != std::string::npos;
  if (is_ocr_probe || is_vdp_describe) {
    const auto entry = resolve(request);
    if (!entry || entry->image_path.empty())
      throw MalformedResponse("mock: no registered image for request");
    resp.text = mock_ocr(entry->image_path);  // throws MockOcrUnavailable
    return resp;
  }

  const auto entry = resolve(request);
  if (!entry) throw MalformedResponse("mock: unrecognized request");

  if (behavior_.mode == MockBehavior::Mode::BiasedOracle &&
      has_image_part(request) && !has_text_part(request)) {
    // deterministic coin keyed on (seed, request digest)
    const std::string h = sha256_hex(std::to_string(behavior_.seed) + ":" +
                                     cache_key(name(), request));
    const std::uint64_t u = std::stoull(h.substr(0, 13), nullptr, 16);
    const double coin = static_cast<double>(u) / static_cast<double>(1ULL << 52);
    if (coin < behavior_.p_image_wrong) {
      resp.text = wrong_answer(entry->gold);
      return resp;
    }
  }
  resp.text = entry->gold.value;
  return resp;
}

// --- HTTP -------------------------------------------------------------------------

HttpBackendConfig http_config_from_env() {
  HttpBackendConfig c;
  if (const char* base = std::getenv("XMODAL_API_BASE")) c.base_url = base;
  if (const char* key = std::getenv("XMODAL_API_KEY")) c.api_key = key;
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  if (config_.base_url.empty())
    throw AuthError("http backend: XMODAL_API_BASE not set");
}

namespace {

ordered_json wire_body(const ModelRequest& r) {
  ordered_json body;
  body["model"] = r.model_id;
  body["temperature"] = r.temperature;
  body["max_tokens"] = r.max_tokens;
  ordered_json msgs = ordered_json::array();
  for (const auto& m : r.messages) {
    ordered_json content = ordered_json::array();
    for (const auto& p : m.parts) {
      if (const auto* t = std::get_if<TextPart>(&p)) {
        content.push_back({{"type", "text"}, {"text", t->text}});
      } else {
        const auto& img = std::get<ImagePart>(p);
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url",
                "data:image/png;base64," + base64_encode(img.png_bytes)}}}});
      }
    }
    msgs.push_back({{"role", m.role}, {"content", content}});
  }
  body["messages"] = msgs;
  return body;
}

}  // namespace

ModelResponse HttpBackend::complete(const ModelRequest& request) {
  const std::string body = wire_body(request).dump();

  std::string last_error;
  bool rate_limited = false;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long>(config_.backoff_base_ms) << (attempt - 1)));
    }
    const auto start = std::chrono::steady_clock::now();
    httplib::Client cli(config_.base_url);
    cli.set_connection_timeout(30);
    cli.set_read_timeout(300);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = cli.Post("/chat/completions", headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      rate_limited = false;
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("http backend: status " + std::to_string(res->status));
    if (res->status == 429) {
      rate_limited = true;
      last_error = "429";
      continue;
    }
    if (res->status >= 500) {
      rate_limited = false;
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Transport("http backend: status " + std::to_string(res->status));
    try {
      const auto j = ordered_json::parse(res->body);
      ModelResponse out;
      out.backend = name();
      out.text = j.at("choices").at(0).at("message").at("content")
                     .get<std::string>();
      out.finish_reason =
          j.at("choices").at(0).value("finish_reason", "stop");
      out.latency_ms = static_cast<long>(
          std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::steady_clock::now() - start)
              .count());
      return out;
    } catch (const ordered_json::exception& e) {
      throw MalformedResponse(std::string("http backend: ") + e.what());
    }
  }
  if (rate_limited)
    throw RateLimited("http backend: still 429 after " +
                      std::to_string(config_.max_attempts) + " attempts");
  throw Transport("http backend: " + last_error);
}

// --- client ------------------------------------------------------------------------

ModelClient::ModelClient(std::shared_ptr<Backend> backend,
                         std::string cache_dir, int rpm_limit)
    : backend_(std::move(backend)),
      cache_dir_(std::move(cache_dir)),
      rpm_limit_(rpm_limit) {
  if (cache_dir_.empty()) {
    if (const char* env = std::getenv("XMODAL_CACHE_DIR")) cache_dir_ = env;
  }
  if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
}

void ModelClient::throttle() {
  if (rpm_limit_ <= 0) return;
  using clock = std::chrono::steady_clock;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = clock::now();
    while (!recent_.empty() && now - recent_.front() > std::chrono::minutes(1))
      recent_.pop_front();
    if (static_cast<int>(recent_.size()) < rpm_limit_) {
      recent_.push_back(now);
      return;
    }
    const auto wait = recent_.front() + std::chrono::minutes(1) - now;
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

ModelResponse ModelClient::complete(const ModelRequest& request) {
  const std::string key = cache_key(backend_->name(), request);
  const std::string cache_path =
      cache_dir_.empty() ? "" : (fs::path(cache_dir_) / (key + ".json")).string();

  if (!cache_path.empty() && fs::exists(cache_path)) {
    const auto j = ordered_json::parse(read_file_bytes(cache_path));
    ModelResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.finish_reason = j.at("finish_reason").get<std::string>();
    resp.backend = j.at("backend").get<std::string>();
    resp.cached = true;
    return resp;
  }

  throttle();
  ModelResponse resp = backend_->complete(request);

  if (!cache_path.empty()) {
    ordered_json j;
    j["text"] = resp.text;
    j["finish_reason"] = resp.finish_reason;
    j["backend"] = resp.backend;
    write_file_atomic(cache_path, j.dump() + "\n");
  }
  return resp;
}

}  // namespace xmodal
